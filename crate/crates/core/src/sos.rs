//! Order-t sum-of-squares relaxation of `sup { x^T z | x in P, z in Q° }`:
//!
//! `mu(t) = inf { mu | mu - x^T z = σ_0 + Σ σ_i g_i }`
//!
//! where the `g_i` are the rows of `a - A x` followed by the rows of
//! `1 - B^T z`, `deg σ_0 <= 2t` and `deg σ_i <= 2t - 2`. Each `σ` is a Gram
//! form over a graded monomial basis in the `2d` variables `(x, z)`; the
//! identity is matched coefficient-by-coefficient over all monomials of
//! degree `<= 2t`, giving one equality row per monomial.

use std::collections::HashMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::certify::{verify_certificate, ContainmentVerdict, VerdictStatus, VerificationReport};
use crate::error::{Error, Result};
use crate::oracle::origin_interior;
use crate::poly::{basis, GramForm, Monomial, MonomialBasis, Polynomial};
use crate::lp::{solve_lp, LpProblem};
use crate::polytope::{affine_dimension, polar, HPolytope, NormalizedPair, VPolytope};
use crate::rational::{to_f64, Rational};
use crate::sdp::{solve_sdp, BlockEntry, Constraint, SdpProblem, SolveStatus, SolverOptions};

pub const DEFAULT_T_MAX: usize = 4;
/// Slack on the `mu <= 1` acceptance test.
pub const TOL_ACCEPT: f64 = 1e-7;
pub const MAX_SIGMA0_BASIS: usize = 300;

#[derive(Debug, Clone)]
pub struct QuadraticModuleSpec {
    pub dim: usize,
    pub generators: Vec<Polynomial<Rational>>,
    pub order_t: usize,
    pub sigma0_basis: MonomialBasis,
    pub sigma_i_basis: MonomialBasis,
}

/// `a_i - A_i x` for every row of P, then `1 - b_j^T z` for every point of
/// Q, as polynomials in `(x, z)`.
pub fn generators(pair: &NormalizedPair) -> Vec<Polynomial<Rational>> {
    let d = pair.p.dim();
    let nvars = 2 * d;
    let mut gens = Vec::with_capacity(pair.p.num_constraints() + pair.q.num_points());
    for (row, rhs) in pair.p.matrix().iter().zip(pair.p.rhs()) {
        let mut g = Polynomial::constant(nvars, rhs.clone());
        for (i, c) in row.iter().enumerate() {
            g.add_term(Monomial::var(nvars, i), -c.clone());
        }
        gens.push(g);
    }
    for b in pair.q.points() {
        let mut g = Polynomial::constant(nvars, Rational::from_integer(1.into()));
        for (i, c) in b.iter().enumerate() {
            g.add_term(Monomial::var(nvars, d + i), -c.clone());
        }
        gens.push(g);
    }
    gens
}

/// `x^T z` in `2d` variables.
pub fn bilinear_objective(d: usize) -> Polynomial<Rational> {
    let nvars = 2 * d;
    Polynomial::from_terms(
        nvars,
        (0..d).map(|i| {
            let mut e = vec![0; nvars];
            e[i] = 1;
            e[d + i] = 1;
            (Monomial(e), Rational::from_integer(1.into()))
        }),
    )
}

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn build_qm_spec(pair: &NormalizedPair, t: usize) -> Result<QuadraticModuleSpec> {
    if t < 2 {
        return Err(Error::OrderBelowInitialStep(t));
    }
    let d = pair.p.dim();
    if !origin_interior(&pair.q) {
        return Err(Error::OriginNotInterior { affine_dim: affine_dimension(&pair.q), dim: d });
    }
    let nvars = 2 * d;
    let size = binomial(nvars + t, t);
    if size > MAX_SIGMA0_BASIS {
        return Err(Error::TooLarge {
            size,
            limit: MAX_SIGMA0_BASIS,
            schur_rows: binomial(nvars + 2 * t, 2 * t),
        });
    }
    Ok(QuadraticModuleSpec {
        dim: d,
        generators: generators(pair),
        order_t: t,
        sigma0_basis: basis(nvars, t as u32),
        sigma_i_basis: basis(nvars, t as u32 - 1),
    })
}

/// Block 0 is σ_0, block `i` multiplies generator `i - 1`; free variable 0
/// is `mu` and the objective minimizes it.
pub fn assemble_sdp(spec: &QuadraticModuleSpec) -> SdpProblem {
    let nvars = 2 * spec.dim;
    let top = (2 * spec.sigma0_basis.degree_bound).max(2 * spec.sigma_i_basis.degree_bound + 1);
    let rows = basis(nvars, top);
    let index: HashMap<&Monomial, usize> = rows.monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut constraints = vec![Constraint::default(); rows.len()];

    let b0 = &spec.sigma0_basis.monomials;
    for p in 0..b0.len() {
        for q in p..b0.len() {
            let r = index[&b0[p].mul(&b0[q])];
            constraints[r].entries.push(BlockEntry { block: 0, row: p, col: q, value: 1.0 });
        }
    }
    let bi = &spec.sigma_i_basis.monomials;
    for (g_idx, g) in spec.generators.iter().enumerate() {
        let terms: Vec<(&Monomial, f64)> = g.terms().map(|(m, c)| (m, to_f64(c))).collect();
        for p in 0..bi.len() {
            for q in p..bi.len() {
                let pq = bi[p].mul(&bi[q]);
                for &(m, c) in &terms {
                    let r = index[&pq.mul(m)];
                    constraints[r].entries.push(BlockEntry { block: g_idx + 1, row: p, col: q, value: c });
                }
            }
        }
    }
    // sigma-part - mu = -x^T z
    constraints[0].free.push((0, -1.0));
    let objective = bilinear_objective(spec.dim);
    let rhs = rows.monomials.iter().map(|m| -to_f64(&objective.coeff(m))).collect();

    let mut block_dims = vec![b0.len()];
    block_dims.extend(std::iter::repeat_n(bi.len(), spec.generators.len()));
    SdpProblem { block_dims, num_free: 1, constraints, rhs, free_cost: vec![1.0], block_cost: Vec::new() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub dual_objective: f64,
}

#[derive(Debug, Clone)]
pub struct SosCertificate {
    pub order_t: usize,
    pub mu: f64,
    pub gram_blocks: Vec<GramForm<f64>>,
    pub generators: Vec<Polynomial<Rational>>,
    pub fingerprint: String,
    pub solver: Option<SolverReport>,
    /// Filled in by the certifier only.
    pub verification: Option<VerificationReport>,
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    basis: Vec<Vec<u32>>,
    gram: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    t: usize,
    mu: f64,
    generators: Vec<String>,
    blocks: Vec<BlockJson>,
    fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<SolverReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    verification: Option<VerificationReport>,
}

impl SosCertificate {
    pub fn to_json(&self) -> Result<String> {
        let doc = CertificateJson {
            t: self.order_t,
            mu: self.mu,
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
            blocks: self
                .gram_blocks
                .iter()
                .map(|g| BlockJson {
                    basis: g.basis.monomials.iter().map(|m| m.0.clone()).collect(),
                    gram: g.matrix.clone(),
                })
                .collect(),
            fingerprint: self.fingerprint.clone(),
            solver: self.solver.clone(),
            verification: self.verification.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses a certificate for `pair`. Generator strings are only compared
    /// against the generators rebuilt from `pair`, never parsed.
    pub fn from_json(text: &str, pair: &NormalizedPair) -> Result<Self> {
        let doc: CertificateJson = serde_json::from_str(text)?;
        let actual = pair.fingerprint();
        if doc.fingerprint != actual {
            return Err(Error::FingerprintMismatch { expected: doc.fingerprint, actual });
        }
        let gens = generators(pair);
        let rendered: Vec<String> = gens.iter().map(|g| g.to_string()).collect();
        if rendered != doc.generators {
            return Err(Error::Certificate("generator list does not match the polytope pair".into()));
        }
        let nvars = 2 * pair.p.dim();
        let mut gram_blocks = Vec::with_capacity(doc.blocks.len());
        for b in doc.blocks {
            if b.basis.iter().any(|m| m.len() != nvars) {
                return Err(Error::Certificate(format!("basis monomials must have {nvars} exponents")));
            }
            let monomials: Vec<Monomial> = b.basis.into_iter().map(Monomial).collect();
            let degree_bound = monomials.iter().map(Monomial::degree).max().unwrap_or(0);
            gram_blocks.push(GramForm {
                basis: MonomialBasis { nvars, degree_bound, monomials },
                matrix: b.gram,
            });
        }
        Ok(Self {
            order_t: doc.t,
            mu: doc.mu,
            gram_blocks,
            generators: gens,
            fingerprint: doc.fingerprint,
            solver: doc.solver,
            verification: doc.verification,
        })
    }
}

/// Power-of-two substitution `x'_i = 2^ex_i x_i`, `z'_i = 2^ez_i z_i` with
/// `ex_i + ez_i = -2r` for every i, so `x'^T z' = 2^-2r x^T z`. The
/// per-coordinate split gives both factors of `x_i z_i` the same range over
/// `P x Q°` and `r` brings that range near 1.
#[derive(Debug, Clone)]
struct Balancing {
    ex: Vec<i32>,
    ez: Vec<i32>,
    r: i32,
}

impl Balancing {
    fn new(pair: &NormalizedPair) -> Self {
        let d = pair.p.dim();
        let polar_q = polar(&pair.q);
        let extent = |h: &HPolytope, i: usize| -> f64 {
            let mut best = 0.0f64;
            for sign in [1, -1] {
                let mut c = vec![Rational::zero(); d];
                c[i] = Rational::from_integer(sign.into());
                if let Ok(prob) = LpProblem::maximize(c, h) {
                    if let Some(v) = solve_lp(&prob).value() {
                        best = best.max(to_f64(v).abs());
                    }
                }
            }
            best
        };
        let ranges: Vec<(f64, f64)> = (0..d).map(|i| (extent(&pair.p, i), extent(&polar_q, i))).collect();
        let usable = |&(rx, rz): &(f64, f64)| rx > 0.0 && rz > 0.0 && rx.is_finite() && rz.is_finite();
        let logs: Vec<f64> = ranges.iter().filter(|r| usable(r)).map(|(rx, rz)| 0.5 * (rx * rz).log2()).collect();
        let r = if logs.is_empty() { 0 } else { (logs.iter().sum::<f64>() / logs.len() as f64).round() as i32 };
        let k: Vec<i32> = ranges
            .iter()
            .map(|rr| if usable(rr) { (0.5 * (rr.1 / rr.0).log2()).round() as i32 } else { 0 })
            .collect();
        Self { ex: k.iter().map(|k| k - r).collect(), ez: k.iter().map(|k| -k - r).collect(), r }
    }

    fn apply(&self, pair: &NormalizedPair) -> Result<NormalizedPair> {
        let sx: Vec<Rational> = self.ex.iter().map(|&k| pow2(k)).collect();
        let sz: Vec<Rational> = self.ez.iter().map(|&k| pow2(k)).collect();
        let rows = pair.p.matrix().iter().map(|r| r.iter().zip(&sx).map(|(a, s)| a / s).collect()).collect();
        let p = HPolytope::new(rows, pair.p.rhs().to_vec())?;
        let q = VPolytope::from_points(
            pair.q.points().iter().map(|b| b.iter().zip(&sz).map(|(v, s)| v / s).collect()).collect(),
        )?;
        Ok(NormalizedPair { p, q, shift: pair.shift.clone() })
    }

    /// `m(x', z') = c_m m(x, z)`.
    fn factors(&self, basis: &MonomialBasis) -> Vec<f64> {
        let d = self.ex.len();
        basis
            .monomials
            .iter()
            .map(|m| (0..d).map(|i| (self.ex[i] * m.0[i] as i32 + self.ez[i] * m.0[d + i] as i32) as f64).sum::<f64>().exp2())
            .collect()
    }

    /// `x^T z = 2^2r x'^T z'`.
    fn objective_factor(&self) -> f64 {
        (2.0 * self.r as f64).exp2()
    }
}

fn pow2(k: i32) -> Rational {
    let two = Rational::from_integer(2.into());
    if k >= 0 {
        num_traits::pow(two, k as usize)
    } else {
        num_traits::pow(two, (-k) as usize).recip()
    }
}

/// Embeds `g` into the larger basis `full`, zero outside `g.basis`.
fn pad_gram(g: &GramForm<f64>, full: &MonomialBasis) -> GramForm<f64> {
    let index: HashMap<&Monomial, usize> = full.monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let n = full.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for (i, mi) in g.basis.monomials.iter().enumerate() {
        for (j, mj) in g.basis.monomials.iter().enumerate() {
            matrix[index[mi]][index[mj]] = g.matrix[i][j];
        }
    }
    GramForm { basis: full.clone(), matrix }
}

/// Power of two closest to `1 / max |coeff|`.
fn generator_weight(g: &Polynomial<Rational>) -> f64 {
    let m = g.max_abs_coeff(|c| to_f64(c).abs());
    if m > 0.0 {
        (-m.log2().round()).exp2()
    } else {
        1.0
    }
}

/// Solves the order-t program. Non-convergence is not an error: the solver
/// status travels with the certificate and the certifier decides whether
/// the returned Gram blocks prove anything.
///
/// The program is solved in balanced coordinates with every generator
/// scaled by a power of two; the Gram blocks are mapped back exactly.
pub fn solve_order(pair: &NormalizedPair, t: usize, opts: &SolverOptions) -> Result<SosCertificate> {
    let original = build_qm_spec(pair, t)?;
    let balancing = Balancing::new(pair);
    let mut spec = build_qm_spec(&balancing.apply(pair)?, t)?;
    // The degree-2t part of σ_0 cannot cancel against anything, so its
    // degree-t Gram rows vanish in every certificate; dropping them gives
    // the solver a strictly feasible program. They are restored as zeros.
    let full_sigma0 = spec.sigma0_basis.clone();
    spec.sigma0_basis = basis(2 * spec.dim, t as u32 - 1);
    let weights: Vec<f64> = spec.generators.iter().map(generator_weight).collect();
    for (g, &w) in spec.generators.iter_mut().zip(&weights) {
        *g = g.scale(&Rational::from_float(w).expect("finite power of two"));
    }
    let sol = solve_sdp(&assemble_sdp(&spec), opts).map_err(Error::Solver)?;
    let lift = balancing.objective_factor();
    let to_gram = |basis: &MonomialBasis, m: &nalgebra::DMatrix<f64>, w: f64| {
        let c = balancing.factors(basis);
        let n = basis.len();
        GramForm {
            basis: basis.clone(),
            matrix: (0..n)
                .map(|i| (0..n).map(|j| 0.5 * (m[(i, j)] + m[(j, i)]) * c[i] * c[j] * w * lift).collect())
                .collect(),
        }
    };
    let mut gram_blocks = vec![pad_gram(&to_gram(&spec.sigma0_basis, &sol.primal_blocks[0], 1.0), &full_sigma0)];
    gram_blocks.extend(
        sol.primal_blocks[1..].iter().zip(&weights).map(|(m, &w)| to_gram(&spec.sigma_i_basis, m, w)),
    );
    Ok(SosCertificate {
        order_t: t,
        mu: sol.free_values[0] * lift,
        gram_blocks,
        generators: original.generators,
        fingerprint: pair.fingerprint(),
        solver: Some(SolverReport {
            status: sol.status,
            iterations: sol.iterations,
            gap: sol.gap,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            dual_objective: sol.dual_objective,
        }),
        verification: None,
    })
}

/// Certificate and verification of the last order solved.
#[derive(Debug, Clone)]
pub struct SosEvidence {
    pub mu_values: Vec<f64>,
    pub certificate: SosCertificate,
    pub report: VerificationReport,
}

impl SosEvidence {
    pub fn certifies(&self) -> bool {
        self.certificate.mu <= 1.0 + TOL_ACCEPT && self.report.pass
    }
}

#[derive(Debug, Clone)]
pub struct SosDecision {
    pub verdict: ContainmentVerdict,
    pub evidence: Option<SosEvidence>,
}

/// Runs orders `2..=t_max`, stopping at the first verified `mu <= 1 + tol`.
pub fn decide_sos(pair: &NormalizedPair, t_max: usize, opts: &SolverOptions) -> Result<SosDecision> {
    if t_max < 2 {
        return Err(Error::OrderBelowInitialStep(t_max));
    }
    let mut mu_values = Vec::new();
    let mut notes = Vec::new();
    let mut last = None;
    for t in 2..=t_max {
        let mut cert = match solve_order(pair, t, opts) {
            Ok(c) => c,
            Err(Error::TooLarge { size, limit, .. }) if t > 2 => {
                notes.push(format!("order {t} skipped: sigma_0 basis {size} exceeds the limit {limit}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let report = verify_certificate(&cert, pair)?;
        cert.verification = Some(report.clone());
        mu_values.push(cert.mu);
        if let Some(s) = &cert.solver {
            if s.status != SolveStatus::Optimal {
                notes.push(format!("order {t}: solver stopped with {:?} after {} iterations (gap {:.1e})", s.status, s.iterations, s.gap));
            }
        }
        let evidence = SosEvidence { mu_values: mu_values.clone(), certificate: cert, report };
        if evidence.certifies() {
            let mut v = ContainmentVerdict::new(VerdictStatus::CertifiedContained);
            v.order_used = Some(t);
            v.mu_values = mu_values;
            v.residual = Some(evidence.report.identity_residual);
            v.notes = notes;
            return Ok(SosDecision { verdict: v, evidence: Some(evidence) });
        }
        last = Some(evidence);
    }
    let mut v = ContainmentVerdict::new(VerdictStatus::Undecided);
    v.order_used = last.as_ref().map(|e| e.certificate.order_t);
    v.mu_values = mu_values;
    v.residual = last.as_ref().map(|e| e.report.identity_residual);
    v.notes = notes;
    Ok(SosDecision { verdict: v, evidence: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{centroid_normalize, HPolytope, VPolytope};

    fn pair(p: HPolytope, q: VPolytope) -> NormalizedPair {
        centroid_normalize(&p, &q).unwrap()
    }

    #[test]
    fn qm_spec_counts_d1() {
        let spec = build_qm_spec(&pair(HPolytope::cube(1), VPolytope::cross(1, 1)), 2).unwrap();
        assert_eq!(spec.generators.len(), 4);
        let rendered: Vec<String> = spec.generators.iter().map(|g| g.to_string()).collect();
        assert_eq!(rendered, ["1 + -1·x1", "1 + 1·x1", "1 + -1·z1", "1 + 1·z1"]);
        assert_eq!(spec.sigma0_basis.len(), 6);
        assert_eq!(spec.sigma_i_basis.len(), 3);
    }

    #[test]
    fn qm_spec_counts_d2() {
        let spec = build_qm_spec(&pair(HPolytope::cube(2), VPolytope::cross(2, 2)), 2).unwrap();
        assert_eq!(spec.generators.len(), 8);
        assert_eq!(spec.sigma0_basis.len(), 15);
    }

    #[test]
    fn order_one_rejected() {
        let err = build_qm_spec(&pair(HPolytope::cube(1), VPolytope::cross(1, 1)), 1).unwrap_err();
        assert!(matches!(err, Error::OrderBelowInitialStep(1)));
        assert!(err.to_string().contains("initial step"));
    }

    #[test]
    fn degenerate_q_rejected() {
        let flat = VPolytope::from_points(vec![
            vec![Rational::from_integer((-1).into()), Rational::from_integer(0.into())],
            vec![Rational::from_integer(1.into()), Rational::from_integer(0.into())],
        ])
        .unwrap();
        assert!(matches!(
            build_qm_spec(&pair(HPolytope::cube(2), flat), 2),
            Err(Error::OriginNotInterior { affine_dim: 1, dim: 2 })
        ));
    }

    #[test]
    fn memory_guard() {
        // 2d = 10 variables, t = 3: C(13, 3) = 286 fits; t = 4: C(14, 4) = 1001 does not
        let p = pair(HPolytope::cube(5), VPolytope::cross(5, 5));
        assert!(build_qm_spec(&p, 3).is_ok());
        assert!(matches!(build_qm_spec(&p, 4), Err(Error::TooLarge { size: 1001, .. })));
    }

    #[test]
    fn sdp_shapes() {
        let sdp = assemble_sdp(&build_qm_spec(&pair(HPolytope::cube(1), VPolytope::cross(1, 1)), 2).unwrap());
        assert_eq!(sdp.block_dims, vec![6, 3, 3, 3, 3]);
        assert_eq!(sdp.num_free, 1);
        assert_eq!(sdp.num_constraints(), 15);
        assert_eq!(sdp.constraints[0].free, vec![(0, -1.0)]);
        assert!(sdp.constraints[1..].iter().all(|c| c.free.is_empty()));
        // x1 z1 sits at index 4 in [1, x, z, x^2, xz, z^2, ...]
        assert_eq!(sdp.rhs[4], -1.0);
        assert_eq!(sdp.rhs.iter().filter(|&&v| v != 0.0).count(), 1);

        let sdp2 = assemble_sdp(&build_qm_spec(&pair(HPolytope::cube(2), VPolytope::cross(2, 2)), 2).unwrap());
        assert_eq!(sdp2.block_dims, [vec![15], vec![5; 8]].concat());
        assert_eq!(sdp2.num_constraints(), 70);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(14, 4), 1001);
        assert_eq!(binomial(12, 6), 924);
    }
}
