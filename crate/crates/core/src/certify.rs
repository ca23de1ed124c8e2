//! Independent checking of SOS certificates and assembly of verdicts from
//! SOS and oracle evidence.
//!
//! Verification rebuilds the generators from the polytope pair and expands
//! `σ_0 + Σ σ_i g_i` in floating point from the Gram blocks alone; nothing
//! is shared with the assembly in [`crate::sos`].

use nalgebra::DMatrix;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::oracle::BilinearOptimum;
use crate::poly::{basis, gram_to_poly, GramForm, Monomial, Polynomial};
use crate::polytope::NormalizedPair;
use crate::rational::{format_rational, to_f64, Rational};
use crate::sdp::min_eigenvalue;
use crate::sos::{generators, SosCertificate, SosEvidence};

pub const EIG_TOL: f64 = 1e-7;

pub fn residual_tol(mu: f64) -> f64 {
    1e-6 * (1.0 + mu.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    CertifiedContained,
    CertifiedNotContained,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentVerdict {
    pub status: VerdictStatus,
    pub order_used: Option<usize>,
    pub mu_values: Vec<f64>,
    /// A point of P outside Q.
    pub witness: Option<Vec<Rational>>,
    /// Facet normal `z̄ ∈ V(Q°)` with `witness^T z̄ > 1`.
    pub witness_normal: Option<Vec<Rational>>,
    pub residual: Option<f64>,
    pub vacuous: bool,
    pub oracle_mu_star: Option<Rational>,
    /// Only ever set from exact oracle evidence.
    pub strong_containment: Option<bool>,
    pub notes: Vec<String>,
}

impl ContainmentVerdict {
    pub fn new(status: VerdictStatus) -> Self {
        Self {
            status,
            order_used: None,
            mu_values: Vec::new(),
            witness: None,
            witness_normal: None,
            residual: None,
            vacuous: false,
            oracle_mu_star: None,
            strong_containment: None,
            notes: Vec::new(),
        }
    }

    pub fn vacuous() -> Self {
        let mut v = Self::new(VerdictStatus::CertifiedContained);
        v.vacuous = true;
        v.notes.push("P is empty; containment holds vacuously".into());
        v
    }

    /// Exact verdict from `mu*` (origin interior to Q).
    pub fn from_oracle(opt: &BilinearOptimum) -> Self {
        let one = Rational::one();
        let mut v = if opt.mu_star > one {
            let mut v = Self::new(VerdictStatus::CertifiedNotContained);
            v.witness = Some(opt.arg_x.clone());
            v.witness_normal = Some(opt.arg_z.clone());
            v
        } else {
            let mut v = Self::new(VerdictStatus::CertifiedContained);
            v.strong_containment = Some(opt.mu_star < one);
            if opt.mu_star == one {
                v.notes.push("boundary contact: P touches the boundary of Q (mu* = 1)".into());
            }
            v
        };
        v.oracle_mu_star = Some(opt.mu_star.clone());
        v
    }

    pub fn boundary_contact(&self) -> bool {
        self.oracle_mu_star.as_ref().is_some_and(|m| m.is_one())
    }

    pub fn to_json(&self) -> Value {
        let vec = |v: &Option<Vec<Rational>>| {
            v.as_ref().map(|xs| xs.iter().map(format_rational).collect::<Vec<_>>())
        };
        json!({
            "status": self.status,
            "order_used": self.order_used,
            "mu_values": self.mu_values,
            "witness": vec(&self.witness),
            "witness_normal": vec(&self.witness_normal),
            "residual": self.residual,
            "vacuous": self.vacuous,
            "oracle_mu_star": self.oracle_mu_star.as_ref().map(format_rational),
            "strong_containment": self.strong_containment,
            "boundary_contact": self.boundary_contact(),
            "notes": self.notes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Max abs coefficient of `(mu - x^T z) - (σ_0 + Σ σ_i g_i)`.
    pub identity_residual: f64,
    pub min_eigenvalues: Vec<f64>,
    pub pass: bool,
}

fn generators_f64(pair: &NormalizedPair) -> Vec<Polynomial<f64>> {
    let d = pair.p.dim();
    let nvars = 2 * d;
    let affine = |c0: f64, coeffs: Vec<f64>, offset: usize| {
        let mut g = Polynomial::constant(nvars, c0);
        for (i, c) in coeffs.into_iter().enumerate() {
            g.add_term(Monomial::var(nvars, offset + i), -c);
        }
        g
    };
    let mut gens: Vec<Polynomial<f64>> = pair
        .p
        .matrix()
        .iter()
        .zip(pair.p.rhs())
        .map(|(row, a)| affine(to_f64(a), row.iter().map(to_f64).collect(), 0))
        .collect();
    gens.extend(pair.q.points().iter().map(|b| affine(1.0, b.iter().map(to_f64).collect(), d)));
    gens
}

pub fn verify_certificate(cert: &SosCertificate, pair: &NormalizedPair) -> Result<VerificationReport> {
    let d = pair.p.dim();
    let nvars = 2 * d;
    let gens = generators_f64(pair);
    if cert.gram_blocks.len() != gens.len() + 1 {
        return Err(Error::Certificate(format!(
            "{} Gram blocks for {} generators (expected {})",
            cert.gram_blocks.len(),
            gens.len(),
            gens.len() + 1
        )));
    }
    let t = cert.order_t as u32;
    for (i, g) in cert.gram_blocks.iter().enumerate() {
        if g.basis.nvars != nvars || g.basis.monomials.iter().any(|m| m.nvars() != nvars) {
            return Err(Error::Certificate(format!("block {i}: basis is not over {nvars} variables")));
        }
        if !g.is_well_formed() {
            return Err(Error::Certificate(format!("block {i}: Gram matrix is not square symmetric of basis size")));
        }
        let cap = if i == 0 { t } else { t.saturating_sub(1) };
        if g.basis.monomials.iter().any(|m| m.degree() > cap) {
            return Err(Error::Certificate(format!("block {i}: basis exceeds degree {cap} for order {t}")));
        }
    }

    let mut rhs = gram_to_poly(&cert.gram_blocks[0]);
    for (g, gram) in gens.iter().zip(&cert.gram_blocks[1..]) {
        rhs = rhs.add(&gram_to_poly(gram).mul(g));
    }
    let mut lhs = Polynomial::constant(nvars, cert.mu);
    for i in 0..d {
        let mut e = vec![0; nvars];
        e[i] = 1;
        e[d + i] = 1;
        lhs.add_term(Monomial(e), -1.0);
    }
    let identity_residual = lhs.sub(&rhs).max_abs_coeff(|c| c.abs());
    let min_eigenvalues: Vec<f64> = cert
        .gram_blocks
        .iter()
        .map(|g| {
            let n = g.basis.len();
            min_eigenvalue(&DMatrix::from_fn(n, n, |i, j| g.matrix[i][j]))
        })
        .collect();
    let pass = identity_residual <= residual_tol(cert.mu) && min_eigenvalues.iter().all(|&e| e >= -EIG_TOL);
    Ok(VerificationReport { identity_residual, min_eigenvalues, pass })
}

/// Merges the two evidence paths. The exact oracle wins any disagreement;
/// a disagreement is recorded as a solver-accuracy incident.
pub fn combine_verdict(sos: Option<&SosEvidence>, oracle: Option<&BilinearOptimum>) -> Result<ContainmentVerdict> {
    let sos_certifies = sos.is_some_and(SosEvidence::certifies);
    let mut v = match (sos, oracle) {
        (None, None) => return Err(Error::NoEvidence),
        (_, Some(opt)) => {
            let mut v = ContainmentVerdict::from_oracle(opt);
            if sos_certifies && v.status == VerdictStatus::CertifiedNotContained {
                v.notes.push(format!(
                    "solver-accuracy incident: SOS reported mu = {:.3e} <= 1 but exact mu* = {} > 1",
                    sos.map_or(f64::NAN, |s| s.certificate.mu),
                    format_rational(&opt.mu_star)
                ));
            }
            v
        }
        (Some(_), None) => ContainmentVerdict::new(if sos_certifies {
            VerdictStatus::CertifiedContained
        } else {
            VerdictStatus::Undecided
        }),
    };
    if let Some(s) = sos {
        v.order_used = Some(s.certificate.order_t);
        v.mu_values = s.mu_values.clone();
        v.residual = Some(s.report.identity_residual);
        if !sos_certifies && oracle.is_some_and(|o| o.mu_star <= Rational::one()) {
            v.notes.push(format!(
                "SOS undecided at order {} (mu = {:.6}); containment settled by the exact oracle",
                s.certificate.order_t, s.certificate.mu
            ));
        }
    }
    Ok(v)
}

/// Hand-built order-2 certificate for the unit cube in the cross polytope
/// scaled by `e`:
///
/// `d/e - x^T z = 1/(8e) Σ_i [(1 - x_i)((1 + x_i)^2 + (1 + e z_i)^2)
///                          + (1 + x_i)((1 - x_i)^2 + (1 - e z_i)^2)
///                          + (1 - e z_i)((1 + x_i)^2 + (1 + e z_i)^2)
///                          + (1 + e z_i)((1 - x_i)^2 + (1 - e z_i)^2)]`
///
/// Generators must come in the order produced by `HPolytope::cube` and
/// `VPolytope::cross`: `1 - x_i, 1 + x_i` per coordinate, then
/// `1 - e z_i, 1 + e z_i`.
pub fn cube_cross_certificate(pair: &NormalizedPair, e: i64) -> Result<SosCertificate> {
    let d = pair.p.dim();
    let nvars = 2 * d;
    let b0 = basis(nvars, 2);
    let b1 = basis(nvars, 1);
    let n1 = b1.len();
    let ef = e as f64;
    let scale = 1.0 / (8.0 * ef);
    // square of (1 + s_x x_i) and of (1 + s_z e z_i)
    let squares = |i: usize, sign: f64| -> DMatrix<f64> {
        let mut hx = vec![0.0; n1];
        hx[0] = 1.0;
        hx[1 + i] = sign;
        let mut hz = vec![0.0; n1];
        hz[0] = 1.0;
        hz[1 + d + i] = sign * ef;
        let hx = nalgebra::DVector::from_vec(hx);
        let hz = nalgebra::DVector::from_vec(hz);
        (&hx * hx.transpose() + &hz * hz.transpose()) * scale
    };
    let to_rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> { (0..n1).map(|r| (0..n1).map(|c| m[(r, c)]).collect()).collect() };
    let mut blocks = vec![GramForm { basis: b0.clone(), matrix: vec![vec![0.0; b0.len()]; b0.len()] }];
    // P rows: (1 - x_i) pairs with (+) squares, (1 + x_i) with (-)
    for i in 0..d {
        blocks.push(GramForm { basis: b1.clone(), matrix: to_rows(&squares(i, 1.0)) });
        blocks.push(GramForm { basis: b1.clone(), matrix: to_rows(&squares(i, -1.0)) });
    }
    for i in 0..d {
        blocks.push(GramForm { basis: b1.clone(), matrix: to_rows(&squares(i, 1.0)) });
        blocks.push(GramForm { basis: b1.clone(), matrix: to_rows(&squares(i, -1.0)) });
    }
    if blocks.len() != 1 + pair.p.num_constraints() + pair.q.num_points() {
        return Err(Error::Certificate("pair is not a cube/cross pair".into()));
    }
    Ok(SosCertificate {
        order_t: 2,
        mu: d as f64 / ef,
        gram_blocks: blocks,
        generators: generators(pair),
        fingerprint: pair.fingerprint(),
        solver: None,
        verification: None,
    })
}
