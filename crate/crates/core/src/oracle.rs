//! Exact reference answers for containment via the bilinear program
//! `mu* = max { x^T z | x in P, z in Q° }`.
//!
//! With the origin interior to Q, `P ⊆ Q` iff `mu* <= 1`, and the maximum
//! is attained at a vertex of P paired with a vertex of Q°. `mu_star`
//! enumerates V(P) by brute force and, for every vertex, solves the exact LP
//! `max { x^T z | z in Q° }`; the full pair scan in [`pair_scan`] also
//! enumerates V(Q°) and serves as a cross-check.

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certify::{ContainmentVerdict, VerdictStatus};
use crate::error::{Error, Result};
use crate::lp::{is_bounded, is_nonempty, point_in_v, solve_lp, LpProblem};
use crate::polytope::{affine_dimension, polar, HPolytope, VPolytope};
use crate::rational::{dot, solve_square, to_f64, Rational};

#[derive(Debug, Clone)]
pub struct VertexSet {
    pub vertices: Vec<Vec<Rational>>,
    pub source: HPolytope,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearOptimum {
    pub mu_star: Rational,
    pub arg_x: Vec<Rational>,
    pub arg_z: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct DistanceReport {
    pub d_pq: f64,
    pub vertex: Vec<Rational>,
    pub facet_normal: Vec<Rational>,
}

/// Result of scanning every pair in V(P) x V(Q°).
#[derive(Debug, Clone)]
pub struct PairScan {
    pub optimum: BilinearOptimum,
    pub optimal_pairs: usize,
    pub pairs_examined: usize,
}

fn ensure_polytope(p: &HPolytope) -> Result<()> {
    if !is_nonempty(p) {
        return Err(Error::Empty);
    }
    if !is_bounded(p)? {
        return Err(Error::Unbounded);
    }
    Ok(())
}

/// All vertices of a nonempty bounded H-polytope, sorted, by solving every
/// d x d row subsystem.
pub fn enumerate_vertices(p: &HPolytope) -> Result<VertexSet> {
    ensure_polytope(p)?;
    let d = p.dim();
    let mut vertices: Vec<Vec<Rational>> = (0..p.num_constraints())
        .combinations(d)
        .filter_map(|rows| {
            let m: Vec<Vec<Rational>> = rows.iter().map(|&i| p.matrix()[i].clone()).collect();
            let rhs: Vec<Rational> = rows.iter().map(|&i| p.rhs()[i].clone()).collect();
            solve_square(&m, &rhs)
        })
        .filter(|x| p.contains(x))
        .collect();
    vertices.sort();
    vertices.dedup();
    Ok(VertexSet { vertices, source: p.clone() })
}

/// `0 ∈ int Q`, tested as full affine dimension plus a bounded polar.
pub fn origin_interior(q: &VPolytope) -> bool {
    affine_dimension(q) == q.dim() && is_bounded(&polar(q)).unwrap_or(false)
}

fn ensure_origin_interior(q: &VPolytope) -> Result<()> {
    let affine_dim = affine_dimension(q);
    if affine_dim < q.dim() || !is_bounded(&polar(q))? {
        return Err(Error::OriginNotInterior { affine_dim, dim: q.dim() });
    }
    Ok(())
}

fn check_dims(p: &HPolytope, q: &VPolytope) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!("P in R^{}, Q in R^{}", p.dim(), q.dim())));
    }
    Ok(())
}

/// Work estimate used by the oracle guard: row subsets examined for V(P)
/// times the number of polar rows each LP carries.
pub fn oracle_work_estimate(p: &HPolytope, q: &VPolytope) -> u128 {
    let subsets = binomial(BigInt::from(p.num_constraints()), BigInt::from(p.dim()));
    let subsets: u128 = subsets.try_into().unwrap_or(u128::MAX);
    subsets.saturating_mul(q.num_points() as u128)
}

pub const ORACLE_PAIR_BUDGET: u128 = 1_000_000;

/// Refuses instances whose work estimate exceeds [`ORACLE_PAIR_BUDGET`].
pub fn check_oracle_budget(p: &HPolytope, q: &VPolytope) -> Result<()> {
    let pairs = oracle_work_estimate(p, q);
    if pairs > ORACLE_PAIR_BUDGET {
        return Err(Error::OracleBudget { pairs, budget: ORACLE_PAIR_BUDGET });
    }
    Ok(())
}

/// `argmax { c^T z | z in Q° }` as a vertex of Q°.
fn best_polar_vertex(polar_q: &HPolytope, c: &[Rational]) -> Vec<Rational> {
    let prob = LpProblem::maximize(c.to_vec(), polar_q).expect("dimensions checked");
    solve_lp(&prob).point().expect("Q° is a nonempty polytope").to_vec()
}

fn best_p_vertex(p: &HPolytope, c: &[Rational]) -> Vec<Rational> {
    let prob = LpProblem::maximize(c.to_vec(), p).expect("dimensions checked");
    solve_lp(&prob).point().expect("P is a nonempty polytope").to_vec()
}

pub fn mu_star(p: &HPolytope, q: &VPolytope) -> Result<BilinearOptimum> {
    check_dims(p, q)?;
    ensure_polytope(p)?;
    ensure_origin_interior(q)?;
    let polar_q = polar(q);
    let verts = enumerate_vertices(p)?;
    let mut best: Option<BilinearOptimum> = None;
    // ties go to the lexicographically largest vertex of P
    for x in verts.vertices {
        let z = best_polar_vertex(&polar_q, &x);
        let value = dot(&x, &z);
        if best.as_ref().is_none_or(|b| value >= b.mu_star) {
            best = Some(BilinearOptimum { mu_star: value, arg_x: x, arg_z: z });
        }
    }
    Ok(best.expect("a nonempty polytope has a vertex"))
}

/// Exhaustive scan over V(P) x V(Q°).
pub fn pair_scan(p: &HPolytope, q: &VPolytope) -> Result<PairScan> {
    check_dims(p, q)?;
    ensure_origin_interior(q)?;
    let vp = enumerate_vertices(p)?;
    let vq = enumerate_vertices(&polar(q))?;
    let mut best: Option<BilinearOptimum> = None;
    let mut ties = 0;
    for x in &vp.vertices {
        for z in &vq.vertices {
            let value = dot(x, z);
            match &best {
                Some(b) if value < b.mu_star => {}
                Some(b) if value == b.mu_star => {
                    ties += 1;
                    if x > &b.arg_x {
                        best = Some(BilinearOptimum { mu_star: value, arg_x: x.clone(), arg_z: z.clone() });
                    }
                }
                _ => {
                    best = Some(BilinearOptimum { mu_star: value, arg_x: x.clone(), arg_z: z.clone() });
                    ties = 1;
                }
            }
        }
    }
    Ok(PairScan {
        optimum: best.expect("both vertex sets are nonempty"),
        optimal_pairs: ties,
        pairs_examined: vp.vertices.len() * vq.vertices.len(),
    })
}

/// Exact containment decision.
///
/// An empty P is reported contained with the vacuous flag. With the origin
/// interior to Q the answer is `mu* <= 1`; otherwise every vertex of P is
/// tested for membership in Q directly.
pub fn decide_containment_oracle(p: &HPolytope, q: &VPolytope) -> Result<ContainmentVerdict> {
    check_dims(p, q)?;
    if !is_nonempty(p) {
        return Ok(ContainmentVerdict::vacuous());
    }
    if !is_bounded(p)? {
        return Err(Error::Unbounded);
    }
    if origin_interior(q) {
        let opt = mu_star(p, q)?;
        return Ok(ContainmentVerdict::from_oracle(&opt));
    }
    for x in enumerate_vertices(p)?.vertices {
        if !point_in_v(&x, q)? {
            let mut v = ContainmentVerdict::new(VerdictStatus::CertifiedNotContained);
            v.witness = Some(x);
            v.notes.push("origin not interior to Q; decided by vertex membership".into());
            return Ok(v);
        }
    }
    let mut v = ContainmentVerdict::new(VerdictStatus::CertifiedContained);
    v.notes.push("origin not interior to Q; decided by vertex membership".into());
    Ok(v)
}

/// `(1 - mu*) / ||z̄||` at the maximizing vertex/facet pair.
pub fn oriented_distance(p: &HPolytope, q: &VPolytope) -> Result<DistanceReport> {
    let opt = mu_star(p, q)?;
    let norm = opt.arg_z.iter().map(|c| to_f64(c).powi(2)).sum::<f64>().sqrt();
    let gap = to_f64(&(Rational::one() - &opt.mu_star));
    Ok(DistanceReport { d_pq: gap / norm, vertex: opt.arg_x, facet_normal: opt.arg_z })
}

/// Alternating LP ascent (vertex tracking). Returns the best pair found,
/// a lower bound on `mu*`.
///
/// Each start draws a random objective with entries `k / 10^6`,
/// `|k| <= 10^6`, and takes the maximizing vertex of Q° as `z0`; with
/// `starts == 0` the single start `z0 = 0` is used.
pub fn alternating_ascent(p: &HPolytope, q: &VPolytope, starts: usize, seed: u64) -> Result<BilinearOptimum> {
    check_dims(p, q)?;
    ensure_polytope(p)?;
    ensure_origin_interior(q)?;
    let d = p.dim();
    let polar_q = polar(q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let denom = BigInt::from(1_000_000);
    let initial: Vec<Vec<Rational>> = if starts == 0 {
        vec![vec![Rational::zero(); d]]
    } else {
        (0..starts)
            .map(|_| {
                let c: Vec<Rational> = (0..d)
                    .map(|_| Rational::new(BigInt::from(rng.random_range(-1_000_000i64..=1_000_000)), denom.clone()))
                    .collect();
                best_polar_vertex(&polar_q, &c)
            })
            .collect()
    };
    let mut best: Option<BilinearOptimum> = None;
    for z0 in initial {
        let mut z = z0;
        let mut x = best_p_vertex(p, &z);
        let mut value = dot(&x, &z);
        loop {
            let z_next = best_polar_vertex(&polar_q, &x);
            let x_next = best_p_vertex(p, &z_next);
            let next = dot(&x_next, &z_next);
            if next <= value {
                break;
            }
            x = x_next;
            z = z_next;
            value = next;
        }
        // one more polar step can only help: x is fixed, z improves
        let z_final = best_polar_vertex(&polar_q, &x);
        let final_value = dot(&x, &z_final);
        if final_value > value {
            z = z_final;
            value = final_value;
        }
        if best.as_ref().is_none_or(|b| value > b.mu_star) {
            best = Some(BilinearOptimum { mu_star: value, arg_x: x, arg_z: z });
        }
    }
    Ok(best.expect("at least one start"))
}

/// Largest r with `rP ⊆ Q` for P, Q with the origin interior to both:
/// `1 / mu*`, or `None` when `mu* <= 0`.
pub fn scaling_bound(p: &HPolytope, q: &VPolytope) -> Result<Option<Rational>> {
    let opt = mu_star(p, q)?;
    Ok(opt.mu_star.is_positive().then(|| opt.mu_star.recip()))
}
