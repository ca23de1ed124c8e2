#![allow(dead_code)]

use polycontain::lp::is_bounded;
use polycontain::oracle::origin_interior;
use polycontain::rational::ratio;
use polycontain::{HPolytope, Rational, VPolytope};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn small_rational(rng: &mut ChaCha8Rng, bound: i64) -> Rational {
    ratio(rng.random_range(-bound..=bound), rng.random_range(1..=3))
}

/// Bounded H-polytope with the origin interior (all right-hand sides positive).
pub fn random_h(rng: &mut ChaCha8Rng, d: usize, max_rows: usize) -> HPolytope {
    loop {
        let k = rng.random_range(d + 1..=max_rows);
        let rows: Vec<Vec<Rational>> = (0..k).map(|_| (0..d).map(|_| small_rational(rng, 5)).collect()).collect();
        if rows.iter().any(|r| r.iter().all(|c| c == &ratio(0, 1))) {
            continue;
        }
        let rhs = (0..k).map(|_| ratio(rng.random_range(1..=6), rng.random_range(1..=3))).collect();
        let p = HPolytope::new(rows, rhs).expect("well formed");
        if is_bounded(&p).unwrap_or(false) {
            return p;
        }
    }
}

/// V-polytope with the origin interior.
pub fn random_v(rng: &mut ChaCha8Rng, d: usize, max_points: usize) -> VPolytope {
    loop {
        let l = rng.random_range(d + 1..=max_points);
        let pts = (0..l).map(|_| (0..d).map(|_| small_rational(rng, 6)).collect()).collect();
        let q = VPolytope::from_points(pts).expect("well formed");
        if origin_interior(&q) {
            return q;
        }
    }
}
