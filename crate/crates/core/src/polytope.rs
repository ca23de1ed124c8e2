//! H- and V-polytopes over exact rationals, polar duality and the affine
//! maps (centroid shift, dilation) applied before the hierarchy is built.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use sha2::{Digest, Sha256};

use crate::rational::{dot, format_rational, rank, Rational};

/// `{x | a - A x >= 0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HPolytope {
    a_mat: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    dim: usize,
}

impl HPolytope {
    pub fn new(a_mat: Vec<Vec<Rational>>, rhs: Vec<Rational>) -> Result<Self> {
        if a_mat.is_empty() {
            return Err(Error::InvalidPolytope("H-polytope needs at least one row".into()));
        }
        let dim = a_mat[0].len();
        if dim == 0 {
            return Err(Error::InvalidPolytope("dimension must be at least 1".into()));
        }
        if a_mat.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("ragged constraint matrix".into()));
        }
        if rhs.len() != a_mat.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows but {} right-hand sides",
                a_mat.len(),
                rhs.len()
            )));
        }
        Ok(Self { a_mat, rhs, dim })
    }

    /// `[-1, 1]^d` as `x_i <= 1`, `-x_i <= 1`.
    pub fn cube(dim: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for s in [1, -1] {
                let mut r = vec![Rational::zero(); dim];
                r[i] = Rational::from_integer(s.into());
                rows.push(r);
            }
        }
        Self::new(rows, vec![Rational::one(); 2 * dim]).expect("cube is well formed")
    }

    /// Box `[-l_1, l_1] x ... x [-l_d, l_d]`.
    pub fn centered_box(half_widths: &[Rational]) -> Result<Self> {
        let dim = half_widths.len();
        let mut rows = Vec::with_capacity(2 * dim);
        let mut rhs = Vec::with_capacity(2 * dim);
        for (i, l) in half_widths.iter().enumerate() {
            for s in [1, -1] {
                let mut r = vec![Rational::zero(); dim];
                r[i] = Rational::from_integer(s.into());
                rows.push(r);
                rhs.push(l.clone());
            }
        }
        Self::new(rows, rhs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.a_mat.len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.a_mat
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    /// Slack `a_i - A_i x` of every row.
    pub fn slacks(&self, x: &[Rational]) -> Vec<Rational> {
        self.a_mat.iter().zip(&self.rhs).map(|(r, b)| b - dot(r, x)).collect()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim && self.slacks(x).iter().all(|s| !s.is_negative())
    }

    /// Adds the row `a_new - A_new x >= 0`.
    pub fn with_row(&self, row: Vec<Rational>, rhs: Rational) -> Result<Self> {
        let mut a = self.a_mat.clone();
        let mut b = self.rhs.clone();
        a.push(row);
        b.push(rhs);
        Self::new(a, b)
    }

    /// `{x | r a - A x >= 0}`, the dilation of P about the origin.
    pub fn scale(&self, r: &Rational) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::InvalidPolytope(format!("scale factor must be positive, got {r}")));
        }
        Ok(Self {
            a_mat: self.a_mat.clone(),
            rhs: self.rhs.iter().map(|b| b * r).collect(),
            dim: self.dim,
        })
    }

    /// Image of P under `x -> x + shift` (so `a <- a + A shift`).
    pub fn translate(&self, shift: &[Rational]) -> Self {
        Self {
            a_mat: self.a_mat.clone(),
            rhs: self.a_mat.iter().zip(&self.rhs).map(|(r, b)| b + dot(r, shift)).collect(),
            dim: self.dim,
        }
    }
}

/// `conv(b_1, ..., b_l)`, stored column-wise as points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VPolytope {
    points: Vec<Vec<Rational>>,
    dim: usize,
}

impl VPolytope {
    pub fn from_points(points: Vec<Vec<Rational>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidPolytope("V-polytope needs at least one point".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidPolytope("dimension must be at least 1".into()));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch("points of differing dimension".into()));
        }
        Ok(Self { points, dim })
    }

    /// Builds Q from a d x l matrix whose columns are the points.
    pub fn from_columns(b_mat: &[Vec<Rational>]) -> Result<Self> {
        let d = b_mat.len();
        let l = b_mat.first().map_or(0, Vec::len);
        if b_mat.iter().any(|r| r.len() != l) {
            return Err(Error::DimensionMismatch("ragged generator matrix".into()));
        }
        Self::from_points((0..l).map(|j| (0..d).map(|i| b_mat[i][j].clone()).collect()).collect())
    }

    /// `e * conv(+-e_i)`.
    pub fn cross(dim: usize, scale: i64) -> Self {
        let mut pts = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for s in [scale, -scale] {
                let mut p = vec![Rational::zero(); dim];
                p[i] = Rational::from_integer(s.into());
                pts.push(p);
            }
        }
        Self::from_points(pts).expect("cross is well formed")
    }

    /// `conv({-1, 1}^d)`; vertex order follows the binary expansion of the index.
    pub fn cube(dim: usize) -> Self {
        let pts = (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|i| {
                        if mask >> (dim - 1 - i) & 1 == 1 {
                            Rational::one()
                        } else {
                            -Rational::one()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::from_points(pts).expect("cube is well formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    /// The d x l generator matrix B.
    pub fn columns_matrix(&self) -> Vec<Vec<Rational>> {
        (0..self.dim).map(|i| self.points.iter().map(|p| p[i].clone()).collect()).collect()
    }

    pub fn with_point(&self, p: Vec<Rational>) -> Result<Self> {
        let mut pts = self.points.clone();
        pts.push(p);
        Self::from_points(pts)
    }

    pub fn centroid(&self) -> Vec<Rational> {
        let l = Rational::from_integer(self.points.len().into());
        (0..self.dim)
            .map(|i| self.points.iter().map(|p| &p[i]).sum::<Rational>() / &l)
            .collect()
    }

    pub fn translate(&self, shift: &[Rational]) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| p.iter().zip(shift).map(|(x, s)| x + s).collect())
                .collect(),
            dim: self.dim,
        }
    }

    pub fn scale(&self, r: &Rational) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::InvalidPolytope(format!("scale factor must be positive, got {r}")));
        }
        Ok(Self {
            points: self.points.iter().map(|p| p.iter().map(|x| x * r).collect()).collect(),
            dim: self.dim,
        })
    }
}

/// P and Q translated by minus the centroid of Q's points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedPair {
    pub p: HPolytope,
    pub q: VPolytope,
    pub shift: Vec<Rational>,
}

impl NormalizedPair {
    /// Maps a point of the translated frame back to the input frame.
    pub fn to_original(&self, x: &[Rational]) -> Vec<Rational> {
        x.iter().zip(&self.shift).map(|(v, s)| v + s).collect()
    }

    pub fn restore(&self) -> (HPolytope, VPolytope) {
        (self.p.translate(&self.shift), self.q.translate(&self.shift))
    }

    /// SHA-256 over a canonical rendering of the translated data and shift.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let row = |r: &[Rational]| r.iter().map(format_rational).collect::<Vec<_>>().join(",");
        h.update(format!("H {} {}\n", self.p.num_constraints(), self.p.dim()));
        for (r, b) in self.p.matrix().iter().zip(self.p.rhs()) {
            h.update(format!("{};{}\n", row(r), format_rational(b)));
        }
        h.update(format!("V {} {}\n", self.q.num_points(), self.q.dim()));
        for pt in self.q.points() {
            h.update(format!("{}\n", row(pt)));
        }
        h.update(format!("S {}\n", row(&self.shift)));
        hex::encode(h.finalize())
    }
}

/// `Q° = {z | 1 - B^T z >= 0}`.
pub fn polar(q: &VPolytope) -> HPolytope {
    HPolytope::new(q.points.clone(), vec![Rational::one(); q.points.len()])
        .expect("polar of a valid V-polytope is well formed")
}

pub fn centroid_normalize(p: &HPolytope, q: &VPolytope) -> Result<NormalizedPair> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "P lives in R^{} but Q in R^{}",
            p.dim(),
            q.dim()
        )));
    }
    let shift = q.centroid();
    let neg: Vec<Rational> = shift.iter().map(|s| -s).collect();
    Ok(NormalizedPair { p: p.translate(&neg), q: q.translate(&neg), shift })
}

/// Keeps the input frame when the origin is already interior to Q, otherwise
/// translates both polytopes by minus the centroid of Q's points.
pub fn normalize_pair(p: &HPolytope, q: &VPolytope) -> Result<NormalizedPair> {
    if p.dim() != q.dim() {
        return centroid_normalize(p, q);
    }
    if crate::oracle::origin_interior(q) {
        let shift = vec![Rational::zero(); q.dim()];
        return Ok(NormalizedPair { p: p.clone(), q: q.clone(), shift });
    }
    centroid_normalize(p, q)
}

/// Rank of `b_j - b_1` over all j.
pub fn affine_dimension(q: &VPolytope) -> usize {
    let base = &q.points[0];
    let diffs: Vec<Vec<Rational>> = q.points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(x, y)| x - y).collect())
        .collect();
    if diffs.is_empty() {
        0
    } else {
        rank(&diffs)
    }
}
