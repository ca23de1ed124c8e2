//! Exact dense-tableau simplex over rationals.
//!
//! Problems are stated over a polyhedron `{x | a - A x >= 0}` with free
//! variables. Internally `x = x+ - x-` plus one slack per row; rows with a
//! negative right-hand side get an artificial column for phase one. Bland's
//! rule is used in both phases, so the method terminates and is
//! deterministic.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::polytope::{HPolytope, VPolytope};
use crate::rational::{dot, null_vector, rank, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<Rational>,
    pub constraints: HPolytope,
    pub sense: Sense,
}

impl LpProblem {
    pub fn new(objective: Vec<Rational>, constraints: HPolytope, sense: Sense) -> Result<Self> {
        if objective.len() != constraints.dim() {
            return Err(Error::DimensionMismatch(format!(
                "objective has {} entries, constraints have {} columns",
                objective.len(),
                constraints.dim()
            )));
        }
        Ok(Self { objective, constraints, sense })
    }

    pub fn maximize(objective: Vec<Rational>, constraints: &HPolytope) -> Result<Self> {
        Self::new(objective, constraints.clone(), Sense::Maximize)
    }

    pub fn minimize(objective: Vec<Rational>, constraints: &HPolytope) -> Result<Self> {
        Self::new(objective, constraints.clone(), Sense::Minimize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpResult::Optimal { .. })
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpResult::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            LpResult::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

struct Tableau {
    /// m rows of `ncols` coefficients followed by the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
}

enum Pivoting {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (dst, src) in row.iter_mut().zip(&pivot_row) {
                if !src.is_zero() {
                    *dst -= &f * src;
                }
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for maximizing `cost` over the
    /// columns allowed by `active`.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut red: Vec<Rational> = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row[..self.ncols].iter().enumerate() {
                if !v.is_zero() {
                    red[j] -= cb * v;
                }
            }
        }
        red
    }

    /// Primal simplex maximizing `cost`, Bland's rule; columns with
    /// `allowed[j] == false` never enter.
    fn run(&mut self, cost: &[Rational], allowed: &[bool]) -> Pivoting {
        loop {
            let red = self.reduced_costs(cost);
            let entering = (0..self.ncols).find(|&j| allowed[j] && red[j].is_positive());
            let Some(c) = entering else {
                return Pivoting::Optimal;
            };
            let rhs = self.ncols;
            let mut best: Option<(Rational, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((b, bi)) => ratio < *b || (ratio == *b && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((ratio, i));
                }
            }
            match best {
                Some((_, r)) => self.pivot(r, c),
                None => return Pivoting::Unbounded,
            }
        }
    }

    fn value_of(&self, col: usize) -> Rational {
        self.basis
            .iter()
            .position(|&b| b == col)
            .map(|r| self.rows[r][self.ncols].clone())
            .unwrap_or_else(Rational::zero)
    }
}

/// Exact optimum of a linear objective over an H-polyhedron.
///
/// When the optimum is finite and the polyhedron is pointed the returned
/// point is a vertex: the solution is moved along the optimal face until
/// its active rows have full column rank.
pub fn solve_lp(prob: &LpProblem) -> LpResult {
    let h = &prob.constraints;
    let d = h.dim();
    let k = h.num_constraints();
    // column layout: x+ [0,d), x- [d,2d), slack [2d, 2d+k), artificials after
    let negative_rows: Vec<usize> = (0..k).filter(|&i| h.rhs()[i].is_negative()).collect();
    let n_art = negative_rows.len();
    let ncols = 2 * d + k + n_art;
    let mut rows = Vec::with_capacity(k);
    let mut basis = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = vec![Rational::zero(); ncols + 1];
        for j in 0..d {
            row[j] = h.matrix()[i][j].clone();
            row[d + j] = -h.matrix()[i][j].clone();
        }
        row[2 * d + i] = Rational::one();
        row[ncols] = h.rhs()[i].clone();
        if let Some(a) = negative_rows.iter().position(|&r| r == i) {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            row[2 * d + k + a] = Rational::one();
            basis.push(2 * d + k + a);
        } else {
            basis.push(2 * d + i);
        }
        rows.push(row);
    }
    let mut tab = Tableau { rows, basis, ncols };

    if n_art > 0 {
        let mut cost = vec![Rational::zero(); ncols];
        for c in cost.iter_mut().skip(2 * d + k) {
            *c = -Rational::one();
        }
        let allowed = vec![true; ncols];
        tab.run(&cost, &allowed);
        let infeasibility: Rational = (2 * d + k..ncols).map(|c| tab.value_of(c)).sum();
        if infeasibility.is_positive() {
            return LpResult::Infeasible;
        }
        // drive zero-level artificials out of the basis
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= 2 * d + k {
                match (0..2 * d + k).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut cost = vec![Rational::zero(); ncols];
    for j in 0..d {
        let c = match prob.sense {
            Sense::Maximize => prob.objective[j].clone(),
            Sense::Minimize => -prob.objective[j].clone(),
        };
        cost[d + j] = -c.clone();
        cost[j] = c;
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| j < 2 * d + k).collect();
    if let Pivoting::Unbounded = tab.run(&cost, &allowed) {
        return LpResult::Unbounded;
    }
    let x: Vec<Rational> = (0..d).map(|j| tab.value_of(j) - tab.value_of(d + j)).collect();
    let x = purify_to_vertex(h, x);
    let value = dot(&prob.objective, &x);
    LpResult::Optimal { value, point: x }
}

/// Moves an optimal point along its optimal face until it is a vertex.
/// Any direction in the nullspace of the active rows is orthogonal to the
/// objective at an optimum, so the objective value is unchanged.
fn purify_to_vertex(h: &HPolytope, mut x: Vec<Rational>) -> Vec<Rational> {
    let d = h.dim();
    loop {
        let slacks = h.slacks(&x);
        let active: Vec<Vec<Rational>> = (0..h.num_constraints())
            .filter(|&i| slacks[i].is_zero())
            .map(|i| h.matrix()[i].clone())
            .collect();
        if rank(&active) == d {
            return x;
        }
        let Some(dir) = null_vector(&active, d) else {
            return x;
        };
        let step = |dir: &[Rational]| -> Option<Rational> {
            (0..h.num_constraints())
                .filter_map(|i| {
                    let rate = dot(&h.matrix()[i], dir);
                    rate.is_positive().then(|| &slacks[i] / rate)
                })
                .min()
        };
        let neg: Vec<Rational> = dir.iter().map(|v| -v).collect();
        let (dir, t) = match step(&dir) {
            Some(t) => (dir, t),
            None => match step(&neg) {
                Some(t) => (neg, t),
                // lineality space: no vertex exists
                None => return x,
            },
        };
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi += &t * di;
        }
    }
}

pub fn is_nonempty(p: &HPolytope) -> bool {
    let zero = vec![Rational::zero(); p.dim()];
    let prob = LpProblem::maximize(zero, p).expect("dimensions agree");
    solve_lp(&prob) != LpResult::Infeasible
}

/// True iff every coordinate is bounded above and below over P.
pub fn is_bounded(p: &HPolytope) -> Result<bool> {
    if !is_nonempty(p) {
        return Err(Error::Empty);
    }
    for i in 0..p.dim() {
        let mut e = vec![Rational::zero(); p.dim()];
        e[i] = Rational::one();
        for sense in [Sense::Maximize, Sense::Minimize] {
            let prob = LpProblem::new(e.clone(), p.clone(), sense)?;
            if solve_lp(&prob) == LpResult::Unbounded {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Convex-combination feasibility `B lambda = point`, `lambda >= 0`,
/// `sum lambda = 1`.
pub fn point_in_v(point: &[Rational], q: &VPolytope) -> Result<bool> {
    if point.len() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, Q lives in R^{}",
            point.len(),
            q.dim()
        )));
    }
    let l = q.num_points();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    // equalities as pairs of inequalities
    for i in 0..q.dim() {
        let coeffs: Vec<Rational> = q.points().iter().map(|b| b[i].clone()).collect();
        rows.push(coeffs.iter().map(|c| -c).collect());
        rhs.push(-point[i].clone());
        rows.push(coeffs);
        rhs.push(point[i].clone());
    }
    rows.push(vec![-Rational::one(); l]);
    rhs.push(-Rational::one());
    rows.push(vec![Rational::one(); l]);
    rhs.push(Rational::one());
    for j in 0..l {
        let mut r = vec![Rational::zero(); l];
        r[j] = -Rational::one();
        rows.push(r);
        rhs.push(Rational::zero());
    }
    Ok(is_nonempty(&HPolytope::new(rows, rhs)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::polar;
    use crate::rational::{rat, ratio};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    fn unit_square() -> HPolytope {
        // 0 <= x_i <= 1
        HPolytope::new(vec![v(&[1, 0]), v(&[-1, 0]), v(&[0, 1]), v(&[0, -1])], v(&[1, 0, 1, 0])).unwrap()
    }

    #[test]
    fn maximize_over_square() {
        let res = solve_lp(&LpProblem::maximize(v(&[1, 0]), &unit_square()).unwrap());
        let LpResult::Optimal { value, point } = res else { panic!("{res:?}") };
        assert_eq!(value, rat(1));
        assert_eq!(point[0], rat(1));
        assert!(unit_square().contains(&point));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let empty = HPolytope::new(vec![v(&[-1]), v(&[1])], v(&[-1, 0])).unwrap();
        assert_eq!(solve_lp(&LpProblem::maximize(v(&[1]), &empty).unwrap()), LpResult::Infeasible);
        let half = HPolytope::new(vec![v(&[0, 1])], v(&[0])).unwrap();
        assert_eq!(solve_lp(&LpProblem::maximize(v(&[1, 0]), &half).unwrap()), LpResult::Unbounded);
    }

    #[test]
    fn minimize_with_negative_rhs() {
        // x >= 2, y >= 3, x + y <= 10: min x + y = 5
        let h = HPolytope::new(vec![v(&[-1, 0]), v(&[0, -1]), v(&[1, 1])], v(&[-2, -3, 10])).unwrap();
        let res = solve_lp(&LpProblem::minimize(v(&[1, 1]), &h).unwrap());
        assert_eq!(res.value(), Some(&rat(5)));
        assert_eq!(res.point().unwrap(), &v(&[2, 3])[..]);
    }

    #[test]
    fn degenerate_objective_still_returns_vertex() {
        let cube = HPolytope::cube(3);
        let res = solve_lp(&LpProblem::maximize(v(&[0, 0, 0]), &cube).unwrap());
        let p = res.point().unwrap();
        assert!(p.iter().all(|c| c == &rat(1) || c == &rat(-1)), "{p:?}");
    }

    #[test]
    fn nonempty_checks() {
        assert!(is_nonempty(&HPolytope::cube(2)));
        let empty = HPolytope::new(vec![v(&[-1]), v(&[1])], v(&[-1, 0])).unwrap();
        assert!(!is_nonempty(&empty));
        let point = HPolytope::new(vec![v(&[1]), v(&[-1])], v(&[0, 0])).unwrap();
        assert!(is_nonempty(&point));
    }

    #[test]
    fn boundedness_checks() {
        assert!(is_bounded(&HPolytope::cube(2)).unwrap());
        let half = HPolytope::new(vec![v(&[-1, 0])], v(&[0])).unwrap();
        assert!(!is_bounded(&half).unwrap());
        assert!(is_bounded(&polar(&VPolytope::cross(3, 2))).unwrap());
        let empty = HPolytope::new(vec![v(&[-1]), v(&[1])], v(&[-1, 0])).unwrap();
        assert!(matches!(is_bounded(&empty), Err(Error::Empty)));
    }

    #[test]
    fn point_in_v_cases() {
        let cross = VPolytope::cross(2, 1);
        assert!(!point_in_v(&v(&[1, 1]), &cross).unwrap());
        assert!(point_in_v(&v(&[0, 0]), &cross).unwrap());
        assert!(point_in_v(&[ratio(1, 2), ratio(1, 2)], &cross).unwrap());
        for b in cross.points() {
            assert!(point_in_v(b, &cross).unwrap());
        }
        assert!(point_in_v(&v(&[0]), &cross).is_err());
    }
}
