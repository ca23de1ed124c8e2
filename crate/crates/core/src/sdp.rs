//! Dense primal-dual interior-point method for block-diagonal SDPs with
//! free scalar variables.
//!
//! Primal: `min <C, X> + c_f^T u  s.t.  <A_i, X> + F_i u = b_i,  X ⪰ 0`
//! Dual:   `max b^T y  s.t.  Z = C - Σ y_i A_i ⪰ 0,  F^T y = c_f`
//!
//! Search directions are HKM (`dX = (K - X dZ) Z^-1`, symmetrized) with a
//! Mehrotra predictor-corrector step. The Schur complement
//! `M_ij = tr(A_i X A_j Z^-1)` is formed densely from the sparse constraint
//! entries, scaled to unit diagonal before factoring, and the free variables
//! are eliminated through the bordered system `[M F; F^T 0]`. Each primal
//! direction is projected back onto `A(dX) + F du = r_p`.

use std::collections::HashMap;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

/// Entry of a symmetric constraint matrix; `(row, col)` with `row <= col`
/// stands for both mirrored positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraint {
    pub entries: Vec<BlockEntry>,
    /// `(free variable index, coefficient)`
    pub free: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub num_free: usize,
    pub constraints: Vec<Constraint>,
    pub rhs: Vec<f64>,
    pub free_cost: Vec<f64>,
    pub block_cost: Vec<BlockEntry>,
}

impl SdpProblem {
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn validate(&self) -> Result<(), String> {
        if self.constraints.is_empty() {
            return Err("at least one equality row is required".into());
        }
        if self.rhs.len() != self.constraints.len() {
            return Err(format!("{} rows but {} right-hand sides", self.constraints.len(), self.rhs.len()));
        }
        if self.free_cost.len() != self.num_free {
            return Err("free cost length differs from free variable count".into());
        }
        let check = |e: &BlockEntry| -> Result<(), String> {
            let n = *self.block_dims.get(e.block).ok_or_else(|| format!("block {} out of range", e.block))?;
            if e.row > e.col || e.col >= n {
                return Err(format!("entry ({}, {}) invalid for block {} of size {n}", e.row, e.col, e.block));
            }
            Ok(())
        };
        for c in &self.constraints {
            c.entries.iter().try_for_each(check)?;
            if c.free.iter().any(|&(j, _)| j >= self.num_free) {
                return Err("free variable index out of range".into());
            }
        }
        self.block_cost.iter().try_for_each(check)
    }

    /// Plain sparse dump: a header, then `row block i j value` lines where
    /// block `0` holds free-variable coefficients (`i` = variable index,
    /// `j` = 0) and blocks `1..` are the PSD blocks. Row `0` is the
    /// objective. Indices are 1-based.
    pub fn write_sparse(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{} = rows", self.constraints.len())?;
        writeln!(w, "{} = psd blocks", self.block_dims.len())?;
        writeln!(w, "{} = free variables", self.num_free)?;
        let dims: Vec<String> = self.block_dims.iter().map(|d| d.to_string()).collect();
        writeln!(w, "{}", dims.join(" "))?;
        let rhs: Vec<String> = self.rhs.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", rhs.join(" "))?;
        for (j, c) in self.free_cost.iter().enumerate() {
            if *c != 0.0 {
                writeln!(w, "0 0 {} 1 {c:e}", j + 1)?;
            }
        }
        for e in &self.block_cost {
            writeln!(w, "0 {} {} {} {:e}", e.block + 1, e.row + 1, e.col + 1, e.value)?;
        }
        for (i, c) in self.constraints.iter().enumerate() {
            for &(j, v) in &c.free {
                writeln!(w, "{} 0 {} 1 {v:e}", i + 1, j + 1)?;
            }
            for e in &c.entries {
                writeln!(w, "{} {} {} {} {:e}", i + 1, e.block + 1, e.row + 1, e.col + 1, e.value)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub step_fraction: f64,
    /// Diagonal shift of the unit-diagonal scaled Schur complement.
    pub regularization: f64,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            step_fraction: 0.98,
            regularization: 1e-14,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct IterationLog {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub dual_objective: f64,
    pub primal_blocks: Vec<DMatrix<f64>>,
    pub dual_slacks: Vec<DMatrix<f64>>,
    pub free_values: Vec<f64>,
    pub dual_vector: Vec<f64>,
    /// `|primal - dual| / (1 + |primal|)`
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub history: Vec<IterationLog>,
}

/// `(constraint, [(p, q, value)])` for one block.
type BlockRows = Vec<(usize, Vec<(usize, usize, f64)>)>;

/// Full (mirrored) entries of every constraint, grouped per block.
struct BlockData {
    /// per block: `(constraint, [(p, q, value)])`, constraints ascending
    groups: Vec<BlockRows>,
    cost: Vec<DMatrix<f64>>,
}

impl BlockData {
    fn new(prob: &SdpProblem) -> Self {
        let nb = prob.block_dims.len();
        let mut groups: Vec<BlockRows> = vec![Vec::new(); nb];
        for (i, c) in prob.constraints.iter().enumerate() {
            for e in &c.entries {
                let g = &mut groups[e.block];
                if g.last().is_none_or(|(ci, _)| *ci != i) {
                    g.push((i, Vec::new()));
                }
                let list = &mut g.last_mut().expect("just pushed").1;
                list.push((e.row, e.col, e.value));
                if e.row != e.col {
                    list.push((e.col, e.row, e.value));
                }
            }
        }
        let mut cost: Vec<DMatrix<f64>> = prob.block_dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for e in &prob.block_cost {
            cost[e.block][(e.row, e.col)] += e.value;
            if e.row != e.col {
                cost[e.block][(e.col, e.row)] += e.value;
            }
        }
        Self { groups, cost }
    }

    /// `<A_i, Y>` for every row; `Y` need not be symmetric.
    fn apply(&self, m: usize, ys: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(m);
        for (b, groups) in self.groups.iter().enumerate() {
            let y = &ys[b];
            for (i, list) in groups {
                out[*i] += list.iter().map(|&(p, q, v)| v * y[(p, q)]).sum::<f64>();
            }
        }
        out
    }

    /// `Σ y_i A_i` per block.
    fn adjoint(&self, dims: &[usize], y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (b, groups) in self.groups.iter().enumerate() {
            for (i, list) in groups {
                let yi = y[*i];
                if yi == 0.0 {
                    continue;
                }
                for &(p, q, v) in list {
                    out[b][(p, q)] += yi * v;
                }
            }
        }
        out
    }

    /// `G_ij = Σ_b <A_i, A_j>`.
    fn gram(&self, m: usize) -> DMatrix<f64> {
        let mut mat = DMatrix::zeros(m, m);
        for groups in &self.groups {
            let mut at: HashMap<(usize, usize), Vec<(usize, f64)>> = HashMap::new();
            for (i, list) in groups {
                for &(p, q, v) in list {
                    at.entry((p, q)).or_default().push((*i, v));
                }
            }
            for rows in at.values() {
                for &(i, a) in rows {
                    for &(j, c) in rows {
                        mat[(i, j)] += a * c;
                    }
                }
            }
        }
        mat
    }

    /// Upper triangle of `M_ij = Σ_b tr(A_i X A_j W)`, then mirrored.
    fn schur(&self, m: usize, xs: &[DMatrix<f64>], ws: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut mat = DMatrix::zeros(m, m);
        for (b, groups) in self.groups.iter().enumerate() {
            let x = &xs[b];
            let w = &ws[b];
            for (gi, (i, li)) in groups.iter().enumerate() {
                for (j, lj) in &groups[gi..] {
                    let mut acc = 0.0;
                    for &(p, q, a) in li {
                        let mut inner = 0.0;
                        for &(r, s, c) in lj {
                            inner += c * x[(p, r)] * w[(s, q)];
                        }
                        acc += a * inner;
                    }
                    let (lo, hi) = if i <= j { (*i, *j) } else { (*j, *i) };
                    mat[(lo, hi)] += acc;
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                mat[(i, j)] = mat[(j, i)];
            }
        }
        mat
    }
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Largest `alpha` with `X + alpha dX ⪰ 0`, over all blocks.
fn max_step(xs: &[DMatrix<f64>], dxs: &[DMatrix<f64>]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (x, dx) in xs.iter().zip(dxs) {
        let chol = x.clone().cholesky()?;
        let l = chol.l();
        let y = l.solve_lower_triangular(dx)?;
        let mut s = l.solve_lower_triangular(&y.transpose())?;
        symmetrize(&mut s);
        let lmin = s.symmetric_eigenvalues().min();
        if !lmin.is_finite() {
            return None;
        }
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    Some(alpha)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let mut s = m.clone();
    symmetrize(&mut s);
    s.symmetric_eigenvalues().min()
}

/// An iterate counts as progress when its merit drops below this fraction
/// of the merit at the previous progress.
const STALL_FACTOR: f64 = 0.5;
const STALL_ITERATIONS: usize = 10;

struct Iterate {
    merit: f64,
    xs: Vec<DMatrix<f64>>,
    zs: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    u: DVector<f64>,
}

const MAX_REFINE_STEPS: usize = 50;
const REG_CEILING: f64 = 1e-4;

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    du: DVector<f64>,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    rf: DVector<f64>,
}

pub fn solve_sdp(prob: &SdpProblem, opts: &SolverOptions) -> Result<ConicSolution, String> {
    prob.validate()?;
    let m = prob.num_constraints();
    let nf = prob.num_free;
    let dims = &prob.block_dims;
    let data = BlockData::new(prob);
    let b = DVector::from_column_slice(&prob.rhs);
    let cf = DVector::from_column_slice(&prob.free_cost);
    let mut fmat = DMatrix::zeros(m, nf);
    for (i, c) in prob.constraints.iter().enumerate() {
        for &(j, v) in &c.free {
            fmat[(i, j)] += v;
        }
    }
    let n_total: usize = dims.iter().sum();
    let b_norm = b.norm();
    let c_norm = (data.cost.iter().map(|c| c.norm_squared()).sum::<f64>() + cf.norm_squared()).sqrt();
    let xi = 1.0 + b.amax();

    let mut xs: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::identity(n, n) * xi).collect();
    let mut zs = xs.clone();
    let mut y = DVector::zeros(m);
    let mut u = DVector::zeros(nf);
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    let residuals = |xs: &[DMatrix<f64>], zs: &[DMatrix<f64>], y: &DVector<f64>, u: &DVector<f64>| {
        let rp = &b - data.apply(m, xs) - &fmat * u;
        let aty = data.adjoint(dims, y);
        let rd: Vec<DMatrix<f64>> =
            (0..dims.len()).map(|k| &data.cost[k] - &aty[k] - &zs[k]).collect();
        let rf = &cf - fmat.transpose() * y;
        Residuals { rp, rd, rf }
    };

    // Factor of A A^T for the primal projection.
    let gram_chol = {
        let mut g = data.gram(m);
        let shift = 1e-12 * g.diagonal().amax().max(1.0);
        for i in 0..m {
            g[(i, i)] += shift;
        }
        g.cholesky()
    };

    let mut best: Option<Iterate> = None;
    let mut last_progress = 0;
    let mut progress_merit = f64::INFINITY;
    for it in 0..opts.max_iter {
        iterations = it;
        let res = residuals(&xs, &zs, &y, &u);
        let pobj = inner(&data.cost, &xs) + cf.dot(&u);
        let dobj = b.dot(&y);
        let comp = inner(&xs, &zs);
        let pinf = res.rp.norm() / (1.0 + b_norm);
        let dinf = (res.rd.iter().map(|r| r.norm_squared()).sum::<f64>() + res.rf.norm_squared()).sqrt()
            / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        let rel_comp = comp / (1.0 + pobj.abs());
        if opts.verbose {
            eprintln!("{it:3} pobj {pobj:+.10e} dobj {dobj:+.10e} pinf {pinf:.2e} dinf {dinf:.2e} comp {comp:.2e}");
        }
        if pinf <= opts.feas_tol && dinf <= opts.feas_tol && gap <= opts.gap_tol && rel_comp <= opts.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }
        let merit = pinf.max(dinf).max(gap).max(rel_comp);
        if merit < STALL_FACTOR * progress_merit {
            progress_merit = merit;
            last_progress = it;
        }
        if best.as_ref().is_none_or(|b: &Iterate| merit < b.merit) {
            best = Some(Iterate { merit, xs: xs.clone(), zs: zs.clone(), y: y.clone(), u: u.clone() });
        }
        if it >= last_progress + STALL_ITERATIONS {
            if opts.verbose {
                eprintln!("no progress for {STALL_ITERATIONS} iterations");
            }
            status = SolveStatus::NumericalFailure;
            break;
        }
        let mu = comp / n_total as f64;

        let Some(zinv) = zs
            .iter()
            .map(|z| z.clone().cholesky().map(|c| c.inverse()))
            .collect::<Option<Vec<_>>>()
        else {
            if opts.verbose {
                eprintln!("Z factorization failed");
            }
            status = SolveStatus::NumericalFailure;
            break;
        };
        let schur = data.schur(m, &xs, &zinv);
        let dscale = schur.diagonal().map(|v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 });
        let scaled = DMatrix::from_fn(m, m, |i, j| schur[(i, j)] * dscale[i] * dscale[j]);
        let mut shift = opts.regularization;
        let mut factor = None;
        while shift <= REG_CEILING {
            let mut reg = scaled.clone();
            for i in 0..m {
                reg[(i, i)] += shift;
            }
            if let Some(c) = reg.cholesky() {
                factor = Some(c);
                break;
            }
            shift *= 100.0;
        }
        let Some(chol) = factor else {
            if opts.verbose {
                eprintln!("Schur complement factorization failed");
            }
            status = SolveStatus::NumericalFailure;
            break;
        };
        let msolve = |h: &DVector<f64>| dscale.component_mul(&chol.solve(&dscale.component_mul(h)));
        let mut minv_f = DMatrix::zeros(m, nf);
        for j in 0..nf {
            minv_f.set_column(j, &msolve(&fmat.column(j).into_owned()));
        }
        let border = fmat.transpose() * &minv_f;
        let border_lu = border.lu();

        let direction = |k: &[DMatrix<f64>]| -> Option<Direction> {
            // G = (K - X Rd) Z^-1
            let g: Vec<DMatrix<f64>> =
                (0..dims.len()).map(|t| (&k[t] - &xs[t] * &res.rd[t]) * &zinv[t]).collect();
            let h = &res.rp - data.apply(m, &g);
            let bordered = |h: &DVector<f64>, rf: &DVector<f64>| -> Option<(DVector<f64>, DVector<f64>)> {
                let minv_h = msolve(h);
                let du = if nf > 0 {
                    border_lu.solve(&(fmat.transpose() * &minv_h - rf))?
                } else {
                    DVector::zeros(0)
                };
                Some((&minv_h - &minv_f * &du, du))
            };
            let (mut dy, mut du) = bordered(&h, &res.rf)?;
            let defect = |dy: &DVector<f64>, du: &DVector<f64>| {
                let r1 = &h - &schur * dy - &fmat * du;
                let r2 = &res.rf - fmat.transpose() * dy;
                let size = r1.amax().max(r2.amax());
                (r1, r2, size)
            };
            let (mut r1, mut r2, mut size) = defect(&dy, &du);
            for _ in 0..MAX_REFINE_STEPS {
                if size <= 1e-15 * (1.0 + h.amax()) {
                    break;
                }
                let (cy, cu) = bordered(&r1, &r2)?;
                let (ny, nu) = (&dy + cy, &du + cu);
                let (n1, n2, nsize) = defect(&ny, &nu);
                if nsize >= 0.9 * size {
                    if nsize < size {
                        (dy, du) = (ny, nu);
                    }
                    break;
                }
                (dy, du, r1, r2, size) = (ny, nu, n1, n2, nsize);
            }
            let aty = data.adjoint(dims, &dy);
            let dz: Vec<DMatrix<f64>> = (0..dims.len()).map(|t| &res.rd[t] - &aty[t]).collect();
            let mut dx: Vec<DMatrix<f64>> = (0..dims.len())
                .map(|t| {
                    let mut d = (&k[t] - &xs[t] * &dz[t]) * &zinv[t];
                    symmetrize(&mut d);
                    d
                })
                .collect();
            if let Some(gc) = &gram_chol {
                let miss = &res.rp - &fmat * &du - data.apply(m, &dx);
                let fix = data.adjoint(dims, &gc.solve(&miss));
                for (d, f) in dx.iter_mut().zip(&fix) {
                    *d += f;
                }
            }
            Some(Direction { dx, dz, dy, du })
        };
        let steps = |d: &Direction| -> Option<(f64, f64)> {
            let ap = max_step(&xs, &d.dx)?;
            let ad = max_step(&zs, &d.dz)?;
            Some(((opts.step_fraction * ap).min(1.0), (opts.step_fraction * ad).min(1.0)))
        };

        let xz: Vec<DMatrix<f64>> = xs.iter().zip(&zs).map(|(x, z)| x * z).collect();
        let k_aff: Vec<DMatrix<f64>> = xz.iter().map(|p| -p).collect();
        let Some(aff) = direction(&k_aff) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let Some((ap_aff, ad_aff)) = steps(&aff) else {
            if opts.verbose {
                eprintln!("predictor step length failed");
            }
            status = SolveStatus::NumericalFailure;
            break;
        };
        let x_aff: Vec<DMatrix<f64>> = xs.iter().zip(&aff.dx).map(|(x, d)| x + d * ap_aff).collect();
        let z_aff: Vec<DMatrix<f64>> = zs.iter().zip(&aff.dz).map(|(z, d)| z + d * ad_aff).collect();
        let mu_aff = inner(&x_aff, &z_aff) / n_total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let k_cor: Vec<DMatrix<f64>> = (0..dims.len())
            .map(|t| {
                let n = dims[t];
                DMatrix::identity(n, n) * (sigma * mu) - &xz[t] - &aff.dx[t] * &aff.dz[t]
            })
            .collect();
        let Some(dir) = direction(&k_cor) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let Some((ap, ad)) = steps(&dir) else {
            if opts.verbose {
                eprintln!("corrector step length failed");
            }
            status = SolveStatus::NumericalFailure;
            break;
        };
        history.push(IterationLog {
            primal_objective: pobj,
            dual_objective: dobj,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            complementarity: comp,
            step_primal: ap,
            step_dual: ad,
        });
        let new_xs: Vec<DMatrix<f64>> = xs.iter().zip(&dir.dx).map(|(x, d)| x + d * ap).collect();
        let new_zs: Vec<DMatrix<f64>> = zs.iter().zip(&dir.dz).map(|(z, d)| z + d * ad).collect();
        if new_xs.iter().chain(&new_zs).any(|m| m.iter().any(|v| !v.is_finite())) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        xs = new_xs;
        zs = new_zs;
        u += &dir.du * ap;
        y += &dir.dy * ad;
        iterations = it + 1;
    }

    if status != SolveStatus::Optimal {
        if let Some(kept) = best {
            let res = residuals(&xs, &zs, &y, &u);
            let pinf = res.rp.norm() / (1.0 + b_norm);
            let dinf = (res.rd.iter().map(|r| r.norm_squared()).sum::<f64>() + res.rf.norm_squared()).sqrt()
                / (1.0 + c_norm);
            let pobj = inner(&data.cost, &xs) + cf.dot(&u);
            let gap = (pobj - b.dot(&y)).abs() / (1.0 + pobj.abs());
            let rel_comp = inner(&xs, &zs) / (1.0 + pobj.abs());
            if pinf.max(dinf).max(gap).max(rel_comp) > kept.merit {
                (xs, zs, y, u) = (kept.xs, kept.zs, kept.y, kept.u);
            }
        }
    }
    let res = residuals(&xs, &zs, &y, &u);
    let pobj = inner(&data.cost, &xs) + cf.dot(&u);
    let dobj = b.dot(&y);
    Ok(ConicSolution {
        status,
        objective: pobj,
        dual_objective: dobj,
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs()),
        primal_residual: res.rp.amax(),
        dual_residual: res.rd.iter().map(|r| r.amax()).fold(res.rf.amax(), f64::max),
        primal_blocks: xs,
        dual_slacks: zs,
        free_values: u.iter().copied().collect(),
        dual_vector: y.iter().copied().collect(),
        iterations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(block: usize, row: usize, col: usize, value: f64) -> BlockEntry {
        BlockEntry { block, row, col, value }
    }

    /// min x s.t. [[x, 1], [1, x]] ⪰ 0
    fn two_by_two() -> SdpProblem {
        SdpProblem {
            block_dims: vec![2],
            num_free: 1,
            constraints: vec![
                Constraint { entries: vec![entry(0, 0, 0, 1.0)], free: vec![(0, -1.0)] },
                Constraint { entries: vec![entry(0, 1, 1, 1.0)], free: vec![(0, -1.0)] },
                Constraint { entries: vec![entry(0, 0, 1, 0.5)], free: vec![] },
            ],
            rhs: vec![0.0, 0.0, 1.0],
            free_cost: vec![1.0],
            block_cost: vec![],
        }
    }

    #[test]
    fn eigenvalue_bound() {
        let sol = solve_sdp(&two_by_two(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-7, "{}", sol.objective);
        assert!(min_eigenvalue(&sol.primal_blocks[0]) >= -1e-7);
        assert!(sol.gap <= 1e-8);
    }

    #[test]
    fn zero_polynomial_gives_zero() {
        // mu - 0 = sigma_0 with sigma_0 a 1x1 Gram over the constant monomial
        let prob = SdpProblem {
            block_dims: vec![1],
            num_free: 1,
            constraints: vec![Constraint { entries: vec![entry(0, 0, 0, 1.0)], free: vec![(0, -1.0)] }],
            rhs: vec![0.0],
            free_cost: vec![1.0],
            block_cost: vec![],
        };
        let sol = solve_sdp(&prob, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.objective.abs() < 1e-7, "{}", sol.objective);
    }

    #[test]
    fn block_cost_trace_minimization() {
        // min tr(X) s.t. X_01 = 1, X ⪰ 0 (2x2): optimum 2
        let prob = SdpProblem {
            block_dims: vec![2],
            num_free: 0,
            constraints: vec![Constraint { entries: vec![entry(0, 0, 1, 0.5)], free: vec![] }],
            rhs: vec![1.0],
            free_cost: vec![],
            block_cost: vec![entry(0, 0, 0, 1.0), entry(0, 1, 1, 1.0)],
        };
        let sol = solve_sdp(&prob, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn deterministic_iterates() {
        let a = solve_sdp(&two_by_two(), &SolverOptions::default()).unwrap();
        let b = solve_sdp(&two_by_two(), &SolverOptions::default()).unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.history.len(), b.history.len());
        for (s, t) in a.history.iter().zip(&b.history) {
            assert_eq!(s.primal_objective.to_bits(), t.primal_objective.to_bits());
            assert_eq!(s.dual_objective.to_bits(), t.dual_objective.to_bits());
        }
    }

    #[test]
    fn rejects_malformed_problems() {
        let mut p = two_by_two();
        p.constraints.clear();
        p.rhs.clear();
        assert!(solve_sdp(&p, &SolverOptions::default()).is_err());
        let mut q = two_by_two();
        q.constraints[0].entries[0].col = 5;
        assert!(solve_sdp(&q, &SolverOptions::default()).is_err());
    }

    #[test]
    fn max_iterations_reported() {
        let opts = SolverOptions { max_iter: 2, ..Default::default() };
        let sol = solve_sdp(&two_by_two(), &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::MaxIterations);
        assert_eq!(sol.iterations, 2);
    }

    #[test]
    fn sparse_dump_lists_every_entry() {
        let mut out = Vec::new();
        two_by_two().write_sparse(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("3 = rows\n1 = psd blocks\n1 = free variables\n2\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("3 1 1 2")).count(), 1);
        assert_eq!(text.lines().count(), 5 + 1 + 5);
    }
}
