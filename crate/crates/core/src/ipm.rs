//! Primal-dual log-barrier interior-point solver for the continuous
//! relaxations explored by branch-and-bound.
//!
//! Inequalities are linear, `h(p) = b + A p >= 0`, and each one carries a slack
//! `sigma = h(p)` kept strictly positive and a multiplier `lambda`. Equalities
//! are disjoint groups `sum p[vars] = rhs`, handled by projecting every
//! direction onto their null space. Each Newton step solves
//!
//! ```text
//! P (H + A' diag(lambda / sigma) A) P dp = -P (grad F - A' (gamma / sigma))
//! ```
//!
//! with Jacobi-preconditioned conjugate gradients, truncated on negative
//! curvature, followed by a fraction-to-boundary rule and an Armijo search on
//! the barrier function `F(p) - gamma * sum log sigma`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::transform::{Assignment, EqualityGroup, LinearRow, MinlpProblem};

/// Smooth objective with Hessian-vector products.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn value(&self, p: &[f64]) -> f64;
    fn gradient(&self, p: &[f64], grad: &mut [f64]);
    fn hess_vec(&self, p: &[f64], v: &[f64], out: &mut [f64]);

    /// Dense Hessian restricted to `vars`, row-major.
    fn hess_block(&self, p: &[f64], vars: &[usize]) -> Vec<f64> {
        let m = vars.len();
        let mut out = vec![0.0; m * m];
        let mut e = vec![0.0; self.dim()];
        let mut col = vec![0.0; self.dim()];
        for (b, &j) in vars.iter().enumerate() {
            e[j] = 1.0;
            self.hess_vec(p, &e, &mut col);
            e[j] = 0.0;
            for (a, &i) in vars.iter().enumerate() {
                out[a * m + b] = col[i];
            }
        }
        out
    }

    /// Hessian diagonal.
    fn hess_diag(&self, p: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.hess_vec(p, &e, &mut col);
            e[j] = 0.0;
            out[j] = col[j];
        }
        out
    }
}

impl Objective for MinlpProblem {
    fn dim(&self) -> usize {
        MinlpProblem::dim(self)
    }
    fn value(&self, p: &[f64]) -> f64 {
        self.objective_value(p)
    }
    fn gradient(&self, p: &[f64], grad: &mut [f64]) {
        MinlpProblem::gradient(self, p, grad)
    }
    fn hess_vec(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        MinlpProblem::hess_vec(self, p, v, out)
    }
    /// The objective is linear in each `z` and does not involve `y`.
    fn hess_block(&self, _p: &[f64], vars: &[usize]) -> Vec<f64> {
        debug_assert!(vars.iter().all(|&j| j >= self.num_x()));
        vec![0.0; vars.len() * vars.len()]
    }
    /// Multilinear in `x` and linear in `z`: the diagonal vanishes.
    fn hess_diag(&self, _p: &[f64]) -> Vec<f64> {
        vec![0.0; MinlpProblem::dim(self)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpmParams {
    pub kkt_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub gamma0: f64,
    pub gamma_factor: f64,
    pub gamma_min: f64,
    /// Maximum number of barrier-parameter levels.
    pub max_outer: usize,
    /// Maximum Newton iterations per barrier level.
    pub max_inner: usize,
    pub max_cg: usize,
    pub cg_tolerance: f64,
    pub multistarts: usize,
    pub fraction_to_boundary: f64,
    pub seed: u64,
}

impl Default for IpmParams {
    fn default() -> Self {
        Self {
            kkt_tolerance: 1e-8,
            feasibility_tolerance: 1e-8,
            gamma0: 0.1,
            gamma_factor: 0.2,
            gamma_min: 1e-9,
            max_outer: 100,
            max_inner: 60,
            max_cg: 200,
            cg_tolerance: 1e-10,
            multistarts: 3,
            fraction_to_boundary: 0.995,
            seed: 0,
        }
    }
}

/// Constraint family of a barrier row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Capacity,
    Selection,
    Lower,
    Upper,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

/// Multipliers of every barrier row plus the barrier parameter they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSolution {
    pub assignment: Assignment,
    pub objective: f64,
    pub kkt_residual: f64,
    pub status: RelaxStatus,
    pub multipliers: Multipliers,
    pub newton_iterations: usize,
}

/// Binary fixings, one slot per binary variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fixings {
    values: Vec<Option<bool>>,
}

impl Fixings {
    pub fn none(binary_count: usize) -> Self {
        Self { values: vec![None; binary_count] }
    }

    /// Fixes `var`. Fixing an already fixed variable is an error.
    pub fn fix(&mut self, var: usize, value: bool) -> Result<()> {
        match self.values.get(var) {
            None => Err(Error::Dimension(format!("binary variable {var} out of range"))),
            Some(Some(_)) => Err(Error::Config(format!("variable {var} fixed twice"))),
            Some(None) => {
                self.values[var] = Some(value);
                Ok(())
            }
        }
    }

    pub fn with(&self, var: usize, value: bool) -> Result<Self> {
        let mut f = self.clone();
        f.fix(var, value)?;
        Ok(f)
    }

    pub fn get(&self, var: usize) -> Option<bool> {
        self.values[var]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.values.iter().enumerate().filter_map(|(j, v)| v.map(|b| (j, b)))
    }
}

/// The relaxation restricted to the free variables, with fixed values folded
/// into constraint constants and rows scaled to unit max coefficient.
pub struct BarrierProblem<'a> {
    objective: &'a dyn Objective,
    dim: usize,
    free: Vec<bool>,
    /// Values of the fixed variables (free entries are zero).
    base: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    constants: Vec<f64>,
    families: Vec<Family>,
    equalities: Vec<EqualityGroup>,
    /// Free variables handled by conjugate gradients.
    primary: Vec<bool>,
    primary_equalities: Vec<usize>,
    blocks: Vec<Block>,
    /// Block and local position of each block variable.
    block_of: Vec<Option<(usize, usize)>>,
}

/// Free variables eliminated together by a dense solve.
struct Block {
    vars: Vec<usize>,
    /// Equality groups inside the block, as local positions.
    equalities: Vec<Vec<usize>>,
    /// Rows touching the block.
    rows: Vec<usize>,
}

/// Primal-dual iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub p: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Result of [`BarrierProblem::quadratic_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub dp: Vec<f64>,
    pub dsigma: Vec<f64>,
    pub dlambda: Vec<f64>,
    /// Largest primal step keeping every slack at least `(1 - tau)` times its value.
    pub step_length: f64,
    pub dual_step_length: f64,
    pub negative_curvature: bool,
    pub cg_iterations: usize,
}

/// Outcome of one barrier solve from one start.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierRun {
    pub iterate: Iterate,
    pub gamma: f64,
    pub objective: f64,
    pub kkt_residual: f64,
    pub status: RelaxStatus,
    pub newton_iterations: usize,
}

const SAFEGUARD_KAPPA: f64 = 1e10;
const MAX_SHIFT: f64 = 1e6;

impl<'a> BarrierProblem<'a> {
    /// Builds the barrier problem. `fixed[j]` pins variable `j`; `bounds[j]` may
    /// be infinite. Fails with [`Error::Infeasible`] when a row or equality
    /// left without free variables is violated.
    pub fn new(
        objective: &'a dyn Objective,
        rows: &[(LinearRow, Family)],
        equalities: &[EqualityGroup],
        bounds: &[(f64, f64)],
        fixed: &[Option<f64>],
        tolerance: f64,
    ) -> Result<Self> {
        let dim = objective.dim();
        if bounds.len() != dim || fixed.len() != dim {
            return Err(Error::Dimension("bounds and fixings must cover every variable".into()));
        }
        let free: Vec<bool> = fixed.iter().map(Option::is_none).collect();
        let base: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();

        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut constants = Vec::new();
        let mut families = Vec::new();
        let mut push_row = |coefs: &[(usize, f64)], constant: f64, family: Family| -> Result<()> {
            let mut c = constant;
            let mut kept: Vec<(usize, f64)> = Vec::with_capacity(coefs.len());
            for &(j, a) in coefs {
                if free[j] {
                    if a != 0.0 {
                        kept.push((j, a));
                    }
                } else {
                    c += a * base[j];
                }
            }
            let scale = kept.iter().map(|&(_, a)| a.abs()).fold(0.0, f64::max);
            if kept.is_empty() {
                if c < -tolerance * (1.0 + constant.abs()) {
                    return Err(Error::Infeasible);
                }
                return Ok(());
            }
            for (j, a) in kept {
                cols.push(j);
                vals.push(a / scale);
            }
            constants.push(c / scale);
            families.push(family);
            row_ptr.push(cols.len());
            Ok(())
        };
        for (row, family) in rows {
            push_row(&row.coefs, row.constant, *family)?;
        }
        for j in 0..dim {
            if !free[j] {
                continue;
            }
            let (lo, hi) = bounds[j];
            if lo.is_finite() {
                push_row(&[(j, 1.0)], -lo, Family::Lower)?;
            }
            if hi.is_finite() {
                push_row(&[(j, -1.0)], hi, Family::Upper)?;
            }
        }

        let mut eqs = Vec::new();
        let mut group_of = vec![None; dim];
        for eq in equalities {
            let mut rhs = eq.rhs;
            let mut vars = Vec::new();
            for &j in &eq.vars {
                if free[j] {
                    vars.push(j);
                } else {
                    rhs -= base[j];
                }
            }
            if vars.is_empty() {
                if rhs.abs() > tolerance {
                    return Err(Error::Infeasible);
                }
                continue;
            }
            for &j in &vars {
                if group_of[j].is_some() {
                    return Err(Error::Config("equality groups must be disjoint".into()));
                }
                group_of[j] = Some(eqs.len());
            }
            eqs.push(EqualityGroup { vars, rhs });
        }

        Ok(Self {
            objective,
            dim,
            base,
            row_ptr,
            cols,
            vals,
            constants,
            families,
            primary: free.clone(),
            primary_equalities: (0..eqs.len()).collect(),
            equalities: eqs,
            blocks: Vec::new(),
            block_of: vec![None; dim],
            free,
        })
    }

    /// Declares groups of variables to eliminate exactly in every Newton step.
    /// The Hessian must not couple different blocks, no row may touch two
    /// blocks, and every equality group must lie inside one block or outside
    /// all of them.
    pub fn with_blocks(mut self, blocks: &[Vec<usize>]) -> Result<Self> {
        for block in blocks {
            let vars: Vec<usize> = block.iter().copied().filter(|&j| self.free[j]).collect();
            if vars.is_empty() {
                continue;
            }
            let b = self.blocks.len();
            for (local, &j) in vars.iter().enumerate() {
                if self.block_of[j].is_some() {
                    return Err(Error::Config("blocks must be disjoint".into()));
                }
                self.block_of[j] = Some((b, local));
                self.primary[j] = false;
            }
            self.blocks.push(Block { vars, equalities: Vec::new(), rows: Vec::new() });
        }
        let mut primary_equalities = Vec::new();
        for (e, eq) in self.equalities.iter().enumerate() {
            let owners: Vec<Option<usize>> = eq.vars.iter().map(|&j| self.block_of[j].map(|(b, _)| b)).collect();
            match owners[0] {
                None if owners.iter().all(Option::is_none) => primary_equalities.push(e),
                Some(b) if owners.iter().all(|o| *o == Some(b)) => {
                    let locals = eq.vars.iter().map(|&j| self.block_of[j].expect("in block").1).collect();
                    self.blocks[b].equalities.push(locals);
                }
                _ => return Err(Error::Config("equality group straddles blocks".into())),
            }
        }
        self.primary_equalities = primary_equalities;
        for r in 0..self.row_count() {
            let mut owner = None;
            for (j, _) in self.row(r) {
                if let Some((b, _)) = self.block_of[j] {
                    if owner.is_some_and(|o| o != b) {
                        return Err(Error::Config("row touches two blocks".into()));
                    }
                    owner = Some(b);
                }
            }
            if let Some(b) = owner {
                self.blocks[b].rows.push(r);
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row_count(&self) -> usize {
        self.constants.len()
    }

    pub fn is_free(&self, j: usize) -> bool {
        self.free[j]
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    pub fn family(&self, row: usize) -> Family {
        self.families[row]
    }

    /// Free-variable equality groups after folding fixings.
    pub fn equalities(&self) -> &[EqualityGroup] {
        &self.equalities
    }

    /// A copy of `p` with the fixed variables reset to their pinned values.
    pub fn pin(&self, p: &mut [f64]) {
        for j in 0..self.dim {
            if !self.free[j] {
                p[j] = self.base[j];
            }
        }
    }

    pub fn fixed_values(&self) -> &[f64] {
        &self.base
    }

    fn row(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[k]..self.row_ptr[k + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// Slack of every row at `p`.
    pub fn slacks(&self, p: &[f64]) -> Vec<f64> {
        (0..self.row_count()).map(|k| self.constants[k] + self.row(k).map(|(j, a)| a * p[j]).sum::<f64>()).collect()
    }

    fn row_dot(&self, k: usize, v: &[f64]) -> f64 {
        self.row(k).map(|(j, a)| a * v[j]).sum()
    }

    /// `out += A' w`.
    fn add_transpose(&self, w: &[f64], out: &mut [f64]) {
        for (k, &wk) in w.iter().enumerate() {
            if wk != 0.0 {
                for (j, a) in self.row(k) {
                    out[j] += a * wk;
                }
            }
        }
    }

    /// Projects `v` onto the directions that keep fixed variables and
    /// equalities unchanged.
    pub fn project(&self, v: &mut [f64]) {
        for j in 0..self.dim {
            if !self.free[j] {
                v[j] = 0.0;
            }
        }
        for eq in &self.equalities {
            let mean = eq.vars.iter().map(|&j| v[j]).sum::<f64>() / eq.vars.len() as f64;
            for &j in &eq.vars {
                v[j] -= mean;
            }
        }
    }

    /// True when every slack is positive and every equality holds to `tol`.
    pub fn is_strictly_feasible(&self, p: &[f64], tol: f64) -> bool {
        self.slacks(p).iter().all(|&s| s > 0.0) && self.equality_residual(p) <= tol
    }

    fn equality_residual(&self, p: &[f64]) -> f64 {
        self.equalities
            .iter()
            .map(|eq| (eq.vars.iter().map(|&j| p[j]).sum::<f64>() - eq.rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Barrier function `F(p) - gamma * sum log sigma`; infinite outside the interior.
    pub fn barrier_value(&self, p: &[f64], gamma: f64) -> f64 {
        let mut log_sum = 0.0;
        for s in self.slacks(p) {
            if !(s > 0.0) {
                return f64::INFINITY;
            }
            log_sum += s.ln();
        }
        self.objective.value(p) - gamma * log_sum
    }

    /// Gradient of the barrier function (unprojected).
    pub fn barrier_gradient(&self, p: &[f64], gamma: f64, out: &mut [f64]) {
        self.objective.gradient(p, out);
        let w: Vec<f64> = self.slacks(p).iter().map(|s| -gamma / s).collect();
        self.add_transpose(&w, out);
    }

    /// Gradient of the Lagrangian `F - lambda' h` (unprojected).
    pub fn lagrangian_gradient(&self, p: &[f64], lambda: &[f64], out: &mut [f64]) {
        self.objective.gradient(p, out);
        let w: Vec<f64> = lambda.iter().map(|l| -l).collect();
        self.add_transpose(&w, out);
    }

    /// Max-norm of projected stationarity, complementarity `sigma lambda - gamma`
    /// and primal infeasibility.
    pub fn kkt_residual(&self, p: &[f64], multipliers: &Multipliers) -> f64 {
        let mut g = vec![0.0; self.dim];
        self.lagrangian_gradient(p, &multipliers.lambda, &mut g);
        self.project(&mut g);
        let stationarity = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sigma = self.slacks(p);
        let mut comp = 0.0f64;
        let mut infeas = self.equality_residual(p);
        for (s, l) in sigma.iter().zip(&multipliers.lambda) {
            comp = comp.max((s * l - multipliers.gamma).abs());
            infeas = infeas.max((-s).max(0.0)).max((-l).max(0.0));
        }
        stationarity.max(comp).max(infeas)
    }

    /// `(H + A' D A + shift I_primary) v` on the free variables.
    fn raw_apply(&self, p: &[f64], d: &[f64], shift: f64, v: &[f64], out: &mut [f64]) {
        self.objective.hess_vec(p, v, out);
        let w: Vec<f64> = (0..self.row_count()).map(|k| d[k] * self.row_dot(k, v)).collect();
        self.add_transpose(&w, out);
        for j in 0..self.dim {
            if !self.free[j] {
                out[j] = 0.0;
            } else if shift != 0.0 && self.primary[j] {
                out[j] += shift * v[j];
            }
        }
    }

    /// Zeroes everything but the primary variables and projects the primary
    /// equality groups.
    fn project_primary(&self, v: &mut [f64]) {
        for j in 0..self.dim {
            if !self.primary[j] {
                v[j] = 0.0;
            }
        }
        for &e in &self.primary_equalities {
            let eq = &self.equalities[e];
            let mean = eq.vars.iter().map(|&j| v[j]).sum::<f64>() / eq.vars.len() as f64;
            for &j in &eq.vars {
                v[j] -= mean;
            }
        }
    }

    /// Dense factorizations of the block systems `[B E'; E 0]`.
    fn factor_blocks(&self, p: &[f64], d: &[f64]) -> Vec<DenseLu> {
        self.blocks
            .iter()
            .map(|block| {
                let m = block.vars.len();
                let size = m + block.equalities.len();
                let mut k = vec![0.0; size * size];
                let h = self.objective.hess_block(p, &block.vars);
                for a in 0..m {
                    for b in 0..m {
                        k[a * size + b] = h[a * m + b];
                    }
                }
                for &r in &block.rows {
                    let entries: Vec<(usize, f64)> =
                        self.row(r).filter_map(|(j, a)| self.block_of[j].map(|(_, local)| (local, a))).collect();
                    for &(la, aa) in &entries {
                        for &(lb, ab) in &entries {
                            k[la * size + lb] += d[r] * aa * ab;
                        }
                    }
                }
                for (q, eq) in block.equalities.iter().enumerate() {
                    for &local in eq {
                        k[(m + q) * size + local] = 1.0;
                        k[local * size + m + q] = 1.0;
                    }
                }
                DenseLu::new(k, size)
            })
            .collect()
    }

    /// Solves every block system for the block entries of `rhs`; the result
    /// is zero outside the blocks.
    fn solve_blocks(&self, factors: &[DenseLu], rhs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (block, lu) in self.blocks.iter().zip(factors) {
            let mut local = vec![0.0; lu.size];
            for (a, &j) in block.vars.iter().enumerate() {
                local[a] = rhs[j];
            }
            lu.solve(&mut local);
            for (a, &j) in block.vars.iter().enumerate() {
                out[j] = local[a];
            }
        }
        out
    }

    /// Primal-dual Newton step at `iterate` for barrier parameter `gamma`.
    ///
    /// Block variables are eliminated exactly and conjugate gradients run on
    /// the Schur complement in the primary variables.
    pub fn quadratic_step(&self, iterate: &Iterate, gamma: f64, params: &IpmParams) -> Step {
        let p = &iterate.p;
        let sigma = self.slacks(p);
        // Primal barrier curvature; the dual estimate only enters through
        // the multiplier update.
        let d: Vec<f64> = sigma.iter().map(|s| gamma / (s * s)).collect();

        let mut rhs = vec![0.0; self.dim];
        self.barrier_gradient(p, gamma, &mut rhs);
        for j in 0..self.dim {
            rhs[j] = if self.free[j] { -rhs[j] } else { 0.0 };
        }
        let factors = self.factor_blocks(p, &d);
        let mut scratch = vec![0.0; self.dim];

        let eliminated = self.solve_blocks(&factors, &rhs);
        self.raw_apply(p, &d, 0.0, &eliminated, &mut scratch);
        let mut reduced_rhs: Vec<f64> = rhs.iter().zip(&scratch).map(|(b, s)| b - s).collect();
        self.project_primary(&mut reduced_rhs);

        let mut diag = self.objective.hess_diag(p);
        for k in 0..self.row_count() {
            for (j, a) in self.row(k) {
                diag[j] += d[k] * a * a;
            }
        }

        // Negative curvature is first countered by a growing diagonal shift;
        // only when the shift gets large is the truncated CG step used as is.
        let mut shift = 0.0;
        let mut cg_iterations = 0;
        let (dx, negative_curvature) = loop {
            let apply = |v: &[f64], out: &mut [f64]| {
                let mut t = vec![0.0; self.dim];
                self.raw_apply(p, &d, shift, v, &mut t);
                let u = self.solve_blocks(&factors, &t);
                self.raw_apply(p, &d, 0.0, &u, out);
                for j in 0..self.dim {
                    out[j] = t[j] - out[j];
                }
                self.project_primary(out);
            };
            let precondition = |r: &[f64]| -> Vec<f64> {
                let mut z: Vec<f64> = r
                    .iter()
                    .zip(&diag)
                    .map(|(ri, di)| if di + shift > 1e-300 { ri / (di + shift) } else { *ri })
                    .collect();
                self.project_primary(&mut z);
                z
            };
            let (dx, negative, iters) = steihaug(self.dim, &apply, &precondition, &reduced_rhs, params);
            cg_iterations += iters;
            if !negative || shift >= MAX_SHIFT {
                break (dx, negative);
            }
            shift = if shift == 0.0 { 1e-6 } else { shift * 10.0 };
        };

        self.raw_apply(p, &d, 0.0, &dx, &mut scratch);
        let back: Vec<f64> = rhs.iter().zip(&scratch).map(|(b, s)| b - s).collect();
        let dw = self.solve_blocks(&factors, &back);
        let dp: Vec<f64> = dx.iter().zip(&dw).map(|(a, b)| a + b).collect();

        let dsigma: Vec<f64> = (0..self.row_count()).map(|k| self.row_dot(k, &dp)).collect();
        let dlambda: Vec<f64> = (0..self.row_count())
            .map(|k| gamma / sigma[k] - iterate.lambda[k] - d[k] * dsigma[k])
            .collect();
        let tau = params.fraction_to_boundary;
        let step_length = max_step(&sigma, &dsigma, tau);
        let dual_step_length = max_step(&iterate.lambda, &dlambda, tau);
        Step { dp, dsigma, dlambda, step_length, dual_step_length, negative_curvature, cg_iterations }
    }

    /// Runs the barrier method from a strictly feasible `start`.
    pub fn solve(&self, start: &[f64], params: &IpmParams) -> Result<BarrierRun> {
        let mut p = start.to_vec();
        self.pin(&mut p);
        if !self.is_strictly_feasible(&p, 1e-9) {
            return Err(Error::Config("start point is not strictly feasible".into()));
        }
        let mut lambda = vec![1.0; self.row_count()];
        let mut gamma = params.gamma0;
        let mut newton = 0;
        let mut grad = vec![0.0; self.dim];
        let mut levels = 0;
        loop {
            let last_level = gamma <= params.gamma_min || levels + 1 >= params.max_outer;
            let level_tol = if last_level { params.kkt_tolerance } else { (10.0 * gamma).max(params.kkt_tolerance) };
            for _ in 0..params.max_inner {
                let mult = Multipliers { lambda: lambda.clone(), gamma };
                if self.kkt_residual(&p, &mult) <= level_tol {
                    break;
                }
                let iterate = Iterate { p: p.clone(), lambda: lambda.clone() };
                let step = self.quadratic_step(&iterate, gamma, params);
                newton += 1;

                self.barrier_gradient(&p, gamma, &mut grad);
                let slope = dot(&grad, &step.dp);
                let phi = self.barrier_value(&p, gamma);
                let mut alpha = step.step_length.min(1.0);
                let mut trial = p.clone();
                let mut accepted = false;
                if slope < 0.0 {
                    for _ in 0..60 {
                        for j in 0..self.dim {
                            trial[j] = p[j] + alpha * step.dp[j];
                        }
                        let phi_new = self.barrier_value(&trial, gamma);
                        if phi_new <= phi + 1e-4 * alpha * slope + 1e-13 * phi.abs() {
                            accepted = true;
                            break;
                        }
                        alpha *= 0.5;
                    }
                }
                if accepted {
                    p.copy_from_slice(&trial);
                }
                let alpha_dual = step.dual_step_length.min(1.0);
                let sigma = self.slacks(&p);
                for k in 0..lambda.len() {
                    let l = lambda[k] + alpha_dual * step.dlambda[k];
                    let lo = gamma / (SAFEGUARD_KAPPA * sigma[k]);
                    let hi = SAFEGUARD_KAPPA * gamma / sigma[k];
                    lambda[k] = l.clamp(lo, hi);
                }
                if !accepted {
                    // Primal progress has stalled; refresh the multipliers from
                    // the slacks and move to the next level.
                    for k in 0..lambda.len() {
                        lambda[k] = gamma / sigma[k];
                    }
                    break;
                }
            }
            levels += 1;
            if last_level {
                break;
            }
            gamma = (gamma * params.gamma_factor).max(params.gamma_min.min(gamma * params.gamma_factor));
        }
        let multipliers = Multipliers { lambda, gamma };
        let kkt = self.kkt_residual(&p, &multipliers);
        let status = if kkt <= params.kkt_tolerance { RelaxStatus::Optimal } else { RelaxStatus::IterationLimit };
        Ok(BarrierRun {
            objective: self.objective.value(&p),
            iterate: Iterate { p, lambda: multipliers.lambda },
            gamma,
            kkt_residual: kkt,
            status,
            newton_iterations: newton,
        })
    }
}

/// Preconditioned CG from zero, truncated on negative curvature. A negative
/// first curvature returns the preconditioned steepest-descent direction,
/// scaled to unit max-norm.
fn steihaug(
    n: usize,
    apply: &dyn Fn(&[f64], &mut [f64]),
    precondition: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    params: &IpmParams,
) -> (Vec<f64>, bool, usize) {
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return (x, false, 0);
    }
    let mut r = b.to_vec();
    let mut z = precondition(&r);
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut md = vec![0.0; n];
    for k in 0..params.max_cg {
        apply(&dir, &mut md);
        let curvature = dot(&dir, &md);
        if curvature <= 1e-14 * dot(&dir, &dir) {
            if k == 0 {
                let scale = inf_norm(&dir);
                let sd = if scale > 0.0 { dir.iter().map(|v| v / scale).collect() } else { dir };
                return (sd, true, k + 1);
            }
            return (x, true, k + 1);
        }
        let alpha = rz / curvature;
        for j in 0..n {
            x[j] += alpha * dir[j];
            r[j] -= alpha * md[j];
        }
        if norm(&r) <= params.cg_tolerance * b_norm {
            return (x, false, k + 1);
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for j in 0..n {
            dir[j] = z[j] + beta * dir[j];
        }
    }
    (x, false, params.max_cg)
}

/// LU factorization with partial pivoting of a small dense matrix.
struct DenseLu {
    size: usize,
    lu: Vec<f64>,
    pivots: Vec<usize>,
}

impl DenseLu {
    fn new(mut a: Vec<f64>, size: usize) -> Self {
        let mut pivots = vec![0; size];
        for col in 0..size {
            let mut best = col;
            for row in col + 1..size {
                if a[row * size + col].abs() > a[best * size + col].abs() {
                    best = row;
                }
            }
            pivots[col] = best;
            if best != col {
                for k in 0..size {
                    a.swap(col * size + k, best * size + k);
                }
            }
            let pivot = a[col * size + col];
            if pivot.abs() < 1e-300 {
                a[col * size + col] = 1e-300;
                continue;
            }
            for row in col + 1..size {
                let factor = a[row * size + col] / pivot;
                a[row * size + col] = factor;
                for k in col + 1..size {
                    a[row * size + k] -= factor * a[col * size + k];
                }
            }
        }
        Self { size, lu: a, pivots }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.size;
        for col in 0..n {
            b.swap(col, self.pivots[col]);
        }
        for row in 0..n {
            for k in 0..row {
                b[row] -= self.lu[row * n + k] * b[k];
            }
        }
        for row in (0..n).rev() {
            for k in row + 1..n {
                b[row] -= self.lu[row * n + k] * b[k];
            }
            b[row] /= self.lu[row * n + row];
        }
    }
}

fn max_step(values: &[f64], deltas: &[f64], tau: f64) -> f64 {
    let mut alpha: f64 = 1.0;
    for (v, dv) in values.iter().zip(deltas) {
        if *dv < 0.0 {
            alpha = alpha.min(-tau * v / dv);
        }
    }
    alpha
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest violation of the fixings: capacity overflow of the nodes (megabits)
/// and mismatch of the neighbor-selection sums. Zero means a strictly feasible
/// relaxation exists.
pub fn phase1_violation(problem: &MinlpProblem, fixings: &Fixings) -> f64 {
    let mut worst: f64 = 0.0;
    let s = problem.scenario();
    for n in 0..problem.node_count() {
        let load: f64 = (0..problem.content_count())
            .filter(|&i| fixings.get(problem.x_index(n, i)) == Some(true))
            .map(|i| s.size(i))
            .sum();
        worst = worst.max(load - s.capacity(n));
    }
    for eq in problem.equality_groups() {
        let ones = eq.vars.iter().filter(|&&j| fixings.get(j) == Some(true)).count() as f64;
        let free = eq.vars.iter().filter(|&&j| fixings.get(j).is_none()).count() as f64;
        worst = worst.max(ones - eq.rhs).max(eq.rhs - ones - free);
    }
    worst
}

/// Fixings plus the ones they force: a node with no spare capacity caches
/// nothing more, and a selection group with a single way left takes it.
fn implied_fixed(problem: &MinlpProblem, fixings: &Fixings) -> Vec<Option<f64>> {
    let mut fixed: Vec<Option<f64>> = vec![None; problem.dim()];
    for (j, b) in fixings.iter() {
        fixed[j] = Some(if b { 1.0 } else { 0.0 });
    }
    let s = problem.scenario();
    for n in 0..problem.node_count() {
        let load: f64 = (0..problem.content_count())
            .filter(|&i| fixed[problem.x_index(n, i)] == Some(1.0))
            .map(|i| s.size(i))
            .sum();
        let spare = s.capacity(n) - load;
        if spare <= 1e-9 * (1.0 + s.capacity(n)) {
            for i in 0..problem.content_count() {
                let j = problem.x_index(n, i);
                if fixed[j].is_none() {
                    fixed[j] = Some(0.0);
                }
            }
        }
    }
    for eq in problem.equality_groups() {
        let zeros = eq.vars.iter().filter(|&&j| fixed[j] == Some(0.0)).count();
        let free: Vec<usize> = eq.vars.iter().copied().filter(|&j| fixed[j].is_none()).collect();
        if free.is_empty() {
            continue;
        }
        if zeros >= 1 {
            free.iter().for_each(|&j| fixed[j] = Some(1.0));
        } else if free.len() == 1 {
            fixed[free[0]] = Some(0.0);
        }
    }
    fixed
}

/// Barrier problem of the relaxation under `fixings`.
pub fn barrier_for<'a>(problem: &'a MinlpProblem, fixings: &Fixings) -> Result<BarrierProblem<'a>> {
    if phase1_violation(problem, fixings) > 1e-6 {
        return Err(Error::Infeasible);
    }
    let fixed = implied_fixed(problem, fixings);
    let rows: Vec<(LinearRow, Family)> = problem
        .inequality_rows()
        .iter()
        .enumerate()
        .map(|(k, r)| (r.clone(), if k < problem.capacity_row_count() { Family::Capacity } else { Family::Selection }))
        .collect();
    let bounds: Vec<(f64, f64)> = (0..problem.dim()).map(|j| problem.bounds(j)).collect();
    let blocks: Vec<Vec<usize>> = problem
        .groups()
        .iter()
        .map(|g| std::iter::once(g.z).chain(g.neighbors.iter().map(|t| t.y)).collect())
        .collect();
    let b = BarrierProblem::new(problem, &rows, problem.equality_groups(), &bounds, &fixed, 1e-9)?;
    b.with_blocks(&blocks)
}

/// Smallest `z` allowed by the selection rows at `p`.
fn z_lower(problem: &MinlpProblem, p: &[f64], g: usize) -> f64 {
    let v = problem.big_m;
    let group = &problem.groups()[g];
    group
        .neighbors
        .iter()
        .map(|t| crate::transform::selection_cost(t, p[t.x], v) - v * p[t.y])
        .fold(0.0, f64::max)
}

/// Strictly interior start: free `x` pulled into `[0.05, 0.95]` toward
/// `target_x`, scaled down where capacity would be exceeded; free `y` set to
/// `1 - w` for a positive weight vector `w` (the selection sum then holds);
/// `z` one second above its lower bound.
fn interior_start(
    problem: &MinlpProblem,
    barrier: &BarrierProblem<'_>,
    target_x: &dyn Fn(usize) -> f64,
    weights: &mut dyn FnMut(usize, &[f64]) -> Vec<f64>,
) -> Vec<f64> {
    let mut p = barrier.fixed_values().to_vec();
    let s = problem.scenario();
    for n in 0..problem.node_count() {
        let mut spare = s.capacity(n);
        let mut free_load = 0.0;
        for i in 0..problem.content_count() {
            let j = problem.x_index(n, i);
            if barrier.is_free(j) {
                p[j] = 0.05 + 0.9 * target_x(j).clamp(0.0, 1.0);
                free_load += s.size(i) * p[j];
            } else {
                spare -= s.size(i) * p[j];
            }
        }
        if free_load > 0.9 * spare {
            let theta = 0.9 * spare / free_load;
            for i in 0..problem.content_count() {
                let j = problem.x_index(n, i);
                if barrier.is_free(j) {
                    p[j] *= theta;
                }
            }
        }
    }
    for (g, group) in problem.groups().iter().enumerate() {
        let free: Vec<usize> = group.neighbors.iter().map(|t| t.y).filter(|&y| barrier.is_free(y)).collect();
        if !free.is_empty() {
            let costs: Vec<f64> = group
                .neighbors
                .iter()
                .filter(|t| barrier.is_free(t.y))
                .map(|t| crate::transform::selection_cost(t, p[t.x], problem.big_m))
                .collect();
            let w = weights(g, &costs);
            for (&y, wk) in free.iter().zip(w) {
                p[y] = 1.0 - wk;
            }
        }
        p[group.z] = z_lower(problem, &p, g) + 1.0;
    }
    p
}

/// Completes a binary-fixed point: `z` at its lower bound.
fn exact_leaf(problem: &MinlpProblem, fixed: &[f64]) -> Vec<f64> {
    let mut p = fixed.to_vec();
    for (g, group) in problem.groups().iter().enumerate() {
        p[group.z] = z_lower(problem, &p, g);
    }
    p
}

/// Solves the continuous relaxation under `fixings`. `warm` is a parent
/// relaxation point (or any full-length point) whose rounded `x` seeds one of
/// the starts.
pub fn solve_relaxation(
    problem: &MinlpProblem,
    fixings: &Fixings,
    params: &IpmParams,
    warm: Option<&[f64]>,
) -> RelaxedSolution {
    let infeasible = || RelaxedSolution {
        assignment: Assignment { values: vec![] },
        objective: f64::INFINITY,
        kkt_residual: f64::INFINITY,
        status: RelaxStatus::Infeasible,
        multipliers: Multipliers { lambda: vec![], gamma: 0.0 },
        newton_iterations: 0,
    };
    let barrier = match barrier_for(problem, fixings) {
        Ok(b) => b,
        Err(_) => return infeasible(),
    };
    let binaries_free = (0..problem.num_binary()).any(|j| barrier.is_free(j));
    if !binaries_free {
        let p = exact_leaf(problem, barrier.fixed_values());
        return RelaxedSolution {
            objective: problem.objective_value(&p),
            assignment: Assignment { values: p },
            kkt_residual: 0.0,
            status: RelaxStatus::Optimal,
            multipliers: Multipliers { lambda: vec![], gamma: 0.0 },
            newton_iterations: 0,
        };
    }

    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(interior_start(problem, &barrier, &|_| 0.5, &mut |_, c| vec![1.0 / c.len() as f64; c.len()]));
    if let Some(w) = warm.filter(|w| w.len() >= problem.num_x()) {
        if params.multistarts >= 2 {
            let rounded = |j: usize| if w[j] >= 0.5 { 1.0 } else { 0.0 };
            starts.push(interior_start(problem, &barrier, &rounded, &mut |_, costs| {
                let k = costs.len();
                let mut best = 0;
                for (m, &c) in costs.iter().enumerate() {
                    if c < costs[best] {
                        best = m;
                    }
                }
                (0..k).map(|m| 0.1 / k as f64 + if m == best { 0.9 } else { 0.0 }).collect()
            }));
        }
    }
    if starts.len() < params.multistarts {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let draws: Vec<f64> = (0..problem.num_x()).map(|_| rng.gen::<f64>()).collect();
        starts.push(interior_start(problem, &barrier, &|j| draws[j], &mut |_, c| {
            let raw: Vec<f64> = (0..c.len()).map(|_| 0.1 + rng.gen::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|r| r / total).collect()
        }));
    }

    let mut best: Option<BarrierRun> = None;
    for start in starts.iter().take(params.multistarts.max(1)) {
        let run = match barrier.solve(start, params) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let better = match &best {
            None => true,
            Some(b) => {
                let (ro, bo) = (run.status == RelaxStatus::Optimal, b.status == RelaxStatus::Optimal);
                (ro && !bo) || (ro == bo && run.objective < b.objective)
            }
        };
        if better {
            best = Some(run);
        }
    }
    match best {
        None => infeasible(),
        Some(run) => RelaxedSolution {
            assignment: Assignment { values: run.iterate.p },
            objective: run.objective,
            kkt_residual: run.kkt_residual,
            status: run.status,
            multipliers: Multipliers { lambda: run.iterate.lambda, gamma: run.gamma },
            newton_iterations: run.newton_iterations,
        },
    }
}

/// KKT residual of `assignment` for the relaxation under `fixings`.
pub fn kkt_residual(problem: &MinlpProblem, fixings: &Fixings, assignment: &Assignment, multipliers: &Multipliers) -> Result<f64> {
    let barrier = barrier_for(problem, fixings)?;
    if assignment.values.len() != problem.dim() || multipliers.lambda.len() != barrier.row_count() {
        return Err(Error::Dimension("assignment or multipliers do not match the relaxation".into()));
    }
    Ok(barrier.kkt_residual(&assignment.values, multipliers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioTemplate;
    use crate::transform::{transform, BigM};
    use approx::assert_abs_diff_eq;

    /// `sum_j (p_j - c_j)^2`.
    struct Quadratic {
        center: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            self.center.len()
        }
        fn value(&self, p: &[f64]) -> f64 {
            p.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum()
        }
        fn gradient(&self, p: &[f64], g: &mut [f64]) {
            for j in 0..p.len() {
                g[j] = 2.0 * (p[j] - self.center[j]);
            }
        }
        fn hess_vec(&self, _p: &[f64], v: &[f64], out: &mut [f64]) {
            for j in 0..v.len() {
                out[j] = 2.0 * v[j];
            }
        }
    }

    fn unit_box(q: &Quadratic) -> BarrierProblem<'_> {
        let n = q.center.len();
        BarrierProblem::new(q, &[], &[], &vec![(0.0, 1.0); n], &vec![None; n], 1e-9).unwrap()
    }

    #[test]
    fn one_dimensional_kkt_point() {
        let q = Quadratic { center: vec![0.3] };
        let b = unit_box(&q);
        let mut last = f64::INFINITY;
        for gamma in [1e-2, 1e-4, 1e-6, 1e-8, 1e-10] {
            let sigma = b.slacks(&[0.3]);
            let lambda: Vec<f64> = sigma.iter().map(|s| gamma / s).collect();
            let r = b.kkt_residual(&[0.3], &Multipliers { lambda, gamma });
            assert!(r <= last);
            last = r;
        }
        assert!(last <= 1e-8);
    }

    #[test]
    fn quadratic_step_reaches_minimizer() {
        let q = Quadratic { center: vec![0.3] };
        let b = unit_box(&q);
        let gamma = 1e-12;
        let p = vec![0.5];
        let lambda = b.slacks(&p).iter().map(|s| gamma / s).collect();
        let step = b.quadratic_step(&Iterate { p: p.clone(), lambda }, gamma, &IpmParams::default());
        assert!(step.step_length >= 1.0);
        assert_abs_diff_eq!(p[0] + step.dp[0], 0.3, epsilon = 1e-8);
    }

    #[test]
    fn zero_step_at_kkt_point() {
        let q = Quadratic { center: vec![0.3, 0.6] };
        let b = unit_box(&q);
        let params = IpmParams::default();
        let run = b.solve(&[0.5, 0.5], &params).unwrap();
        assert_eq!(run.status, RelaxStatus::Optimal);
        assert_abs_diff_eq!(run.iterate.p[0], 0.3, epsilon = 1e-8);
        // Polish onto the central path for the final gamma, then the step vanishes.
        let mut it = run.iterate.clone();
        for _ in 0..20 {
            let step = b.quadratic_step(&it, run.gamma, &params);
            for j in 0..2 {
                it.p[j] += step.dp[j];
            }
            for k in 0..it.lambda.len() {
                it.lambda[k] += step.dlambda[k];
            }
        }
        let step = b.quadratic_step(&it, run.gamma, &params);
        assert!(inf_norm(&step.dp) <= 1e-10, "{:?}", step.dp);
    }

    #[test]
    fn random_point_is_not_stationary() {
        let q = Quadratic { center: vec![0.3, 0.6, 0.1] };
        let b = unit_box(&q);
        let p = [0.8, 0.2, 0.5];
        let lambda = vec![1.0; b.row_count()];
        assert!(b.kkt_residual(&p, &Multipliers { lambda, gamma: 1e-3 }) > 0.0);
    }

    #[test]
    fn active_bound_and_equality() {
        // min (p0 - 1.5)^2 + (p1 + 0.2)^2 over the box with p0 + p1 = 1.
        let q = Quadratic { center: vec![1.5, -0.2] };
        let eq = EqualityGroup { vars: vec![0, 1], rhs: 1.0 };
        let b = BarrierProblem::new(&q, &[], &[eq], &[(0.0, 1.0); 2], &[None, None], 1e-9).unwrap();
        let run = b.solve(&[0.5, 0.5], &IpmParams::default()).unwrap();
        assert_eq!(run.status, RelaxStatus::Optimal, "{}", run.kkt_residual);
        assert_abs_diff_eq!(run.iterate.p[0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(run.iterate.p[1], 0.0, epsilon = 1e-7);
    }

    #[test]
    fn barrier_value_tends_to_objective() {
        let q = Quadratic { center: vec![0.3, 0.6] };
        let b = unit_box(&q);
        let p = [0.4, 0.7];
        let f = q.value(&p);
        let mut last = f64::INFINITY;
        for k in 1..=8 {
            let diff = (b.barrier_value(&p, 10f64.powi(-k)) - f).abs();
            assert!(diff < last);
            last = diff;
        }
        assert!(last < 1e-7);
    }

    #[test]
    fn fixings_are_single_use() {
        let mut f = Fixings::none(4);
        f.fix(2, true).unwrap();
        assert!(f.fix(2, false).is_err());
        assert!(f.fix(9, false).is_err());
        assert_eq!(f.count(), 1);
    }

    #[test]
    fn relaxation_of_sample_instance() {
        let t = ScenarioTemplate { node_count: 3, content_count: 6, ..Default::default() }.with_capacity_gb(0.5);
        let s = t.build(4).unwrap();
        let prob = transform(&s, BigM::Auto);
        let sol = solve_relaxation(&prob, &Fixings::none(prob.num_binary()), &IpmParams::default(), None);
        assert_eq!(sol.status, RelaxStatus::Optimal, "kkt {}", sol.kkt_residual);
        assert!(prob.check_feasibility(&sol.assignment, 1e-7).is_empty());
        let check = kkt_residual(&prob, &Fixings::none(prob.num_binary()), &sol.assignment, &sol.multipliers).unwrap();
        assert!(check <= 1e-8);
    }

    #[test]
    fn overfull_fixings_are_infeasible() {
        let t = ScenarioTemplate { node_count: 2, content_count: 4, ..Default::default() }.with_capacity_gb(0.3);
        let s = t.build(1).unwrap();
        let prob = transform(&s, BigM::Auto);
        let mut f = Fixings::none(prob.num_binary());
        for i in 0..4 {
            f.fix(prob.x_index(0, i), true).unwrap();
        }
        assert!(phase1_violation(&prob, &f) > 1e-6);
        let sol = solve_relaxation(&prob, &f, &IpmParams::default(), None);
        assert_eq!(sol.status, RelaxStatus::Infeasible);
    }

    #[test]
    fn fully_fixed_is_exact() {
        let t = ScenarioTemplate { node_count: 3, content_count: 3, ..Default::default() }.with_capacity_gb(0.3);
        let s = t.build(2).unwrap();
        let prob = transform(&s, BigM::Auto);
        let pl = crate::scenario::Placement::from_matrix(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let a = prob.assignment_of(&pl);
        let mut f = Fixings::none(prob.num_binary());
        for j in 0..prob.num_binary() {
            f.fix(j, a.values[j] > 0.5).unwrap();
        }
        let sol = solve_relaxation(&prob, &f, &IpmParams::default(), None);
        assert_eq!(sol.status, RelaxStatus::Optimal);
        assert_abs_diff_eq!(sol.objective, s.total_average_delay(&pl).unwrap(), epsilon = 1e-9);
        assert_eq!(sol.newton_iterations, 0);
    }
}
