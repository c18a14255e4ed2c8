//! Mixed-integer nonlinear reformulation of the placement problem.
//!
//! Variables are stored in one flat vector `p = [x | y | z]`:
//!
//! * `x[n*I + i]` is 1 when node `n` caches content `i`;
//! * `y` holds one entry per (requester `n`, neighbor `m`, content `i`); the
//!   neighbor whose `y` is 0 is the delivering neighbor. Entries of one
//!   `(n, i)` pair are contiguous in neighbor order;
//! * `z[n*I + i]` is the neighbor transfer time chosen for `(n, i)`.
//!
//! With `Q(x_m) = x_m * c/l + (1 - x_m) * V` the constraints are
//!
//! * capacity: `s_n - sum_i c_i x_ni >= 0`;
//! * selection: `z_ni - Q(x_mi) + V y_nmi >= 0` for every neighbor `m`;
//! * `sum_m y_nmi = |neighbors(n)| - 1`;
//!
//! and the objective is `sum w [a + u (z + P (D - z))]` with `w = f U`,
//! `a` the access delay, `u = 1 - x_ni`, `P = prod_m (1 - x_mi)` and
//! `D` the extra delay of a content-server fetch.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scenario::{Placement, Scenario};

/// Big-M choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BigM {
    Auto,
    Value(f64),
}

/// Neighbor entry of one `(n, i)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborTerm {
    pub node: usize,
    /// Index of `x_mi`.
    pub x: usize,
    /// Index of `y_nmi`.
    pub y: usize,
    /// Transfer time `c_i / l_nm`.
    pub transfer: f64,
}

/// Precomputed data for one `(n, i)` objective term.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub node: usize,
    pub content: usize,
    pub weight: f64,
    pub access: f64,
    /// `d_delta - access`.
    pub cloud_extra: f64,
    pub x: usize,
    pub z: usize,
    pub neighbors: Vec<NeighborTerm>,
}

/// `h(p) = constant + sum coef * p[var] >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub coefs: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinearRow {
    pub fn eval(&self, p: &[f64]) -> f64 {
        self.constant + self.coefs.iter().map(|&(j, a)| a * p[j]).sum::<f64>()
    }
}

/// `sum p[vars] = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityGroup {
    pub vars: Vec<usize>,
    pub rhs: f64,
}

/// Variable values of the reformulated problem, in the flat layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub values: Vec<f64>,
}

/// A constraint violation reported by [`MinlpProblem::check_feasibility`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Dimension { expected: usize, got: usize },
    /// Node stores more than its capacity (amount in megabits).
    Capacity { node: usize, excess: f64 },
    Selection { node: usize, neighbor: usize, content: usize, amount: f64 },
    Equality { node: usize, content: usize, sum: f64, expected: f64 },
    Bound { var: usize, value: f64, lower: f64, upper: f64 },
}

/// The reformulated problem. Immutable once built.
#[derive(Debug, Clone)]
pub struct MinlpProblem {
    scenario: Arc<Scenario>,
    pub big_m: f64,
    nodes: usize,
    contents: usize,
    num_y: usize,
    groups: Vec<Group>,
    rows: Vec<LinearRow>,
    equalities: Vec<EqualityGroup>,
}

/// AUTO big-M: ten times the slowest neighbor transfer plus the slowest
/// content-server fetch.
pub fn auto_big_m(scenario: &Scenario) -> f64 {
    let mut max_transfer: f64 = 0.0;
    let mut max_cloud: f64 = 0.0;
    for n in 0..scenario.node_count() {
        for i in 0..scenario.content_count() {
            max_cloud = max_cloud.max(scenario.d_delta(n, i));
            for &m in scenario.neighbors(n) {
                max_transfer = max_transfer.max(scenario.transfer(n, m, i).unwrap_or(0.0));
            }
        }
    }
    10.0 * max_transfer + max_cloud
}

/// Builds the reformulated problem.
pub fn transform(scenario: &Scenario, big_m: BigM) -> MinlpProblem {
    MinlpProblem::new(Arc::new(scenario.clone()), big_m)
}

impl MinlpProblem {
    pub fn new(scenario: Arc<Scenario>, big_m: BigM) -> Self {
        let v = match big_m {
            BigM::Auto => auto_big_m(&scenario),
            BigM::Value(v) => v,
        };
        let nodes = scenario.node_count();
        let contents = scenario.content_count();
        let nx = nodes * contents;
        let num_y: usize = (0..nodes).map(|n| scenario.neighbors(n).len()).sum::<usize>() * contents;

        let mut groups = Vec::with_capacity(nx);
        let mut next_y = nx;
        for n in 0..nodes {
            for i in 0..contents {
                let neighbors = scenario
                    .neighbors(n)
                    .iter()
                    .map(|&m| {
                        let term = NeighborTerm {
                            node: m,
                            x: m * contents + i,
                            y: next_y,
                            transfer: scenario.transfer(n, m, i).expect("neighbor link"),
                        };
                        next_y += 1;
                        term
                    })
                    .collect();
                let access = scenario.d_alpha(n, i);
                groups.push(Group {
                    node: n,
                    content: i,
                    weight: scenario.weight(n, i),
                    access,
                    cloud_extra: scenario.d_delta(n, i) - access,
                    x: n * contents + i,
                    z: nx + num_y + n * contents + i,
                    neighbors,
                });
            }
        }

        let mut rows = Vec::new();
        for n in 0..nodes {
            rows.push(LinearRow {
                coefs: (0..contents).map(|i| (n * contents + i, -scenario.size(i))).collect(),
                constant: scenario.capacity(n),
            });
        }
        for g in &groups {
            for t in &g.neighbors {
                rows.push(LinearRow { coefs: vec![(g.z, 1.0), (t.y, v), (t.x, v - t.transfer)], constant: -v });
            }
        }
        let equalities = groups
            .iter()
            .map(|g| EqualityGroup {
                vars: g.neighbors.iter().map(|t| t.y).collect(),
                rhs: g.neighbors.len() as f64 - 1.0,
            })
            .collect();

        Self { scenario, big_m: v, nodes, contents, num_y, groups, rows, equalities }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn content_count(&self) -> usize {
        self.contents
    }

    pub fn num_x(&self) -> usize {
        self.nodes * self.contents
    }

    pub fn num_y(&self) -> usize {
        self.num_y
    }

    pub fn num_z(&self) -> usize {
        self.nodes * self.contents
    }

    pub fn dim(&self) -> usize {
        self.num_x() + self.num_y + self.num_z()
    }

    /// Binary variables are `x` then `y`, indices `0..num_binary()`.
    pub fn num_binary(&self) -> usize {
        self.num_x() + self.num_y
    }

    pub fn x_index(&self, n: usize, i: usize) -> usize {
        n * self.contents + i
    }

    pub fn z_index(&self, n: usize, i: usize) -> usize {
        self.num_x() + self.num_y + n * self.contents + i
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, n: usize, i: usize) -> &Group {
        &self.groups[n * self.contents + i]
    }

    /// Capacity rows (first `N`) followed by selection rows.
    pub fn inequality_rows(&self) -> &[LinearRow] {
        &self.rows
    }

    pub fn capacity_row_count(&self) -> usize {
        self.nodes
    }

    /// One neighbor-selection equality per `(n, i)`, in group order.
    pub fn equality_groups(&self) -> &[EqualityGroup] {
        &self.equalities
    }

    /// Box bounds. Binaries in `[0, 1]`; `z` in `[0, 2V]`, the upper bound only
    /// keeps the barrier subproblem bounded and is never active at a solution.
    pub fn bounds(&self, var: usize) -> (f64, f64) {
        if var < self.num_binary() {
            (0.0, 1.0)
        } else {
            (0.0, 2.0 * self.big_m)
        }
    }

    /// Describes variable `var` as `x(n,i)`, `y(n,m,i)` or `z(n,i)` with
    /// one-based ids.
    pub fn describe(&self, var: usize) -> String {
        if var < self.num_x() {
            format!("x({},{})", var / self.contents + 1, var % self.contents + 1)
        } else if var < self.num_binary() {
            for g in &self.groups {
                if let Some(t) = g.neighbors.iter().find(|t| t.y == var) {
                    return format!("y({},{},{})", g.node + 1, t.node + 1, g.content + 1);
                }
            }
            unreachable!("y index in range")
        } else {
            let k = var - self.num_binary();
            format!("z({},{})", k / self.contents + 1, k % self.contents + 1)
        }
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension(format!("assignment has {} entries, problem has {}", p.len(), self.dim())));
        }
        Ok(())
    }

    /// Exact objective for any (possibly fractional) assignment.
    pub fn evaluate_objective(&self, assignment: &Assignment) -> Result<f64> {
        self.check_dim(&assignment.values)?;
        Ok(self.objective_value(&assignment.values))
    }

    /// Objective on a raw vector; the caller guarantees the length.
    pub fn objective_value(&self, p: &[f64]) -> f64 {
        self.groups.iter().map(|g| group_value(g, p)).sum()
    }

    /// Writes the objective gradient into `grad`.
    pub fn gradient(&self, p: &[f64], grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut others = Vec::new();
        for g in &self.groups {
            let u = 1.0 - p[g.x];
            let z = p[g.z];
            let e = g.cloud_extra - z;
            products_without_one(g, p, &mut others);
            let prod = full_product(g, p);
            grad[g.x] += -g.weight * (z + prod * e);
            grad[g.z] += g.weight * u * (1.0 - prod);
            for (t, &pm) in g.neighbors.iter().zip(&others) {
                grad[t.x] += -g.weight * u * e * pm;
            }
        }
    }

    /// Adds the Hessian of the objective times `v` into `out` (which is zeroed first).
    pub fn hess_vec(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut others = Vec::new();
        for g in &self.groups {
            let w = g.weight;
            let u = 1.0 - p[g.x];
            let z = p[g.z];
            let e = g.cloud_extra - z;
            let prod = full_product(g, p);
            products_without_one(g, p, &mut others);

            let h_xz = -w * (1.0 - prod);
            out[g.x] += h_xz * v[g.z];
            out[g.z] += h_xz * v[g.x];
            for (k, t) in g.neighbors.iter().enumerate() {
                let h_xn_xm = w * e * others[k];
                let h_z_xm = w * u * others[k];
                out[g.x] += h_xn_xm * v[t.x];
                out[t.x] += h_xn_xm * v[g.x];
                out[g.z] += h_z_xm * v[t.x];
                out[t.x] += h_z_xm * v[g.z];
                for (j, s) in g.neighbors.iter().enumerate().skip(k + 1) {
                    let pair = product_without_two(g, p, k, j);
                    let h = w * u * e * pair;
                    out[t.x] += h * v[s.x];
                    out[s.x] += h * v[t.x];
                }
            }
        }
    }

    /// Completes `y` and `z` from a (possibly fractional) `x` by picking, for
    /// each `(n, i)`, the neighbor with the smallest `Q` (lowest id on ties) and
    /// setting `z` to its smallest feasible value.
    pub fn complete_from_x(&self, x: &[f64]) -> Assignment {
        let mut p = vec![0.0; self.dim()];
        p[..self.num_x()].copy_from_slice(&x[..self.num_x()]);
        let v = self.big_m;
        for g in &self.groups {
            let q: Vec<f64> = g.neighbors.iter().map(|t| selection_cost(t, p[t.x], v)).collect();
            let mut best = 0;
            for k in 1..q.len() {
                if q[k] < q[best] {
                    best = k;
                }
            }
            let mut z: f64 = 0.0;
            for (k, t) in g.neighbors.iter().enumerate() {
                let y = if k == best { 0.0 } else { 1.0 };
                p[t.y] = y;
                z = z.max(q[k] - v * y);
            }
            p[g.z] = z;
        }
        Assignment { values: p }
    }

    /// Binary assignment of a placement with `y`, `z` completed.
    pub fn assignment_of(&self, placement: &Placement) -> Assignment {
        let x: Vec<f64> = placement.as_slice().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        self.complete_from_x(&x)
    }

    /// Rounds `x` to a placement (threshold 0.5); capacity is not checked.
    pub fn placement_of(&self, p: &[f64]) -> Placement {
        let mut pl = Placement::empty(self.nodes, self.contents);
        for n in 0..self.nodes {
            for i in 0..self.contents {
                pl.set(n, i, p[self.x_index(n, i)] >= 0.5);
            }
        }
        pl
    }

    /// The delivering neighbor of each `(n, i)` in a binary assignment: the
    /// selected neighbor (`y` below 0.5) when the requester lacks the content
    /// and that neighbor has it.
    pub fn delivery(&self, p: &[f64]) -> Vec<Option<usize>> {
        self.groups
            .iter()
            .map(|g| {
                if p[g.x] >= 0.5 {
                    return None;
                }
                g.neighbors.iter().find(|t| p[t.y] < 0.5 && p[t.x] >= 0.5).map(|t| t.node)
            })
            .collect()
    }

    /// Every violated constraint, within `tolerance`.
    pub fn check_feasibility(&self, assignment: &Assignment, tolerance: f64) -> Vec<Violation> {
        let p = &assignment.values;
        if p.len() != self.dim() {
            return vec![Violation::Dimension { expected: self.dim(), got: p.len() }];
        }
        let mut out = Vec::new();
        for (n, row) in self.rows[..self.nodes].iter().enumerate() {
            let h = row.eval(p);
            if h < -tolerance * (1.0 + row.constant.abs()) {
                out.push(Violation::Capacity { node: n + 1, excess: -h });
            }
        }
        let mut r = self.nodes;
        for g in &self.groups {
            for t in &g.neighbors {
                let h = self.rows[r].eval(p);
                r += 1;
                if h < -tolerance * (1.0 + self.big_m) {
                    out.push(Violation::Selection {
                        node: g.node + 1,
                        neighbor: t.node + 1,
                        content: g.content + 1,
                        amount: -h,
                    });
                }
            }
        }
        for (g, eq) in self.groups.iter().zip(&self.equalities) {
            let sum: f64 = eq.vars.iter().map(|&j| p[j]).sum();
            if (sum - eq.rhs).abs() > tolerance {
                out.push(Violation::Equality { node: g.node + 1, content: g.content + 1, sum, expected: eq.rhs });
            }
        }
        for (j, &val) in p.iter().enumerate() {
            let (lo, hi) = self.bounds(j);
            let hi = if j < self.num_binary() { hi } else { f64::INFINITY };
            if val < lo - tolerance || val > hi + tolerance || !val.is_finite() {
                out.push(Violation::Bound { var: j, value: val, lower: lo, upper: hi });
            }
        }
        out
    }

    /// Line-oriented dump of variables, constraints and `V`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "big_m {}", self.big_m);
        let _ = writeln!(s, "vars x={} y={} z={}", self.num_x(), self.num_y, self.num_z());
        for j in 0..self.dim() {
            let (lo, hi) = self.bounds(j);
            let _ = writeln!(s, "var {j} {} [{lo}, {hi}]", self.describe(j));
        }
        for (k, row) in self.rows.iter().enumerate() {
            let kind = if k < self.nodes { "capacity" } else { "select" };
            let terms: Vec<String> = row.coefs.iter().map(|&(j, a)| format!("{a}*{}", self.describe(j))).collect();
            let _ = writeln!(s, "{kind} {} + {} >= 0", row.constant, terms.join(" + "));
        }
        for eq in &self.equalities {
            let terms: Vec<String> = eq.vars.iter().map(|&j| self.describe(j)).collect();
            let _ = writeln!(s, "sum {} = {}", terms.join(" + "), eq.rhs);
        }
        s
    }
}

/// `Q(x_m)`: transfer time if `m` caches, `V` if not, linear in between.
pub fn selection_cost(t: &NeighborTerm, x_m: f64, big_m: f64) -> f64 {
    x_m * t.transfer + (1.0 - x_m) * big_m
}

fn full_product(g: &Group, p: &[f64]) -> f64 {
    g.neighbors.iter().map(|t| 1.0 - p[t.x]).product()
}

fn products_without_one(g: &Group, p: &[f64], out: &mut Vec<f64>) {
    let k = g.neighbors.len();
    out.clear();
    out.resize(k, 1.0);
    let mut prefix = 1.0;
    for j in 0..k {
        out[j] = prefix;
        prefix *= 1.0 - p[g.neighbors[j].x];
    }
    let mut suffix = 1.0;
    for j in (0..k).rev() {
        out[j] *= suffix;
        suffix *= 1.0 - p[g.neighbors[j].x];
    }
}

fn product_without_two(g: &Group, p: &[f64], a: usize, b: usize) -> f64 {
    g.neighbors
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != a && j != b)
        .map(|(_, t)| 1.0 - p[t.x])
        .product()
}

fn group_value(g: &Group, p: &[f64]) -> f64 {
    let u = 1.0 - p[g.x];
    let z = p[g.z];
    let prod = full_product(g, p);
    g.weight * (g.access + u * (z + prod * (g.cloud_extra - z)))
}
