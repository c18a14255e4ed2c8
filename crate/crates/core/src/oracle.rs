//! Exhaustive search for the optimal placement of small instances.
//!
//! The delay of a request for content `i` depends only on which nodes hold
//! `i`, so the objective is a sum of per-content column costs. The search
//! enumerates the rows of every node but one MEN, and solves that MEN's row
//! exactly as a knapsack over the column cost differences. The base station
//! row only ranges over maximal subsets when every base station weight is
//! positive: holding a content there strictly shortens its own requests and
//! never lengthens anyone else's.

use crate::error::{Error, Result};
use crate::scenario::{Placement, Scenario, CAPACITY_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_enumerations: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_enumerations: 1 << 24 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub placement: Placement,
    pub objective: f64,
    /// Number of row combinations visited.
    pub enumerations: u64,
}

const TIE: f64 = 1e-10;

fn fits(load: f64, cap: f64) -> bool {
    load <= cap * (1.0 + CAPACITY_EPS) + CAPACITY_EPS
}

/// Feasible subsets of the contents for capacity `cap`, in lexicographic
/// order, stopping once more than `limit` were found.
fn subsets(s: &Scenario, cap: f64, maximal_only: bool, limit: u64) -> Vec<Vec<bool>> {
    fn walk(
        s: &Scenario,
        cap: f64,
        maximal_only: bool,
        limit: u64,
        i: usize,
        load: f64,
        cur: &mut Vec<bool>,
        out: &mut Vec<Vec<bool>>,
    ) {
        if out.len() as u64 > limit {
            return;
        }
        if i == cur.len() {
            if maximal_only && (0..cur.len()).any(|k| !cur[k] && fits(load + s.size(k), cap)) {
                return;
            }
            out.push(cur.clone());
            return;
        }
        walk(s, cap, maximal_only, limit, i + 1, load, cur, out);
        if fits(load + s.size(i), cap) {
            cur[i] = true;
            walk(s, cap, maximal_only, limit, i + 1, load + s.size(i), cur, out);
            cur[i] = false;
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![false; s.content_count()];
    walk(s, cap, maximal_only, limit, 0, 0.0, &mut cur, &mut out);
    out
}

/// Lexicographically smallest row minimizing `sum_i delta_i x_i` within
/// capacity `cap`. Returns the row and its value.
fn best_row(s: &Scenario, cap: f64, delta: &[f64], scale: f64) -> (Vec<bool>, f64) {
    let items: Vec<usize> = (0..delta.len()).filter(|&i| delta[i] < 0.0).collect();
    let mut by_ratio = items.clone();
    by_ratio.sort_by(|&a, &b| (delta[a] / s.size(a)).total_cmp(&(delta[b] / s.size(b))).then(a.cmp(&b)));

    struct Search<'a> {
        s: &'a Scenario,
        cap: f64,
        delta: &'a [f64],
        items: &'a [usize],
        by_ratio: &'a [usize],
        eps: f64,
        cur: Vec<bool>,
        best: Vec<bool>,
        best_value: f64,
    }
    impl Search<'_> {
        /// Fractional-knapsack bound over items from position `k` on.
        fn bound(&self, k: usize, load: f64) -> f64 {
            let rest = &self.items[k..];
            let mut room = self.cap - load;
            let mut total = 0.0;
            for &i in self.by_ratio {
                if room <= 0.0 {
                    break;
                }
                if !rest.contains(&i) {
                    continue;
                }
                let take = (room / self.s.size(i)).min(1.0);
                total += take * self.delta[i];
                room -= take * self.s.size(i);
            }
            total
        }

        fn walk(&mut self, k: usize, load: f64, value: f64) {
            if value + self.bound(k, load) >= self.best_value - self.eps {
                return;
            }
            if k == self.items.len() {
                self.best_value = value;
                self.best.clone_from(&self.cur);
                return;
            }
            let i = self.items[k];
            self.walk(k + 1, load, value);
            if fits(load + self.s.size(i), self.cap) {
                self.cur[i] = true;
                self.walk(k + 1, load + self.s.size(i), value + self.delta[i]);
                self.cur[i] = false;
            }
        }
    }

    let mut search = Search {
        s,
        cap,
        delta,
        items: &items,
        by_ratio: &by_ratio,
        eps: TIE * scale,
        cur: vec![false; delta.len()],
        best: vec![false; delta.len()],
        best_value: 0.0,
    };
    // The empty row (value 0) is the first candidate in lexicographic order;
    // the search only replaces it with strictly better rows.
    search.walk(0, 0.0, 0.0);
    (search.best, search.best_value)
}

/// Product of the enumerated row counts, saturating at `u64::MAX`.
fn product(counts: &[u64]) -> u64 {
    counts.iter().fold(1u64, |acc, &c| acc.saturating_mul(c))
}

/// Exact optimum of the total average delay over all feasible placements.
/// Ties go to the lexicographically smallest placement.
pub fn exhaustive_optimal(s: &Scenario, budget: OracleBudget) -> Result<OracleSolution> {
    if budget.max_enumerations == 0 {
        return Err(Error::Config("oracle budget must be positive".into()));
    }
    let nodes = s.node_count();
    let contents = s.content_count();
    let bs = s.bs();
    let last = bs - 1;
    let bs_maximal = (0..contents).all(|i| s.weight(bs, i) > 0.0);

    let enumerated: Vec<usize> = (0..nodes).filter(|&n| n != last).collect();
    let limit = budget.max_enumerations;
    let mut rows: Vec<Vec<Vec<bool>>> = Vec::with_capacity(enumerated.len());
    for &n in &enumerated {
        rows.push(subsets(s, s.capacity(n), n == bs && bs_maximal, limit));
        let counts: Vec<u64> = rows.iter().map(|r| r.len() as u64).collect();
        let estimate = product(&counts);
        if estimate > limit {
            return Err(Error::BudgetExceeded { estimate: estimate as f64, budget: limit });
        }
    }

    let scale: f64 = (0..contents).map(|i| s.column_delay(i, |_| false)).sum::<f64>().max(1.0);
    let eps = TIE * scale;
    let mut best: Option<(f64, Placement)> = None;
    let mut enumerations = 0u64;
    let mut pick = vec![0usize; enumerated.len()];
    let mut has = vec![false; nodes];
    let mut base = vec![0.0; contents];
    let mut delta = vec![0.0; contents];
    loop {
        enumerations += 1;
        for i in 0..contents {
            for (k, &n) in enumerated.iter().enumerate() {
                has[n] = rows[k][pick[k]][i];
            }
            has[last] = false;
            base[i] = s.column_delay(i, |m| has[m]);
            has[last] = true;
            delta[i] = s.column_delay(i, |m| has[m]) - base[i];
        }
        let (row, gain) = best_row(s, s.capacity(last), &delta, scale);
        let value = base.iter().sum::<f64>() + gain;

        let better = match &best {
            None => true,
            Some((bv, _)) => value < bv - eps,
        };
        let tied = best.as_ref().map_or(false, |(bv, _)| (value - bv).abs() <= eps);
        if better || tied {
            let mut placement = Placement::empty(nodes, contents);
            for (k, &n) in enumerated.iter().enumerate() {
                placement.set_row(n, &rows[k][pick[k]]);
            }
            placement.set_row(last, &row);
            if better || best.as_ref().map_or(true, |(_, bp)| placement < *bp) {
                best = Some((value, placement));
            }
        }

        // Odometer over the enumerated rows, last position fastest.
        let mut k = enumerated.len();
        loop {
            if k == 0 {
                let (_, placement) = best.expect("at least one combination");
                let objective = s.total_average_delay(&placement)?;
                return Ok(OracleSolution { placement, objective, enumerations });
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < rows[k].len() {
                break;
            }
            pick[k] = 0;
        }
    }
}
