//! Exact depth-first branch-and-bound over the binary edge variables.
//!
//! Edges are branched in increasing weight order (ties by index), trying
//! `x = 1` before `x = 0`. Every row is tracked as an interval of achievable
//! left-hand sides, which detects infeasible partial assignments and forces
//! variables whose other value would make a row infeasible. The cost bound
//! is the fixed cost plus half the cheapest completion of every vertex's
//! missing degree. Among optimal points the lexicographically smallest
//! sorted edge list is returned.

use std::time::Instant;

use super::{Backend, BackendCapabilities, SolveLimits, SolveOutcome, SolveStatus};
use crate::error::{Error, Result};
use crate::instances::edge_endpoints;
use crate::model::{IlpModel, Sense};
use crate::subtours::IntegerSolution;

/// Largest vertex count accepted by default.
pub const DEFAULT_CAP: usize = 16;

#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    cap: usize,
}

impl Default for ReferenceBackend {
    fn default() -> Self {
        ReferenceBackend { cap: DEFAULT_CAP }
    }
}

impl ReferenceBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cap(cap: usize) -> Self {
        ReferenceBackend { cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Exact solve without a warm start.
    pub fn reference_solve(&self, model: &IlpModel, limits: &SolveLimits) -> Result<SolveOutcome> {
        self.solve(model, None, limits)
    }
}

impl Backend for ReferenceBackend {
    fn name(&self) -> String {
        "reference".to_string()
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            reports_incumbents: true,
            accepts_warm_start: true,
            deterministic: true,
        }
    }

    fn solve(
        &self,
        model: &IlpModel,
        warm_start: Option<&[usize]>,
        limits: &SolveLimits,
    ) -> Result<SolveOutcome> {
        if model.n() > self.cap {
            return Err(Error::Capacity {
                n: model.n(),
                cap: self.cap,
            });
        }
        let mut search = Search::new(model, *limits);
        if let Some(order) = warm_start {
            let tour = IntegerSolution::from_tour(order);
            if order.len() != model.n() || tour.chosen.len() != model.n() || !model.is_feasible(&tour.chosen)
            {
                return Err(Error::domain("warm start is not a feasible tour for the model"));
            }
            search.best = Some((model.objective_value(&tour.chosen), tour.chosen));
        }
        Ok(search.run())
    }
}

const FREE: i8 = -1;

#[derive(Debug, Clone)]
struct RowState {
    sense: Sense,
    rhs: i64,
    /// Contribution of assigned variables.
    fixed: i64,
    /// Sum of positive coefficients over free variables.
    pos_free: i64,
    /// Sum of negative coefficients over free variables.
    neg_free: i64,
}

struct Search<'m> {
    model: &'m IlpModel,
    n: usize,
    ends: Vec<(usize, usize)>,
    order: Vec<usize>,
    /// Per vertex, incident edges by increasing weight.
    incident: Vec<Vec<usize>>,
    row_terms: Vec<Vec<(usize, i64)>>,
    var_rows: Vec<Vec<(usize, i64)>>,
    rows: Vec<RowState>,
    val: Vec<i8>,
    trail: Vec<usize>,
    pending: Vec<(usize, i8)>,
    deg: Vec<u32>,
    cost: i64,
    best: Option<(i64, Vec<usize>)>,
    incumbents: Vec<IntegerSolution>,
    nodes: u64,
    limits: SolveLimits,
    started: Instant,
    stopped: bool,
}

impl<'m> Search<'m> {
    fn new(model: &'m IlpModel, limits: SolveLimits) -> Self {
        let n = model.n();
        let m = model.m();
        let w = model.objective();
        let ends: Vec<(usize, usize)> = (0..m).map(edge_endpoints).collect();

        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&e| (w[e], e));

        let mut incident = vec![Vec::with_capacity(n - 1); n];
        for &e in &order {
            let (u, v) = ends[e];
            incident[u].push(e);
            incident[v].push(e);
        }

        let mut row_terms = Vec::new();
        let mut var_rows = vec![Vec::new(); m];
        let mut rows = Vec::new();
        for (r, row) in model.rows().enumerate() {
            let mut pos = 0;
            let mut neg = 0;
            for &(e, c) in &row.terms {
                var_rows[e].push((r, c));
                if c > 0 {
                    pos += c;
                } else {
                    neg += c;
                }
            }
            row_terms.push(row.terms.clone());
            rows.push(RowState {
                sense: row.sense,
                rhs: row.rhs,
                fixed: 0,
                pos_free: pos,
                neg_free: neg,
            });
        }

        Search {
            model,
            n,
            ends,
            order,
            incident,
            row_terms,
            var_rows,
            rows,
            val: vec![FREE; m],
            trail: Vec::with_capacity(m),
            pending: Vec::new(),
            deg: vec![0; n],
            cost: 0,
            best: None,
            incumbents: Vec::new(),
            nodes: 0,
            limits,
            started: Instant::now(),
            stopped: false,
        }
    }

    fn run(mut self) -> SolveOutcome {
        let all_rows_ok = (0..self.rows.len()).all(|r| self.check_row(r));
        if all_rows_ok && self.propagate() {
            self.dfs();
        }
        let status = if self.stopped {
            SolveStatus::LimitReached
        } else if self.best.is_some() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        let (objective, best_solution) = match self.best {
            Some((obj, chosen)) => (Some(obj), Some(IntegerSolution { chosen })),
            None => (None, None),
        };
        SolveOutcome {
            status,
            best_solution,
            objective,
            incumbents: self.incumbents,
        }
    }

    fn set(&mut self, e: usize, v: i8) {
        self.val[e] = v;
        self.trail.push(e);
        let x = v as i64;
        for &(r, c) in &self.var_rows[e] {
            let row = &mut self.rows[r];
            row.fixed += c * x;
            if c > 0 {
                row.pos_free -= c;
            } else {
                row.neg_free -= c;
            }
        }
        if v == 1 {
            let (a, b) = self.ends[e];
            self.deg[a] += 1;
            self.deg[b] += 1;
            self.cost += self.model.objective()[e];
        }
    }

    fn unset_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let e = self.trail.pop().expect("trail above mark");
            let v = self.val[e];
            let x = v as i64;
            for &(r, c) in &self.var_rows[e] {
                let row = &mut self.rows[r];
                row.fixed -= c * x;
                if c > 0 {
                    row.pos_free += c;
                } else {
                    row.neg_free += c;
                }
            }
            if v == 1 {
                let (a, b) = self.ends[e];
                self.deg[a] -= 1;
                self.deg[b] -= 1;
                self.cost -= self.model.objective()[e];
            }
            self.val[e] = FREE;
        }
    }

    /// Checks row `r` and queues every variable it forces.
    fn check_row(&mut self, r: usize) -> bool {
        let row = &self.rows[r];
        let lo = row.fixed + row.neg_free;
        let hi = row.fixed + row.pos_free;
        let upper = matches!(row.sense, Sense::Le | Sense::Eq);
        let lower = matches!(row.sense, Sense::Ge | Sense::Eq);
        if (upper && lo > row.rhs) || (lower && hi < row.rhs) {
            return false;
        }
        let rhs = row.rhs;
        for &(e, c) in &self.row_terms[r] {
            if self.val[e] != FREE {
                continue;
            }
            if upper {
                // Taking the value that raises the minimum by |c| must still fit.
                if c > 0 && lo + c > rhs {
                    self.pending.push((e, 0));
                } else if c < 0 && lo - c > rhs {
                    self.pending.push((e, 1));
                }
            }
            if lower {
                if c > 0 && hi - c < rhs {
                    self.pending.push((e, 1));
                } else if c < 0 && hi + c < rhs {
                    self.pending.push((e, 0));
                }
            }
        }
        true
    }

    fn propagate(&mut self) -> bool {
        while let Some((e, v)) = self.pending.pop() {
            if self.val[e] != FREE {
                if self.val[e] != v {
                    self.pending.clear();
                    return false;
                }
                continue;
            }
            self.set(e, v);
            for i in 0..self.var_rows[e].len() {
                let r = self.var_rows[e][i].0;
                if !self.check_row(r) {
                    self.pending.clear();
                    return false;
                }
            }
        }
        true
    }

    fn lower_bound(&self) -> Option<i64> {
        let w = self.model.objective();
        let mut extra = 0i64;
        for v in 0..self.n {
            let mut need = 2u32.saturating_sub(self.deg[v]);
            if need == 0 {
                continue;
            }
            for &e in &self.incident[v] {
                if self.val[e] == FREE {
                    extra += w[e];
                    need -= 1;
                    if need == 0 {
                        break;
                    }
                }
            }
            if need > 0 {
                return None;
            }
        }
        Some(self.cost + (extra + 1) / 2)
    }

    fn out_of_budget(&mut self) -> bool {
        if let Some(limit) = self.limits.node_limit {
            if self.nodes > limit {
                self.stopped = true;
            }
        }
        if let Some(limit) = self.limits.time_limit {
            if self.nodes.is_multiple_of(256) && self.started.elapsed() > limit {
                self.stopped = true;
            }
        }
        self.stopped
    }

    fn dfs(&mut self) {
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        let Some(lb) = self.lower_bound() else {
            return;
        };
        if let Some((best, _)) = &self.best {
            if lb > *best {
                return;
            }
        }
        let Some(&e) = self.order.iter().find(|&&e| self.val[e] == FREE) else {
            self.leaf();
            return;
        };
        for v in [1i8, 0] {
            let mark = self.trail.len();
            self.pending.push((e, v));
            if self.propagate() {
                self.dfs();
            }
            self.unset_to(mark);
            if self.stopped {
                return;
            }
        }
    }

    fn leaf(&mut self) {
        let chosen: Vec<usize> = (0..self.val.len()).filter(|&e| self.val[e] == 1).collect();
        // Propagation already enforces every row; re-check on the full point.
        if !self.model.is_feasible(&chosen) {
            return;
        }
        let better = match &self.best {
            None => true,
            Some((b, bc)) => self.cost < *b || (self.cost == *b && chosen < *bc),
        };
        if better {
            self.incumbents.push(IntegerSolution {
                chosen: chosen.clone(),
            });
            self.best = Some((self.cost, chosen));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_random_euclidean, EdgeIndex, Instance, Source};
    use crate::model::{build_base_model, SecForm};
    use crate::subtours::extract_subtours;

    /// Two unit triangles 1000 apart along x.
    fn two_triangles() -> Instance {
        let pts = vec![
            (0.0, 0.0),
            (1.0, 0.0),
            (0.5, 0.8),
            (1000.0, 0.0),
            (1001.0, 0.0),
            (1000.5, 0.8),
        ];
        Instance::from_points("two", Source::Explicit, pts, |a, b| {
            ((a.0 - b.0).hypot(a.1 - b.1) * 100.0).round() as i64
        })
        .unwrap()
    }

    #[test]
    fn triangle_is_the_only_point() {
        let tri = Instance::from_weights("t", Source::Explicit, 3, vec![3, 4, 5], None).unwrap();
        let out = ReferenceBackend::new()
            .solve(&build_base_model(&tri), None, &SolveLimits::default())
            .unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert_eq!(out.objective, Some(12));
        assert_eq!(out.best_solution.unwrap().chosen, vec![0, 1, 2]);
    }

    #[test]
    fn two_triangles_then_one_tour() {
        let inst = two_triangles();
        let backend = ReferenceBackend::new();
        let mut model = build_base_model(&inst);
        let out = backend.solve(&model, None, &SolveLimits::default()).unwrap();
        let cycles = extract_subtours(out.best_solution.as_ref().unwrap(), 6).unwrap();
        assert_eq!(cycles.len(), 2);

        model.add_sec(&[0, 1, 2], SecForm::Hybrid).unwrap();
        model.add_sec(&[3, 4, 5], SecForm::Hybrid).unwrap();
        let out = backend.solve(&model, None, &SolveLimits::default()).unwrap();
        let cycles = extract_subtours(out.best_solution.as_ref().unwrap(), 6).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(out.objective, Some(brute_force_tour(&inst)));
    }

    fn brute_force_tour(inst: &Instance) -> i64 {
        fn go(inst: &Instance, path: &mut Vec<usize>, used: &mut [bool], best: &mut i64) {
            let n = inst.n();
            if path.len() == n {
                let len: i64 = (0..n).map(|i| inst.w(path[i], path[(i + 1) % n])).sum();
                *best = (*best).min(len);
                return;
            }
            for v in 1..n {
                if !used[v] {
                    used[v] = true;
                    path.push(v);
                    go(inst, path, used, best);
                    path.pop();
                    used[v] = false;
                }
            }
        }
        let mut best = i64::MAX;
        go(inst, &mut vec![0], &mut vec![false; inst.n()], &mut best);
        best
    }

    #[test]
    fn capacity_enforced() {
        let inst = gen_random_euclidean(17, 0).unwrap();
        let err = ReferenceBackend::new()
            .solve(&build_base_model(&inst), None, &SolveLimits::default())
            .unwrap_err();
        assert!(matches!(err, Error::Capacity { n: 17, cap: 16 }));
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let inst = gen_random_euclidean(6, 3).unwrap();
        let mut model = build_base_model(&inst);
        // Vertex 0 may use at most one edge, contradicting its degree row.
        let terms = (1..6).map(|v| (EdgeIndex::of(0, v).idx, 1)).collect();
        model
            .push_sec_row(crate::model::LinearConstraint::new("z", terms, Sense::Le, 1))
            .unwrap();
        let out = ReferenceBackend::new()
            .solve(&model, None, &SolveLimits::default())
            .unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
        assert!(out.best_solution.is_none());
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        // All weights equal: every 2-matching is optimal.
        let inst = Instance::from_weights("eq", Source::Explicit, 5, vec![7; 10], None).unwrap();
        let out = ReferenceBackend::new()
            .solve(&build_base_model(&inst), None, &SolveLimits::default())
            .unwrap();
        // 0-1, 0-2, 1-3, 2-4, 3-4: the smallest sorted index list of any 5-cycle.
        assert_eq!(out.best_solution.unwrap().chosen, vec![0, 1, 4, 8, 9]);
    }

    #[test]
    fn incumbents_never_beat_optimum() {
        let inst = gen_random_euclidean(10, 11).unwrap();
        let out = ReferenceBackend::new()
            .solve(&build_base_model(&inst), None, &SolveLimits::default())
            .unwrap();
        let model = build_base_model(&inst);
        let best = out.objective.unwrap();
        assert!(!out.incumbents.is_empty());
        for inc in &out.incumbents {
            assert!(model.is_feasible(&inc.chosen));
            assert!(model.objective_value(&inc.chosen) >= best);
        }
        assert_eq!(out.incumbents.last(), out.best_solution.as_ref());
    }

    #[test]
    fn warm_start_does_not_change_optimum() {
        let inst = gen_random_euclidean(9, 5).unwrap();
        let model = build_base_model(&inst);
        let b = ReferenceBackend::new();
        let cold = b.solve(&model, None, &SolveLimits::default()).unwrap();
        let order: Vec<usize> = (0..9).collect();
        let warm = b.solve(&model, Some(&order), &SolveLimits::default()).unwrap();
        assert_eq!(cold.objective, warm.objective);
        assert_eq!(cold.best_solution, warm.best_solution);
    }

    #[test]
    fn node_limit_reports_limit() {
        let inst = gen_random_euclidean(14, 2).unwrap();
        let limits = SolveLimits::new(None, Some(3)).unwrap();
        let out = ReferenceBackend::new()
            .solve(&build_base_model(&inst), None, &limits)
            .unwrap();
        assert_eq!(out.status, SolveStatus::LimitReached);
    }
}
