//! The solve loop and its clustering-based variants.
//!
//! Every variant ends with the same main loop on the full instance: solve the
//! model to integer optimality, stop if the solution is one cycle, otherwise
//! add a SEC for each subtour (and for the subtours of reported incumbents)
//! and solve again. The variants differ only in the SECs present before the
//! first iteration:
//!
//! * `basic`: none (apart from optional seeded triangles);
//! * `c:K` / `rc3:K` / `rc3n`: SECs found while solving the TSP on each
//!   cluster of a flat clustering, plus one SEC per cluster tour;
//! * `hc[:U]` / `hcd[:U]`: SECs collected bottom-up over the single-linkage
//!   merge tree, limited to clusters of at most `U` vertices.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::backend::{Backend, SolveLimits, SolveStatus};
use crate::clustering::{build_cluster_tree, cluster, cut_tree_at, restricted_cluster, ClusterTree};
use crate::error::{Error, Result};
use crate::heuristics::{warm_start_tour, Tour};
use crate::instances::Instance;
use crate::model::{build_base_model, canonical_key, IlpModel, Sec, SecForm, SecKey, SecOrigin, SecStatus};
use crate::subtours::{
    extract_subtours, filter_subtours, seed_triangle_secs, Cycle, FilterKey, PoolSummary, SecPool,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Basic,
    Cluster(usize),
    Restricted(usize),
    RestrictedN,
    Hc(Option<usize>),
    Hcd(Option<usize>),
}

/// Default size bound for the hierarchical variants: `floor(4n / log2 n)`.
pub fn default_size_bound(n: usize) -> usize {
    let n_f = n as f64;
    ((4.0 * n_f / n_f.log2()).floor() as usize).max(3)
}

impl Variant {
    /// Label with the size bound resolved for an `n`-vertex instance.
    pub fn resolved_label(&self, n: usize) -> String {
        match self {
            Variant::Hc(u) => format!("hc:{}", u.unwrap_or_else(|| default_size_bound(n))),
            Variant::Hcd(u) => format!("hcd:{}", u.unwrap_or_else(|| default_size_bound(n))),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Basic => f.write_str("basic"),
            Variant::Cluster(c) => write!(f, "c:{c}"),
            Variant::Restricted(c) => write!(f, "rc3:{c}"),
            Variant::RestrictedN => f.write_str("rc3n"),
            Variant::Hc(None) => f.write_str("hc"),
            Variant::Hc(Some(u)) => write!(f, "hc:{u}"),
            Variant::Hcd(None) => f.write_str("hcd"),
            Variant::Hcd(Some(u)) => write!(f, "hcd:{u}"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("unknown variant `{s}`"));
        let count = |v: &str| v.parse::<usize>().map_err(|_| bad());
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let variant = match (head, arg) {
            ("basic", None) => Variant::Basic,
            ("c", Some(a)) => Variant::Cluster(count(a)?),
            ("rc3", Some(a)) => Variant::Restricted(count(a)?),
            ("rc3n", None) => Variant::RestrictedN,
            ("hc", a) => Variant::Hc(a.map(count).transpose()?),
            ("hcd", a) => Variant::Hcd(a.map(count).transpose()?),
            _ => return Err(bad()),
        };
        match variant {
            Variant::Cluster(0) | Variant::Restricted(0) => {
                Err(Error::domain("cluster count must be positive"))
            }
            Variant::Hc(Some(u)) | Variant::Hcd(Some(u)) if u < 3 => {
                Err(Error::domain(format!("size bound {u} must be at least 3")))
            }
            v => Ok(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantConfig {
    pub variant: Variant,
    pub sec_form: SecForm,
    /// Add SECs for the subtours of every incumbent the backend reports.
    pub harvest_incumbents: bool,
    /// Pass a nearest-neighbour + 2-opt/Or-opt tour to the backend.
    pub warm_start: bool,
    /// Fraction of all triangles seeded as SECs before the first iteration.
    pub seed_triangles_p: f64,
    /// Keep only a fraction of each iteration's subtours.
    pub filter: Option<(f64, FilterKey)>,
    pub limits: SolveLimits,
    /// Solve independent clusters on the rayon pool.
    pub parallel: bool,
}

impl Default for VariantConfig {
    fn default() -> Self {
        VariantConfig {
            variant: Variant::Basic,
            sec_form: SecForm::Hybrid,
            harvest_incumbents: true,
            warm_start: false,
            seed_triangles_p: 0.0,
            filter: None,
            limits: SolveLimits::default(),
            parallel: false,
        }
    }
}

impl VariantConfig {
    pub fn new(variant: Variant) -> Self {
        VariantConfig {
            variant,
            ..Default::default()
        }
    }

    /// Settings used for cluster sub-solves: same form, harvesting, warm
    /// start and limits; no seeding or filtering.
    fn for_clusters(&self) -> VariantConfig {
        VariantConfig {
            variant: Variant::Basic,
            seed_triangles_p: 0.0,
            filter: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Optimal,
    LimitReached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    /// Objective of the model optimum.
    pub objective: i64,
    /// Number of cycles in the model optimum.
    pub subtours: usize,
    /// SECs that entered the model after this iteration.
    pub secs_added: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub instance: String,
    pub n: usize,
    pub variant: String,
    pub sec_form: String,
    pub status: RunStatus,
    /// Solver calls in the main loop.
    pub iterations: usize,
    /// SEC rows in the model when the last iteration started.
    pub constraints_final: usize,
    pub seconds: f64,
    pub tour: Option<Tour>,
    pub objective: Option<i64>,
    pub per_iteration: Vec<IterationRecord>,
    /// Cluster TSPs solved before the main loop.
    pub clusters_solved: usize,
    /// SECs collected before the main loop (seeded triangles excluded).
    pub prephase_secs: usize,
    pub pool: PoolSummary,
    #[serde(skip)]
    pub prephase_keys: Vec<SecKey>,
    #[serde(skip)]
    pub final_model_keys: Vec<SecKey>,
    #[serde(skip)]
    pub pool_dump: String,
}

impl RunReport {
    pub fn is_optimal(&self) -> bool {
        self.status == RunStatus::Optimal
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Result of one main loop on some (sub)instance.
struct LoopResult {
    status: RunStatus,
    per_iteration: Vec<IterationRecord>,
    constraints_final: usize,
    tour: Option<Vec<usize>>,
    objective: Option<i64>,
}

fn form_for(sec: &Sec, form: SecForm) -> SecForm {
    if sec.origin == SecOrigin::SeedTriangle {
        SecForm::Packing
    } else {
        form
    }
}

fn sync_model(model: &mut IlpModel, pool: &SecPool, synced: &mut usize, form: SecForm) -> Result<()> {
    for sec in pool.model_secs_from(*synced) {
        model.add_sec(sec.subset(), form_for(sec, form))?;
    }
    *synced = pool.model_len();
    Ok(())
}

/// Adds SECs for `cycles`; with `hcd`, considered entries that reappear are
/// promoted first. Returns the number of SECs that entered the model.
fn absorb(pool: &mut SecPool, cycles: &[Cycle], origin: SecOrigin, hcd: bool) -> usize {
    let promoted = if hcd { pool.hcd_reconcile(cycles).len() } else { 0 };
    promoted + pool.add_violated(cycles, origin)
}

fn main_loop(
    inst: &Instance,
    backend: &dyn Backend,
    cfg: &VariantConfig,
    pool: &mut SecPool,
    hcd: bool,
) -> Result<LoopResult> {
    let n = inst.n();
    let mut model = build_base_model(inst);
    let mut synced = 0;
    let warm = if cfg.warm_start && backend.capabilities().accepts_warm_start {
        Some(warm_start_tour(inst).order)
    } else {
        None
    };
    let harvest = cfg.harvest_incumbents && backend.capabilities().reports_incumbents;
    let mut per_iteration: Vec<IterationRecord> = Vec::new();
    loop {
        sync_model(&mut model, pool, &mut synced, cfg.sec_form)?;
        let rows_before = model.sec_rows().len();
        let outcome = backend.solve(&model, warm.as_deref(), &cfg.limits)?;
        let sol = match (outcome.status, outcome.best_solution) {
            (SolveStatus::Optimal, Some(sol)) => sol,
            (SolveStatus::LimitReached, _) => {
                return Ok(LoopResult {
                    status: RunStatus::LimitReached,
                    per_iteration,
                    constraints_final: rows_before,
                    tour: None,
                    objective: None,
                })
            }
            _ => {
                return Err(Error::Integrity(
                    "backend found no solution for a feasible model".into(),
                ))
            }
        };
        let objective = model.objective_value(&sol.chosen);
        if let Some(prev) = per_iteration.last() {
            if objective < prev.objective {
                return Err(Error::Integrity(format!(
                    "model optimum decreased from {} to {objective}",
                    prev.objective
                )));
            }
        }
        let cycles = extract_subtours(&sol, n)?;
        if cycles.len() == 1 {
            per_iteration.push(IterationRecord {
                objective,
                subtours: 1,
                secs_added: 0,
            });
            return Ok(LoopResult {
                status: RunStatus::Optimal,
                per_iteration,
                constraints_final: rows_before,
                tour: Some(cycles[0].order.clone()),
                objective: Some(objective),
            });
        }
        for c in &cycles {
            let key = canonical_key(&c.vertices, n);
            if pool.get(&key).is_some_and(|s| s.status.in_model()) {
                return Err(Error::Integrity(format!(
                    "model optimum violates a SEC already in the model: {:?}",
                    c.vertices
                )));
            }
        }
        let k = per_iteration.len() + 1;
        let selected = match cfg.filter {
            Some((p, key)) => filter_subtours(&cycles, p, key, inst)?,
            None => cycles.clone(),
        };
        let mut added = absorb(pool, &selected, SecOrigin::Iteration(k), hcd);
        if harvest {
            for inc in &outcome.incumbents {
                let inc_cycles = extract_subtours(inc, n)?;
                if inc_cycles.len() > 1 {
                    added += absorb(pool, &inc_cycles, SecOrigin::Incumbent, hcd);
                }
            }
        }
        if added == 0 {
            return Err(Error::Integrity("iteration added no SEC".into()));
        }
        per_iteration.push(IterationRecord {
            objective,
            subtours: cycles.len(),
            secs_added: added,
        });
    }
}

/// Solves the TSP on `vertices` of `inst` starting from `inherited` (global
/// ids) and returns the in-model SECs it ends with plus its tour SEC, all in
/// global ids.
struct ClusterSolve {
    status: RunStatus,
    secs: Vec<Sec>,
    tour_sec: Option<Sec>,
}

fn solve_cluster(
    inst: &Instance,
    vertices: &[usize],
    id: usize,
    inherited: &[Sec],
    backend: &dyn Backend,
    cfg: &VariantConfig,
    hcd: bool,
) -> Result<ClusterSolve> {
    let n = inst.n();
    let k = vertices.len();
    let local_inst = inst.induced(vertices, format!("{}#{id}", inst.name()))?;
    let mut local_of = vec![usize::MAX; n];
    for (i, &v) in vertices.iter().enumerate() {
        local_of[v] = i;
    }
    let mut pool = SecPool::new(k);
    for sec in inherited {
        let local: Vec<usize> = sec.subset().iter().map(|&v| local_of[v]).collect();
        debug_assert!(local.iter().all(|&v| v < k));
        pool.insert(Sec::new(local, k, sec.status, sec.origin)?);
    }
    let result = main_loop(&local_inst, backend, &cfg.for_clusters(), &mut pool, hcd)?;
    if result.status != RunStatus::Optimal {
        return Ok(ClusterSolve {
            status: result.status,
            secs: Vec::new(),
            tour_sec: None,
        });
    }
    if hcd {
        pool.drop_considered();
    }
    let mut secs = Vec::new();
    for sec in pool.iter().filter(|s| s.status.in_model()) {
        let mut global = sec.relabel(vertices, n)?;
        if matches!(global.origin, SecOrigin::Iteration(_) | SecOrigin::Incumbent) {
            global.origin = SecOrigin::Cluster(id);
        }
        secs.push(global);
    }
    let tour_sec = if k >= 3 && k < n {
        Some(Sec::new(
            vertices.to_vec(),
            n,
            SecStatus::Active,
            SecOrigin::ClusterTour,
        )?)
    } else {
        None
    };
    Ok(ClusterSolve {
        status: RunStatus::Optimal,
        secs,
        tour_sec,
    })
}

/// Runs the main loop on the full instance starting from `prephase`.
fn finish(
    inst: &Instance,
    backend: &dyn Backend,
    cfg: &VariantConfig,
    prephase: Vec<Sec>,
    clusters_solved: usize,
    started: Instant,
) -> Result<RunReport> {
    let n = inst.n();
    let mut pool = SecPool::new(n);
    for sec in prephase {
        pool.insert(sec);
    }
    let prephase_keys: Vec<SecKey> = pool.iter().map(|s| s.key().clone()).collect();
    if cfg.seed_triangles_p > 0.0 {
        for sec in seed_triangle_secs(inst, cfg.seed_triangles_p)? {
            pool.insert(sec);
        }
    }
    let result = main_loop(inst, backend, cfg, &mut pool, false)?;
    let tour = match &result.tour {
        Some(order) => Some(Tour::new(inst, order.clone())?),
        None => None,
    };
    if let (Some(t), Some(obj)) = (&tour, result.objective) {
        if t.length != obj {
            return Err(Error::Integrity(format!(
                "tour length {} differs from objective {obj}",
                t.length
            )));
        }
    }
    let final_model_keys = pool
        .model_secs()
        .take(result.constraints_final)
        .map(|s| s.key().clone())
        .collect();
    Ok(RunReport {
        schema: 1,
        instance: inst.name().to_string(),
        n,
        variant: cfg.variant.resolved_label(n),
        sec_form: cfg.sec_form.to_string(),
        status: result.status,
        iterations: result.per_iteration.len(),
        constraints_final: result.constraints_final,
        seconds: started.elapsed().as_secs_f64(),
        tour,
        objective: result.objective,
        per_iteration: result.per_iteration,
        clusters_solved,
        prephase_secs: prephase_keys.len(),
        pool: pool.summary(),
        prephase_keys,
        final_model_keys,
        pool_dump: pool.dump(),
    })
}

fn aborted(inst: &Instance, cfg: &VariantConfig, clusters_solved: usize, started: Instant) -> RunReport {
    let n = inst.n();
    RunReport {
        schema: 1,
        instance: inst.name().to_string(),
        n,
        variant: cfg.variant.resolved_label(n),
        sec_form: cfg.sec_form.to_string(),
        status: RunStatus::LimitReached,
        iterations: 0,
        constraints_final: 0,
        seconds: started.elapsed().as_secs_f64(),
        tour: None,
        objective: None,
        per_iteration: Vec::new(),
        clusters_solved,
        prephase_secs: 0,
        pool: PoolSummary::default(),
        prephase_keys: Vec::new(),
        final_model_keys: Vec::new(),
        pool_dump: String::new(),
    }
}

/// Dispatches on `cfg.variant`.
pub fn run(inst: &Instance, backend: &dyn Backend, cfg: &VariantConfig) -> Result<RunReport> {
    match cfg.variant {
        Variant::Basic => basic_integer_tsp(inst, backend, cfg),
        Variant::Cluster(_) | Variant::Restricted(_) | Variant::RestrictedN => {
            run_with_clustering(inst, backend, cfg)
        }
        Variant::Hc(_) | Variant::Hcd(_) => run_hierarchical(inst, backend, cfg),
    }
}

pub fn basic_integer_tsp(inst: &Instance, backend: &dyn Backend, cfg: &VariantConfig) -> Result<RunReport> {
    if cfg.variant != Variant::Basic {
        return Err(Error::domain(format!("variant {} is not basic", cfg.variant)));
    }
    finish(inst, backend, cfg, Vec::new(), 0, Instant::now())
}

fn map_ordered<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

pub fn run_with_clustering(inst: &Instance, backend: &dyn Backend, cfg: &VariantConfig) -> Result<RunReport> {
    let started = Instant::now();
    let n = inst.n();
    let clustering = match cfg.variant {
        Variant::Cluster(c) => cluster(inst, c)?,
        Variant::Restricted(c) => restricted_cluster(inst, c)?,
        Variant::RestrictedN => restricted_cluster(inst, n)?,
        other => return Err(Error::domain(format!("variant {other} is not a flat clustering"))),
    };
    // A cluster equal to V is the full problem; it is left to the main loop.
    let parts: Vec<(usize, &Vec<usize>)> = clustering
        .partition
        .iter()
        .enumerate()
        .filter(|(_, p)| p.len() >= 3 && p.len() < n)
        .collect();
    let solved = map_ordered(&parts, cfg.parallel, |&(id, part)| {
        solve_cluster(inst, part, id, &[], backend, cfg, false)
    });
    let mut prephase = Vec::new();
    for result in solved {
        let result = result?;
        if result.status != RunStatus::Optimal {
            return Ok(aborted(inst, cfg, parts.len(), started));
        }
        prephase.extend(result.secs);
        prephase.extend(result.tour_sec);
    }
    finish(inst, backend, cfg, prephase, parts.len(), started)
}

/// SECs handed from a solved node to its parent.
fn hand_up(result: &ClusterSolve, hcd: bool) -> Vec<Sec> {
    result
        .secs
        .iter()
        .chain(&result.tour_sec)
        .map(|s| {
            let mut s = s.clone();
            s.status = match (hcd, s.status) {
                (true, SecStatus::Fixed) => SecStatus::Fixed,
                (true, _) => SecStatus::Considered,
                (false, _) => SecStatus::Active,
            };
            s
        })
        .collect()
}

/// Solves every node of the subtree at `top` with at least three vertices,
/// bottom-up. Returns the SECs the top node passes to the full problem and
/// the number of nodes solved; `None` if a solve hit a limit.
fn solve_subtree(
    inst: &Instance,
    tree: &ClusterTree,
    top: usize,
    backend: &dyn Backend,
    cfg: &VariantConfig,
    hcd: bool,
) -> Result<Option<(Vec<Sec>, usize)>> {
    let n = inst.n();
    let mut results: Vec<Option<ClusterSolve>> = (0..tree.nodes.len()).map(|_| None).collect();
    let mut solved = 0;
    for id in tree.postorder(top) {
        let node = &tree.nodes[id];
        let Some((a, b)) = node.children else { continue };
        if node.cluster.len() < 3 || node.cluster.len() >= n {
            continue;
        }
        let mut inherited = Vec::new();
        for child in [a, b] {
            if let Some(r) = results[child].take() {
                inherited.extend(hand_up(&r, hcd));
            }
        }
        let result = solve_cluster(inst, &node.cluster, id, &inherited, backend, cfg, hcd)?;
        solved += 1;
        if result.status != RunStatus::Optimal {
            return Ok(None);
        }
        results[id] = Some(result);
    }
    // The largest solved clusters pass everything they ended with, tours
    // included. The top is unsolved only when it is the full vertex set.
    let frontier = match (results[top].is_some(), tree.nodes[top].children) {
        (false, Some((a, b))) => vec![a, b],
        _ => vec![top],
    };
    let mut secs = Vec::new();
    for id in frontier {
        if let Some(r) = results[id].take() {
            secs.extend(r.secs.into_iter().chain(r.tour_sec).map(|mut s| {
                if s.status != SecStatus::Fixed {
                    s.status = SecStatus::Active;
                }
                s
            }));
        }
    }
    Ok(Some((secs, solved)))
}

pub fn run_hierarchical(inst: &Instance, backend: &dyn Backend, cfg: &VariantConfig) -> Result<RunReport> {
    let started = Instant::now();
    let n = inst.n();
    let (bound, hcd) = match cfg.variant {
        Variant::Hc(u) => (u, false),
        Variant::Hcd(u) => (u, true),
        other => return Err(Error::domain(format!("variant {other} is not hierarchical"))),
    };
    let u = bound.unwrap_or_else(|| default_size_bound(n));
    let tree = build_cluster_tree(inst);
    let tops = cut_tree_at(&tree, u)?;
    let results = map_ordered(&tops, cfg.parallel, |&top| {
        solve_subtree(inst, &tree, top, backend, cfg, hcd)
    });
    let mut prephase = Vec::new();
    let mut clusters_solved = 0;
    for r in results {
        match r? {
            Some((secs, solved)) => {
                prephase.extend(secs);
                clusters_solved += solved;
            }
            None => return Ok(aborted(inst, cfg, clusters_solved, started)),
        }
    }
    finish(inst, backend, cfg, prephase, clusters_solved, started)
}
