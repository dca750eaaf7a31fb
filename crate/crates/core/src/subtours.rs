//! Cycle extraction from integer 2-matchings and the deduplicated SEC pool.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{edge_count, edge_endpoints, Instance};
use crate::model::{Sec, SecKey, SecOrigin, SecStatus};

/// A 0/1 point given by its chosen edge indices (sorted).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IntegerSolution {
    pub chosen: Vec<usize>,
}

impl IntegerSolution {
    pub fn new(mut chosen: Vec<usize>) -> Self {
        chosen.sort_unstable();
        chosen.dedup();
        IntegerSolution { chosen }
    }

    /// Edge set of a closed tour given as a vertex order.
    pub fn from_tour(order: &[usize]) -> Self {
        let k = order.len();
        IntegerSolution::new(
            (0..k)
                .map(|i| crate::instances::EdgeIndex::of(order[i], order[(i + 1) % k]).idx)
                .collect(),
        )
    }
}

/// A vertex-disjoint cycle of a 2-matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    /// Cyclic order, starting at the smallest vertex towards its smaller neighbour.
    pub order: Vec<usize>,
    /// Same vertices, sorted.
    pub vertices: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn length(&self, inst: &Instance) -> i64 {
        let k = self.order.len();
        (0..k)
            .map(|i| inst.w(self.order[i], self.order[(i + 1) % k]))
            .sum()
    }
}

/// Splits a 2-matching into its cycles, ordered by smallest vertex.
pub fn extract_subtours(sol: &IntegerSolution, n: usize) -> Result<Vec<Cycle>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(2); n];
    for &e in &sol.chosen {
        if e >= edge_count(n) {
            return Err(Error::Integrity(format!(
                "edge index {e} out of range for n = {n}"
            )));
        }
        let (u, v) = edge_endpoints(e);
        adj[u].push(v);
        adj[v].push(u);
    }
    if let Some((v, a)) = adj.iter().enumerate().find(|(_, a)| a.len() != 2) {
        return Err(Error::Integrity(format!(
            "vertex {v} has degree {} in an integer solution",
            a.len()
        )));
    }

    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut order = vec![start];
        seen[start] = true;
        let mut prev = start;
        let mut cur = adj[start][0].min(adj[start][1]);
        while cur != start {
            if seen[cur] {
                return Err(Error::Integrity(
                    "chosen edges do not form disjoint cycles".into(),
                ));
            }
            seen[cur] = true;
            order.push(cur);
            let next = if adj[cur][0] == prev {
                adj[cur][1]
            } else {
                adj[cur][0]
            };
            prev = cur;
            cur = next;
        }
        let mut vertices = order.clone();
        vertices.sort_unstable();
        cycles.push(Cycle { order, vertices });
    }
    Ok(cycles)
}

/// Counts per status and origin kind, for reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PoolSummary {
    pub total: usize,
    pub by_status: BTreeMap<String, usize>,
    pub by_origin: BTreeMap<String, usize>,
}

/// SECs keyed by canonical key; at most one entry per key.
#[derive(Debug, Clone)]
pub struct SecPool {
    n: usize,
    entries: Vec<Sec>,
    index: HashMap<SecKey, usize>,
    /// Entry indices in the order they entered the model.
    model_order: Vec<usize>,
}

impl SecPool {
    pub fn new(n: usize) -> Self {
        SecPool {
            n,
            entries: Vec::new(),
            index: HashMap::new(),
            model_order: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Sec> {
        self.entries.iter()
    }

    pub fn get(&self, key: &SecKey) -> Option<&Sec> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, key: &SecKey) -> bool {
        self.index.contains_key(key)
    }

    /// Inserts `sec` unless its key is already present.
    pub fn insert(&mut self, sec: Sec) -> bool {
        if self.index.contains_key(sec.key()) {
            return false;
        }
        let i = self.entries.len();
        self.index.insert(sec.key().clone(), i);
        if sec.status.in_model() {
            self.model_order.push(i);
        }
        self.entries.push(sec);
        true
    }

    /// SECs in the model, in the order they entered it.
    pub fn model_secs(&self) -> impl Iterator<Item = &Sec> {
        self.model_order.iter().map(|&i| &self.entries[i])
    }

    pub fn model_len(&self) -> usize {
        self.model_order.len()
    }

    /// Model SECs that entered after the first `from`.
    pub fn model_secs_from(&self, from: usize) -> impl Iterator<Item = &Sec> {
        self.model_order[from..].iter().map(|&i| &self.entries[i])
    }

    /// Adds one active SEC per cycle with an unseen key; spanning cycles are
    /// skipped. Returns the number inserted.
    pub fn add_violated(&mut self, cycles: &[Cycle], origin: SecOrigin) -> usize {
        let mut added = 0;
        for c in cycles {
            if c.len() >= self.n || c.len() < 3 {
                continue;
            }
            let sec = Sec::new(c.vertices.clone(), self.n, SecStatus::Active, origin)
                .expect("cycle sizes checked above");
            if self.insert(sec) {
                added += 1;
            }
        }
        added
    }

    /// Adds the subtours of every incumbent with origin `Incumbent`.
    pub fn harvest_incumbents(&mut self, incumbents: &[IntegerSolution]) -> Result<usize> {
        let mut added = 0;
        for sol in incumbents {
            let cycles = extract_subtours(sol, self.n)?;
            if cycles.len() > 1 {
                added += self.add_violated(&cycles, SecOrigin::Incumbent);
            }
        }
        Ok(added)
    }

    /// Promotes considered entries whose key reappears among `regenerated`
    /// to fixed (and thereby into the model). Returns the promoted keys.
    pub fn hcd_reconcile(&mut self, regenerated: &[Cycle]) -> Vec<SecKey> {
        let mut promoted = Vec::new();
        for c in regenerated {
            if c.len() >= self.n || c.len() < 3 {
                continue;
            }
            let key = crate::model::canonical_key(&c.vertices, self.n);
            if let Some(&i) = self.index.get(&key) {
                if self.entries[i].status == SecStatus::Considered {
                    self.entries[i].status = SecStatus::Fixed;
                    self.model_order.push(i);
                    promoted.push(key);
                }
            }
        }
        promoted
    }

    /// Marks every remaining considered entry dropped.
    pub fn drop_considered(&mut self) -> usize {
        let mut dropped = 0;
        for e in &mut self.entries {
            if e.status == SecStatus::Considered {
                e.status = SecStatus::Dropped;
                dropped += 1;
            }
        }
        dropped
    }

    pub fn summary(&self) -> PoolSummary {
        let mut s = PoolSummary {
            total: self.entries.len(),
            ..Default::default()
        };
        for e in &self.entries {
            *s.by_status.entry(e.status.label().to_string()).or_default() += 1;
            *s.by_origin.entry(e.origin.kind().to_string()).or_default() += 1;
        }
        s
    }

    /// One line per SEC: `status origin v1 v2 ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = write!(out, "{} {}", e.status.label(), e.origin);
            for v in e.subset() {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Number of elements to take for a fraction `p` of `total`, rounding
/// down, tolerant to float noise in `p * total`.
fn fraction_floor(p: f64, total: usize) -> usize {
    ((p * total as f64) + 1e-9).floor() as usize
}

/// The `floor(p * C(n,3))` shortest triangles as packing SECs.
pub fn seed_triangle_secs(inst: &Instance, p: f64) -> Result<Vec<Sec>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("triangle fraction {p} outside [0, 1]")));
    }
    let n = inst.n();
    if n <= 3 {
        return Ok(Vec::new());
    }
    let total = n * (n - 1) * (n - 2) / 6;
    let want = fraction_floor(p, total).min(total);
    if want == 0 {
        return Ok(Vec::new());
    }
    let mut tris: Vec<(i64, [u32; 3])> = Vec::with_capacity(total);
    for a in 0..n {
        for b in a + 1..n {
            let ab = inst.w(a, b);
            for c in b + 1..n {
                tris.push((ab + inst.w(b, c) + inst.w(a, c), [a as u32, b as u32, c as u32]));
            }
        }
    }
    if want < tris.len() {
        tris.select_nth_unstable(want - 1);
        tris.truncate(want);
    }
    tris.sort_unstable();
    tris.into_iter()
        .map(|(_, t)| {
            Sec::new(
                t.iter().map(|&v| v as usize).collect(),
                n,
                SecStatus::Active,
                SecOrigin::SeedTriangle,
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKey {
    Cardinality,
    Length,
}

/// Keeps the `ceil(p * k)` smallest cycles (at least one), smallest first.
pub fn filter_subtours(cycles: &[Cycle], p: f64, key: FilterKey, inst: &Instance) -> Result<Vec<Cycle>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("filter fraction {p} outside (0, 1]")));
    }
    if cycles.is_empty() {
        return Ok(Vec::new());
    }
    let keep = ((p * cycles.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut ranked: Vec<(i64, &Cycle)> = cycles
        .iter()
        .map(|c| {
            let k = match key {
                FilterKey::Cardinality => c.len() as i64,
                FilterKey::Length => c.length(inst),
            };
            (k, c)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.vertices.cmp(&b.1.vertices)));
    Ok(ranked.into_iter().take(keep).map(|(_, c)| c.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_random_euclidean, EdgeIndex, Source};

    fn sol_of_cycles(cycles: &[&[usize]]) -> IntegerSolution {
        let mut chosen = Vec::new();
        for c in cycles {
            for i in 0..c.len() {
                chosen.push(EdgeIndex::of(c[i], c[(i + 1) % c.len()]).idx);
            }
        }
        IntegerSolution::new(chosen)
    }

    fn cycle(vs: &[usize]) -> Cycle {
        let mut vertices = vs.to_vec();
        vertices.sort_unstable();
        Cycle {
            order: vs.to_vec(),
            vertices,
        }
    }

    #[test]
    fn extract_examples() {
        let two = extract_subtours(&sol_of_cycles(&[&[0, 1, 2], &[3, 4, 5]]), 6).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.iter().all(|c| c.len() == 3));

        let tour = extract_subtours(&sol_of_cycles(&[&[0, 2, 4, 1, 3]]), 5).unwrap();
        assert_eq!(tour.len(), 1);
        assert_eq!(tour[0].order, vec![0, 2, 4, 1, 3]);

        let three = extract_subtours(&sol_of_cycles(&[&[0, 4, 8], &[1, 2, 3], &[5, 6, 7]]), 9).unwrap();
        assert_eq!(three.len(), 3);
        assert_eq!(three[1].vertices, vec![1, 2, 3]);
    }

    #[test]
    fn extract_rejects_bad_degree() {
        let sol = IntegerSolution::new(vec![EdgeIndex::of(0, 1).idx, EdgeIndex::of(1, 2).idx]);
        assert!(matches!(extract_subtours(&sol, 3), Err(Error::Integrity(_))));
    }

    #[test]
    fn pool_dedups_and_skips_tours() {
        let mut pool = SecPool::new(6);
        assert_eq!(
            pool.add_violated(&[cycle(&[0, 1, 2])], SecOrigin::Iteration(1)),
            1
        );
        assert_eq!(
            pool.add_violated(&[cycle(&[2, 1, 0])], SecOrigin::Iteration(2)),
            0
        );
        // Complement of {0,1,2}.
        assert_eq!(
            pool.add_violated(&[cycle(&[3, 4, 5])], SecOrigin::Iteration(2)),
            0
        );
        assert_eq!(
            pool.add_violated(&[cycle(&[0, 1, 2, 3, 4, 5])], SecOrigin::Iteration(3)),
            0
        );
        assert_eq!(pool.len(), 1);
    }

    #[test]
    fn harvest_examples() {
        let mut pool = SecPool::new(6);
        assert_eq!(pool.harvest_incumbents(&[]).unwrap(), 0);
        let a = sol_of_cycles(&[&[0, 1, 2], &[3, 4, 5]]);
        let b = sol_of_cycles(&[&[0, 1, 2], &[3, 5, 4]]);
        // Both incumbents split off {0,1,2} (and its complement).
        assert_eq!(pool.harvest_incumbents(&[a, b]).unwrap(), 1);
        assert_eq!(pool.iter().next().unwrap().origin, SecOrigin::Incumbent);
    }

    #[test]
    fn hcd_transitions() {
        let mut pool = SecPool::new(9);
        let abc = Sec::new(vec![0, 1, 2], 9, SecStatus::Considered, SecOrigin::Cluster(3)).unwrap();
        let def = Sec::new(vec![3, 4, 5], 9, SecStatus::Considered, SecOrigin::Cluster(3)).unwrap();
        let fixed = Sec::new(vec![6, 7, 8], 9, SecStatus::Fixed, SecOrigin::Cluster(2)).unwrap();
        pool.insert(abc);
        pool.insert(def);
        pool.insert(fixed);
        assert_eq!(pool.model_len(), 1);

        let promoted = pool.hcd_reconcile(&[cycle(&[2, 0, 1])]);
        assert_eq!(promoted.len(), 1);
        assert_eq!(pool.model_len(), 2);
        assert_eq!(pool.drop_considered(), 1);

        let statuses: Vec<_> = pool.iter().map(|s| s.status).collect();
        assert_eq!(
            statuses,
            vec![SecStatus::Fixed, SecStatus::Dropped, SecStatus::Fixed]
        );
        assert_eq!(pool.model_secs().count(), 2);
    }

    #[test]
    fn dump_format() {
        let mut pool = SecPool::new(6);
        pool.add_violated(&[cycle(&[4, 3, 5])], SecOrigin::Iteration(1));
        assert_eq!(pool.dump(), "active iteration:1 3 4 5\n");
        let s = pool.summary();
        assert_eq!(s.by_status["active"], 1);
        assert_eq!(s.by_origin["iteration"], 1);
    }

    #[test]
    fn triangle_seeding_counts() {
        let inst = gen_random_euclidean(5, 1).unwrap();
        assert!(seed_triangle_secs(&inst, 0.0).unwrap().is_empty());
        assert_eq!(seed_triangle_secs(&inst, 1.0).unwrap().len(), 10);
        let big = gen_random_euclidean(150, 1).unwrap();
        let tris = seed_triangle_secs(&big, 0.001).unwrap();
        assert_eq!(tris.len(), 551);
        // Shortest first, and no unseeded triangle is shorter than the last seeded one.
        let per = |s: &Sec| {
            let v = s.subset();
            big.w(v[0], v[1]) + big.w(v[1], v[2]) + big.w(v[0], v[2])
        };
        assert!(tris.windows(2).all(|w| per(&w[0]) <= per(&w[1])));
        assert!(seed_triangle_secs(&inst, 1.5).is_err());
    }

    #[test]
    fn filter_examples() {
        let inst = Instance::from_weights(
            "t",
            Source::Explicit,
            9,
            (0..36).map(|i| (i % 7) as i64 + 1).collect(),
            None,
        )
        .unwrap();
        let cs = vec![cycle(&[0, 1, 2, 3]), cycle(&[4, 5, 6]), cycle(&[7, 8, 0])];
        let all = filter_subtours(&cs, 1.0, FilterKey::Cardinality, &inst).unwrap();
        assert_eq!(all.len(), 3);
        let one = filter_subtours(&cs, 1.0 / 3.0, FilterKey::Cardinality, &inst).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].vertices, vec![0, 7, 8]);
        let by_len = filter_subtours(&cs, 0.01, FilterKey::Length, &inst).unwrap();
        let min_len = cs.iter().map(|c| c.length(&inst)).min().unwrap();
        assert_eq!(by_len[0].length(&inst), min_len);
        assert!(filter_subtours(&cs, 0.0, FilterKey::Length, &inst).is_err());
    }
}
