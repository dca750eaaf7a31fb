//! The 2-matching ILP (objective, degree equations, binary edge variables)
//! plus subtour elimination rows in packing, cut, or hybrid form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{edge_count, edge_idx, Instance};

/// How a subtour elimination constraint is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecForm {
    /// `sum_{e ⊆ S} x_e <= |S| - 1`
    Packing,
    /// `sum_{e ∈ δ(S)} x_e >= 2`
    Cut,
    /// Packing when `3|S| <= 2n + 1`, cut otherwise.
    #[default]
    Hybrid,
}

impl SecForm {
    /// Concrete form used for a subset of `size` vertices out of `n`.
    pub fn resolve(self, size: usize, n: usize) -> SecForm {
        match self {
            SecForm::Hybrid => {
                if 3 * size <= 2 * n + 1 {
                    SecForm::Packing
                } else {
                    SecForm::Cut
                }
            }
            other => other,
        }
    }

    /// Nonzero count of the row this form produces.
    pub fn term_count(self, size: usize, n: usize) -> usize {
        match self.resolve(size, n) {
            SecForm::Packing => size * (size - 1) / 2,
            SecForm::Cut => size * (n - size),
            SecForm::Hybrid => unreachable!(),
        }
    }
}

impl fmt::Display for SecForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SecForm::Packing => "packing",
            SecForm::Cut => "cut",
            SecForm::Hybrid => "hybrid",
        })
    }
}

impl std::str::FromStr for SecForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "packing" => Ok(SecForm::Packing),
            "cut" => Ok(SecForm::Cut),
            "hybrid" => Ok(SecForm::Hybrid),
            other => Err(Error::domain(format!("unknown SEC form `{other}`"))),
        }
    }
}

/// Identity of the unordered pair `{S, V \ S}`: the smaller side, ties broken
/// by the lexicographically smaller sorted vertex list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SecKey(Vec<usize>);

impl SecKey {
    pub fn vertices(&self) -> &[usize] {
        &self.0
    }
}

/// Canonical key of `subset` (any order, no duplicates) within `0..n`.
pub fn canonical_key(subset: &[usize], n: usize) -> SecKey {
    let mut inside = vec![false; n];
    for &v in subset {
        inside[v] = true;
    }
    let side: Vec<usize> = (0..n).filter(|&v| inside[v]).collect();
    let other: Vec<usize> = (0..n).filter(|&v| !inside[v]).collect();
    let pick_side = match side.len().cmp(&other.len()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => side <= other,
    };
    SecKey(if pick_side { side } else { other })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SecStatus {
    /// In the model.
    Active,
    /// Inherited from a child cluster, kept out of the model unless regenerated.
    Considered,
    /// A regenerated considered SEC; permanent for all enclosing clusters.
    Fixed,
    /// A considered SEC that was not regenerated.
    Dropped,
}

impl SecStatus {
    pub fn in_model(self) -> bool {
        matches!(self, SecStatus::Active | SecStatus::Fixed)
    }

    pub fn label(self) -> &'static str {
        match self {
            SecStatus::Active => "active",
            SecStatus::Considered => "considered",
            SecStatus::Fixed => "fixed",
            SecStatus::Dropped => "dropped",
        }
    }
}

/// Which step of a run produced a SEC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SecOrigin {
    /// Violated by the model optimum of main-loop iteration `k` (1-based).
    Iteration(usize),
    /// Subtour of a non-final integer solution reported by the backend.
    Incumbent,
    /// Generated while solving the cluster with this id.
    Cluster(usize),
    SeedTriangle,
    /// Optimal tour of a cluster, used as a SEC for the enclosing problem.
    ClusterTour,
}

impl fmt::Display for SecOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SecOrigin::Iteration(k) => write!(f, "iteration:{k}"),
            SecOrigin::Incumbent => f.write_str("incumbent"),
            SecOrigin::Cluster(c) => write!(f, "cluster:{c}"),
            SecOrigin::SeedTriangle => f.write_str("seed_triangle"),
            SecOrigin::ClusterTour => f.write_str("cluster_tour"),
        }
    }
}

impl SecOrigin {
    /// Origin label without its numeric payload.
    pub fn kind(&self) -> &'static str {
        match self {
            SecOrigin::Iteration(_) => "iteration",
            SecOrigin::Incumbent => "incumbent",
            SecOrigin::Cluster(_) => "cluster",
            SecOrigin::SeedTriangle => "seed_triangle",
            SecOrigin::ClusterTour => "cluster_tour",
        }
    }
}

/// One subtour elimination constraint: the subset as generated, its
/// complement-invariant key, and bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sec {
    subset: Vec<usize>,
    key: SecKey,
    pub status: SecStatus,
    pub origin: SecOrigin,
}

impl Sec {
    pub fn new(mut subset: Vec<usize>, n: usize, status: SecStatus, origin: SecOrigin) -> Result<Sec> {
        subset.sort_unstable();
        subset.dedup();
        if subset.len() < 3 || subset.len() > n - 1 {
            return Err(Error::domain(format!(
                "SEC subset size {} outside 3..={}",
                subset.len(),
                n - 1
            )));
        }
        if let Some(&v) = subset.last() {
            if v >= n {
                return Err(Error::domain(format!("vertex {v} out of range for n = {n}")));
            }
        }
        let key = canonical_key(&subset, n);
        Ok(Sec {
            subset,
            key,
            status,
            origin,
        })
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn key(&self) -> &SecKey {
        &self.key
    }

    pub fn len(&self) -> usize {
        self.subset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subset.is_empty()
    }

    /// Same SEC relabelled through `map` (local id -> global id) into an
    /// `n`-vertex instance.
    pub fn relabel(&self, map: &[usize], n: usize) -> Result<Sec> {
        Sec::new(
            self.subset.iter().map(|&v| map[v]).collect(),
            n,
            self.status,
            self.origin,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

/// Sparse row over edge variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub name: String,
    /// `(edge index, coefficient)`, sorted by edge index.
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl LinearConstraint {
    /// Sorts the terms, merges duplicates and drops zero coefficients.
    pub fn new(name: impl Into<String>, mut terms: Vec<(usize, i64)>, sense: Sense, rhs: i64) -> Self {
        terms.sort_unstable_by_key(|t| t.0);
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|t| t.1 != 0);
        LinearConstraint {
            name: name.into(),
            terms: merged,
            sense,
            rhs,
        }
    }

    pub fn lhs(&self, chosen: &[bool]) -> i64 {
        self.terms
            .iter()
            .filter(|(e, _)| chosen[*e])
            .map(|(_, c)| c)
            .sum()
    }

    pub fn is_satisfied(&self, chosen: &[bool]) -> bool {
        self.sense.holds(self.lhs(chosen), self.rhs)
    }
}

/// The row for `subset` (as generated) in `form`; `name` labels the row.
pub fn sec_row(
    subset: &[usize],
    form: SecForm,
    n: usize,
    name: impl Into<String>,
) -> Result<LinearConstraint> {
    let size = subset.len();
    if size < 3 || size > n.saturating_sub(1) {
        return Err(Error::domain(format!(
            "SEC subset size {size} outside 3..={}",
            n - 1
        )));
    }
    let mut inside = vec![false; n];
    for &v in subset {
        if v >= n || inside[v] {
            return Err(Error::domain(format!("bad SEC vertex {v}")));
        }
        inside[v] = true;
    }
    let row = match form.resolve(size, n) {
        SecForm::Packing => {
            let mut sorted = subset.to_vec();
            sorted.sort_unstable();
            let mut terms = Vec::with_capacity(size * (size - 1) / 2);
            for (j, &v) in sorted.iter().enumerate() {
                for &u in &sorted[..j] {
                    terms.push((edge_idx(u, v), 1));
                }
            }
            LinearConstraint::new(name, terms, Sense::Le, size as i64 - 1)
        }
        SecForm::Cut => {
            let mut terms = Vec::with_capacity(size * (n - size));
            for v in 1..n {
                for u in 0..v {
                    if inside[u] != inside[v] {
                        terms.push((edge_idx(u, v), 1));
                    }
                }
            }
            LinearConstraint::new(name, terms, Sense::Ge, 2)
        }
        SecForm::Hybrid => unreachable!(),
    };
    Ok(row)
}

/// Minimize `sum d_e x_e` subject to degree equations and SEC rows, `x` binary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpModel {
    pub name: String,
    n: usize,
    /// Objective coefficient per edge, triangular order.
    objective: Vec<i64>,
    degree_rows: Vec<LinearConstraint>,
    sec_rows: Vec<LinearConstraint>,
}

impl IlpModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[i64] {
        &self.objective
    }

    pub fn degree_rows(&self) -> &[LinearConstraint] {
        &self.degree_rows
    }

    pub fn sec_rows(&self) -> &[LinearConstraint] {
        &self.sec_rows
    }

    pub fn rows(&self) -> impl Iterator<Item = &LinearConstraint> {
        self.degree_rows.iter().chain(self.sec_rows.iter())
    }

    /// Appends a SEC row named `s<k>`.
    pub fn add_sec(&mut self, subset: &[usize], form: SecForm) -> Result<()> {
        let name = format!("s{}", self.sec_rows.len());
        let row = sec_row(subset, form, self.n, name)?;
        self.sec_rows.push(row);
        Ok(())
    }

    /// Appends an arbitrary extra row (used by the LP reader).
    pub fn push_sec_row(&mut self, row: LinearConstraint) -> Result<()> {
        if let Some(&(e, _)) = row.terms.iter().find(|(e, _)| *e >= self.m()) {
            return Err(Error::structure(format!("row {} references edge {e}", row.name)));
        }
        self.sec_rows.push(row);
        Ok(())
    }

    pub fn objective_value(&self, chosen: &[usize]) -> i64 {
        chosen.iter().map(|&e| self.objective[e]).sum()
    }

    /// Whether the 0/1 point with the given chosen edges satisfies every row.
    pub fn is_feasible(&self, chosen: &[usize]) -> bool {
        let mut x = vec![false; self.m()];
        for &e in chosen {
            if e >= x.len() {
                return false;
            }
            x[e] = true;
        }
        self.rows().all(|r| r.is_satisfied(&x))
    }

    /// A model from raw parts; checks that the degree rows are exactly the
    /// `n` degree equations.
    pub fn from_parts(
        name: impl Into<String>,
        n: usize,
        objective: Vec<i64>,
        degree_rows: Vec<LinearConstraint>,
        sec_rows: Vec<LinearConstraint>,
    ) -> Result<IlpModel> {
        if n < 3 || objective.len() != edge_count(n) {
            return Err(Error::structure(format!(
                "{} objective coefficients for n = {n}",
                objective.len()
            )));
        }
        let expected = degree_rows_for(n);
        if degree_rows.len() != n
            || degree_rows
                .iter()
                .zip(&expected)
                .any(|(a, b)| a.terms != b.terms || a.sense != b.sense || a.rhs != b.rhs)
        {
            return Err(Error::structure("degree rows do not match the complete graph"));
        }
        let mut model = IlpModel {
            name: name.into(),
            n,
            objective,
            degree_rows,
            sec_rows: Vec::new(),
        };
        for row in sec_rows {
            model.push_sec_row(row)?;
        }
        Ok(model)
    }
}

fn degree_rows_for(n: usize) -> Vec<LinearConstraint> {
    (0..n)
        .map(|v| {
            let terms = (0..n)
                .filter(|&u| u != v)
                .map(|u| (if u < v { edge_idx(u, v) } else { edge_idx(v, u) }, 1))
                .collect();
            LinearConstraint::new(format!("d{v}"), terms, Sense::Eq, 2)
        })
        .collect()
}

/// Objective plus degree equations, no SECs: the weighted 2-matching problem.
pub fn build_base_model(inst: &Instance) -> IlpModel {
    IlpModel {
        name: inst.name().to_string(),
        n: inst.n(),
        objective: inst.weights().to_vec(),
        degree_rows: degree_rows_for(inst.n()),
        sec_rows: Vec::new(),
    }
}
