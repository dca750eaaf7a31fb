//! Symmetric TSP instances over a complete graph.
//!
//! Edge weights are stored once per unordered pair in a triangular array;
//! the pair `u < v` lives at index `v(v-1)/2 + u`.

mod generate;
mod tsplib;

pub use generate::{gen_mesh, gen_random_euclidean, random_euclidean_name, scaled_distance, SCALE};
pub use tsplib::{parse_tsplib, render_explicit};

use serde::Serialize;

use crate::error::{Error, Result};

/// Where an instance came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Tsplib,
    RandomEuclidean,
    Mesh,
    Explicit,
}

/// An unordered vertex pair together with its triangular index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeIndex {
    pub u: usize,
    pub v: usize,
    pub idx: usize,
}

impl EdgeIndex {
    /// Builds the index of `{a, b}`; the endpoints may come in any order.
    pub fn of(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b);
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        EdgeIndex {
            u,
            v,
            idx: edge_idx(u, v),
        }
    }

    pub fn decode(idx: usize) -> Self {
        let (u, v) = edge_endpoints(idx);
        EdgeIndex { u, v, idx }
    }
}

/// Triangular index of the pair `u < v`.
#[inline]
pub fn edge_idx(u: usize, v: usize) -> usize {
    debug_assert!(u < v);
    v * (v - 1) / 2 + u
}

/// Inverse of [`edge_idx`].
pub fn edge_endpoints(idx: usize) -> (usize, usize) {
    // v is the largest integer with v(v-1)/2 <= idx.
    let mut v = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0) as usize;
    while v * (v - 1) / 2 > idx {
        v -= 1;
    }
    while (v + 1) * v / 2 <= idx {
        v += 1;
    }
    (idx - v * (v - 1) / 2, v)
}

#[inline]
pub fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    source: Source,
    n: usize,
    weights: Vec<i64>,
    coords: Option<Vec<(f64, f64)>>,
}

impl Instance {
    /// Builds an instance from a triangular weight array.
    pub fn from_weights(
        name: impl Into<String>,
        source: Source,
        n: usize,
        weights: Vec<i64>,
        coords: Option<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!(
                "instance needs at least 3 vertices, got {n}"
            )));
        }
        if weights.len() != edge_count(n) {
            return Err(Error::structure(format!(
                "expected {} weights for {n} vertices, got {}",
                edge_count(n),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|&&w| w < 0) {
            return Err(Error::domain(format!("negative edge weight {w}")));
        }
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(Error::structure(format!(
                    "{} coordinates for {n} vertices",
                    c.len()
                )));
            }
        }
        Ok(Instance {
            name: name.into(),
            source,
            n,
            weights,
            coords,
        })
    }

    /// Builds an instance from points and a pairwise distance rule.
    pub fn from_points<F>(
        name: impl Into<String>,
        source: Source,
        points: Vec<(f64, f64)>,
        dist: F,
    ) -> Result<Self>
    where
        F: Fn((f64, f64), (f64, f64)) -> i64,
    {
        let n = points.len();
        let mut weights = Vec::with_capacity(edge_count(n));
        for v in 1..n {
            for u in 0..v {
                weights.push(dist(points[u], points[v]));
            }
        }
        Instance::from_weights(name, source, n, weights, Some(points))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    /// Weights in triangular edge order.
    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    /// Checked symmetric lookup.
    pub fn edge_weight(&self, u: usize, v: usize) -> Result<i64> {
        if u == v {
            return Err(Error::domain(format!("no edge from vertex {u} to itself")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::domain(format!(
                "vertex pair ({u}, {v}) out of range for n = {}",
                self.n
            )));
        }
        Ok(self.w(u, v))
    }

    /// Unchecked lookup for hot loops; `u != v` is the caller's job.
    #[inline]
    pub fn w(&self, u: usize, v: usize) -> i64 {
        if u < v {
            self.weights[edge_idx(u, v)]
        } else {
            self.weights[edge_idx(v, u)]
        }
    }

    #[inline]
    pub fn weight_at(&self, idx: usize) -> i64 {
        self.weights[idx]
    }

    /// The subinstance induced by `vertices`; local vertex `i` is `vertices[i]`.
    pub fn induced(&self, vertices: &[usize], name: impl Into<String>) -> Result<Instance> {
        let k = vertices.len();
        let mut weights = Vec::with_capacity(edge_count(k));
        for j in 1..k {
            for i in 0..j {
                weights.push(self.w(vertices[i], vertices[j]));
            }
        }
        let coords = self
            .coords
            .as_ref()
            .map(|c| vertices.iter().map(|&v| c[v]).collect());
        Instance::from_weights(name, self.source, k, weights, coords)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}
