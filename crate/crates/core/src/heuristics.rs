//! Tour construction and local search used for warm starts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::Instance;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: i64,
}

impl Tour {
    /// Checks that `order` is a permutation of the instance's vertices.
    pub fn new(inst: &Instance, order: Vec<usize>) -> Result<Tour> {
        let n = inst.n();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::domain(format!(
                "tour has {} vertices, expected {n}",
                order.len()
            )));
        }
        for &v in &order {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::domain(format!("tour is not a permutation (vertex {v})")));
            }
        }
        let length = tour_length(inst, &order);
        Ok(Tour { order, length })
    }
}

pub fn tour_length(inst: &Instance, order: &[usize]) -> i64 {
    let n = order.len();
    (0..n).map(|i| inst.w(order[i], order[(i + 1) % n])).sum()
}

/// Greedy tour from `start`, always moving to the closest unvisited vertex
/// (smallest id on ties).
pub fn nearest_neighbor(inst: &Instance, start: usize) -> Result<Tour> {
    let n = inst.n();
    if start >= n {
        return Err(Error::domain(format!("start vertex {start} out of range")));
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    for _ in 1..n {
        let next = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (inst.w(cur, v), v))
            .expect("unvisited vertex remains");
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    Tour::new(inst, order)
}

/// First-improvement 2-opt until no improving exchange remains.
pub fn two_opt(inst: &Instance, tour: &Tour) -> Tour {
    let mut order = tour.order.clone();
    let n = order.len();
    'scan: loop {
        for i in 0..n.saturating_sub(1) {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (order[i], order[i + 1]);
                let (c, d) = (order[j], order[(j + 1) % n]);
                let delta = inst.w(a, c) + inst.w(b, d) - inst.w(a, b) - inst.w(c, d);
                if delta < 0 {
                    order[i + 1..=j].reverse();
                    continue 'scan;
                }
            }
        }
        break;
    }
    let length = tour_length(inst, &order);
    Tour { order, length }
}

/// Relocates segments of 1 to 3 consecutive vertices, in either orientation,
/// until no move shortens the tour.
pub fn or_opt(inst: &Instance, tour: &Tour) -> Tour {
    let mut order = tour.order.clone();
    let n = order.len();
    'scan: loop {
        for len in 1..=3usize {
            if n < len + 3 {
                break;
            }
            for i in 0..=n - len {
                let first = order[i];
                let last = order[i + len - 1];
                let prev = order[(i + n - 1) % n];
                let next = order[(i + len) % n];
                let gain = inst.w(prev, first) + inst.w(last, next) - inst.w(prev, next);
                let rest: Vec<usize> = order[..i].iter().chain(&order[i + len..]).copied().collect();
                let r = rest.len();
                for k in 0..r {
                    let (a, b) = (rest[k], rest[(k + 1) % r]);
                    if a == prev && b == next {
                        continue;
                    }
                    let forward = inst.w(a, first) + inst.w(last, b) - inst.w(a, b);
                    let backward = inst.w(a, last) + inst.w(first, b) - inst.w(a, b);
                    if forward.min(backward) < gain {
                        let mut seg: Vec<usize> = order[i..i + len].to_vec();
                        if backward < forward {
                            seg.reverse();
                        }
                        let mut next_order = Vec::with_capacity(n);
                        next_order.extend_from_slice(&rest[..=k]);
                        next_order.extend(seg);
                        next_order.extend_from_slice(&rest[k + 1..]);
                        order = next_order;
                        continue 'scan;
                    }
                }
            }
        }
        break;
    }
    let length = tour_length(inst, &order);
    Tour { order, length }
}

/// Alternates 2-opt and Or-opt until neither improves.
pub fn improve(inst: &Instance, tour: &Tour) -> Tour {
    let mut cur = tour.clone();
    loop {
        let next = or_opt(inst, &two_opt(inst, &cur));
        if next.length >= cur.length {
            return cur;
        }
        cur = next;
    }
}

/// Nearest neighbour from vertex 0 followed by [`improve`].
pub fn warm_start_tour(inst: &Instance) -> Tour {
    let nn = nearest_neighbor(inst, 0).expect("vertex 0 exists");
    improve(inst, &nn)
}
