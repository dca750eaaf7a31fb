//! Independent oracles used by the integration and acceptance tests. None of
//! them call into the solver; they only read instance weights.

#![allow(dead_code)]

use inttsp::instances::Instance;

/// Shortest tour by trying every permutation of vertices 1..n after vertex 0.
pub fn brute_force_tour(inst: &Instance) -> i64 {
    let n = inst.n();
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = i64::MAX;
    permute(&mut rest, 0, &mut |perm| {
        let mut len = inst.w(0, perm[0]) + inst.w(perm[perm.len() - 1], 0);
        for w in perm.windows(2) {
            len += inst.w(w[0], w[1]);
        }
        best = best.min(len);
    });
    best
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Every 2-factor of the complete graph, as sorted edge lists, by walking
/// the edges `(u, v)` in lexicographic order with degree bookkeeping.
pub fn all_two_factors(n: usize) -> Vec<Vec<(usize, usize)>> {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    let mut deg = vec![0u8; n];
    let mut chosen = Vec::new();
    fn go(
        i: usize,
        edges: &[(usize, usize)],
        deg: &mut [u8],
        chosen: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if i == edges.len() {
            if deg.iter().all(|&d| d == 2) {
                out.push(chosen.clone());
            }
            return;
        }
        let (u, v) = edges[i];
        // Once every edge of u is decided, u must be complete.
        if deg[u] < 2 && deg[v] < 2 {
            deg[u] += 1;
            deg[v] += 1;
            chosen.push((u, v));
            go(i + 1, edges, deg, chosen, out);
            chosen.pop();
            deg[u] -= 1;
            deg[v] -= 1;
        }
        let last_of_u = v == deg.len() - 1;
        if !(last_of_u && deg[u] < 2) {
            go(i + 1, edges, deg, chosen, out);
        }
    }
    go(0, &edges, &mut deg, &mut chosen, &mut out);
    out
}

pub fn min_two_matching_by_enumeration(inst: &Instance) -> i64 {
    all_two_factors(inst.n())
        .iter()
        .map(|f| f.iter().map(|&(u, v)| inst.w(u, v)).sum())
        .min()
        .expect("complete graph with n >= 3 has a 2-factor")
}

/// Minimum 2-matching weight and the cycle count of one optimal 2-matching,
/// by a shortest-Hamiltonian-cycle table over vertex subsets followed by a
/// partition DP. Practical up to about 14 vertices.
pub fn min_two_matching_by_partition(inst: &Instance) -> (i64, usize) {
    let n = inst.n();
    let full = 1usize << n;
    const INF: i64 = i64::MAX / 4;
    // path[mask][v]: shortest path from the lowest vertex of mask through
    // all of mask ending at v.
    let mut cycle = vec![INF; full];
    let mut path = vec![INF; full * n];
    for s in 0..n {
        path[(1 << s) * n + s] = 0;
    }
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        for v in 0..n {
            let cur = path[mask * n + v];
            if cur >= INF || mask & (1 << v) == 0 {
                continue;
            }
            for w in low + 1..n {
                if mask & (1 << w) != 0 {
                    continue;
                }
                let next = mask | (1 << w);
                let cand = cur + inst.w(v, w);
                if cand < path[next * n + w] {
                    path[next * n + w] = cand;
                }
            }
        }
        if mask.count_ones() >= 3 {
            let best = (0..n)
                .filter(|&v| v != low && mask & (1 << v) != 0)
                .map(|v| path[mask * n + v].saturating_add(inst.w(v, low)))
                .min()
                .unwrap_or(INF);
            cycle[mask] = best;
        }
    }
    // Partition of each mask into cycles; the part holding the lowest
    // vertex is enumerated explicitly.
    let mut best = vec![(INF, 0usize); full];
    best[0] = (0, 0);
    for mask in 1..full {
        let low = 1usize << mask.trailing_zeros();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let part = sub | low;
            if cycle[part] < INF {
                let (b, k) = best[mask ^ part];
                if b < INF {
                    let cand = (b + cycle[part], k + 1);
                    if cand.0 < best[mask].0 {
                        best[mask] = cand;
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best[full - 1]
}

/// Length of a shortest tour and the number of distinct shortest tours
/// (undirected), by depth-first enumeration from vertex 0 pruned with
/// `partial + remaining_edges * min_weight > best`.
pub fn count_optimal_tours(inst: &Instance) -> (i64, u64) {
    let n = inst.n();
    let min_w = inst.weights().iter().copied().min().unwrap_or(0);
    let mut state = (i64::MAX, 0u64);
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut order: Vec<Vec<usize>> = Vec::with_capacity(n);
    for u in 0..n {
        let mut vs: Vec<usize> = (0..n).filter(|&v| v != u).collect();
        vs.sort_by_key(|&v| (inst.w(u, v), v));
        order.push(vs);
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        inst: &Instance,
        order: &[Vec<usize>],
        cur: usize,
        depth: usize,
        len: i64,
        min_w: i64,
        visited: &mut [bool],
        state: &mut (i64, u64),
    ) {
        let n = inst.n();
        if depth == n {
            let total = len + inst.w(cur, 0);
            if total < state.0 {
                *state = (total, 1);
            } else if total == state.0 {
                state.1 += 1;
            }
            return;
        }
        for &v in &order[cur] {
            if visited[v] {
                continue;
            }
            let next = len + inst.w(cur, v);
            let remaining = (n - depth) as i64;
            if state.0 != i64::MAX && next + remaining * min_w > state.0 {
                continue;
            }
            visited[v] = true;
            go(inst, order, v, depth + 1, next, min_w, visited, state);
            visited[v] = false;
        }
    }
    go(inst, &order, 0, 1, 0, min_w, &mut visited, &mut state);
    // Each undirected tour is met once per direction.
    (state.0, state.1 / 2)
}

/// Connected components of the graph on `n` vertices with the given edges,
/// by breadth-first search; parts sorted and ordered by smallest vertex.
pub fn components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut parts = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        let mut part = Vec::new();
        while let Some(u) = queue.pop_front() {
            part.push(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        part.sort_unstable();
        parts.push(part);
    }
    parts
}
