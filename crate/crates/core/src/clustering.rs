//! Single-linkage clustering over the sorted edge list, the restricted
//! variant with minimum cluster size three, and the full merge tree.

use crate::error::{Error, Result};
use crate::instances::{edge_endpoints, Instance};

/// Union-find with component sizes.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    count: usize,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
            count: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Merges the sets of `a` and `b`; returns false if they were one set.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.count -= 1;
        true
    }

    /// Parts as sorted vertex lists, ordered by smallest vertex.
    pub fn parts(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            let r = self.find(v);
            if slot[r] == usize::MAX {
                slot[r] = parts.len();
                parts.push(Vec::new());
            }
            parts[slot[r]].push(v);
        }
        parts
    }
}

/// Edge indices by nondecreasing weight, ties by index.
pub fn sorted_edges(inst: &Instance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.sort_by_key(|&e| (inst.weight_at(e), e));
    order
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    /// Disjoint sorted vertex sets covering all vertices, ordered by smallest member.
    pub partition: Vec<Vec<usize>>,
    pub c_actual: usize,
    /// Edges that merged two components, in admission order.
    pub admitted: Vec<usize>,
}

fn check_count(inst: &Instance, c: usize) -> Result<()> {
    if c == 0 || c > inst.n() {
        return Err(Error::domain(format!(
            "cluster count {c} outside 1..={}",
            inst.n()
        )));
    }
    Ok(())
}

/// Runs the Kruskal scan until `c` components remain. Returns the sets, the
/// admitted edges and the position in `edges` where the scan stopped.
fn kruskal_to(edges: &[usize], n: usize, c: usize) -> (DisjointSets, Vec<usize>, usize) {
    let mut sets = DisjointSets::new(n);
    let mut admitted = Vec::new();
    let mut pos = 0;
    while sets.count() > c && pos < edges.len() {
        let (u, v) = edge_endpoints(edges[pos]);
        if sets.union(u, v) {
            admitted.push(edges[pos]);
        }
        pos += 1;
    }
    (sets, admitted, pos)
}

pub fn cluster(inst: &Instance, c: usize) -> Result<Clustering> {
    check_count(inst, c)?;
    let edges = sorted_edges(inst);
    let (mut sets, admitted, _) = kruskal_to(&edges, inst.n(), c);
    let partition = sets.parts();
    Ok(Clustering {
        c_actual: partition.len(),
        partition,
        admitted,
    })
}

/// [`cluster`] followed by a continued scan that only admits edges touching
/// a component of fewer than three vertices.
pub fn restricted_cluster(inst: &Instance, c: usize) -> Result<Clustering> {
    check_count(inst, c)?;
    let edges = sorted_edges(inst);
    let (mut sets, mut admitted, pos) = kruskal_to(&edges, inst.n(), c);
    for &e in &edges[pos..] {
        let (u, v) = edge_endpoints(e);
        if (sets.size_of(u) < 3 || sets.size_of(v) < 3) && sets.union(u, v) {
            admitted.push(e);
        }
    }
    let partition = sets.parts();
    Ok(Clustering {
        c_actual: partition.len(),
        partition,
        admitted,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// Sorted vertices below this node.
    pub cluster: Vec<usize>,
    /// Node ids of the two merged components; `None` for leaves.
    pub children: Option<(usize, usize)>,
    /// 0 for the first merge, 1 for the second, ...; `None` for leaves.
    pub merge_rank: Option<usize>,
    /// The edge whose admission created this node.
    pub edge: Option<usize>,
}

/// Binary merge tree: nodes `0..n` are the leaves (vertex `v` is node `v`),
/// internal nodes follow in merge order and the last node is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterTree {
    pub nodes: Vec<TreeNode>,
}

impl ClusterTree {
    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.len().div_ceil(2)
    }

    /// Nodes of the subtree at `node`, children before parents.
    pub fn postorder(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(node, false)];
        while let Some((id, expanded)) = stack.pop() {
            match (self.nodes[id].children, expanded) {
                (Some((a, b)), false) => {
                    stack.push((id, true));
                    stack.push((b, false));
                    stack.push((a, false));
                }
                _ => out.push(id),
            }
        }
        out
    }
}

pub fn build_cluster_tree(inst: &Instance) -> ClusterTree {
    let n = inst.n();
    let mut nodes: Vec<TreeNode> = (0..n)
        .map(|v| TreeNode {
            cluster: vec![v],
            children: None,
            merge_rank: None,
            edge: None,
        })
        .collect();
    let mut sets = DisjointSets::new(n);
    // Tree node currently representing each union-find root.
    let mut node_of: Vec<usize> = (0..n).collect();
    for e in sorted_edges(inst) {
        if sets.count() == 1 {
            break;
        }
        let (u, v) = edge_endpoints(e);
        let (ru, rv) = (sets.find(u), sets.find(v));
        if ru == rv {
            continue;
        }
        let (a, b) = (node_of[ru], node_of[rv]);
        let mut merged: Vec<usize> = nodes[a]
            .cluster
            .iter()
            .chain(&nodes[b].cluster)
            .copied()
            .collect();
        merged.sort_unstable();
        let id = nodes.len();
        nodes.push(TreeNode {
            cluster: merged,
            children: Some((a, b)),
            merge_rank: Some(id - n),
            edge: Some(e),
        });
        sets.union(u, v);
        node_of[sets.find(u)] = id;
    }
    ClusterTree { nodes }
}

/// The maximal tree nodes whose cluster has at most `u` vertices, in
/// depth-first order from the root.
pub fn cut_tree_at(tree: &ClusterTree, u: usize) -> Result<Vec<usize>> {
    if u < 3 {
        return Err(Error::domain(format!("size bound {u} must be at least 3")));
    }
    let mut out = Vec::new();
    let mut stack = vec![tree.root()];
    while let Some(id) = stack.pop() {
        let node = &tree.nodes[id];
        match node.children {
            Some((a, b)) if node.cluster.len() > u => {
                stack.push(b);
                stack.push(a);
            }
            _ => out.push(id),
        }
    }
    Ok(out)
}
