//! Junction trees: construction, validation, cluster assignment and the
//! per-edge variable sets used by message passing.
//!
//! A junction tree over a network is a tree of variable clusters that
//!
//! * is a tree (JT1),
//! * has the running-intersection property: for any two clusters, their
//!   intersection is contained in every cluster on the path between them
//!   (JT2),
//! * covers every family: each `fa(u)` lies inside some cluster (JT3).
//!
//! Each variable is assigned to one covering cluster, `cl(u)`. Clusters are
//! indexed from 0.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{DiscreteNetwork, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JtViolation {
    NoClusters,
    UnknownVariable {
        cluster: usize,
        var: VarId,
    },
    EdgeOutOfRange {
        edge: (usize, usize),
    },
    SelfLoop {
        cluster: usize,
    },
    /// Adding `edge` closes a cycle.
    Cycle {
        edge: (usize, usize),
    },
    /// `cluster` is not connected to cluster 0.
    Disconnected {
        cluster: usize,
    },
    /// `var ∈ C_i ∩ C_j` but missing from `C_k`, with `k` on the path.
    RunningIntersection {
        i: usize,
        j: usize,
        k: usize,
        var: VarId,
    },
    /// No cluster contains `fa(var)`.
    Covering {
        var: VarId,
    },
    AssignmentLength {
        expected: usize,
        got: usize,
    },
    /// `fa(var)` is not inside the cluster it is assigned to.
    Assignment {
        var: VarId,
        cluster: usize,
    },
}

impl JtViolation {
    /// Name of the violated condition.
    pub fn condition(&self) -> &'static str {
        match self {
            JtViolation::NoClusters
            | JtViolation::EdgeOutOfRange { .. }
            | JtViolation::SelfLoop { .. }
            | JtViolation::Cycle { .. }
            | JtViolation::Disconnected { .. } => "tree",
            JtViolation::RunningIntersection { .. } => "running-intersection",
            JtViolation::Covering { .. } | JtViolation::UnknownVariable { .. } => "covering",
            JtViolation::AssignmentLength { .. } | JtViolation::Assignment { .. } => "assignment",
        }
    }
}

impl fmt::Display for JtViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.condition())?;
        match self {
            JtViolation::NoClusters => write!(f, "no clusters"),
            JtViolation::UnknownVariable { cluster, var } => {
                write!(f, "cluster {cluster} references unknown variable {var}")
            }
            JtViolation::EdgeOutOfRange { edge } => {
                write!(f, "edge {edge:?} references a missing cluster")
            }
            JtViolation::SelfLoop { cluster } => write!(f, "cluster {cluster} is linked to itself"),
            JtViolation::Cycle { edge } => write!(f, "edge {edge:?} closes a cycle"),
            JtViolation::Disconnected { cluster } => {
                write!(f, "cluster {cluster} is not connected")
            }
            JtViolation::RunningIntersection { i, j, k, var } => write!(
                f,
                "{var} is in clusters {i} and {j} but not in cluster {k} on the path between them"
            ),
            JtViolation::Covering { var } => write!(f, "no cluster contains the family of {var}"),
            JtViolation::AssignmentLength { expected, got } => {
                write!(
                    f,
                    "assignment lists {got} variables, network has {expected}"
                )
            }
            JtViolation::Assignment { var, cluster } => {
                write!(
                    f,
                    "{var} is assigned to cluster {cluster}, which does not contain its family"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JtReport {
    pub violations: Vec<JtViolation>,
}

impl JtReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn conditions(&self) -> BTreeSet<&'static str> {
        self.violations.iter().map(JtViolation::condition).collect()
    }
}

impl fmt::Display for JtReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

#[derive(Debug, Error)]
pub enum JtError {
    #[error("invalid junction tree:\n{0}")]
    Invalid(JtReport),
    #[error("no cluster contains the family of {0}")]
    Uncovered(VarId),
    #[error("clusters {0} and {1} are not adjacent")]
    NotAnEdge(usize, usize),
    #[error("cluster {0} does not exist")]
    NoSuchCluster(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunctionTree {
    clusters: Vec<Vec<VarId>>,
    edges: Vec<(usize, usize)>,
    assignment: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

/// Variable sets attached to a directed edge `from -> to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeContext {
    /// `S = C_from ∩ C_to`.
    pub separator: Vec<VarId>,
    /// Variables assigned to clusters on the `from` side of the edge.
    pub upstream: Vec<VarId>,
    /// Upstream variables inside the separator.
    pub local: Vec<VarId>,
    /// Upstream variables outside the separator (summed out by the message).
    pub summed: Vec<VarId>,
}

/// A junction tree seen from a chosen root.
#[derive(Debug, Clone)]
pub struct Rooted {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// Clusters in depth-first pre-order, children visited in ascending
    /// index order.
    pub preorder: Vec<usize>,
}

impl Rooted {
    /// Leaves first; every cluster appears after all of its children.
    pub fn postorder(&self) -> impl Iterator<Item = usize> + '_ {
        self.preorder.iter().rev().copied()
    }
}

fn normalize_edge((a, b): (usize, usize)) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn intersect(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    a.iter()
        .copied()
        .filter(|v| b.binary_search(v).is_ok())
        .collect()
}

fn is_subset(a: &[VarId], b: &[VarId]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    /// Returns false when both were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

impl JunctionTree {
    /// Builds a tree from explicit clusters and edges, assigning each
    /// variable with [`assign_clusters`], and validates it.
    pub fn new(
        net: &DiscreteNetwork,
        clusters: Vec<Vec<VarId>>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, JtError> {
        let clusters: Vec<Vec<VarId>> = clusters.into_iter().map(canonical_cluster).collect();
        let assignment = assign_clusters(net, &clusters)?;
        Self::with_assignment(net, clusters, edges, assignment)
    }

    /// As [`JunctionTree::new`] with a caller-chosen assignment.
    pub fn with_assignment(
        net: &DiscreteNetwork,
        clusters: Vec<Vec<VarId>>,
        edges: Vec<(usize, usize)>,
        assignment: Vec<usize>,
    ) -> Result<Self, JtError> {
        let jt = Self::unchecked(clusters, edges, assignment);
        let report = validate_junction_tree(net, &jt);
        if report.is_ok() {
            Ok(jt)
        } else {
            Err(JtError::Invalid(report))
        }
    }

    /// No validation; only [`validate_junction_tree`] is meaningful on the
    /// result until it has been checked.
    pub fn unchecked(
        clusters: Vec<Vec<VarId>>,
        edges: Vec<(usize, usize)>,
        assignment: Vec<usize>,
    ) -> Self {
        let clusters: Vec<Vec<VarId>> = clusters.into_iter().map(canonical_cluster).collect();
        let edges: Vec<(usize, usize)> = edges.into_iter().map(normalize_edge).collect();
        let q = clusters.len();
        let mut neighbors = vec![Vec::new(); q];
        for &(a, b) in &edges {
            if a < q && b < q && a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        JunctionTree {
            clusters,
            edges,
            assignment,
            neighbors,
        }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clusters(&self) -> &[Vec<VarId>] {
        &self.clusters
    }

    pub fn cluster(&self, i: usize) -> &[VarId] {
        &self.clusters[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// `cl(u)`.
    pub fn cluster_of(&self, u: VarId) -> usize {
        self.assignment[u.0]
    }

    /// Variables assigned to cluster `j` (`C_j*`).
    pub fn owned(&self, j: usize) -> Vec<VarId> {
        (0..self.assignment.len())
            .filter(|&u| self.assignment[u] == j)
            .map(VarId)
            .collect()
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i < self.len() && self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn separator(&self, i: usize, j: usize) -> Vec<VarId> {
        intersect(&self.clusters[i], &self.clusters[j])
    }

    pub fn max_cluster_size(&self) -> usize {
        self.clusters.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Roots the tree at `root` with an explicit stack.
    pub fn rooted(&self, root: usize) -> Result<Rooted, JtError> {
        let q = self.len();
        if root >= q {
            return Err(JtError::NoSuchCluster(root));
        }
        let mut parent = vec![None; q];
        let mut children = vec![Vec::new(); q];
        let mut seen = vec![false; q];
        let mut preorder = Vec::with_capacity(q);
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(i) = stack.pop() {
            preorder.push(i);
            for &n in &self.neighbors[i] {
                if !seen[n] {
                    seen[n] = true;
                    parent[n] = Some(i);
                    children[i].push(n);
                }
            }
            // Reverse so the smallest child is popped first.
            stack.extend(children[i].iter().rev());
        }
        Ok(Rooted {
            root,
            parent,
            children,
            preorder,
        })
    }

    /// Clusters on the `from` side of edge `from - to`.
    pub fn side(&self, from: usize, to: usize) -> Result<Vec<bool>, JtError> {
        if !self.is_edge(from, to) {
            return Err(JtError::NotAnEdge(from, to));
        }
        let mut inside = vec![false; self.len()];
        inside[from] = true;
        let mut stack = vec![from];
        while let Some(i) = stack.pop() {
            for &n in &self.neighbors[i] {
                if n != to && !inside[n] {
                    inside[n] = true;
                    stack.push(n);
                }
            }
        }
        Ok(inside)
    }

    /// Separator and upstream sets of the directed edge `from -> to`.
    pub fn edge_context(&self, from: usize, to: usize) -> Result<EdgeContext, JtError> {
        let inside = self.side(from, to)?;
        let separator = self.separator(from, to);
        let upstream: Vec<VarId> = (0..self.assignment.len())
            .filter(|&u| inside[self.assignment[u]])
            .map(VarId)
            .collect();
        let (local, summed) = upstream
            .iter()
            .partition(|v| separator.binary_search(v).is_ok());
        Ok(EdgeContext {
            separator,
            upstream,
            local,
            summed,
        })
    }

    /// Cluster indices on the path from `i` to `j`, both ends included.
    fn path(&self, rooted: &Rooted, depth: &[usize], mut i: usize, mut j: usize) -> Vec<usize> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        while depth[i] > depth[j] {
            left.push(i);
            i = rooted.parent[i].unwrap();
        }
        while depth[j] > depth[i] {
            right.push(j);
            j = rooted.parent[j].unwrap();
        }
        while i != j {
            left.push(i);
            right.push(j);
            i = rooted.parent[i].unwrap();
            j = rooted.parent[j].unwrap();
        }
        left.push(i);
        left.extend(right.into_iter().rev());
        left
    }
}

fn canonical_cluster(mut c: Vec<VarId>) -> Vec<VarId> {
    c.sort_unstable();
    c.dedup();
    c
}

/// Checks JT1 (tree), JT2 (running intersection), JT3 (covering) and the
/// validity of the cluster assignment.
pub fn validate_junction_tree(net: &DiscreteNetwork, jt: &JunctionTree) -> JtReport {
    let mut out = Vec::new();
    let q = jt.len();
    let p = net.len();
    if q == 0 {
        out.push(JtViolation::NoClusters);
        return JtReport { violations: out };
    }

    for (i, c) in jt.clusters.iter().enumerate() {
        for &v in c {
            if v.0 >= p {
                out.push(JtViolation::UnknownVariable { cluster: i, var: v });
            }
        }
    }

    // JT1: q - 1 edges joining everything without a cycle.
    let mut tree_ok = true;
    let mut dsu = DisjointSet::new(q);
    let mut seen = BTreeSet::new();
    for &(a, b) in &jt.edges {
        if a >= q || b >= q {
            out.push(JtViolation::EdgeOutOfRange { edge: (a, b) });
            tree_ok = false;
        } else if a == b {
            out.push(JtViolation::SelfLoop { cluster: a });
            tree_ok = false;
        } else if !seen.insert((a, b)) || !dsu.union(a, b) {
            out.push(JtViolation::Cycle { edge: (a, b) });
            tree_ok = false;
        }
    }
    for i in 1..q {
        if dsu.find(i) != dsu.find(0) {
            out.push(JtViolation::Disconnected { cluster: i });
            tree_ok = false;
        }
    }

    // JT2, checked per variable: the clusters holding it must be connected.
    if tree_ok {
        let rooted = jt.rooted(0).expect("cluster 0 exists");
        let mut depth = vec![0usize; q];
        for &i in &rooted.preorder {
            if let Some(par) = rooted.parent[i] {
                depth[i] = depth[par] + 1;
            }
        }
        let mut holders: Vec<Vec<usize>> = vec![Vec::new(); p];
        for (i, c) in jt.clusters.iter().enumerate() {
            for v in c.iter().filter(|v| v.0 < p) {
                holders[v.0].push(i);
            }
        }
        for (u, hs) in holders.iter().enumerate() {
            if hs.len() < 2 || holders_connected(jt, hs) {
                continue;
            }
            let var = VarId(u);
            for (a, &i) in hs.iter().enumerate() {
                for &j in &hs[a + 1..] {
                    let path = jt.path(&rooted, &depth, i, j);
                    if let Some(&k) = path
                        .iter()
                        .find(|&&k| jt.clusters[k].binary_search(&var).is_err())
                    {
                        out.push(JtViolation::RunningIntersection { i, j, k, var });
                    }
                }
            }
        }
    }

    // JT3 and the assignment.
    let families: Vec<Vec<VarId>> = net.ids().map(|u| net.family(u).unwrap()).collect();
    for (u, fam) in families.iter().enumerate() {
        if !jt.clusters.iter().any(|c| is_subset(fam, c)) {
            out.push(JtViolation::Covering { var: VarId(u) });
        }
    }
    if jt.assignment.len() != p {
        out.push(JtViolation::AssignmentLength {
            expected: p,
            got: jt.assignment.len(),
        });
    } else {
        for (u, &c) in jt.assignment.iter().enumerate() {
            if c >= q || !is_subset(&families[u], &jt.clusters[c]) {
                out.push(JtViolation::Assignment {
                    var: VarId(u),
                    cluster: c,
                });
            }
        }
    }
    JtReport { violations: out }
}

fn holders_connected(jt: &JunctionTree, holders: &[usize]) -> bool {
    let mut reached = vec![holders[0]];
    let mut stack = vec![holders[0]];
    while let Some(i) = stack.pop() {
        for &n in &jt.neighbors[i] {
            if holders.contains(&n) && !reached.contains(&n) {
                reached.push(n);
                stack.push(n);
            }
        }
    }
    reached.len() == holders.len()
}

/// `cl(u)` for every variable: the smallest cluster containing `fa(u)`,
/// ties going to the lowest index.
pub fn assign_clusters(
    net: &DiscreteNetwork,
    clusters: &[Vec<VarId>],
) -> Result<Vec<usize>, JtError> {
    let mut out = Vec::with_capacity(net.len());
    for u in net.ids() {
        let fam = net.family(u).unwrap();
        let best = clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| is_subset(&fam, c))
            .min_by_key(|(i, c)| (c.len(), *i))
            .map(|(i, _)| i)
            .ok_or(JtError::Uncovered(u))?;
        out.push(best);
    }
    Ok(out)
}

/// Undirected moral graph: each variable linked to its parents, parents of
/// a common child linked to each other.
pub fn moral_graph(net: &DiscreteNetwork) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); net.len()];
    for u in net.ids() {
        let pa = net.parents(u);
        for (a, p) in pa.iter().enumerate() {
            adj[u.0].insert(p.0);
            adj[p.0].insert(u.0);
            for q in &pa[a + 1..] {
                adj[p.0].insert(q.0);
                adj[q.0].insert(p.0);
            }
        }
    }
    adj
}

/// Greedy min-fill elimination. Returns the elimination order and, for each
/// eliminated variable, the clique it formed with its remaining neighbours.
pub fn min_fill_elimination(mut adj: Vec<BTreeSet<usize>>) -> (Vec<VarId>, Vec<Vec<VarId>>) {
    let p = adj.len();
    let mut alive = vec![true; p];
    let mut order = Vec::with_capacity(p);
    let mut cliques = Vec::with_capacity(p);
    let fill = |adj: &[BTreeSet<usize>], v: usize| -> usize {
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        let mut missing = 0;
        for (a, &x) in nb.iter().enumerate() {
            for &y in &nb[a + 1..] {
                if !adj[x].contains(&y) {
                    missing += 1;
                }
            }
        }
        missing
    };
    for _ in 0..p {
        let v = (0..p)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (fill(&adj, v), v))
            .unwrap();
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (a, &x) in nb.iter().enumerate() {
            for &y in &nb[a + 1..] {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
        for &x in &nb {
            adj[x].remove(&v);
        }
        adj[v].clear();
        alive[v] = false;
        order.push(VarId(v));
        let mut clique: Vec<VarId> = nb.into_iter().map(VarId).collect();
        clique.push(VarId(v));
        clique.sort_unstable();
        cliques.push(clique);
    }
    (order, cliques)
}

/// Moralize, triangulate by min-fill, keep the maximal elimination cliques
/// and join them with a maximum-weight spanning tree (weight = separator
/// size, ties broken by lexicographic cluster pair).
pub fn build_junction_tree(net: &DiscreteNetwork) -> JunctionTree {
    let (_, cliques) = min_fill_elimination(moral_graph(net));
    let mut clusters: Vec<Vec<VarId>> = Vec::new();
    for (i, c) in cliques.iter().enumerate() {
        let dominated = cliques
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && is_subset(c, d) && (d.len() > c.len() || j < i));
        if !dominated {
            clusters.push(c.clone());
        }
    }
    if clusters.is_empty() {
        clusters.push(Vec::new());
    }

    let q = clusters.len();
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..q {
        for j in i + 1..q {
            pairs.push((intersect(&clusters[i], &clusters[j]).len(), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut dsu = DisjointSet::new(q);
    let mut edges = Vec::with_capacity(q.saturating_sub(1));
    for (_, i, j) in pairs {
        if dsu.union(i, j) {
            edges.push((i, j));
            if edges.len() + 1 == q {
                break;
            }
        }
    }
    let assignment =
        assign_clusters(net, &clusters).expect("elimination cliques cover every family");
    JunctionTree::unchecked(clusters, edges, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cpd, Variable};
    use crate::pedigree;

    fn x(i: usize) -> VarId {
        VarId(i - 1)
    }

    #[test]
    fn reference_pedigree_tree_is_valid() {
        let net = pedigree::network();
        let jt = pedigree::reference_junction_tree(&net);
        assert!(validate_junction_tree(&net, &jt).is_ok());
        // C0 ∩ C6 = {X3} must sit in C1 and C3; C2 ∩ C4 = {X9} likewise.
        assert_eq!(jt.separator(0, 6), vec![x(3)]);
        assert_eq!(jt.separator(2, 4), vec![x(9)]);
        for k in [1, 3] {
            assert!(jt.cluster(k).contains(&x(3)) && jt.cluster(k).contains(&x(9)));
        }
    }

    #[test]
    fn reference_assignment_follows_smallest_cluster_rule() {
        let net = pedigree::network();
        let jt = pedigree::reference_junction_tree(&net);
        let expect = [0, 0, 0, 0, 5, 2, 5, 6, 2, 4];
        assert_eq!(jt.assignment(), &expect);
        assert_eq!(jt.cluster_of(x(10)), 4);
        assert_eq!(jt.cluster_of(x(8)), 6);
        assert!(jt.owned(1).is_empty() && jt.owned(3).is_empty());
    }

    #[test]
    fn removing_a_separator_variable_breaks_running_intersection() {
        let net = pedigree::network();
        let jt = pedigree::reference_junction_tree(&net);
        let mut clusters = jt.clusters().to_vec();
        clusters[1].retain(|v| *v != x(3));
        let mutant =
            JunctionTree::unchecked(clusters, jt.edges().to_vec(), jt.assignment().to_vec());
        let report = validate_junction_tree(&net, &mutant);
        assert_eq!(
            report.conditions().into_iter().collect::<Vec<_>>(),
            vec!["running-intersection"]
        );
        assert!(report
            .violations
            .contains(&JtViolation::RunningIntersection {
                i: 0,
                j: 6,
                k: 1,
                var: x(3)
            }));
    }

    #[test]
    fn single_cluster_is_always_a_junction_tree() {
        let net = pedigree::network();
        let all: Vec<VarId> = net.ids().collect();
        let jt = JunctionTree::new(&net, vec![all], vec![]).unwrap();
        assert!(jt.assignment().iter().all(|&c| c == 0));
        assert_eq!(jt.rooted(0).unwrap().preorder, vec![0]);
    }

    #[test]
    fn tree_violations() {
        let net = pedigree::network();
        let jt = pedigree::reference_junction_tree(&net);
        let c = jt.clusters().to_vec();
        let a = jt.assignment().to_vec();

        let mut extra = jt.edges().to_vec();
        extra.push((0, 6));
        let r = validate_junction_tree(&net, &JunctionTree::unchecked(c.clone(), extra, a.clone()));
        assert!(r.violations.contains(&JtViolation::Cycle { edge: (0, 6) }));

        let missing = jt.edges()[..5].to_vec();
        let r = validate_junction_tree(
            &net,
            &JunctionTree::unchecked(c.clone(), missing, a.clone()),
        );
        assert!(r
            .violations
            .contains(&JtViolation::Disconnected { cluster: 6 }));
        assert_eq!(r.conditions().into_iter().collect::<Vec<_>>(), vec!["tree"]);

        let r = validate_junction_tree(
            &net,
            &JunctionTree::unchecked(c.clone(), vec![(0, 9)], a.clone()),
        );
        assert!(r
            .violations
            .contains(&JtViolation::EdgeOutOfRange { edge: (0, 9) }));

        let r = validate_junction_tree(&net, &JunctionTree::unchecked(vec![], vec![], vec![]));
        assert_eq!(r.violations, vec![JtViolation::NoClusters]);
    }

    #[test]
    fn covering_and_assignment_violations() {
        let net = pedigree::network();
        let jt = pedigree::reference_junction_tree(&net);
        let mut c = jt.clusters().to_vec();
        c[4].retain(|v| *v != x(10));
        c[4].push(x(8));
        let mut a = jt.assignment().to_vec();
        a[9] = 4;
        let r = validate_junction_tree(&net, &JunctionTree::unchecked(c, jt.edges().to_vec(), a));
        assert!(r.violations.contains(&JtViolation::Covering { var: x(10) }));
        assert!(r.violations.contains(&JtViolation::Assignment {
            var: x(10),
            cluster: 4
        }));

        let mut a = jt.assignment().to_vec();
        a[0] = 3;
        let r = validate_junction_tree(
            &net,
            &JunctionTree::unchecked(jt.clusters().to_vec(), jt.edges().to_vec(), a),
        );
        assert_eq!(
            r.violations,
            vec![JtViolation::Assignment {
                var: x(1),
                cluster: 3
            }]
        );
    }

    #[test]
    fn assignment_needs_a_covering_cluster() {
        let net = pedigree::network();
        let clusters = vec![vec![x(1), x(2)], vec![x(3)]];
        assert!(matches!(
            assign_clusters(&net, &clusters),
            Err(JtError::Uncovered(_))
        ));
    }

    #[test]
    fn upstream_sets() {
        let net = pedigree::network();
        let jt = pedigree::reference_junction_tree(&net);
        let ctx = jt.edge_context(1, 0).unwrap();
        assert_eq!(ctx.separator, vec![x(3), x(4)]);
        assert!(ctx.local.is_empty());
        assert_eq!(ctx.summed, (5..=10).map(x).collect::<Vec<_>>());
        let back = jt.edge_context(0, 1).unwrap();
        assert_eq!(back.local, vec![x(3), x(4)]);
        assert_eq!(back.summed, vec![x(1), x(2)]);
        assert!(matches!(
            jt.edge_context(0, 6),
            Err(JtError::NotAnEdge(0, 6))
        ));
    }

    #[test]
    fn edge_partitions_hold() {
        let net = pedigree::network();
        let jt = pedigree::reference_junction_tree(&net);
        for &(i, j) in jt.edges() {
            let a = jt.edge_context(i, j).unwrap();
            let b = jt.edge_context(j, i).unwrap();
            let mut u: Vec<VarId> = a.upstream.iter().chain(&b.upstream).copied().collect();
            u.sort();
            assert_eq!(u, net.ids().collect::<Vec<_>>());
            let mut l: Vec<VarId> = a.local.iter().chain(&b.local).copied().collect();
            l.sort();
            assert_eq!(l, a.separator);
            let mut v: Vec<VarId> = a.summed.iter().chain(&b.summed).copied().collect();
            v.sort();
            let rest: Vec<VarId> = net.ids().filter(|u| !a.separator.contains(u)).collect();
            assert_eq!(v, rest);
        }
    }

    #[test]
    fn leaf_cluster_without_owned_variables() {
        // A -> B, tree {A,B} - {B}: the leaf owns nothing, so its upstream set
        // is empty.
        let net = DiscreteNetwork::new(
            vec![
                Variable::new(0, "A", &["0", "1"]),
                Variable::new(1, "B", &["0", "1"]),
            ],
            vec![
                Cpd::prior(VarId(0), vec![0.5, 0.5]),
                Cpd::new(
                    VarId(1),
                    vec![VarId(0)],
                    vec![vec![0.5, 0.5], vec![0.1, 0.9]],
                ),
            ],
        )
        .unwrap();
        let jt = JunctionTree::new(
            &net,
            vec![vec![VarId(0), VarId(1)], vec![VarId(1)]],
            vec![(0, 1)],
        )
        .unwrap();
        let ctx = jt.edge_context(1, 0).unwrap();
        assert!(ctx.upstream.is_empty());
        assert_eq!(
            jt.edge_context(0, 1).unwrap().upstream,
            vec![VarId(0), VarId(1)]
        );
    }

    #[test]
    fn built_pedigree_tree() {
        let net = pedigree::network();
        let jt = build_junction_tree(&net);
        assert!(
            validate_junction_tree(&net, &jt).is_ok(),
            "{}",
            validate_junction_tree(&net, &jt)
        );
        assert_eq!(jt.len(), 7);
        assert_eq!(jt.max_cluster_size(), 4);
        assert_eq!(build_junction_tree(&net), jt);
    }

    #[test]
    fn single_variable_network() {
        let net = DiscreteNetwork::new(
            vec![Variable::new(0, "A", &["0", "1"])],
            vec![Cpd::prior(VarId(0), vec![0.5, 0.5])],
        )
        .unwrap();
        let jt = build_junction_tree(&net);
        assert_eq!(jt.clusters(), &[vec![VarId(0)]]);
        assert!(jt.edges().is_empty());
    }

    #[test]
    fn rooted_orders() {
        let net = pedigree::network();
        let jt = pedigree::reference_junction_tree(&net);
        let r = jt.rooted(0).unwrap();
        assert_eq!(r.preorder, vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(r.children[1], vec![2, 3]);
        assert_eq!(r.parent[6], Some(5));
        let post: Vec<usize> = r.postorder().collect();
        assert_eq!(post, vec![6, 5, 4, 3, 2, 1, 0]);
        assert!(matches!(jt.rooted(7), Err(JtError::NoSuchCluster(7))));
    }
}
