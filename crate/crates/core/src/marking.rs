//! Subpattern-locus marking.
//!
//! Each subpattern of a side is located in its suffix tree and the locus
//! nodes are numbered ("marked"). Two numberings are kept over the same
//! marked set:
//!
//! * [`MarkScheme::VerticalPath`]: the tree is split into heavy paths and
//!   marks are consecutive along every path, so the marks on any root path
//!   form at most one interval per crossed path. The grid backend uses this.
//! * [`MarkScheme::Bfs`]: level order, so ancestors always carry smaller
//!   marks. The lookup-table backend uses this.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::dictionary::CanonicalId;
use crate::range_grid::GridPoint;
use crate::suffix_tree::{NodeId, SuffixTree};

pub type PathId = usize;

/// 1-based label of a marked node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mark(u32);

impl Mark {
    pub fn new(value: u32) -> Option<Mark> {
        (value > 0).then_some(Mark(value))
    }

    pub fn from_index(index: usize) -> Mark {
        Mark(index as u32 + 1)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// 0-based position for array indexing.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Closed interval of marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkInterval {
    pub lo: Mark,
    pub hi: Mark,
}

/// Shape of a rooted tree, detached from whatever labels it.
#[derive(Debug, Clone)]
pub struct Topology {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    root: NodeId,
    level: Vec<u32>,
    bfs_order: Vec<NodeId>,
}

impl Topology {
    /// `parents[v]` is `None` exactly for the root.
    pub fn from_parents(parents: &[Option<NodeId>]) -> Topology {
        let mut children = vec![Vec::new(); parents.len()];
        let mut root = None;
        for (v, p) in parents.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(v),
                None => {
                    assert!(root.is_none(), "more than one root");
                    root = Some(v);
                }
            }
        }
        Topology::assemble(parents.to_vec(), children, root.expect("tree has a root"))
    }

    fn assemble(parent: Vec<Option<NodeId>>, children: Vec<Vec<NodeId>>, root: NodeId) -> Topology {
        let n = parent.len();
        let mut level = vec![0u32; n];
        let mut bfs_order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            bfs_order.push(u);
            for &c in &children[u] {
                level[c] = level[u] + 1;
                queue.push_back(c);
            }
        }
        assert_eq!(bfs_order.len(), n, "parent array is not a single tree");
        Topology {
            parent,
            children,
            root,
            level,
            bfs_order,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    /// Edge count from the root.
    pub fn level(&self, v: NodeId) -> u32 {
        self.level[v]
    }

    /// Nodes in level order; every parent precedes its children.
    pub fn bfs_order(&self) -> &[NodeId] {
        &self.bfs_order
    }
}

impl From<&SuffixTree> for Topology {
    fn from(tree: &SuffixTree) -> Self {
        let parent = tree.nodes().iter().map(|n| n.parent()).collect();
        let children = tree.nodes().iter().map(|n| n.children().collect()).collect();
        Topology::assemble(parent, children, tree.root())
    }
}

/// Heavy-path decomposition: each node's largest child continues its path.
#[derive(Debug, Clone)]
pub struct VerticalPathDecomposition {
    path_of: Vec<PathId>,
    paths: Vec<Vec<NodeId>>,
    path_parent: Vec<Option<NodeId>>,
    crossings: Vec<u32>,
}

impl VerticalPathDecomposition {
    pub fn new(topo: &Topology) -> Self {
        let n = topo.len();
        let mut size = vec![1usize; n];
        for &v in topo.bfs_order().iter().rev() {
            if let Some(p) = topo.parent(v) {
                size[p] += size[v];
            }
        }
        let heavy: Vec<Option<NodeId>> = (0..n)
            .map(|v| {
                topo.children(v)
                    .iter()
                    .copied()
                    .reduce(|best, c| if size[c] > size[best] { c } else { best })
            })
            .collect();

        let mut heads: Vec<NodeId> = (0..n)
            .filter(|&v| match topo.parent(v) {
                None => true,
                Some(p) => heavy[p] != Some(v),
            })
            .collect();
        heads.sort_unstable();

        let mut path_of = vec![0; n];
        let mut paths = Vec::with_capacity(heads.len());
        let mut path_parent = Vec::with_capacity(heads.len());
        for (pid, &head) in heads.iter().enumerate() {
            let mut nodes = Vec::new();
            let mut cur = Some(head);
            while let Some(v) = cur {
                path_of[v] = pid;
                nodes.push(v);
                cur = heavy[v];
            }
            paths.push(nodes);
            path_parent.push(topo.parent(head));
        }

        let mut crossings = vec![0u32; n];
        for &v in topo.bfs_order() {
            crossings[v] = match topo.parent(v) {
                None => 1,
                Some(p) if path_of[p] == path_of[v] => crossings[p],
                Some(p) => crossings[p] + 1,
            };
        }
        VerticalPathDecomposition {
            path_of,
            paths,
            path_parent,
            crossings,
        }
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn path_of(&self, v: NodeId) -> PathId {
        self.path_of[v]
    }

    /// Nodes of `path`, head first, by increasing depth.
    pub fn path(&self, path: PathId) -> &[NodeId] {
        &self.paths[path]
    }

    /// The node the head of `path` hangs from; `None` for the root's path.
    pub fn path_parent(&self, path: PathId) -> Option<NodeId> {
        self.path_parent[path]
    }

    /// Number of distinct paths met on the walk from the root to `v`.
    pub fn crossings(&self, v: NodeId) -> u32 {
        self.crossings[v]
    }

    pub fn max_crossings(&self) -> u32 {
        self.crossings.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkScheme {
    VerticalPath,
    Bfs,
}

#[derive(Debug, Clone)]
pub struct MarkAssignment {
    scheme: MarkScheme,
    node_of_mark: Vec<NodeId>,
    mark_of_node: Vec<Option<Mark>>,
    /// Per node: mark of its deepest marked ancestor-or-self.
    deepest_marked: Vec<Option<Mark>>,
    /// Per mark: nearest marked proper ancestor.
    prev: Vec<Option<Mark>>,
    // vertical-path scheme only
    path_nearest: Vec<Option<Mark>>,
    path_first: Vec<Option<Mark>>,
}

/// Numbers `marked` nodes (duplicates ignored) under `scheme`.
pub fn assign_marks(
    topo: &Topology,
    decomposition: &VerticalPathDecomposition,
    marked: &[NodeId],
    scheme: MarkScheme,
) -> MarkAssignment {
    let n = topo.len();
    let mut is_marked = vec![false; n];
    for &v in marked {
        is_marked[v] = true;
    }

    let node_of_mark: Vec<NodeId> = match scheme {
        MarkScheme::VerticalPath => (0..decomposition.path_count())
            .flat_map(|p| decomposition.path(p).iter().copied())
            .filter(|&v| is_marked[v])
            .collect(),
        MarkScheme::Bfs => {
            let mut nodes: Vec<NodeId> = (0..n).filter(|&v| is_marked[v]).collect();
            nodes.sort_unstable_by_key(|&v| (topo.level(v), v));
            nodes
        }
    };
    let mut mark_of_node = vec![None; n];
    for (i, &v) in node_of_mark.iter().enumerate() {
        mark_of_node[v] = Some(Mark::from_index(i));
    }

    let mut deepest_marked = vec![None; n];
    let mut prev = vec![None; node_of_mark.len()];
    for &v in topo.bfs_order() {
        let above = topo.parent(v).and_then(|p| deepest_marked[p]);
        if let Some(m) = mark_of_node[v] {
            prev[m.index()] = above;
        }
        deepest_marked[v] = mark_of_node[v].or(above);
    }

    let (mut path_nearest, mut path_first) = (Vec::new(), Vec::new());
    if scheme == MarkScheme::VerticalPath {
        path_nearest = vec![None; n];
        path_first = vec![None; decomposition.path_count()];
        for p in 0..decomposition.path_count() {
            let mut running = None;
            for &v in decomposition.path(p) {
                if let Some(m) = mark_of_node[v] {
                    running = Some(m);
                    path_first[p] = path_first[p].or(Some(m));
                }
                path_nearest[v] = running;
            }
        }
    }

    MarkAssignment {
        scheme,
        node_of_mark,
        mark_of_node,
        deepest_marked,
        prev,
        path_nearest,
        path_first,
    }
}

impl MarkAssignment {
    pub fn scheme(&self) -> MarkScheme {
        self.scheme
    }

    /// Number of marked nodes.
    pub fn count(&self) -> usize {
        self.node_of_mark.len()
    }

    pub fn node_of_mark(&self, mark: Mark) -> NodeId {
        self.node_of_mark[mark.index()]
    }

    pub fn mark_of_node(&self, v: NodeId) -> Option<Mark> {
        self.mark_of_node[v]
    }

    /// Mark of the deepest marked node on the root path to `v`, `v` included.
    pub fn deepest_marked_ancestor(&self, v: NodeId) -> Option<Mark> {
        self.deepest_marked[v]
    }

    /// Nearest marked proper ancestor of the node carrying `mark`.
    pub fn prev(&self, mark: Mark) -> Option<Mark> {
        self.prev[mark.index()]
    }

    /// Disjoint mark intervals covering exactly the marked nodes on the root
    /// path to `v` (inclusive), one per vertical path that carries any of them.
    pub fn path_mark_intervals(
        &self,
        decomposition: &VerticalPathDecomposition,
        v: NodeId,
    ) -> Vec<MarkInterval> {
        let mut out = Vec::new();
        self.path_mark_intervals_into(decomposition, v, &mut out);
        out
    }

    /// Appends to `out`, deepest path first.
    pub fn path_mark_intervals_into(
        &self,
        decomposition: &VerticalPathDecomposition,
        v: NodeId,
        out: &mut Vec<MarkInterval>,
    ) {
        assert_eq!(
            self.scheme,
            MarkScheme::VerticalPath,
            "path intervals need consecutive marks along paths"
        );
        let mut cur = Some(v);
        while let Some(u) = cur {
            let p = decomposition.path_of(u);
            if let Some(hi) = self.path_nearest[u] {
                let lo = self.path_first[p].expect("path with a marked node has a first mark");
                out.push(MarkInterval { lo, hi });
            }
            cur = decomposition.path_parent(p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocateError {
    #[error("subpattern {index} does not occur in the tree")]
    Missing { index: usize },
    #[error("subpattern {index} ends inside an edge; separator edges were not split")]
    MidEdge { index: usize },
}

/// The explicit node spelling each subpattern. Shared subpatterns share a node.
pub fn locate_subpattern_nodes<S: AsRef<[u8]>>(
    tree: &SuffixTree,
    subpatterns: &[S],
) -> Result<Vec<NodeId>, LocateError> {
    subpatterns
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let s = s.as_ref();
            let locus = tree.descend(s).ok_or(LocateError::Missing { index })?;
            if tree.node(locus.node).string_depth() != s.len() {
                return Err(LocateError::MidEdge { index });
            }
            Ok(locus.node)
        })
        .collect()
}

/// Cross-links between the two trees' marks: `first[g]` lists the patterns
/// whose reversed `p1` sits at mark `g`, each with its `p2` mark; `second`
/// is the mirror image.
#[derive(Debug, Clone, Default)]
pub struct PatternLinks {
    first: Vec<Vec<(CanonicalId, Mark)>>,
    second: Vec<Vec<(CanonicalId, Mark)>>,
}

impl PatternLinks {
    pub fn first(&self, g: Mark) -> &[(CanonicalId, Mark)] {
        &self.first[g.index()]
    }

    pub fn second(&self, h: Mark) -> &[(CanonicalId, Mark)] {
        &self.second[h.index()]
    }
}

/// One grid point per pattern at `(g_i, h_i)`: the marks of its reversed-`p1`
/// locus in the first tree and its `p2` locus in the second.
pub fn build_pattern_links(
    first_loci: &[NodeId],
    second_loci: &[NodeId],
    assign_first: &MarkAssignment,
    assign_second: &MarkAssignment,
) -> (PatternLinks, Vec<GridPoint>) {
    assert_eq!(first_loci.len(), second_loci.len());
    assert_eq!(assign_first.scheme(), assign_second.scheme());
    let mut links = PatternLinks {
        first: vec![Vec::new(); assign_first.count()],
        second: vec![Vec::new(); assign_second.count()],
    };
    let mut points = Vec::with_capacity(first_loci.len());
    for (id, (&u, &v)) in first_loci.iter().zip(second_loci).enumerate() {
        let g = assign_first.mark_of_node(u).expect("p1 locus is marked");
        let h = assign_second.mark_of_node(v).expect("p2 locus is marked");
        links.first[g.index()].push((id, h));
        links.second[h.index()].push((id, g));
        points.push(GridPoint {
            x: g.get(),
            y: h.get(),
            payload: id,
        });
    }
    (links, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_parents(rng: &mut ChaCha8Rng, n: usize) -> Vec<Option<NodeId>> {
        let mut parents = vec![None];
        for v in 1..n {
            // mix of bushy and deep shapes
            let p = if rng.gen_bool(0.5) { v - 1 } else { rng.gen_range(0..v) };
            parents.push(Some(p));
        }
        parents
    }

    fn ancestors_or_self(topo: &Topology, v: NodeId) -> Vec<NodeId> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = topo.parent(cur) {
            out.push(p);
            cur = p;
        }
        out
    }

    fn expand(intervals: &[MarkInterval]) -> Vec<u32> {
        let mut marks: Vec<u32> = intervals
            .iter()
            .flat_map(|iv| iv.lo.get()..=iv.hi.get())
            .collect();
        marks.sort_unstable();
        marks
    }

    fn log_bound(n: usize) -> u32 {
        (usize::BITS - 1 - n.leading_zeros()) + 1
    }

    #[test]
    fn chain_is_one_path() {
        let parents: Vec<_> = (0..6usize).map(|v| v.checked_sub(1)).collect();
        let topo = Topology::from_parents(&parents);
        let dec = VerticalPathDecomposition::new(&topo);
        assert_eq!(dec.path_count(), 1);
        let all: Vec<_> = (0..6).collect();
        for scheme in [MarkScheme::VerticalPath, MarkScheme::Bfs] {
            let a = assign_marks(&topo, &dec, &all, scheme);
            let marks: Vec<_> = (0..6).map(|v| a.mark_of_node(v).unwrap().get()).collect();
            assert_eq!(marks, [1, 2, 3, 4, 5, 6]);
        }
        let a = assign_marks(&topo, &dec, &all, MarkScheme::VerticalPath);
        let iv = a.path_mark_intervals(&dec, 2);
        assert_eq!(iv, [MarkInterval { lo: Mark(1), hi: Mark(3) }]);
    }

    #[test]
    fn star_has_one_path_per_leaf() {
        let mut parents = vec![None];
        parents.extend((1..=5).map(|_| Some(0)));
        let topo = Topology::from_parents(&parents);
        let dec = VerticalPathDecomposition::new(&topo);
        assert_eq!(dec.path_count(), 5);
        assert!((1..=5).all(|v| dec.crossings(v) <= 2));
        let leaves: Vec<_> = (1..=5).collect();
        let vp = assign_marks(&topo, &dec, &leaves, MarkScheme::VerticalPath);
        let bfs = assign_marks(&topo, &dec, &leaves, MarkScheme::Bfs);
        for v in 1..=5 {
            assert_eq!(vp.path_mark_intervals(&dec, v).len(), 1);
            assert_eq!(bfs.mark_of_node(v), Mark::new(v as u32));
        }
    }

    #[test]
    fn unmarked_root_and_unmarked_tree() {
        let parents = [None, Some(0), Some(0)];
        let topo = Topology::from_parents(&parents);
        let dec = VerticalPathDecomposition::new(&topo);
        let vp = assign_marks(&topo, &dec, &[1], MarkScheme::VerticalPath);
        assert!(vp.path_mark_intervals(&dec, 0).is_empty());
        let none = assign_marks(&topo, &dec, &[], MarkScheme::Bfs);
        assert!((0..3).all(|v| none.deepest_marked_ancestor(v).is_none()));
        let bfs = assign_marks(&topo, &dec, &[2], MarkScheme::Bfs);
        assert_eq!(bfs.deepest_marked_ancestor(2), Mark::new(1));
    }

    #[test]
    fn random_trees_against_parent_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..40 {
            let n = if round < 4 { 10_000 } else { rng.gen_range(1..400) };
            let parents = random_parents(&mut rng, n);
            let topo = Topology::from_parents(&parents);
            let dec = VerticalPathDecomposition::new(&topo);
            let marked: Vec<_> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
            let vp = assign_marks(&topo, &dec, &marked, MarkScheme::VerticalPath);
            let bfs = assign_marks(&topo, &dec, &marked, MarkScheme::Bfs);
            let bound = log_bound(n);
            for v in 0..n {
                let chain = ancestors_or_self(&topo, v);
                let mut distinct: Vec<_> = chain.iter().map(|&u| dec.path_of(u)).collect();
                distinct.sort_unstable();
                distinct.dedup();
                assert_eq!(distinct.len() as u32, dec.crossings(v));
                assert!(dec.crossings(v) <= bound);

                let mut expected: Vec<u32> = chain
                    .iter()
                    .filter_map(|&u| vp.mark_of_node(u))
                    .map(Mark::get)
                    .collect();
                expected.sort_unstable();
                let intervals = vp.path_mark_intervals(&dec, v);
                assert_eq!(expand(&intervals), expected);
                assert!(intervals.len() as u32 <= bound.min(marked.len() as u32));

                let deepest = chain.iter().find_map(|&u| bfs.mark_of_node(u));
                assert_eq!(bfs.deepest_marked_ancestor(v), deepest);
                if let Some(m) = bfs.mark_of_node(v) {
                    let above = chain[1..].iter().find_map(|&u| bfs.mark_of_node(u));
                    assert_eq!(bfs.prev(m), above);
                    if let Some(a) = above {
                        assert!(a < m, "BFS marks grow with depth");
                    }
                }
            }
            // paths are vertical and marks consecutive along them
            for p in 0..dec.path_count() {
                let path = dec.path(p);
                assert!(path.windows(2).all(|w| topo.parent(w[1]) == Some(w[0])));
                let marks: Vec<u32> = path.iter().filter_map(|&v| vp.mark_of_node(v)).map(Mark::get).collect();
                assert!(marks.windows(2).all(|w| w[1] == w[0] + 1));
            }
        }
    }

    #[test]
    fn locate_in_split_trees() {
        let t = SuffixTree::build_split(b"cd\0d");
        let nodes = locate_subpattern_nodes(&t, &[&b"d"[..], b"cd"]).unwrap();
        assert_eq!(t.node(nodes[0]).string_depth(), 1);
        assert_eq!(t.node(nodes[0]).parent(), Some(t.root()));

        let t = SuffixTree::build_split(b"cd\0c");
        let nodes = locate_subpattern_nodes(&t, &[&b"cd"[..], b"c"]).unwrap();
        assert_ne!(nodes[0], nodes[1]);
        assert_eq!(t.node(nodes[0]).parent(), Some(nodes[1]));

        let t = SuffixTree::build_split(b"ab\0ab");
        let nodes = locate_subpattern_nodes(&t, &[&b"ab"[..], b"ab"]).unwrap();
        assert_eq!(nodes[0], nodes[1]);

        assert_eq!(
            locate_subpattern_nodes(&t, &[&b"zz"[..]]),
            Err(LocateError::Missing { index: 0 })
        );
        let unsplit = SuffixTree::build(b"abc\0x");
        assert_eq!(
            locate_subpattern_nodes(&unsplit, &[&b"ab"[..]]),
            Err(LocateError::MidEdge { index: 0 })
        );
    }

    #[test]
    fn pattern_links_are_symmetric() {
        // patterns (p1, p2): ("ab","x"), ("ab","y"), ("b","x")
        let first = SuffixTree::build_split(b"ba\0ba\0b");
        let second = SuffixTree::build_split(b"x\0y\0x");
        let f_loci = locate_subpattern_nodes(&first, &[&b"ba"[..], b"ba", b"b"]).unwrap();
        let s_loci = locate_subpattern_nodes(&second, &[&b"x"[..], b"y", b"x"]).unwrap();
        let (ft, st) = (Topology::from(&first), Topology::from(&second));
        let (fd, sd) = (VerticalPathDecomposition::new(&ft), VerticalPathDecomposition::new(&st));
        let af = assign_marks(&ft, &fd, &f_loci, MarkScheme::Bfs);
        let as_ = assign_marks(&st, &sd, &s_loci, MarkScheme::Bfs);
        assert_eq!((af.count(), as_.count()), (2, 2));
        let (links, points) = build_pattern_links(&f_loci, &s_loci, &af, &as_);
        assert_eq!(points.len(), 3);
        assert_eq!(points[0].x, points[1].x);
        assert_ne!(points[0].y, points[1].y);
        for p in &points {
            let (g, h) = (Mark(p.x), Mark(p.y));
            assert!(links.first(g).contains(&(p.payload, h)));
            assert!(links.second(h).contains(&(p.payload, g)));
            assert_eq!(af.node_of_mark(g), f_loci[p.payload]);
            assert_eq!(as_.node_of_mark(h), s_loci[p.payload]);
        }
    }
}
