//! Suffix trees over separator-joined subpattern strings.
//!
//! The indexed text is a byte string in which [`SEPARATOR`] joins
//! subpatterns. Internally every separator occurrence, and a virtual
//! terminator at `text.len()`, is a distinct symbol keyed by its position,
//! so every suffix ends at a leaf and no repeated substring ever contains a
//! separator. Queries are separator-free, so they can never walk into one.

use crate::dictionary::SEPARATOR;

pub type NodeId = usize;

/// Edge key: a byte value, or `256 + position` for a separator or the terminator.
type Symbol = u64;

const ROOT: NodeId = 0;
const OPEN_END: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct Node {
    parent: Option<NodeId>,
    start: usize,
    end: usize,
    children: Vec<(Symbol, NodeId)>,
    suffix_link: Option<NodeId>,
    string_depth: usize,
}

impl Node {
    fn new(start: usize, end: usize) -> Self {
        Node {
            parent: None,
            start,
            end,
            children: Vec::new(),
            suffix_link: None,
            string_depth: 0,
        }
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    /// Half-open offsets of the incoming edge label; may reach `text.len()`,
    /// the position of the virtual terminator.
    pub fn edge(&self) -> (usize, usize) {
        (self.start, self.end)
    }

    pub fn edge_len(&self) -> usize {
        self.end - self.start
    }

    pub fn children(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.children.iter().map(|&(_, c)| c)
    }

    pub fn child_count(&self) -> usize {
        self.children.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn suffix_link(&self) -> Option<NodeId> {
        self.suffix_link
    }

    /// Length of the string spelled from the root to this node.
    pub fn string_depth(&self) -> usize {
        self.string_depth
    }

    fn child(&self, symbol: Symbol) -> Option<NodeId> {
        self.children
            .binary_search_by_key(&symbol, |&(s, _)| s)
            .ok()
            .map(|i| self.children[i].1)
    }

    fn set_child(&mut self, symbol: Symbol, node: NodeId) {
        match self.children.binary_search_by_key(&symbol, |&(s, _)| s) {
            Ok(i) => self.children[i].1 = node,
            Err(i) => self.children.insert(i, (symbol, node)),
        }
    }
}

/// Position reached by a root-anchored match, normalized to an explicit node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Locus {
    /// Deepest explicit node on the matched path with `string_depth <= match_len`.
    pub node: NodeId,
    pub match_len: usize,
}

/// Work counters for [`SuffixTree::matching_statistics_counted`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanCounters {
    /// Query symbol compared against an edge symbol (or a child lookup key).
    pub symbol_comparisons: u64,
    pub suffix_link_hops: u64,
    /// Whole-edge skips during the skip/count rescan after a link hop.
    pub rescan_hops: u64,
}

impl ScanCounters {
    pub fn add(&mut self, other: &ScanCounters) {
        self.symbol_comparisons += other.symbol_comparisons;
        self.suffix_link_hops += other.suffix_link_hops;
        self.rescan_hops += other.rescan_hops;
    }
}

#[derive(Debug, Clone)]
pub struct SuffixTree {
    text: Vec<u8>,
    nodes: Vec<Node>,
    separators_split: bool,
}

impl SuffixTree {
    /// Ukkonen's online construction, linear in `text.len()` for a byte alphabet.
    pub fn build(text: &[u8]) -> SuffixTree {
        let mut tree = SuffixTree {
            text: text.to_vec(),
            nodes: vec![Node::new(0, 0)],
            separators_split: false,
        };
        let n = text.len() + 1;
        let mut active_node = ROOT;
        let mut active_edge = 0usize;
        let mut active_len = 0usize;
        let mut remainder = 0usize;

        for i in 0..n {
            let c = tree.symbol(i);
            remainder += 1;
            let mut last_new: Option<NodeId> = None;
            while remainder > 0 {
                if active_len == 0 {
                    active_edge = i;
                }
                let edge_symbol = tree.symbol(active_edge);
                match tree.nodes[active_node].child(edge_symbol) {
                    None => {
                        let leaf = tree.push_node(Node::new(i, OPEN_END));
                        tree.nodes[active_node].set_child(edge_symbol, leaf);
                        if let Some(l) = last_new.take() {
                            tree.nodes[l].suffix_link = Some(active_node);
                        }
                    }
                    Some(next) => {
                        let next_start = tree.nodes[next].start;
                        let edge_len = tree.nodes[next].end.min(i + 1) - next_start;
                        if active_len >= edge_len {
                            active_edge += edge_len;
                            active_len -= edge_len;
                            active_node = next;
                            continue;
                        }
                        if tree.symbol(next_start + active_len) == c {
                            if let Some(l) = last_new.take() {
                                tree.nodes[l].suffix_link = Some(active_node);
                            }
                            active_len += 1;
                            break;
                        }
                        let mid = tree.push_node(Node::new(next_start, next_start + active_len));
                        tree.nodes[active_node].set_child(edge_symbol, mid);
                        let leaf = tree.push_node(Node::new(i, OPEN_END));
                        tree.nodes[mid].set_child(c, leaf);
                        tree.nodes[next].start += active_len;
                        let moved = tree.symbol(tree.nodes[next].start);
                        tree.nodes[mid].set_child(moved, next);
                        if let Some(l) = last_new {
                            tree.nodes[l].suffix_link = Some(mid);
                        }
                        last_new = Some(mid);
                    }
                }
                remainder -= 1;
                if active_node == ROOT && active_len > 0 {
                    active_len -= 1;
                    active_edge = i + 1 - remainder;
                } else if active_node != ROOT {
                    active_node = tree.nodes[active_node].suffix_link.unwrap_or(ROOT);
                }
            }
        }
        debug_assert_eq!(remainder, 0, "unique terminator leaves no implicit suffix");

        for node in &mut tree.nodes {
            if node.end == OPEN_END {
                node.end = n;
            }
        }
        tree.nodes[ROOT].suffix_link = Some(ROOT);
        tree.link_parents();
        tree
    }

    /// Builds the tree and applies [`SuffixTree::split_separator_edges`].
    pub fn build_split(text: &[u8]) -> SuffixTree {
        SuffixTree::build(text).split_separator_edges()
    }

    /// Inserts an explicit node right before the first separator of every
    /// edge label `y$z` with nonempty `y`, so every separator-free string
    /// that ends where a separator follows has an explicit locus.
    ///
    /// Afterwards the first separator on any edge label is at offset 0.
    pub fn split_separator_edges(mut self) -> SuffixTree {
        if self.separators_split {
            return self;
        }
        let n = self.text.len();
        // next_sep[p] = first position >= p holding a separator or the terminator
        let mut next_sep = vec![n; n + 1];
        for p in (0..n).rev() {
            next_sep[p] = if self.text[p] == SEPARATOR { p } else { next_sep[p + 1] };
        }

        let original = self.nodes.len();
        let mut created = Vec::new();
        for v in 1..original {
            let (start, end) = (self.nodes[v].start, self.nodes[v].end);
            let cut = next_sep[start];
            if cut == start || cut >= end {
                continue;
            }
            let parent = self.nodes[v].parent.expect("non-root node has a parent");
            let mut w_node = Node::new(start, cut);
            w_node.parent = Some(parent);
            w_node.string_depth = self.nodes[parent].string_depth + (cut - start);
            let w = self.push_node(w_node);
            let first = self.symbol(start);
            self.nodes[parent].set_child(first, w);
            let sep = self.symbol(cut);
            self.nodes[w].set_child(sep, v);
            self.nodes[v].start = cut;
            self.nodes[v].parent = Some(w);
            created.push(w);
        }

        // A split node spelling x (followed by a separator at `cut`) links to
        // the locus of x[1..], which the splits above made explicit.
        for w in created {
            let parent = self.nodes[w].parent.expect("split node has a parent");
            let cut = self.nodes[w].end;
            let target = self.nodes[w].string_depth - 1;
            let mut node = self.nodes[parent].suffix_link.unwrap_or(ROOT);
            while self.nodes[node].string_depth < target {
                let offset = cut - target + self.nodes[node].string_depth;
                node = self.nodes[node]
                    .child(self.symbol(offset))
                    .expect("suffix of a split locus is present");
            }
            debug_assert_eq!(self.nodes[node].string_depth, target);
            self.nodes[w].suffix_link = Some(node);
        }
        self.separators_split = true;
        self
    }

    pub fn text(&self) -> &[u8] {
        &self.text
    }

    pub fn root(&self) -> NodeId {
        ROOT
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_separator_split(&self) -> bool {
        self.separators_split
    }

    /// True when `pos` holds a separator or is the virtual terminator.
    pub fn is_separator_at(&self, pos: usize) -> bool {
        pos >= self.text.len() || self.text[pos] == SEPARATOR
    }

    /// Child of `node` whose edge starts with byte `b`.
    pub fn child_by_byte(&self, node: NodeId, b: u8) -> Option<NodeId> {
        if b == SEPARATOR {
            return None;
        }
        self.nodes[node].child(b as Symbol)
    }

    /// Bytes of the edge label into `node`; the terminator is rendered as [`SEPARATOR`].
    pub fn edge_label(&self, node: NodeId) -> Vec<u8> {
        let (s, e) = self.nodes[node].edge();
        (s..e)
            .map(|p| self.text.get(p).copied().unwrap_or(SEPARATOR))
            .collect()
    }

    /// Walks `pattern` from the root. `None` if the pattern does not occur.
    pub fn descend(&self, pattern: &[u8]) -> Option<Locus> {
        let mut node = ROOT;
        let mut matched = 0;
        while matched < pattern.len() {
            let child = self.child_by_byte(node, pattern[matched])?;
            let (start, end) = self.nodes[child].edge();
            let take = (end - start).min(pattern.len() - matched);
            for k in 0..take {
                if self.is_separator_at(start + k) || self.text[start + k] != pattern[matched + k] {
                    return None;
                }
            }
            matched += take;
            if matched == self.nodes[child].string_depth {
                node = child;
            }
        }
        Some(Locus {
            node,
            match_len: matched,
        })
    }

    /// For every query position `p`, the longest prefix of `query[p..]`
    /// spelled from the root, with its locus.
    pub fn matching_statistics(&self, query: &[u8]) -> Vec<Locus> {
        self.matching_statistics_counted(query, &mut ScanCounters::default())
    }

    /// [`SuffixTree::matching_statistics`] with work accounting. Uses suffix
    /// links and skip/count rescans, so comparisons stay below `2 * query.len()`.
    pub fn matching_statistics_counted(
        &self,
        query: &[u8],
        counters: &mut ScanCounters,
    ) -> Vec<Locus> {
        let q = query.len();
        let mut out = Vec::with_capacity(q);
        let mut node = ROOT;
        let mut len = 0usize;
        for p in 0..q {
            // query[p..p+len] is spelled; node is its deepest explicit node.
            while p + len < q {
                let next = query[p + len];
                let depth = self.nodes[node].string_depth;
                counters.symbol_comparisons += 1;
                let child = if len == depth {
                    match self.child_by_byte(node, next) {
                        Some(c) => c,
                        None => break,
                    }
                } else {
                    let c = self
                        .child_by_byte(node, query[p + depth])
                        .expect("partial match lies on an existing edge");
                    let pos = self.nodes[c].start + (len - depth);
                    if self.is_separator_at(pos) || self.text[pos] != next {
                        break;
                    }
                    c
                };
                len += 1;
                if self.nodes[child].string_depth == len {
                    node = child;
                }
            }
            out.push(Locus {
                node,
                match_len: len,
            });
            if len == 0 {
                continue;
            }
            if node != ROOT {
                node = self.nodes[node]
                    .suffix_link
                    .expect("internal nodes carry suffix links");
                counters.suffix_link_hops += 1;
            }
            len -= 1;
            while self.nodes[node].string_depth < len {
                let c = self
                    .child_by_byte(node, query[p + 1 + self.nodes[node].string_depth])
                    .expect("suffix of a match is a match");
                if self.nodes[c].string_depth > len {
                    break;
                }
                node = c;
                counters.rescan_hops += 1;
            }
        }
        out
    }

    fn symbol(&self, pos: usize) -> Symbol {
        if self.is_separator_at(pos) {
            256 + pos as Symbol
        } else {
            self.text[pos] as Symbol
        }
    }

    fn push_node(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn link_parents(&mut self) {
        let mut stack = vec![ROOT];
        while let Some(u) = stack.pop() {
            let depth = self.nodes[u].string_depth;
            for i in 0..self.nodes[u].children.len() {
                let c = self.nodes[u].children[i].1;
                self.nodes[c].parent = Some(u);
                self.nodes[c].string_depth = depth + self.nodes[c].edge_len();
                stack.push(c);
            }
        }
    }
}
