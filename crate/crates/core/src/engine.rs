//! The gapped dictionary scanner.
//!
//! Preprocessing joins every `p2` into one string `S` and every `p1` into
//! `F`, builds suffix trees of `S` and of `F` reversed, and marks the locus
//! of each subpattern. Scanning computes matching statistics of the text
//! against the `S` tree (where does some `p2` start?) and of the reversed
//! text against the reversed-`F` tree (where does some `p1` end?). For every
//! candidate `p2` start `l` and every gap in `[alpha, beta]`, the marked
//! ancestors of the two loci are intersected, either with range queries over
//! a grid of pattern points or with the precomputed lookup table.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::dictionary::{CanonicalId, Dictionary, Side, SEPARATOR};
use crate::inter_table::{InterTable, LookupScratch, LookupStats};
use crate::marking::{
    assign_marks, build_pattern_links, locate_subpattern_nodes, Mark, MarkAssignment,
    MarkInterval, MarkScheme, PatternLinks, Topology, VerticalPathDecomposition,
};
use crate::occurrence::{normalize, Occurrence};
use crate::range_grid::{GridPoint, RangeIndex, ReportCounters};
use crate::suffix_tree::{NodeId, ScanCounters, SuffixTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Vertical-path marks and 2D range reporting.
    Grid,
    /// Level-order marks and the `inter` lookup table.
    Lookup,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Grid => "grid",
            Backend::Lookup => "lookup",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grid" => Ok(Backend::Grid),
            "lookup" => Ok(Backend::Lookup),
            other => Err(format!("unknown backend `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScanError {
    #[error("text contains the reserved separator byte at position {0}")]
    SeparatorInText(usize),
    #[error("the {0} backend was not built for this index")]
    BackendNotBuilt(Backend),
}

/// Separator-free query text.
#[derive(Debug, Clone, Copy)]
pub struct QueryText<'a>(&'a [u8]);

impl<'a> QueryText<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<Self, ScanError> {
        match bytes.iter().position(|&b| b == SEPARATOR) {
            Some(pos) => Err(ScanError::SeparatorInText(pos)),
            None => Ok(QueryText(bytes)),
        }
    }

    pub fn bytes(&self) -> &'a [u8] {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexOptions {
    pub grid: bool,
    pub lookup: bool,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            grid: true,
            lookup: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanOptions {
    /// Report every qualifying gap instead of the smallest one per end.
    pub all_gaps: bool,
}

/// Work counters accumulated by a scan.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanStats {
    /// Symbols scanned (chunk overlap counted twice).
    pub symbols: u64,
    /// Forward pass against the `p2` tree.
    pub forward: ScanCounters,
    /// Reversed pass against the reversed-`p1` tree.
    pub backward: ScanCounters,
    /// Number of (l, f) pairs intersected.
    pub intersections: u64,
    pub range: ReportCounters,
    pub range_queries: u64,
    pub lookup: LookupStats,
}

impl ScanStats {
    pub fn add(&mut self, other: &ScanStats) {
        self.symbols += other.symbols;
        self.forward.add(&other.forward);
        self.backward.add(&other.backward);
        self.intersections += other.intersections;
        self.range.comparisons += other.range.comparisons;
        self.range.reported += other.range.reported;
        self.range_queries += other.range_queries;
        self.lookup.queries += other.lookup.queries;
        self.lookup.link_follows += other.lookup.link_follows;
        self.lookup.emitted += other.lookup.emitted;
        self.lookup.suppressed += other.lookup.suppressed;
    }

    pub fn symbol_comparisons(&self) -> u64 {
        self.forward.symbol_comparisons + self.backward.symbol_comparisons
    }
}

/// One side's suffix tree with its marking structures.
#[derive(Debug, Clone)]
pub struct SideIndex {
    tree: SuffixTree,
    topology: Topology,
    paths: VerticalPathDecomposition,
    loci: Vec<NodeId>,
    vertical: MarkAssignment,
    level: MarkAssignment,
}

impl SideIndex {
    fn build<S: AsRef<[u8]>>(joined: &[u8], subpatterns: &[S]) -> SideIndex {
        let tree = SuffixTree::build_split(joined);
        let loci = locate_subpattern_nodes(&tree, subpatterns)
            .expect("every subpattern has an explicit locus in its split tree");
        let topology = Topology::from(&tree);
        let paths = VerticalPathDecomposition::new(&topology);
        let vertical = assign_marks(&topology, &paths, &loci, MarkScheme::VerticalPath);
        let level = assign_marks(&topology, &paths, &loci, MarkScheme::Bfs);
        SideIndex {
            tree,
            topology,
            paths,
            loci,
            vertical,
            level,
        }
    }

    pub fn tree(&self) -> &SuffixTree {
        &self.tree
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn paths(&self) -> &VerticalPathDecomposition {
        &self.paths
    }

    /// Locus node of each canonical pattern's subpattern on this side.
    pub fn loci(&self) -> &[NodeId] {
        &self.loci
    }

    pub fn marks(&self, scheme: MarkScheme) -> &MarkAssignment {
        match scheme {
            MarkScheme::VerticalPath => &self.vertical,
            MarkScheme::Bfs => &self.level,
        }
    }
}

/// Immutable, shareable index over a [`Dictionary`].
#[derive(Debug, Clone)]
pub struct GapIndex {
    dict: Dictionary,
    /// Tree of the reversed `p1` concatenation.
    first: SideIndex,
    /// Tree of the `p2` concatenation.
    second: SideIndex,
    grid: Option<(PatternLinks, Vec<GridPoint>, RangeIndex)>,
    lookup: Option<(PatternLinks, InterTable)>,
}

impl GapIndex {
    pub fn build(dict: Dictionary, options: IndexOptions) -> GapIndex {
        let mut reversed_first = dict.concatenate_side(Side::First);
        reversed_first.reverse();
        let reversed_p1s: Vec<Vec<u8>> = dict
            .patterns()
            .iter()
            .map(|p| p.p1.iter().rev().copied().collect())
            .collect();
        let p2s: Vec<&[u8]> = dict.patterns().iter().map(|p| &p.p2[..]).collect();
        let first = SideIndex::build(&reversed_first, &reversed_p1s);
        let second = SideIndex::build(&dict.concatenate_side(Side::Second), &p2s);

        let grid = options.grid.then(|| {
            let (links, points) =
                build_pattern_links(&first.loci, &second.loci, &first.vertical, &second.vertical);
            let range = RangeIndex::build(&points);
            (links, points, range)
        });
        let lookup = options.lookup.then(|| {
            let (links, _) =
                build_pattern_links(&first.loci, &second.loci, &first.level, &second.level);
            let table = InterTable::build(&first.level, &second.level, &links);
            (links, table)
        });
        GapIndex {
            dict,
            first,
            second,
            grid,
            lookup,
        }
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    /// Reversed-`p1` side.
    pub fn first(&self) -> &SideIndex {
        &self.first
    }

    /// `p2` side.
    pub fn second(&self) -> &SideIndex {
        &self.second
    }

    pub fn grid_points(&self) -> Option<&[GridPoint]> {
        self.grid.as_ref().map(|(_, p, _)| &p[..])
    }

    pub fn inter_table(&self) -> Option<&InterTable> {
        self.lookup.as_ref().map(|(_, t)| t)
    }

    pub fn has_backend(&self, backend: Backend) -> bool {
        match backend {
            Backend::Grid => self.grid.is_some(),
            Backend::Lookup => self.lookup.is_some(),
        }
    }

    pub fn scan(
        &self,
        text: QueryText<'_>,
        backend: Backend,
        options: ScanOptions,
    ) -> Result<Vec<Occurrence>, ScanError> {
        self.scan_with_stats(text, backend, options).map(|(occ, _)| occ)
    }

    pub fn scan_with_stats(
        &self,
        text: QueryText<'_>,
        backend: Backend,
        options: ScanOptions,
    ) -> Result<(Vec<Occurrence>, ScanStats), ScanError> {
        self.check_backend(backend)?;
        let mut stats = ScanStats::default();
        let raw = self.scan_piece(text.bytes(), backend, options, &mut stats);
        Ok((normalize(raw, options.all_gaps), stats))
    }

    /// Scans two staggered series of windows of length `2m` independently,
    /// `m = max_span`, and merges. Equal to [`GapIndex::scan`].
    pub fn scan_chunked(
        &self,
        text: QueryText<'_>,
        backend: Backend,
        options: ScanOptions,
    ) -> Result<Vec<Occurrence>, ScanError> {
        self.scan_chunked_with_stats(text, backend, options).map(|(occ, _)| occ)
    }

    pub fn scan_chunked_with_stats(
        &self,
        text: QueryText<'_>,
        backend: Backend,
        options: ScanOptions,
    ) -> Result<(Vec<Occurrence>, ScanStats), ScanError> {
        self.check_backend(backend)?;
        let plan = ChunkPlan::new(text.len(), self.dict.max_span());
        let bytes = text.bytes();
        let pieces: Vec<(Vec<Occurrence>, ScanStats)> = plan
            .chunks()
            .par_iter()
            .map(|&(offset, len)| {
                let mut stats = ScanStats::default();
                let occ = self
                    .scan_piece(&bytes[offset..offset + len], backend, options, &mut stats)
                    .into_iter()
                    .map(|o| o.shifted(offset))
                    .collect();
                (occ, stats)
            })
            .collect();
        let mut stats = ScanStats::default();
        let mut all = Vec::new();
        for (occ, s) in pieces {
            stats.add(&s);
            all.extend(occ);
        }
        Ok((normalize(all, options.all_gaps), stats))
    }

    fn check_backend(&self, backend: Backend) -> Result<(), ScanError> {
        if self.has_backend(backend) {
            Ok(())
        } else {
            Err(ScanError::BackendNotBuilt(backend))
        }
    }

    fn scan_piece(
        &self,
        text: &[u8],
        backend: Backend,
        options: ScanOptions,
        stats: &mut ScanStats,
    ) -> Vec<Occurrence> {
        let n = text.len();
        stats.symbols += n as u64;
        let alpha = self.dict.bounds().alpha();
        let beta = self.dict.bounds().beta();
        let min_p1 = self.dict.min_p1();
        let first_l = min_p1 + alpha;
        let mut out = Vec::new();
        if first_l >= n {
            return out;
        }

        let forward = self
            .second
            .tree
            .matching_statistics_counted(text, &mut stats.forward);
        let reversed: Vec<u8> = text.iter().rev().copied().collect();
        let backward = self
            .first
            .tree
            .matching_statistics_counted(&reversed, &mut stats.backward);
        // locus of the longest reversed-p1 candidate ending at text position f
        let first_node = |f: usize| backward[n - 1 - f].node;

        let mut intersect = Intersector::new(self, backend, n, &first_node, min_p1);
        let mut seen = vec![usize::MAX; self.dict.len()];
        let mut ids = Vec::new();
        for l in first_l..n {
            let h_node = forward[l].node;
            intersect.set_second(h_node);
            let f_high = l - alpha - 1;
            let f_low = (l.saturating_sub(beta + 1)).max(min_p1 - 1);
            for f in (f_low..=f_high).rev() {
                stats.intersections += 1;
                ids.clear();
                intersect.run(f, &mut ids, stats);
                for &cid in &ids {
                    if !options.all_gaps {
                        if seen[cid] == l {
                            continue;
                        }
                        seen[cid] = l;
                    }
                    self.emit(cid, l, f, &mut out);
                }
            }
        }
        out
    }

    fn emit(&self, cid: CanonicalId, l: usize, f: usize, out: &mut Vec<Occurrence>) {
        let p = self.dict.pattern(cid);
        let end = l + p.p2.len() - 1;
        let start = f + 1 - p.p1.len();
        let gap = l - f - 1;
        out.extend(self.dict.aliases(cid).iter().map(|&pattern_id| Occurrence {
            end,
            pattern_id,
            start,
            gap,
        }));
    }

    /// Canonical ids whose `p1` ends at the first-tree node and whose `p2`
    /// starts at the second-tree node, via the grid backend.
    pub fn intersect_grid(&self, first_node: NodeId, second_node: NodeId) -> Vec<CanonicalId> {
        let (_, _, range) = self.grid.as_ref().expect("grid backend built");
        let gi = self.first.vertical.path_mark_intervals(&self.first.paths, first_node);
        let hi = self.second.vertical.path_mark_intervals(&self.second.paths, second_node);
        let mut out = Vec::new();
        for g in &gi {
            for h in &hi {
                range.report_into(g.lo.get(), g.hi.get(), h.lo.get(), h.hi.get(), &mut out);
            }
        }
        out
    }

    /// Same contract as [`GapIndex::intersect_grid`], via the lookup table.
    pub fn intersect_lookup(&self, first_node: NodeId, second_node: NodeId) -> Vec<CanonicalId> {
        let (_, table) = self.lookup.as_ref().expect("lookup backend built");
        table.lookup_query(
            self.first.level.deepest_marked_ancestor(first_node),
            self.second.level.deepest_marked_ancestor(second_node),
        )
    }
}

/// Per-scan intersection state. The first-tree side is precomputed once per
/// text position because each `f` is visited for up to `beta - alpha + 1`
/// values of `l`.
enum Intersector<'a> {
    Grid {
        range: &'a RangeIndex,
        index: &'a GapIndex,
        /// Flattened per-position interval lists: `first[first_at[f]..first_at[f + 1]]`.
        first: Vec<MarkInterval>,
        first_at: Vec<usize>,
        second: Vec<MarkInterval>,
    },
    Lookup {
        table: &'a InterTable,
        first: Vec<Option<Mark>>,
        second: Option<Mark>,
        scratch: LookupScratch,
        level: &'a MarkAssignment,
    },
}

impl<'a> Intersector<'a> {
    fn new(
        index: &'a GapIndex,
        backend: Backend,
        n: usize,
        first_node: &dyn Fn(usize) -> NodeId,
        min_p1: usize,
    ) -> Intersector<'a> {
        let relevant = (min_p1 - 1)..n;
        match backend {
            Backend::Grid => {
                let (_, _, range) = index.grid.as_ref().expect("checked by caller");
                let mut first = Vec::new();
                let mut first_at = vec![0; n + 1];
                for f in 0..n {
                    if relevant.contains(&f) {
                        index.first.vertical.path_mark_intervals_into(
                            &index.first.paths,
                            first_node(f),
                            &mut first,
                        );
                    }
                    first_at[f + 1] = first.len();
                }
                Intersector::Grid {
                    range,
                    index,
                    first,
                    first_at,
                    second: Vec::new(),
                }
            }
            Backend::Lookup => {
                let (_, table) = index.lookup.as_ref().expect("checked by caller");
                let first = (0..n)
                    .map(|f| {
                        relevant
                            .contains(&f)
                            .then(|| index.first.level.deepest_marked_ancestor(first_node(f)))
                            .flatten()
                    })
                    .collect();
                Intersector::Lookup {
                    table,
                    first,
                    second: None,
                    scratch: LookupScratch::with_capacity(index.dict.len()),
                    level: &index.second.level,
                }
            }
        }
    }

    fn set_second(&mut self, node: NodeId) {
        match self {
            Intersector::Grid { index, second, .. } => {
                second.clear();
                index
                    .second
                    .vertical
                    .path_mark_intervals_into(&index.second.paths, node, second);
            }
            Intersector::Lookup { second, level, .. } => {
                *second = level.deepest_marked_ancestor(node);
            }
        }
    }

    fn run(&mut self, f: usize, out: &mut Vec<CanonicalId>, stats: &mut ScanStats) {
        match self {
            Intersector::Grid {
                range,
                first,
                first_at,
                second,
                ..
            } => {
                for g in &first[first_at[f]..first_at[f + 1]] {
                    for h in second.iter() {
                        stats.range_queries += 1;
                        range.report_counted(
                            g.lo.get(),
                            g.hi.get(),
                            h.lo.get(),
                            h.hi.get(),
                            out,
                            &mut stats.range,
                        );
                    }
                }
            }
            Intersector::Lookup {
                table,
                first,
                second,
                scratch,
                ..
            } => {
                let before = scratch.stats;
                table.lookup_query_into(first[f], *second, scratch, out);
                let after = scratch.stats;
                stats.lookup.queries += after.queries - before.queries;
                stats.lookup.link_follows += after.link_follows - before.link_follows;
                stats.lookup.emitted += after.emitted - before.emitted;
                stats.lookup.suppressed += after.suppressed - before.suppressed;
            }
        }
    }
}

/// Two staggered series of windows: `[0, 2m), [2m, 4m), ...` and
/// `[m, 3m), [3m, 5m), ...`, clipped to the text. Any interval of length
/// at most `m` lies inside one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    window: usize,
    chunks: Vec<(usize, usize)>,
}

impl ChunkPlan {
    pub fn new(n: usize, m: usize) -> ChunkPlan {
        let m = m.max(1);
        let mut chunks = Vec::new();
        if n <= 2 * m {
            chunks.push((0, n));
        } else {
            for series in [0, m] {
                let mut offset = series;
                while offset < n {
                    chunks.push((offset, (2 * m).min(n - offset)));
                    offset += 2 * m;
                }
            }
        }
        ChunkPlan { window: m, chunks }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// `(global offset, length)` pairs.
    pub fn chunks(&self) -> &[(usize, usize)] {
        &self.chunks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::parse_dictionary;
    use crate::oracle::naive_scan;

    fn index(src: &[u8]) -> GapIndex {
        GapIndex::build(parse_dictionary(src).unwrap(), IndexOptions::default())
    }

    fn scan(idx: &GapIndex, text: &[u8], backend: Backend) -> Vec<Occurrence> {
        idx.scan(QueryText::new(text).unwrap(), backend, ScanOptions::default())
            .unwrap()
    }

    #[test]
    fn hand_checked_vector_on_both_backends() {
        let idx = index(b"1 2\nab\tcd\na\td\n");
        let expected = [Occurrence { pattern_id: 1, end: 4, start: 0, gap: 1 }];
        assert_eq!(naive_scan(idx.dictionary(), b"abxcdxad", false), expected);
        for backend in [Backend::Grid, Backend::Lookup] {
            assert_eq!(scan(&idx, b"abxcdxad", backend), expected);
        }
    }

    #[test]
    fn no_hits_and_short_texts() {
        let idx = index(b"1 2\nab\tcd\na\td\n");
        for backend in [Backend::Grid, Backend::Lookup] {
            assert!(scan(&idx, b"zzzzzz", backend).is_empty());
            assert!(scan(&idx, b"", backend).is_empty());
            assert!(scan(&idx, b"a", backend).is_empty());
            assert!(scan(&idx, b"ax", backend).is_empty());
            assert_eq!(scan(&idx, b"axd", backend).len(), 1);
        }
    }

    #[test]
    fn rejects_separator_and_missing_backend() {
        assert_eq!(QueryText::new(b"ab\0").unwrap_err(), ScanError::SeparatorInText(2));
        let d = parse_dictionary(b"0 0\na\tb\n").unwrap();
        let grid_only = GapIndex::build(d, IndexOptions { grid: true, lookup: false });
        let text = QueryText::new(b"ab").unwrap();
        assert_eq!(
            grid_only.scan(text, Backend::Lookup, ScanOptions::default()),
            Err(ScanError::BackendNotBuilt(Backend::Lookup))
        );
        assert_eq!(grid_only.scan(text, Backend::Grid, ScanOptions::default()).unwrap().len(), 1);
    }

    #[test]
    fn intersections_match_naive_sets() {
        let idx = index(b"0 3\nab\tcd\nb\tc\nab\tc\nxab\tcdd\n");
        let text = b"xabcdd";
        let n = text.len();
        let rev: Vec<u8> = text.iter().rev().copied().collect();
        let fwd = idx.second().tree().matching_statistics(text);
        let bwd = idx.first().tree().matching_statistics(&rev);
        for l in 0..n {
            for f in 0..l {
                let mut expected: Vec<_> = idx
                    .dictionary()
                    .patterns()
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| {
                        f + 1 >= p.p1.len()
                            && text[f + 1 - p.p1.len()..=f] == p.p1[..]
                            && text[l..].starts_with(&p.p2)
                    })
                    .map(|(i, _)| i)
                    .collect();
                expected.sort_unstable();
                let mut grid = idx.intersect_grid(bwd[n - 1 - f].node, fwd[l].node);
                grid.sort_unstable();
                let mut lookup = idx.intersect_lookup(bwd[n - 1 - f].node, fwd[l].node);
                lookup.sort_unstable();
                assert_eq!(grid, expected, "grid l={l} f={f}");
                assert_eq!(lookup, expected, "lookup l={l} f={f}");
            }
        }
    }

    #[test]
    fn all_gaps_reports_every_witness() {
        let idx = index(b"0 3\na\tb\n");
        for backend in [Backend::Grid, Backend::Lookup] {
            let text = QueryText::new(b"aaab").unwrap();
            let all = idx.scan(text, backend, ScanOptions { all_gaps: true }).unwrap();
            assert_eq!(all, naive_scan(idx.dictionary(), b"aaab", true));
            assert_eq!(all.len(), 3);
            let min = idx.scan(text, backend, ScanOptions::default()).unwrap();
            assert_eq!(min, [Occurrence { pattern_id: 1, end: 3, start: 2, gap: 0 }]);
        }
    }

    #[test]
    fn chunk_plan_covers_short_intervals() {
        assert_eq!(ChunkPlan::new(10, 5).chunks(), [(0, 10)]);
        for n in [11, 23, 40, 41, 97] {
            for m in [1, 2, 5, 7] {
                let plan = ChunkPlan::new(n, m);
                assert!(plan.chunks().iter().all(|&(o, l)| l <= 2 * m && o + l <= n));
                for a in 0..n {
                    for b in a + 1..=(a + m).min(n) {
                        assert!(
                            plan.chunks().iter().any(|&(o, l)| o <= a && b <= o + l),
                            "[{a},{b}) uncovered for n={n} m={m}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn chunked_finds_occurrence_straddling_a_boundary() {
        let idx = index(b"1 2\nab\tcd\na\td\n");
        let m = idx.dictionary().max_span();
        assert_eq!(m, 6);
        // p1 "ab" ends at 2m - 1, so the occurrence crosses the first series boundary
        let mut text = vec![b'z'; 5 * m];
        let at = 2 * m - 2;
        text[at..at + 5].copy_from_slice(b"abxcd");
        let q = QueryText::new(&text).unwrap();
        for backend in [Backend::Grid, Backend::Lookup] {
            let whole = idx.scan(q, backend, ScanOptions::default()).unwrap();
            assert_eq!(whole, [Occurrence { pattern_id: 1, end: at + 4, start: at, gap: 1 }]);
            assert_eq!(idx.scan_chunked(q, backend, ScanOptions::default()).unwrap(), whole);
        }
    }
}
