//! Lookup-table intersection.
//!
//! `inter[g, h]` stands for every pattern whose reversed `p1` locus is an
//! ancestor-or-self of the node marked `g` in the first tree and whose `p2`
//! locus is an ancestor-or-self of the node marked `h` in the second tree.
//! Each pattern index is stored once, at its own `(g_i, h_i)` cell; the rest
//! of the set is reached through three links per cell:
//!
//! * `up`: nearest cell `(g', h)` above in the same column holding an index,
//! * `left`: nearest cell `(g, h')` to the left in the same row holding an index,
//! * `prev`: nearest diagonal ancestor cell with an index or an `up`/`left` link.
//!
//! Marks must be level-ordered (ancestors smaller) so a row-major fill only
//! reads cells that are already final.

use crate::dictionary::CanonicalId;
use crate::marking::{Mark, MarkAssignment, MarkScheme, PatternLinks};

const NULL: u32 = 0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InterCell {
    index: u32,
    up: u32,
    left: u32,
    prev_g: u32,
    prev_h: u32,
}

impl InterCell {
    pub fn index(&self) -> Option<CanonicalId> {
        (self.index != NULL).then(|| self.index as usize - 1)
    }

    /// Row of the `up` target; the column is unchanged.
    pub fn up(&self) -> Option<Mark> {
        Mark::new(self.up)
    }

    /// Column of the `left` target; the row is unchanged.
    pub fn left(&self) -> Option<Mark> {
        Mark::new(self.left)
    }

    pub fn prev(&self) -> Option<(Mark, Mark)> {
        Some((Mark::new(self.prev_g)?, Mark::new(self.prev_h)?))
    }

    fn has_content(&self) -> bool {
        self.index != NULL || self.up != NULL || self.left != NULL
    }
}

/// Dense `mF x mS` table.
#[derive(Debug, Clone)]
pub struct InterTable {
    rows: usize,
    cols: usize,
    cells: Vec<InterCell>,
    prev_first: Vec<Option<Mark>>,
    prev_second: Vec<Option<Mark>>,
    fill_ops: u64,
}

impl InterTable {
    /// Seeds one index per pattern, then fills every cell in row-major order
    /// with the three recursive rules. Both assignments must be level-ordered.
    pub fn build(
        assign_first: &MarkAssignment,
        assign_second: &MarkAssignment,
        links: &PatternLinks,
    ) -> InterTable {
        assert_eq!(assign_first.scheme(), MarkScheme::Bfs);
        assert_eq!(assign_second.scheme(), MarkScheme::Bfs);
        let rows = assign_first.count();
        let cols = assign_second.count();
        let prev_first: Vec<_> = (0..rows).map(|i| assign_first.prev(Mark::from_index(i))).collect();
        let prev_second: Vec<_> = (0..cols).map(|i| assign_second.prev(Mark::from_index(i))).collect();
        let mut table = InterTable {
            rows,
            cols,
            cells: vec![InterCell::default(); rows * cols],
            prev_first,
            prev_second,
            fill_ops: 0,
        };

        for g in 0..rows {
            for &(id, h) in links.first(Mark::from_index(g)) {
                let at = table.offset(g, h.index());
                debug_assert_eq!(table.cells[at].index, NULL, "one pattern per cell");
                table.cells[at].index = id as u32 + 1;
                table.fill_ops += 1;
            }
        }

        for g in 0..rows {
            let pg = table.prev_first[g].map(Mark::index);
            for h in 0..cols {
                let ph = table.prev_second[h].map(Mark::index);
                let mut cell = table.cells[table.offset(g, h)];

                cell.up = match pg {
                    None => NULL,
                    Some(pg) => {
                        let above = &table.cells[table.offset(pg, h)];
                        if above.index != NULL {
                            pg as u32 + 1
                        } else {
                            above.up
                        }
                    }
                };
                cell.left = match ph {
                    None => NULL,
                    Some(ph) => {
                        let beside = &table.cells[table.offset(g, ph)];
                        if beside.index != NULL {
                            ph as u32 + 1
                        } else {
                            beside.left
                        }
                    }
                };
                (cell.prev_g, cell.prev_h) = match (pg, ph) {
                    (Some(pg), Some(ph)) => {
                        let diag = &table.cells[table.offset(pg, ph)];
                        if diag.has_content() {
                            (pg as u32 + 1, ph as u32 + 1)
                        } else {
                            (diag.prev_g, diag.prev_h)
                        }
                    }
                    _ => (NULL, NULL),
                };
                table.fill_ops += 3;
                let at = table.offset(g, h);
                table.cells[at] = cell;
            }
        }
        table
    }

    fn offset(&self, g: usize, h: usize) -> usize {
        g * self.cols + h
    }

    /// `(mF, mS)`.
    pub fn dimensions(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn cell(&self, g: Mark, h: Mark) -> &InterCell {
        &self.cells[self.offset(g.index(), h.index())]
    }

    /// Primitive operations spent seeding and filling, for build accounting.
    pub fn fill_ops(&self) -> u64 {
        self.fill_ops
    }

    /// All patterns whose loci are ancestors-or-self of `g` and `h`; empty
    /// when either side has no marked ancestor.
    pub fn lookup_query(&self, g: Option<Mark>, h: Option<Mark>) -> Vec<CanonicalId> {
        let mut scratch = LookupScratch::new(self);
        let mut out = Vec::new();
        self.lookup_query_into(g, h, &mut scratch, &mut out);
        out
    }

    /// The query procedure with its `prev` recursion unrolled into a loop:
    /// at each visited cell output its index, walk its `up` chain, walk its
    /// `left` chain, then move to `prev`.
    pub fn lookup_query_into(
        &self,
        g: Option<Mark>,
        h: Option<Mark>,
        scratch: &mut LookupScratch,
        out: &mut Vec<CanonicalId>,
    ) {
        scratch.begin();
        let (Some(mut g), Some(mut h)) = (g, h) else {
            return;
        };
        loop {
            let cell = self.cell(g, h);
            if let Some(id) = cell.index() {
                scratch.emit(id, out);
            }
            let mut row = g;
            while let Some(up) = self.cell(row, h).up() {
                scratch.stats.link_follows += 1;
                let id = self.cell(up, h).index().expect("up targets hold an index");
                scratch.emit(id, out);
                row = up;
            }
            let mut col = h;
            while let Some(left) = self.cell(g, col).left() {
                scratch.stats.link_follows += 1;
                let id = self.cell(g, left).index().expect("left targets hold an index");
                scratch.emit(id, out);
                col = left;
            }
            match cell.prev() {
                Some((pg, ph)) => {
                    scratch.stats.link_follows += 1;
                    (g, h) = (pg, ph);
                }
                None => break,
            }
        }
    }
}

/// Per-query accounting; accumulated across queries sharing a scratch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LookupStats {
    pub queries: u64,
    pub link_follows: u64,
    pub emitted: u64,
    /// Emissions dropped because the id was already reported by the same query.
    pub suppressed: u64,
}

/// Reusable deduplicating emission collector.
#[derive(Debug, Clone)]
pub struct LookupScratch {
    stamp: Vec<u32>,
    epoch: u32,
    pub stats: LookupStats,
}

impl LookupScratch {
    pub fn new(table: &InterTable) -> LookupScratch {
        let max_id = table.cells.iter().map(|c| c.index).max().unwrap_or(0) as usize;
        LookupScratch::with_capacity(max_id)
    }

    pub fn with_capacity(pattern_count: usize) -> LookupScratch {
        LookupScratch {
            stamp: vec![0; pattern_count],
            epoch: 0,
            stats: LookupStats::default(),
        }
    }

    fn begin(&mut self) {
        self.stats.queries += 1;
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
    }

    fn emit(&mut self, id: CanonicalId, out: &mut Vec<CanonicalId>) {
        if id >= self.stamp.len() {
            self.stamp.resize(id + 1, 0);
        }
        if self.stamp[id] == self.epoch {
            self.stats.suppressed += 1;
            return;
        }
        self.stamp[id] = self.epoch;
        self.stats.emitted += 1;
        out.push(id);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marking::{assign_marks, build_pattern_links, Topology, VerticalPathDecomposition};
    use crate::suffix_tree::NodeId;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Side {
        topo: Topology,
        assign: MarkAssignment,
    }

    fn side(parents: &[Option<NodeId>], marked: &[NodeId]) -> Side {
        let topo = Topology::from_parents(parents);
        let dec = VerticalPathDecomposition::new(&topo);
        let assign = assign_marks(&topo, &dec, marked, MarkScheme::Bfs);
        Side { topo, assign }
    }

    fn chain(n: usize) -> Vec<Option<NodeId>> {
        (0..n).map(|v| v.checked_sub(1)).collect()
    }

    fn table_for(f: &Side, s: &Side, pairs: &[(NodeId, NodeId)]) -> InterTable {
        let fl: Vec<_> = pairs.iter().map(|p| p.0).collect();
        let sl: Vec<_> = pairs.iter().map(|p| p.1).collect();
        let (links, _) = build_pattern_links(&fl, &sl, &f.assign, &s.assign);
        InterTable::build(&f.assign, &s.assign, &links)
    }

    fn is_ancestor_or_self(topo: &Topology, a: NodeId, mut v: NodeId) -> bool {
        loop {
            if v == a {
                return true;
            }
            match topo.parent(v) {
                Some(p) => v = p,
                None => return false,
            }
        }
    }

    fn m(v: u32) -> Mark {
        Mark::new(v).unwrap()
    }

    #[test]
    fn single_pattern() {
        let f = side(&chain(2), &[1]);
        let s = side(&chain(2), &[1]);
        let t = table_for(&f, &s, &[(1, 1)]);
        let c = t.cell(m(1), m(1));
        assert_eq!(c.index(), Some(0));
        assert_eq!((c.up(), c.left(), c.prev()), (None, None, None));
        assert_eq!(t.lookup_query(Some(m(1)), Some(m(1))), [0]);
        assert!(t.lookup_query(None, Some(m(1))).is_empty());
        assert!(t.lookup_query(Some(m(1)), None).is_empty());
    }

    #[test]
    fn nested_first_subpatterns_link_up() {
        // first tree chain 0-1-2 with marks 1 (node 1) and 2 (node 2)
        let f = side(&chain(3), &[1, 2]);
        let s = side(&chain(2), &[1]);
        let t = table_for(&f, &s, &[(1, 1), (2, 1)]);
        assert_eq!(t.cell(m(2), m(1)).up(), Some(m(1)));
        let mut got = t.lookup_query(Some(m(2)), Some(m(1)));
        got.sort_unstable();
        assert_eq!(got, [0, 1]);
    }

    #[test]
    fn prev_skips_an_empty_ancestor_cell() {
        let f = side(&chain(4), &[1, 2, 3]);
        let s = side(&chain(4), &[1, 2, 3]);
        let t = table_for(&f, &s, &[(1, 1), (3, 3), (1, 3), (3, 1)]);
        let empty = t.cell(m(2), m(2));
        assert_eq!(empty.index(), None);
        assert_eq!((empty.up(), empty.left()), (None, None));
        let corner = t.cell(m(3), m(3));
        assert_eq!(corner.prev(), Some((m(1), m(1))), "skips [2,2]");
        assert_eq!(corner.up(), Some(m(1)));
        assert_eq!(corner.left(), Some(m(1)));
        let mut scratch = LookupScratch::new(&t);
        let mut got = Vec::new();
        t.lookup_query_into(Some(m(3)), Some(m(3)), &mut scratch, &mut got);
        got.sort_unstable();
        assert_eq!(got, [0, 1, 2, 3]);
        assert_eq!(scratch.stats.suppressed, 0);
        assert!(scratch.stats.link_follows <= 3 * (got.len() as u64 + 1));
    }

    #[test]
    fn random_topologies_against_ancestor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let nf = rng.gen_range(2..30);
            let ns = rng.gen_range(2..30);
            let pf: Vec<_> = (0..nf).map(|v| (v > 0).then(|| rng.gen_range(0..v))).collect();
            let ps: Vec<_> = (0..ns).map(|v| (v > 0).then(|| rng.gen_range(0..v))).collect();
            let mut pairs: Vec<(NodeId, NodeId)> = (0..rng.gen_range(1..40))
                .map(|_| (rng.gen_range(1..nf), rng.gen_range(1..ns)))
                .collect();
            pairs.sort_unstable();
            pairs.dedup();
            let fl: Vec<_> = pairs.iter().map(|p| p.0).collect();
            let sl: Vec<_> = pairs.iter().map(|p| p.1).collect();
            let f = side(&pf, &fl);
            let s = side(&ps, &sl);
            let t = table_for(&f, &s, &pairs);
            let (rows, cols) = t.dimensions();
            assert!(t.fill_ops() <= 4 * (rows * cols + pairs.len()) as u64);

            // link well-formedness
            for g in 1..=rows as u32 {
                for h in 1..=cols as u32 {
                    let c = t.cell(m(g), m(h));
                    if let Some(up) = c.up() {
                        assert!(up < m(g));
                    }
                    if let Some(left) = c.left() {
                        assert!(left < m(h));
                    }
                    if let Some((pg, ph)) = c.prev() {
                        assert!(pg < m(g) && ph < m(h));
                    }
                }
            }

            let mut scratch = LookupScratch::new(&t);
            for g in 1..=rows as u32 {
                for h in 1..=cols as u32 {
                    let (gn, hn) = (f.assign.node_of_mark(m(g)), s.assign.node_of_mark(m(h)));
                    let mut expected: Vec<_> = pairs
                        .iter()
                        .enumerate()
                        .filter(|(_, &(a, b))| {
                            is_ancestor_or_self(&f.topo, a, gn) && is_ancestor_or_self(&s.topo, b, hn)
                        })
                        .map(|(i, _)| i)
                        .collect();
                    expected.sort_unstable();
                    let before = scratch.stats;
                    let mut got = Vec::new();
                    t.lookup_query_into(Some(m(g)), Some(m(h)), &mut scratch, &mut got);
                    got.sort_unstable();
                    assert_eq!(got, expected);
                    let follows = scratch.stats.link_follows - before.link_follows;
                    assert!(follows <= 3 * (got.len() as u64 + 1));
                }
            }
            assert_eq!(scratch.stats.suppressed, 0);
        }
    }
}
