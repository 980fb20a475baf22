//! Static 2D orthogonal range reporting.
//!
//! A layered range tree with fractional cascading: a balanced tree over the
//! points sorted by `x`, every node holding its points sorted by `y` plus, for
//! each position, the matching lower-bound position in both children. One
//! binary search at the root then positions every canonical node in O(1).
//! Query cost is O(log d + occ), build O(d log d), space O(d log d).

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub x: u32,
    pub y: u32,
    pub payload: usize,
}

#[derive(Debug, Clone)]
struct Layer {
    /// (y, payload), ascending by y.
    ys: Vec<(u32, usize)>,
    /// `left_ptr[k]`: first position in the left child's `ys` with y >= `ys[k].0`
    /// (`k == ys.len()` maps to the child's length). Same for `right_ptr`.
    left_ptr: Vec<u32>,
    right_ptr: Vec<u32>,
    children: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Default)]
pub struct RangeIndex {
    xs: Vec<u32>,
    layers: Vec<Layer>,
}

/// Comparison accounting for [`RangeIndex::report_counted`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportCounters {
    pub comparisons: u64,
    pub reported: u64,
}

impl RangeIndex {
    pub fn build(points: &[GridPoint]) -> RangeIndex {
        let mut sorted = points.to_vec();
        sorted.sort_unstable_by_key(|p| (p.x, p.y));
        debug_assert!(
            sorted.windows(2).all(|w| (w[0].x, w[0].y) != (w[1].x, w[1].y)),
            "grid points must be distinct"
        );
        let mut index = RangeIndex {
            xs: sorted.iter().map(|p| p.x).collect(),
            layers: Vec::with_capacity(2 * sorted.len()),
        };
        if !sorted.is_empty() {
            index.build_layer(&sorted);
        }
        index
    }

    fn build_layer(&mut self, points: &[GridPoint]) -> usize {
        let id = self.layers.len();
        self.layers.push(Layer {
            ys: Vec::new(),
            left_ptr: Vec::new(),
            right_ptr: Vec::new(),
            children: None,
        });
        if points.len() == 1 {
            self.layers[id].ys = vec![(points[0].y, points[0].payload)];
            return id;
        }
        let mid = points.len() / 2;
        let l = self.build_layer(&points[..mid]);
        let r = self.build_layer(&points[mid..]);
        let (left, right) = (&self.layers[l].ys, &self.layers[r].ys);

        let mut ys = Vec::with_capacity(points.len());
        let (mut i, mut j) = (0, 0);
        while i < left.len() || j < right.len() {
            if j == right.len() || (i < left.len() && left[i].0 <= right[j].0) {
                ys.push(left[i]);
                i += 1;
            } else {
                ys.push(right[j]);
                j += 1;
            }
        }
        let cascade = |child: &[(u32, usize)]| {
            let mut ptr = Vec::with_capacity(ys.len() + 1);
            let mut a = 0;
            for &(y, _) in &ys {
                while a < child.len() && child[a].0 < y {
                    a += 1;
                }
                ptr.push(a as u32);
            }
            ptr.push(child.len() as u32);
            ptr
        };
        let left_ptr = cascade(left);
        let right_ptr = cascade(right);
        let layer = &mut self.layers[id];
        layer.ys = ys;
        layer.left_ptr = left_ptr;
        layer.right_ptr = right_ptr;
        layer.children = Some((l, r));
        id
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Payloads of points with `x_lo <= x <= x_hi` and `y_lo <= y <= y_hi`.
    pub fn report(&self, x_lo: u32, x_hi: u32, y_lo: u32, y_hi: u32) -> Vec<usize> {
        let mut out = Vec::new();
        self.report_counted(x_lo, x_hi, y_lo, y_hi, &mut out, &mut ReportCounters::default());
        out
    }

    /// Appends matching payloads to `out`.
    pub fn report_into(&self, x_lo: u32, x_hi: u32, y_lo: u32, y_hi: u32, out: &mut Vec<usize>) {
        self.report_counted(x_lo, x_hi, y_lo, y_hi, out, &mut ReportCounters::default());
    }

    pub fn report_counted(
        &self,
        x_lo: u32,
        x_hi: u32,
        y_lo: u32,
        y_hi: u32,
        out: &mut Vec<usize>,
        counters: &mut ReportCounters,
    ) {
        if self.xs.is_empty() || x_lo > x_hi || y_lo > y_hi {
            return;
        }
        let lo = partition_point_counted(&self.xs, |&x| x < x_lo, counters);
        let hi = partition_point_counted(&self.xs, |&x| x <= x_hi, counters);
        if lo >= hi {
            return;
        }
        let pos = partition_point_counted(&self.layers[0].ys, |&(y, _)| y < y_lo, counters);
        let before = out.len();
        self.visit(0, 0, self.xs.len(), lo, hi, pos, y_hi, out, counters);
        counters.reported += (out.len() - before) as u64;
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        id: usize,
        span_lo: usize,
        span_hi: usize,
        lo: usize,
        hi: usize,
        pos: usize,
        y_hi: u32,
        out: &mut Vec<usize>,
        counters: &mut ReportCounters,
    ) {
        counters.comparisons += 1;
        if hi <= span_lo || span_hi <= lo {
            return;
        }
        let layer = &self.layers[id];
        if lo <= span_lo && span_hi <= hi {
            for &(y, payload) in &layer.ys[pos..] {
                counters.comparisons += 1;
                if y > y_hi {
                    break;
                }
                out.push(payload);
            }
            return;
        }
        let (l, r) = layer.children.expect("partial overlap implies an inner layer");
        let mid = span_lo + (span_hi - span_lo) / 2;
        self.visit(l, span_lo, mid, lo, hi, layer.left_ptr[pos] as usize, y_hi, out, counters);
        self.visit(r, mid, span_hi, lo, hi, layer.right_ptr[pos] as usize, y_hi, out, counters);
    }
}

fn partition_point_counted<T>(
    items: &[T],
    mut pred: impl FnMut(&T) -> bool,
    counters: &mut ReportCounters,
) -> usize {
    items.partition_point(|item| {
        counters.comparisons += 1;
        pred(item)
    })
}
