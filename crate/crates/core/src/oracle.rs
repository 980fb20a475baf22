//! Brute-force reference matcher. O(n * d * (beta - alpha + 1) * max |p|).

use crate::dictionary::Dictionary;
use crate::occurrence::{normalize, Occurrence};

/// Tries every pattern at every start with every admissible gap.
pub fn naive_scan(dict: &Dictionary, text: &[u8], all_gaps: bool) -> Vec<Occurrence> {
    let bounds = dict.bounds();
    let mut out = Vec::new();
    for (cid, p) in dict.patterns().iter().enumerate() {
        for start in 0..text.len() {
            if !text[start..].starts_with(&p.p1) {
                continue;
            }
            for gap in bounds.alpha()..=bounds.beta() {
                let p2_at = start + p.p1.len() + gap;
                if p2_at + p.p2.len() > text.len() {
                    break;
                }
                if text[p2_at..].starts_with(&p.p2) {
                    let end = p2_at + p.p2.len() - 1;
                    out.extend(dict.aliases(cid).iter().map(|&pattern_id| Occurrence {
                        end,
                        pattern_id,
                        start,
                        gap,
                    }));
                }
            }
        }
    }
    normalize(out, all_gaps)
}
