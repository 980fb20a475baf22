use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;

/// One reported match. Positions are 0-based and inclusive.
///
/// Field order gives the output ordering: `(end, pattern_id, start, gap)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub end: usize,
    /// Original (1-based, file order) pattern id.
    pub pattern_id: usize,
    pub start: usize,
    pub gap: usize,
}

impl Occurrence {
    /// Direct substring check of the record against `text`.
    pub fn verify(&self, dict: &Dictionary, text: &[u8]) -> bool {
        let Some(cid) = dict.canonical_of(self.pattern_id) else {
            return false;
        };
        let p = dict.pattern(cid);
        let bounds = dict.bounds();
        let span = p.p1.len() + self.gap + p.p2.len();
        bounds.alpha() <= self.gap
            && self.gap <= bounds.beta()
            && self.end + 1 == self.start + span
            && self.end < text.len()
            && text[self.start..].starts_with(&p.p1)
            && text[self.end + 1 - p.p2.len()..=self.end] == p.p2[..]
    }

    pub fn shifted(self, offset: usize) -> Occurrence {
        Occurrence {
            start: self.start + offset,
            end: self.end + offset,
            ..self
        }
    }

    pub fn one_based(self) -> Occurrence {
        self.shifted(1)
    }
}

/// Sorts and deduplicates; unless `all_gaps`, keeps only the smallest-gap
/// witness for every `(pattern_id, end)`.
///
/// Every matcher routes its raw output through here so witness policy is
/// applied identically everywhere.
pub fn normalize(mut occurrences: Vec<Occurrence>, all_gaps: bool) -> Vec<Occurrence> {
    if !all_gaps {
        occurrences.sort_unstable_by_key(|o| (o.end, o.pattern_id, o.gap));
        occurrences.dedup_by_key(|o| (o.end, o.pattern_id));
    }
    occurrences.sort_unstable();
    occurrences.dedup();
    occurrences
}
