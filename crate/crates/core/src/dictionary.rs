//! Parsing and canonicalization of single-gap dictionaries.
//!
//! A dictionary file looks like
//!
//! ```text
//! # comment lines are skipped
//! 1 2
//! ab	cd
//! a	d
//! ```
//!
//! The first significant line holds the gap bounds `alpha beta`. Every
//! following non-empty line is one pattern `p1 TAB p2`, numbered from 1 in
//! file order. Patterns with an identical `(p1, p2)` pair collapse into one
//! canonical pattern that remembers every original id.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Reserved byte joining subpatterns inside the suffix trees. Never valid in input.
pub const SEPARATOR: u8 = 0x00;

/// Index of a canonical (deduplicated) pattern, 0-based.
pub type CanonicalId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GapBounds {
    alpha: usize,
    beta: usize,
}

impl GapBounds {
    pub fn new(alpha: usize, beta: usize) -> Option<Self> {
        (alpha <= beta).then_some(GapBounds { alpha, beta })
    }

    /// Minimum number of don't-care symbols between the subpatterns.
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Maximum number of don't-care symbols between the subpatterns.
    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn width(&self) -> usize {
        self.beta - self.alpha + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GappedPattern {
    /// First original id (1-based file order) that produced this pattern.
    pub original_id: usize,
    pub p1: Vec<u8>,
    pub p2: Vec<u8>,
}

impl GappedPattern {
    pub fn min_span(&self, bounds: GapBounds) -> usize {
        self.p1.len() + bounds.alpha + self.p2.len()
    }
}

impl fmt::Display for GappedPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {{gap}} {}",
            String::from_utf8_lossy(&self.p1),
            String::from_utf8_lossy(&self.p2)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing header line `<alpha> <beta>`")]
    MissingHeader,
    #[error("malformed header, expected `<alpha> <beta>`")]
    MalformedHeader,
    #[error("alpha > beta")]
    AlphaExceedsBeta,
    #[error("expected `<p1>\\t<p2>`")]
    MissingTab,
    #[error("empty subpattern")]
    EmptySubpattern,
    #[error("subpattern contains a TAB")]
    TabInSubpattern,
    #[error("subpattern contains the reserved separator byte 0x00")]
    SeparatorInSubpattern,
    #[error("dictionary contains no patterns")]
    EmptyDictionary,
}

/// A dictionary parse failure. `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

/// Validated, canonicalized dictionary. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    patterns: Vec<GappedPattern>,
    aliases: Vec<Vec<usize>>,
    bounds: GapBounds,
    total_len: usize,
    min_p1: usize,
    max_span: usize,
    original_count: usize,
    canonical_of: Vec<CanonicalId>,
}

impl Dictionary {
    /// Builds a dictionary from `(p1, p2)` pairs given in original-id order.
    ///
    /// Errors carry the 1-based position of the offending pair in `line`.
    pub fn from_pairs<I, A, B>(bounds: GapBounds, pairs: I) -> Result<Self, ParseError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<[u8]>,
        B: AsRef<[u8]>,
    {
        let mut builder = Builder::default();
        for (i, (p1, p2)) in pairs.into_iter().enumerate() {
            builder.push(i + 1, p1.as_ref(), p2.as_ref())?;
        }
        builder.finish(bounds, 1)
    }

    pub fn patterns(&self) -> &[GappedPattern] {
        &self.patterns
    }

    pub fn pattern(&self, id: CanonicalId) -> &GappedPattern {
        &self.patterns[id]
    }

    /// Original ids folded into canonical pattern `id`, ascending.
    pub fn aliases(&self, id: CanonicalId) -> &[usize] {
        &self.aliases[id]
    }

    pub fn bounds(&self) -> GapBounds {
        self.bounds
    }

    /// Number of canonical patterns.
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Canonical pattern an original (1-based) id was folded into.
    pub fn canonical_of(&self, original_id: usize) -> Option<CanonicalId> {
        original_id
            .checked_sub(1)
            .and_then(|i| self.canonical_of.get(i))
            .copied()
    }

    /// Number of pattern lines in the input, duplicates included.
    pub fn original_count(&self) -> usize {
        self.original_count
    }

    /// Sum of subpattern lengths over canonical patterns; gap symbols excluded.
    pub fn total_len(&self) -> usize {
        self.total_len
    }

    pub fn min_p1(&self) -> usize {
        self.min_p1
    }

    /// Upper bound on the length of any occurrence: `max(|p1|+|p2|) + beta`.
    pub fn max_span(&self) -> usize {
        self.max_span
    }

    /// Joins one side's subpatterns with [`SEPARATOR`], no trailing separator.
    pub fn concatenate_side(&self, side: Side) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.total_len + self.patterns.len());
        for (i, p) in self.patterns.iter().enumerate() {
            if i > 0 {
                out.push(SEPARATOR);
            }
            out.extend_from_slice(match side {
                Side::First => &p.p1,
                Side::Second => &p.p2,
            });
        }
        out
    }

    /// Serializes back into the dictionary file format, one line per original id.
    pub fn to_text(&self) -> Vec<u8> {
        let mut out = format!("{} {}\n", self.bounds.alpha, self.bounds.beta).into_bytes();
        for &cid in &self.canonical_of {
            let p = &self.patterns[cid];
            out.extend_from_slice(&p.p1);
            out.push(b'\t');
            out.extend_from_slice(&p.p2);
            out.push(b'\n');
        }
        out
    }
}

#[derive(Default)]
struct Builder {
    patterns: Vec<GappedPattern>,
    aliases: Vec<Vec<usize>>,
    seen: HashMap<(Vec<u8>, Vec<u8>), CanonicalId>,
    original_count: usize,
}

impl Builder {
    fn push(&mut self, line: usize, p1: &[u8], p2: &[u8]) -> Result<(), ParseError> {
        let err = |kind| ParseError { line, kind };
        for sub in [p1, p2] {
            if sub.is_empty() {
                return Err(err(ParseErrorKind::EmptySubpattern));
            }
            if sub.contains(&b'\t') {
                return Err(err(ParseErrorKind::TabInSubpattern));
            }
            if sub.contains(&SEPARATOR) {
                return Err(err(ParseErrorKind::SeparatorInSubpattern));
            }
        }
        self.original_count += 1;
        let original_id = self.original_count;
        match self.seen.get(&(p1.to_vec(), p2.to_vec())) {
            Some(&cid) => self.aliases[cid].push(original_id),
            None => {
                let cid = self.patterns.len();
                self.seen.insert((p1.to_vec(), p2.to_vec()), cid);
                self.patterns.push(GappedPattern {
                    original_id,
                    p1: p1.to_vec(),
                    p2: p2.to_vec(),
                });
                self.aliases.push(vec![original_id]);
            }
        }
        Ok(())
    }

    fn finish(self, bounds: GapBounds, last_line: usize) -> Result<Dictionary, ParseError> {
        if self.patterns.is_empty() {
            return Err(ParseError {
                line: last_line,
                kind: ParseErrorKind::EmptyDictionary,
            });
        }
        let total_len = self.patterns.iter().map(|p| p.p1.len() + p.p2.len()).sum();
        let min_p1 = self.patterns.iter().map(|p| p.p1.len()).min().unwrap_or(0);
        let max_solid = self
            .patterns
            .iter()
            .map(|p| p.p1.len() + p.p2.len())
            .max()
            .unwrap_or(0);
        let mut canonical_of = vec![0; self.original_count];
        for (cid, ids) in self.aliases.iter().enumerate() {
            for &oid in ids {
                canonical_of[oid - 1] = cid;
            }
        }
        Ok(Dictionary {
            canonical_of,
            patterns: self.patterns,
            aliases: self.aliases,
            bounds,
            total_len,
            min_p1,
            max_span: max_solid + bounds.beta,
            original_count: self.original_count,
        })
    }
}

/// Parses the dictionary file format.
///
/// Lines starting with `#` and blank lines are skipped everywhere. A trailing
/// `\r` is stripped so CRLF files parse the same as LF files.
pub fn parse_dictionary(input: &[u8]) -> Result<Dictionary, ParseError> {
    let mut bounds = None;
    let mut builder = Builder::default();
    let mut last_line = 1;
    for (idx, raw) in input.split(|&b| b == b'\n').enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        if raw.is_empty() || raw.starts_with(b"#") {
            continue;
        }
        last_line = line;
        if bounds.is_none() {
            bounds = Some(parse_header(raw, line)?);
            continue;
        }
        let tab = raw.iter().position(|&b| b == b'\t').ok_or(ParseError {
            line,
            kind: ParseErrorKind::MissingTab,
        })?;
        builder.push(line, &raw[..tab], &raw[tab + 1..])?;
    }
    let bounds = bounds.ok_or(ParseError {
        line: 1,
        kind: ParseErrorKind::MissingHeader,
    })?;
    builder.finish(bounds, last_line)
}

fn parse_header(raw: &[u8], line: usize) -> Result<GapBounds, ParseError> {
    let malformed = ParseError {
        line,
        kind: ParseErrorKind::MalformedHeader,
    };
    let text = std::str::from_utf8(raw).map_err(|_| malformed.clone())?;
    let mut fields = text.split_ascii_whitespace();
    let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(malformed);
    };
    let alpha: usize = a.parse().map_err(|_| malformed.clone())?;
    let beta: usize = b.parse().map_err(|_| malformed.clone())?;
    GapBounds::new(alpha, beta).ok_or(ParseError {
        line,
        kind: ParseErrorKind::AlphaExceedsBeta,
    })
}
