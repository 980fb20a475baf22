//! Seeded random instances and the differential self-check.
//!
//! Instances mix plain random dictionaries with ones whose subpatterns are
//! shared or nested (prefix/suffix of one another), and texts with planted
//! occurrences, so both hit and miss paths get exercised.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dictionary::{Dictionary, GapBounds};
use crate::engine::{Backend, GapIndex, IndexOptions, QueryText, ScanOptions};
use crate::occurrence::Occurrence;
use crate::oracle::naive_scan;

pub const ALPHABET_SIZES: [usize; 3] = [2, 4, 26];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceParams {
    pub max_patterns: usize,
    pub max_subpattern_len: usize,
    pub max_beta: usize,
    pub max_text_len: usize,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            max_patterns: 64,
            max_subpattern_len: 12,
            max_beta: 8,
            max_text_len: 2_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub alphabet_size: usize,
    pub dict: Dictionary,
    pub text: Vec<u8>,
    /// Occurrences written into the text on purpose.
    pub planted: usize,
    /// Some subpatterns were derived from others (equal, prefix or suffix).
    pub nested: bool,
}

impl Instance {
    pub fn describe(&self) -> String {
        let b = self.dict.bounds();
        format!(
            "seed={} sigma={} d={} alpha={} beta={} n={} planted={} nested={}",
            self.seed,
            self.alphabet_size,
            self.dict.len(),
            b.alpha(),
            b.beta(),
            self.text.len(),
            self.planted,
            self.nested
        )
    }
}

/// Length in `1..=cap`, geometric with mean around 3.
pub fn subpattern_len(rng: &mut impl Rng, cap: usize) -> usize {
    let mut len = 1;
    while len < cap && rng.gen_bool(0.65) {
        len += 1;
    }
    len
}

fn random_word(rng: &mut impl Rng, alphabet: &[u8], len: usize) -> Vec<u8> {
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

/// Derives a subpattern from an existing one: identical, a prefix, a
/// suffix, or an extension on either end.
fn nested_word(rng: &mut impl Rng, alphabet: &[u8], base: &[u8], cap: usize) -> Vec<u8> {
    match rng.gen_range(0..5) {
        0 => base.to_vec(),
        1 => base[..rng.gen_range(1..=base.len())].to_vec(),
        2 => base[rng.gen_range(0..base.len())..].to_vec(),
        3 if base.len() < cap => {
            let mut w = base.to_vec();
            let extra = rng.gen_range(1..=cap - base.len());
            w.extend(random_word(rng, alphabet, extra));
            w
        }
        4 if base.len() < cap => {
            let extra = rng.gen_range(1..=cap - base.len());
            let mut w = random_word(rng, alphabet, extra);
            w.extend_from_slice(base);
            w
        }
        _ => base.to_vec(),
    }
}

pub fn random_instance(seed: u64, params: InstanceParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet_size = *ALPHABET_SIZES.choose(&mut rng).unwrap();
    let alphabet: Vec<u8> = (b'a'..).take(alphabet_size).collect();
    let cap = params.max_subpattern_len.max(1);

    let d = if rng.gen_bool(0.3) {
        rng.gen_range(1..=params.max_patterns.min(6))
    } else {
        rng.gen_range(1..=params.max_patterns.max(1))
    };
    let alpha = rng.gen_range(0..=params.max_beta);
    let beta = rng.gen_range(alpha..=params.max_beta);
    let nested = rng.gen_bool(0.5);

    let mut pairs: Vec<(Vec<u8>, Vec<u8>)> = Vec::with_capacity(d);
    for _ in 0..d {
        let derive = nested && !pairs.is_empty() && rng.gen_bool(0.7);
        let (p1, p2) = if derive {
            let (b1, b2) = pairs.choose(&mut rng).unwrap().clone();
            match rng.gen_range(0..3) {
                0 => (nested_word(&mut rng, &alphabet, &b1, cap), b2),
                1 => (b1, nested_word(&mut rng, &alphabet, &b2, cap)),
                _ => (
                    nested_word(&mut rng, &alphabet, &b1, cap),
                    nested_word(&mut rng, &alphabet, &b2, cap),
                ),
            }
        } else {
            let l1 = subpattern_len(&mut rng, cap);
            let l2 = subpattern_len(&mut rng, cap);
            (random_word(&mut rng, &alphabet, l1), random_word(&mut rng, &alphabet, l2))
        };
        pairs.push((p1, p2));
    }
    let dict = Dictionary::from_pairs(GapBounds::new(alpha, beta).unwrap(), pairs.iter().cloned())
        .expect("generated patterns are valid");

    let n = rng.gen_range(0..=params.max_text_len);
    let mut text = random_word(&mut rng, &alphabet, n);
    let mut planted = 0;
    if rng.gen_bool(0.6) {
        for _ in 0..rng.gen_range(1..=8) {
            let (p1, p2) = pairs.choose(&mut rng).unwrap();
            let gap = rng.gen_range(alpha..=beta);
            let span = p1.len() + gap + p2.len();
            if span > n {
                continue;
            }
            let at = rng.gen_range(0..=n - span);
            text[at..at + p1.len()].copy_from_slice(p1);
            text[at + p1.len() + gap..at + span].copy_from_slice(p2);
            planted += 1;
        }
    }
    Instance {
        seed,
        alphabet_size,
        dict,
        text,
        planted,
        nested,
    }
}

/// Deliberate corruption for exercising the self-check's failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Drop the last occurrence reported by the lookup backend.
    DropLookupOccurrence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub what: &'static str,
    pub expected: Vec<Occurrence>,
    pub actual: Vec<Occurrence>,
}

/// Checks grid == lookup == oracle and chunked == unchunked on one instance,
/// for both witness policies.
pub fn check_instance(instance: &Instance, fault: Option<Fault>) -> Result<usize, Mismatch> {
    let index = GapIndex::build(instance.dict.clone(), IndexOptions::default());
    let text = QueryText::new(&instance.text).expect("generated text is separator-free");
    let mut found = 0;
    for all_gaps in [false, true] {
        let options = ScanOptions { all_gaps };
        let oracle = naive_scan(&instance.dict, &instance.text, all_gaps);
        let grid = index.scan(text, Backend::Grid, options).expect("grid built");
        let mut lookup = index.scan(text, Backend::Lookup, options).expect("lookup built");
        if fault == Some(Fault::DropLookupOccurrence) {
            lookup.pop();
        }
        let chunked = index.scan_chunked(text, Backend::Grid, options).expect("grid built");
        for (what, actual) in [
            ("grid vs oracle", grid),
            ("lookup vs oracle", lookup),
            ("chunked vs oracle", chunked),
        ] {
            if actual != oracle {
                return Err(Mismatch {
                    what,
                    expected: oracle,
                    actual,
                });
            }
        }
        if oracle.iter().any(|o| !o.verify(&instance.dict, &instance.text)) {
            return Err(Mismatch {
                what: "oracle self-verification",
                expected: Vec::new(),
                actual: oracle,
            });
        }
        if !all_gaps {
            found = oracle.len();
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = random_instance(9, InstanceParams::default());
        let b = random_instance(9, InstanceParams::default());
        assert_eq!(a.dict, b.dict);
        assert_eq!(a.text, b.text);
    }

    #[test]
    fn respects_parameter_bounds() {
        for seed in 0..200 {
            let inst = random_instance(seed, InstanceParams::default());
            assert!(inst.dict.len() <= 64);
            assert!(inst.dict.bounds().beta() <= 8);
            assert!(inst.text.len() <= 2_000);
            for p in inst.dict.patterns() {
                assert!((1..=12).contains(&p.p1.len()) && (1..=12).contains(&p.p2.len()));
            }
            assert!(inst.text.iter().all(|&b| (b - b'a') < inst.alphabet_size as u8));
        }
    }

    #[test]
    fn injected_fault_is_detected() {
        let hit = (0..100)
            .map(|s| random_instance(s, InstanceParams::default()))
            .find(|i| check_instance(i, None).unwrap() > 0)
            .expect("some seed produces an occurrence");
        assert!(check_instance(&hit, Some(Fault::DropLookupOccurrence)).is_err());
    }
}
