//! Dictionary matching with a single bounded gap.
//!
//! Each dictionary pattern is `p1 {alpha,beta} p2`: two solid subpatterns
//! separated by between `alpha` and `beta` arbitrary symbols. Given a query
//! text, [`GapIndex`] reports every position where some pattern ends.
//!
//! ```
//! use gapdict::{parse_dictionary, Backend, GapIndex, IndexOptions, QueryText, ScanOptions};
//!
//! let dict = parse_dictionary(b"1 2\nab\tcd\na\td\n").unwrap();
//! let index = GapIndex::build(dict, IndexOptions::default());
//! let text = QueryText::new(b"abxcdxad").unwrap();
//! let hits = index.scan(text, Backend::Lookup, ScanOptions::default()).unwrap();
//! assert_eq!((hits[0].pattern_id, hits[0].start, hits[0].end), (1, 0, 4));
//! ```

pub mod dictionary;
pub mod engine;
pub mod inter_table;
pub mod marking;
pub mod occurrence;
pub mod oracle;
pub mod range_grid;
pub mod suffix_tree;
pub mod testgen;

pub use dictionary::{parse_dictionary, Dictionary, GapBounds, ParseError, SEPARATOR};
pub use engine::{Backend, ChunkPlan, GapIndex, IndexOptions, QueryText, ScanError, ScanOptions, ScanStats};
pub use occurrence::Occurrence;
pub use oracle::naive_scan;
