//! Document counts for phrase and co-occurrence queries.
//!
//! Counts come from a [`LocalIndex`] built over a corpus, or from a web
//! search endpoint through [`HttpProvider`] with a persistent cache. Both
//! sit behind [`CountProvider`].

mod cache;
mod corpus;
mod index;
mod phrase;
mod provider;
mod snapshot;

pub use cache::{CacheEntry, CountCache};
pub use corpus::{index_documents, load_corpus, Document};
pub use index::{LocalIndex, INDEX_FILE};
pub use phrase::{conjunctive_syntax, tokenize, PhraseQuery};
pub use provider::{
    CountProvider, HttpProvider, LocalProvider, ProviderConfig, ProviderKind, SampleSpace,
};
pub use snapshot::{
    estimate_index_size, load_function_word_rates, measure_function_word_rates, snapshot,
    snapshot_phrases, CountSnapshot, FunctionWordRate,
};
