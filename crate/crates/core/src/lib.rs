//! Decision procedures for coverability languages of vector addition
//! systems with states (VASS), centred on the unambiguous case: emptiness,
//! membership, unambiguity, universality and equivalence with a regular
//! language, together with exact bounds, brute-force oracles and instance
//! generators.

pub mod ambiguity;
pub mod bounds;
pub mod cli;
pub mod coverability;
pub mod engine;
pub mod generators;
pub mod model;
pub mod oracle;
pub mod orchestrator;
pub mod profile;

pub use ambiguity::{build_divergence_product, check_unambiguous, AmbiguityOptions, UnambiguityVerdict};
pub use bounds::{bounds_report, BoundReport};
pub use coverability::{backward_coverable, emptiness, membership, Emptiness, UpwardBasis};
pub use model::{parse_vass, serialize_vass, Configuration, Label, Run, StateId, SymbolId, TransitionId, Vass, VassBuilder, Word};
pub use oracle::{apply_run, brute_unambiguous_up_to, brute_universal_up_to, count_accepting_runs, RunCount};
pub use orchestrator::{check_equivalence_with_regular, check_universal, UniversalityAnswer, UniversalityOptions};
