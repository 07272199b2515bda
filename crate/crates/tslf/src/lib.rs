//! Mining finite-trace temporal specifications over integer data.
//!
//! The pipeline: discover the functions explaining variable evolution in raw
//! JSONL logs, lift logs into well-formed term traces, mine discriminative
//! liveness/safety formulas, and evaluate the mined specifications on
//! grid-world and card-game instances.

pub mod discovery;
pub mod lifting;
pub mod log;
pub mod logic;
pub mod synth;
pub mod term;

pub use logic::{Formula, Signature, Trace};
pub use term::FunctionTerm;
