//! Informed depth-first search guided by per-action weighted rule bases, and
//! offline revision of those rule bases from minimal-pruning search traces.
//!
//! The pipeline is:
//!
//! 1. [`trace::explore_sample`] runs every problem of a sample with minimal
//!    pruning and records the full state tree.
//! 2. [`learning`] extracts best paths, labels success/failure examples per
//!    action, discretizes measures and partitions each action's measure space
//!    into areas that refine the initial rules.
//! 3. [`revision`] replays the recorded trees under candidate weight
//!    assignments and searches that space with a reactive tabu search, then
//!    turns the best assignment back into aggregated rules.

pub mod domains;
pub mod engine;
pub mod experiment;
pub mod knowledge;
pub mod learning;
pub mod revision;
pub mod trace;
