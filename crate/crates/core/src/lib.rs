//! Semantics comparison workbench for a mini-SCOOP concurrent object-oriented
//! language.
//!
//! Programs are compiled to control-flow graphs and simulated under pluggable
//! execution models that differ in how handlers queue and serve requests:
//!
//! - [`models::Rq`]: one lock-protected FIFO request queue per handler; a
//!   separate block atomically acquires all target locks and holds them for
//!   the duration of the block.
//! - [`models::Qoq`]: a FIFO of private subqueues per handler; block entry
//!   creates subqueues without blocking, and suppliers drain subqueues wholly
//!   in creation order.
//! - [`models::Dscoop`]: QoQ lifted to a multi-node topology with a two-phase
//!   prelock/lock protocol; every separate object creation spawns a new node.
//!
//! The [`explorer`] enumerates the reachable configurations of a program under
//! a model, and [`properties`] provides error rules (deadlock, mutual
//! exclusion) and a trace-mode order-guarantee monitor, so that behavioural
//! and safety verdicts can be compared across semantics.

pub mod bench;
pub mod diag;
pub mod engine;
pub mod explorer;
pub mod frontend;
pub mod models;
pub mod properties;
pub mod report;
pub mod state;
