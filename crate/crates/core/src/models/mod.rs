//! The three execution models: Request Queues, Queues of Queues, and the
//! distributed prelock/lock extension of Queues of Queues.

mod dscoop;
mod qoq;
mod rq;

pub use dscoop::Dscoop;
pub use qoq::Qoq;
pub use rq::Rq;

use crate::engine::ExecutionModel;

/// Looks up a model by its stable id string.
pub fn by_id(id: &str) -> Option<Box<dyn ExecutionModel>> {
    match id {
        "rq" => Some(Box::new(Rq)),
        "qoq" => Some(Box::new(Qoq::default())),
        "dscoop" => Some(Box::new(Dscoop::default())),
        _ => None,
    }
}

pub const MODEL_IDS: &[&str] = &["rq", "qoq", "dscoop"];
