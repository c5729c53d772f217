//! Anchoring events in time: quadruple time anchors, sub-level relations
//! between anchors, attention classifiers over event links and the inference
//! that turns predicted relations back into anchors.

pub mod corpus;
pub mod evaluation;
pub mod inference;
pub mod neuralnet;
pub mod sralgebra;
pub mod synthetic;
pub mod timecore;
