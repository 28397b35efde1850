//! Turns household instructions and desires into primitive-action plans:
//! dependency parsing, frame identification, semantic role recovery,
//! constraint compilation and bounded-horizon plan search.

pub mod batch;
pub mod compiler;
pub mod frameid;
pub mod knowledge;
pub mod orchestrator;
pub mod parser;
pub mod planner;
pub mod roles;
pub mod scenario;
pub mod sexpr;
pub mod text;
