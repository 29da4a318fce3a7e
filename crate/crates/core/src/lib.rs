//! Echo index analysis for input-driven switching systems.
//!
//! An input sequence over a finite alphabet selects, step by step, one of
//! finitely many self-maps of a box. The crate generates constrained input
//! sequences, charts the attractors of each map, iterates the switched
//! system and estimates how many distinct responses the system can give.

pub mod cluster;
pub mod echo;
pub mod maps;
pub mod seeding;
pub mod sim;
pub mod sweep;
pub mod symbolic;
