pub mod adversaries;
pub mod classes;
pub mod data;
pub mod distribution;
pub mod error;
pub mod eval;
pub mod exec;
pub mod harness;
pub mod learners;
pub mod meta;
pub mod seed;
pub mod selftest;
pub mod textio;
