//! Relaxed-memory toolkit.
//!
//! Parses litmus programs, enumerates their executions under SC, x86
//! (direct and x86A), ARMv7, ARMv7-mca and ARMv8, maps programs between
//! architectures, removes redundant fences and checks robustness.
//!
//! ```
//! use weakmem::{enumerate, litmus, models::ModelId};
//! let p = litmus::parse("arch x86\nthread P0 { X = 1; r1 = Y; } thread P1 { Y = 1; r2 = X; }\nexists (P0:r1=0 /\\ P1:r2=0)").unwrap();
//! assert!(!enumerate::outcome_allowed(&p, ModelId::Sc).unwrap());
//! assert!(enumerate::outcome_allowed(&p, ModelId::X86A).unwrap());
//! ```

pub mod cli;
pub mod enumerate;
pub mod exec;
pub mod fenceopt;
pub mod gen;
pub mod litmus;
pub mod mapping;
pub mod models;
pub mod relalg;
pub mod robust;
