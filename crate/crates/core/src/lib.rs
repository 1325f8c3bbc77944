//! Core library for `ctrcheck`: a contract-specification language with an
//! explicit-state verification engine.
//!
//! A contract describes one service interface: finite-domain resources, a set
//! of guarded public and private services, and an interaction protocol. The
//! engine compiles a contract into a labelled transition system and decides
//! deadlock-freedom, livelock-freedom, protocol consistency, and
//! failures-divergences refinement between contracts.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `ctrcheck-cli` crate.
//!
//! Pipeline overview:
//!
//! ```text
//! .ctr text --parse--> Contract --typecheck--> diagnostics
//!                         |
//!                      build_lts
//!                         v
//!                        Lts --hide/divergent_states/normalize--> NormalizedLts
//!                         |                                           |
//!                 enumerate_failures                          check_* verdicts
//!                 enumerate_divergences
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ast;
pub mod casestudy;
pub mod check;
pub mod eval;
pub mod lexer;
pub mod lts;
pub mod normalize;
pub mod parser;
pub mod print;
pub mod protocol;
pub mod semantics;
pub mod typecheck;
pub mod value;

pub use ast::{Contract, Domain, ProtocolPattern, ServiceDecl, Stmt, VarDecl, Visibility};
pub use check::{
    check_consistency, check_deadlock, check_livelock, check_refinement, CheckError,
    Counterexample, CounterexampleKind, Model, Property, Verdict,
};
pub use eval::{enumerate_outcomes, evaluate, Outcome};
pub use lts::{build_lts, build_lts_with, divergent_states, hide, BuildConfig, Dir, Event, EventShape, Lts, LtsError};
pub use normalize::{normalize, NormalizedLts};
pub use parser::{parse_contract, ParseError};
pub use protocol::{compile_protocol, ProtocolNfa};
pub use semantics::{enumerate_divergences, enumerate_failures, weakest_protocol, FailurePair};
pub use typecheck::{typecheck, Diagnostic};
pub use value::{Valuation, Value};
