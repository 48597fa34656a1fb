//! Model-comparison games: solving, strategies, distinguishing formulas.

pub mod backforth;
pub mod distinguish;
pub mod report;
pub mod session;
pub mod solver;
pub mod spec;

pub use backforth::{back_forth, check_back_forth, BackForthSystem, PathPair};
pub use distinguish::{distinguish, distinguish_from, verify_distinguisher};
pub use report::{render, verdict_report, SCHEMA_VERSION};
pub use session::{replay, GameSession, Transcript, Winner};
pub use solver::{solve, solve_with_cap, NodeId, Position, Verdict};
pub use spec::{check_pairs, check_worlds, GameFamily, GameSpec, Move, Side, Violation};
