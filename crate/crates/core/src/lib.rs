//! Collision-based computing with liquid marbles.
//!
//! Marbles roll through interaction junctions where they either bounce or
//! coalesce; presence or absence of a marble at a given phase encodes a bit.
//! This crate models the physics that picks the collision regime, compiles
//! a small netlist language with a library of gate macros down to primitive
//! nodes, simulates circuits phase by phase with exact mass accounting, and
//! verifies gates exhaustively.

pub mod analysis;
pub mod gates;
pub mod netlist;
pub mod physics;
pub mod primitives;
pub mod sim;

pub use analysis::{
    check_conservative, check_reversible, timing_lint, truth_table, verify_gate, GateReport,
    TruthTable,
};
pub use gates::{boolean_spec, library, GateMacro, Library};
pub use netlist::{
    elaborate, parse, print_canonical, validate, Circuit, CircuitAst, ElaborateOptions, SyncPolicy,
};
pub use physics::{collision_mode, CollisionMode, CollisionPolicy, PhysicsParams};
pub use primitives::{junction_route, Marble, Mass, NodeId, NodeKind, Port};
pub use sim::{run_ledger, simulate, Ledger, SimConfig, Trace};
