//! Design toolkit for water-exchange networks in eco-industrial parks.
//!
//! An eco-industrial park (EIP) is a set of co-located enterprises that can
//! reuse each other's wastewater to cut fresh-water intake. The park designer
//! proposes an exchange network minimising the total discharged water while
//! guaranteeing every participating enterprise a minimal relative cost gain
//! over stand-alone operation; enterprises that cannot be served profitably
//! are left outside the park. The designer's problem is a single-leader
//! multi-follower game whose follower equilibrium can be folded into a
//! single mixed-integer linear program.
//!
//! The crate is organised as:
//!
//! * [`model`] — instance data, validation and closed-form derived constants;
//! * [`milp`] — a generic MILP engine (two-phase primal simplex plus
//!   best-first branch-and-bound) with an adapter seam for external solvers;
//! * [`reduction`] — builds the designer's mixed-integer programs and maps
//!   solutions back to park operations and explicit networks;
//! * [`equilibrium`] — independent best-response verification that a proposed
//!   operation is a generalized Nash equilibrium;
//! * [`analysis`] — sensitivity sweeps and summary reports;
//! * [`fixtures`] — the bundled case-study instances.

pub mod analysis;
pub mod equilibrium;
pub mod fixtures;
pub mod milp;
pub mod model;
pub mod reduction;
