//! File formats and command implementations behind the `eip` binary.

pub mod commands;
pub mod instance_file;
pub mod outputs;
pub mod solution_file;

/// Process exit codes shared by every subcommand.
pub mod exit_codes {
    /// Optimal solve / verified equilibrium.
    pub const OK: i32 = 0;
    /// Usage or validation error.
    pub const USAGE: i32 = 1;
    /// Node or time limit reached before proving optimality.
    pub const LIMIT: i32 = 2;
    /// Equilibrium verification failed.
    pub const NOT_EQUILIBRIUM: i32 = 3;
}
