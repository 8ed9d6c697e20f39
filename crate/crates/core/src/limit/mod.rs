//! Continuum objects of the Brownian case.

pub mod brownian;
pub mod grid;
pub mod lamperti;
pub mod left_height;
pub mod local_time;
pub mod sde;

pub use brownian::{simulate_brownian_height, BrownianHeight};
pub use grid::{first_passage_inverse, FirstPassage, GridPath, Interpolation};
pub use lamperti::{lamperti_solve, DrivingPath};
pub use left_height::{build_u, simulate_left_height, terminal_local_time, LeftHeightPath, TerminalConfig};
pub use local_time::{local_time_field, occupation_residual};
pub use sde::{mcbi_sde, mean_ode, Trajectory};
