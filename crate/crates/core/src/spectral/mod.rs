//! Fourier-side solvers for the Kac equation, density inversion and
//! distances to the Gaussian equilibrium.

mod bobylev;
mod density;
mod grid;
mod theta;
mod wild;

pub use bobylev::{bobylev_evolve, bobylev_trajectory, SolveReport, SolverOptions};
pub use density::{
    invert_to_density, invert_with, sup_cf_distance, tv_distance, DensityGrid, InversionOptions, TailMode,
};
pub use grid::{CfGrid, GridParams, InvariantReport};
pub use theta::{Calibration, Plan, ThetaRule};
pub use wild::{circle_average, wild_product, wild_series, wild_terms_needed, WildOptions, WildReport};
