//! Deterministic artifact formatting and emission.
//!
//! All CSV artifacts print 17 significant digits per value (exact f64
//! round-trip); JSON reports use sorted metric keys and declared field
//! order. Nothing here reads the clock, so identical runs produce
//! byte-identical files.

use std::path::Path;

use plap_core::coeffs::BoundaryData;
use plap_core::report::csv_string;
use plap_core::solver::strip::SolutionField;
use plap_core::AngularProfile;

use crate::Failure;

/// `theta,a,a_theta` at the profile's stored nodes (one fundamental period).
pub fn profile_csv(profile: &AngularProfile) -> String {
    let rows = profile
        .theta_grid
        .iter()
        .zip(&profile.a)
        .zip(&profile.a_theta)
        .map(|((&t, &a), &s)| vec![t, a, s]);
    csv_string("theta,a,a_theta", rows)
}

/// `theta,q,tau` at the boundary nodes (one fundamental period).
pub fn boundary_csv(data: &BoundaryData) -> String {
    let rows = (0..data.theta_grid.len()).map(|i| vec![data.theta_grid[i], data.q[i], data.tau[i]]);
    csv_string("theta,q,tau", rows)
}

/// `theta,y,v` over the whole strip grid, row by row from the boundary down.
pub fn solution_csv(v: &SolutionField) -> String {
    let grid = &v.grid;
    let mut rows = Vec::with_capacity(grid.n_dof());
    for j in 0..=grid.n_y {
        for i in 0..grid.n_theta {
            rows.push(vec![grid.theta(i), grid.y(j), v.value(i, j)]);
        }
    }
    csv_string("theta,y,v", rows)
}

/// `r,gbar`: circle averages of the solution per grid radius.
pub fn circle_averages_csv(v: &SolutionField) -> String {
    let grid = &v.grid;
    let rows = (0..=grid.n_y).map(|j| vec![grid.r(j), v.circle_average(j)]);
    csv_string("r,gbar", rows)
}

/// Write one artifact, creating the output directory as needed.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("cannot create output dir {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}
