//! Bilinear-form assembly on the strip grid.
//!
//! All variants discretize forms of the shape
//! `∫ ∇φ·K(x,y)∇u + (skew and drift terms) dxdy` with bilinear elements
//! and Gauss quadrature, where `K(x, y) = Â_s(x)·e^{−2·α_space·y}` carries
//! the angular coefficient matrix rotated into strip components and the
//! radial weight written in `y = −ln r`. Conservativity, symmetry of the
//! symmetric part, and the checkerboard-free stencil come with the element
//! formulation; fluxes across cell faces are exactly balanced because each
//! face is shared by the two adjacent cells' quadrature.
//!
//! The angular direction is periodic across one fundamental period; the
//! `y = y_max` edge carries the natural (zero-flux) condition, and the
//! `y = 0` edge carries either the natural condition of the skew form
//! (which realizes the oblique boundary operator) or an explicit boundary
//! drift term, depending on the variant.

use crate::coeffs::{cutoff, cutoff_deriv, BoundaryData, BoundaryFns, CoefficientField};
use crate::error::{Error, Result};
use crate::exec;
use crate::params::ProblemParams;
use crate::profile::AngularProfile;
use crate::solver::sparse::{CooBuilder, CsrMatrix};
use crate::solver::strip::StripGrid;

/// Which bilinear form to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssemblyMode {
    /// The symmetric energy `∫⟨∇φ, K∇u⟩` alone.
    SymmetricOnly,
    /// Symmetric energy + volume skew + volume drift: the full form whose
    /// natural boundary condition is the oblique operator.
    SkewForm,
    /// Symmetric energy + boundary drift `∮ φ τ ∂_x u dx` at `y = 0`:
    /// the same continuum problem written without the skew cutoff.
    BoundaryDrift,
    /// Transpose of [`AssemblyMode::SkewForm`]: the discrete adjoint,
    /// whose natural boundary condition is `∂F/∂n* − ∂(τF)/∂θ = 0`.
    AdjointSkew,
}

/// Assembled discrete problem.
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Known right-kernel basis (normalized); constants for the primal
    /// variants, empty for the adjoint (its kernel is computed, not known).
    pub kernel: Vec<Vec<f64>>,
    /// Left near-kernel basis once computed; empty until then.
    pub left_kernel: Vec<Vec<f64>>,
}

/// A field on the strip chart `(x, y)` with raw partial derivatives.
pub struct StripField<'f> {
    pub value: &'f (dyn Fn(f64, f64) -> f64 + Sync),
    pub grad: &'f (dyn Fn(f64, f64) -> (f64, f64) + Sync),
}

const GAUSS2: [(f64, f64); 2] = [(0.211_324_865_405_187_12, 0.5), (0.788_675_134_594_812_9, 0.5)];
const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 0.277_777_777_777_777_78),
    (0.5, 0.444_444_444_444_444_44),
    (0.887_298_334_620_741_7, 0.277_777_777_777_777_78),
];

/// Q1 shape values and reference-cell gradients at `(ξ, ζ)`, local node
/// order `(0,0), (1,0), (0,1), (1,1)`.
fn shapes(xi: f64, ze: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let vals = [
        (1.0 - xi) * (1.0 - ze),
        xi * (1.0 - ze),
        (1.0 - xi) * ze,
        xi * ze,
    ];
    let dxi = [-(1.0 - ze), 1.0 - ze, -ze, ze];
    let dze = [-(1.0 - xi), -xi, 1.0 - xi, xi];
    (vals, dxi, dze)
}

struct CellContext<'a> {
    grid: &'a StripGrid,
    alpha_space: f64,
    coeff: CoefficientField<'a>,
    fns: BoundaryFns<'a>,
    theta_offset: f64,
}

impl<'a> CellContext<'a> {
    /// Strip-component coefficient matrix `K = Â_s(x)·e^{−2α y}` at a
    /// physical point: `Â_s = JᵀÂJ` for the frame rotation `J`, which
    /// swaps the diagonal and negates the off-diagonal entries.
    fn k_matrix(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let m = self.coeff.angular_matrix(x + self.theta_offset);
        let w = (-2.0 * self.alpha_space * y).exp();
        [[m[1][1] * w, -m[0][1] * w], [-m[0][1] * w, m[0][0] * w]]
    }

    /// The skew scalar `c = −τ(x)η(r)` and its strip partials.
    fn skew(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let r = (-y).exp();
        let eta = cutoff(r);
        let tau = self.fns.tau(x + self.theta_offset);
        if eta == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let c = -tau * eta;
        let c_x = -self.fns.tau_prime(x + self.theta_offset) * eta;
        let c_y = tau * cutoff_deriv(r) * r;
        (c, c_x, c_y)
    }

    fn tau_at(&self, x: f64) -> f64 {
        self.fns.tau(x + self.theta_offset)
    }

    /// Local 4×4 matrix of the chosen mode over cell `(ci, cj)`.
    fn local_matrix(&self, mode: AssemblyMode, ci: usize, cj: usize) -> [[f64; 4]; 4] {
        let (hx, hy) = (self.grid.h_theta, self.grid.h_y);
        let (x0, y0) = (self.grid.theta(ci), self.grid.y(cj));
        let mut local = [[0.0; 4]; 4];
        for &(xi, wx) in &GAUSS2 {
            for &(ze, wy) in &GAUSS2 {
                let (x, y) = (x0 + xi * hx, y0 + ze * hy);
                let w = wx * wy * hx * hy;
                let (vals, dxi, dze) = shapes(xi, ze);
                let gx: [f64; 4] = std::array::from_fn(|a| dxi[a] / hx);
                let gy: [f64; 4] = std::array::from_fn(|a| dze[a] / hy);
                let k = self.k_matrix(x, y);
                let with_skew = matches!(mode, AssemblyMode::SkewForm | AssemblyMode::AdjointSkew);
                let (c, c_x, c_y) = if with_skew {
                    self.skew(x, y)
                } else {
                    (0.0, 0.0, 0.0)
                };
                for a in 0..4 {
                    for b in 0..4 {
                        let mut term = gx[a] * (k[0][0] * gx[b] + k[0][1] * gy[b])
                            + gy[a] * (k[1][0] * gx[b] + k[1][1] * gy[b]);
                        if with_skew {
                            term += c * (gy[a] * gx[b] - gx[a] * gy[b]);
                            term += vals[a] * (c_y * gx[b] - c_x * gy[b]);
                        }
                        local[a][b] += w * term;
                    }
                }
            }
        }
        if mode == AssemblyMode::BoundaryDrift && cj == 0 {
            // ∮ φ_a τ ∂_x φ_b dx along the y = 0 edge (local nodes 0, 1).
            for &(xi, wx) in &GAUSS2 {
                let x = x0 + xi * hx;
                let tau = self.tau_at(x);
                let edge_vals = [1.0 - xi, xi];
                let edge_grad = [-1.0 / hx, 1.0 / hx];
                for a in 0..2 {
                    for b in 0..2 {
                        local[a][b] += wx * hx * edge_vals[a] * tau * edge_grad[b];
                    }
                }
            }
        }
        local
    }
}

fn cell_nodes(grid: &StripGrid, ci: usize, cj: usize) -> [usize; 4] {
    [
        grid.idx(ci, cj),
        grid.idx(ci + 1, cj),
        grid.idx(ci, cj + 1),
        grid.idx(ci + 1, cj + 1),
    ]
}

fn assemble_impl(
    grid: &StripGrid,
    prm: &ProblemParams,
    profile: &AngularProfile,
    mode: AssemblyMode,
    theta_offset: f64,
) -> Result<LinearSystem> {
    if grid.n_sym != prm.n_sym {
        return Err(Error::Linear(format!(
            "grid symmetry {} does not match parameters {}",
            grid.n_sym, prm.n_sym
        )));
    }
    let ctx = CellContext {
        grid,
        alpha_space: prm.alpha_space,
        coeff: CoefficientField::new(prm, profile),
        fns: BoundaryFns::new(prm, profile),
        theta_offset,
    };
    let base_mode = if mode == AssemblyMode::AdjointSkew {
        AssemblyMode::SkewForm
    } else {
        mode
    };
    let n_cells = grid.n_theta * grid.n_y;
    let cell_data = exec::map_collect(n_cells, |cell| {
        let (ci, cj) = (cell % grid.n_theta, cell / grid.n_theta);
        (cell_nodes(grid, ci, cj), ctx.local_matrix(base_mode, ci, cj))
    });
    let n = grid.n_dof();
    let mut coo = CooBuilder::new(n, n);
    for (nodes, local) in cell_data {
        for a in 0..4 {
            for b in 0..4 {
                coo.add(nodes[a], nodes[b], local[a][b]);
            }
        }
    }
    let mut matrix = coo.build();
    if mode == AssemblyMode::AdjointSkew {
        matrix = matrix.transpose();
    }
    let kernel = if mode == AssemblyMode::AdjointSkew {
        Vec::new()
    } else {
        let c = (n as f64).sqrt().recip();
        vec![vec![c; n]]
    };
    Ok(LinearSystem {
        matrix,
        rhs: vec![0.0; n],
        kernel,
        left_kernel: Vec::new(),
    })
}

/// Assemble the discrete operator of the requested variant; the right-hand
/// side starts at zero (fill it with [`apply_oblique_bc`] or [`weak_rhs`]).
pub fn assemble_operator(
    grid: &StripGrid,
    prm: &ProblemParams,
    profile: &AngularProfile,
    mode: AssemblyMode,
) -> Result<LinearSystem> {
    assemble_impl(grid, prm, profile, mode, 0.0)
}

/// Load the boundary data `ψ` into the right-hand side: the weak problem
/// reads `D(φ, v) = ∮ φ ψ/q dθ`, giving lumped loads `h·ψ_i/q_i` on the
/// `y = 0` row.
pub fn apply_oblique_bc(
    mut system: LinearSystem,
    grid: &StripGrid,
    boundary: &BoundaryData,
) -> Result<LinearSystem> {
    boundary.validate()?;
    if boundary.theta_grid.len() != grid.n_theta {
        return Err(Error::Linear(format!(
            "boundary data has {} nodes, grid needs {}",
            boundary.theta_grid.len(),
            grid.n_theta
        )));
    }
    if boundary.psi.len() != grid.n_theta {
        return Err(Error::Linear(
            "boundary data carries no ψ trace; call with_psi first".into(),
        ));
    }
    for (i, &theta) in boundary.theta_grid.iter().enumerate() {
        if (theta - grid.theta(i)).abs() > 1e-12 {
            return Err(Error::Linear(format!(
                "boundary node {i} at θ = {theta} does not match the grid"
            )));
        }
        system.rhs[grid.idx(i, 0)] += grid.h_theta * boundary.psi[i] / boundary.q[i];
    }
    Ok(system)
}

/// Y0 and Y1 Gram matrices on the grid: `G0` is the mass matrix with
/// weight `e^{−2(β+1)y}`, `G1 = G0 +` the gradient Gram with weight
/// `e^{−2α_space·y}`.
pub fn gram_matrices(grid: &StripGrid, prm: &ProblemParams) -> (CsrMatrix, CsrMatrix) {
    let n = grid.n_dof();
    let (hx, hy) = (grid.h_theta, grid.h_y);
    let cells = exec::map_collect(grid.n_theta * grid.n_y, |cell| {
        let (ci, cj) = (cell % grid.n_theta, cell / grid.n_theta);
        let y0 = grid.y(cj);
        let mut mass = [[0.0; 4]; 4];
        let mut stiff = [[0.0; 4]; 4];
        for &(xi, wx) in &GAUSS2 {
            for &(ze, wy) in &GAUSS2 {
                let y = y0 + ze * hy;
                let w = wx * wy * hx * hy;
                let w0 = (-2.0 * (prm.beta + 1.0) * y).exp();
                let w1 = (-2.0 * prm.alpha_space * y).exp();
                let (vals, dxi, dze) = shapes(xi, ze);
                for a in 0..4 {
                    for b in 0..4 {
                        mass[a][b] += w * w0 * vals[a] * vals[b];
                        stiff[a][b] += w
                            * w1
                            * (dxi[a] * dxi[b] / (hx * hx) + dze[a] * dze[b] / (hy * hy));
                    }
                }
            }
        }
        (cell_nodes(grid, ci, cj), mass, stiff)
    });
    let mut coo0 = CooBuilder::new(n, n);
    let mut coo1 = CooBuilder::new(n, n);
    for (nodes, mass, stiff) in cells {
        for a in 0..4 {
            for b in 0..4 {
                coo0.add(nodes[a], nodes[b], mass[a][b]);
                coo1.add(nodes[a], nodes[b], mass[a][b] + stiff[a][b]);
            }
        }
    }
    (coo0.build(), coo1.build())
}

/// Weak right-hand side `b_a = D(φ_a, v*)` for a closed-form `v*`,
/// integrated with third-order Gauss so the manufactured solution is not
/// polluted by the load quadrature.
pub fn weak_rhs(
    grid: &StripGrid,
    prm: &ProblemParams,
    profile: &AngularProfile,
    mode: AssemblyMode,
    field: &StripField,
) -> Result<Vec<f64>> {
    if mode == AssemblyMode::AdjointSkew {
        return Err(Error::Linear(
            "manufactured loads are defined for the primal variants".into(),
        ));
    }
    let ctx = CellContext {
        grid,
        alpha_space: prm.alpha_space,
        coeff: CoefficientField::new(prm, profile),
        fns: BoundaryFns::new(prm, profile),
        theta_offset: 0.0,
    };
    let (hx, hy) = (grid.h_theta, grid.h_y);
    let cells = exec::map_collect(grid.n_theta * grid.n_y, |cell| {
        let (ci, cj) = (cell % grid.n_theta, cell / grid.n_theta);
        let (x0, y0) = (grid.theta(ci), grid.y(cj));
        let mut load = [0.0; 4];
        for &(xi, wx) in &GAUSS3 {
            for &(ze, wy) in &GAUSS3 {
                let (x, y) = (x0 + xi * hx, y0 + ze * hy);
                let w = wx * wy * hx * hy;
                let (vals, dxi, dze) = shapes(xi, ze);
                let k = ctx.k_matrix(x, y);
                let (vx, vy) = (field.grad)(x, y);
                let with_skew = mode == AssemblyMode::SkewForm;
                let (c, c_x, c_y) = if with_skew {
                    ctx.skew(x, y)
                } else {
                    (0.0, 0.0, 0.0)
                };
                for a in 0..4 {
                    let (gax, gay) = (dxi[a] / hx, dze[a] / hy);
                    let mut term = gax * (k[0][0] * vx + k[0][1] * vy)
                        + gay * (k[1][0] * vx + k[1][1] * vy);
                    if with_skew {
                        term += c * (gay * vx - gax * vy);
                        term += vals[a] * (c_y * vx - c_x * vy);
                    }
                    load[a] += w * term;
                }
            }
        }
        if mode == AssemblyMode::BoundaryDrift && cj == 0 {
            for &(xi, wx) in &GAUSS3 {
                let x = x0 + xi * hx;
                let tau = ctx.tau_at(x);
                let (vx, _) = (field.grad)(x, 0.0);
                let edge_vals = [1.0 - xi, xi];
                for a in 0..2 {
                    load[a] += wx * hx * edge_vals[a] * tau * vx;
                }
            }
        }
        (cell_nodes(grid, ci, cj), load)
    });
    let mut rhs = vec![0.0; grid.n_dof()];
    for (nodes, load) in cells {
        for a in 0..4 {
            rhs[nodes[a]] += load[a];
        }
    }
    Ok(rhs)
}

/// Nodal interpolant of a strip-chart field.
pub fn interpolate(grid: &StripGrid, field: &StripField) -> Vec<f64> {
    let mut out = vec![0.0; grid.n_dof()];
    for j in 0..=grid.n_y {
        for i in 0..grid.n_theta {
            out[grid.idx(i, j)] = (field.value)(grid.theta(i), grid.y(j));
        }
    }
    out
}
