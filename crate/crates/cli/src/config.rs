//! Run configuration: JSON schema, deep validation, and normalization.
//!
//! A configuration names the problem (`p`, `N`, root branch, optional `beta`
//! override), the strip grid, the Neumann mass `M` with its flux-density
//! shape `psi`, the tolerances the command-line checks enforce, and the
//! artifact directory. Parsing fills documented defaults, rejects unknown
//! keys, and validates every invariant eagerly — including constructing the
//! problem parameters — so that every error is a usage error naming the
//! offending field. `serialize(parse(x))` is the normal form of `x` and is
//! a fixed point of `parse`.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use plap_core::report::json_string;
use plap_core::{tols, Branch, ProblemParams};
use serde::{Deserialize, Serialize};

/// Integrator tolerance used to build profiles. Tighter than the library
/// default because the spectral residual certification differentiates the
/// samples twice, amplifying per-sample integration noise.
const DEFAULT_ODE_TOL: f64 = 1e-13;

/// Relative flux-balance defect allowed for the oblique solve (2%).
const DEFAULT_FLUX_DEFECT: f64 = 0.02;

/// Eigenvector residual / eigenvalue-ratio defect allowed at spot-check
/// points of the coefficient field.
const DEFAULT_EIGEN_RESIDUAL: f64 = 1e-12;

/// Which root of the exponent quadratic the run uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchChoice {
    #[default]
    Larger,
    Smaller,
}

impl From<BranchChoice> for Branch {
    fn from(b: BranchChoice) -> Branch {
        match b {
            BranchChoice::Larger => Branch::Larger,
            BranchChoice::Smaller => Branch::Smaller,
        }
    }
}

/// Strip grid resolution; `y_max` overrides the far-field depth rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    #[serde(default = "default_n_y")]
    pub n_y: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_theta: default_n_theta(),
            n_y: default_n_y(),
            y_max: None,
        }
    }
}

fn default_n_theta() -> usize {
    tols::DEFAULT_NX
}

fn default_n_y() -> usize {
    tols::DEFAULT_NY
}

/// Shape of the prescribed flux density on the boundary grid. The circle
/// integral always equals `M`: the constant kind by construction, the
/// cosine kind because a nonzero mode has exact zero discrete mean, and
/// custom samples because their trapezoid mass is validated at parse time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiConfig {
    #[serde(default = "default_psi_kind")]
    pub kind: String,
    /// Relative cosine perturbation size (kind "cosine" only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Cosine frequency in multiples of the symmetry order (kind "cosine").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<u32>,
    /// Explicit density samples on the boundary grid (kind "custom-samples").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

impl Default for PsiConfig {
    fn default() -> Self {
        PsiConfig {
            kind: default_psi_kind(),
            amplitude: None,
            mode: None,
            samples: None,
        }
    }
}

fn default_psi_kind() -> String {
    "constant".to_string()
}

/// Tolerances the command-line checks enforce. Solver-internal targets
/// (linear residual, kernel cutoff, Newton tolerance) are pinned in the
/// library and not configurable here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Profile integrator tolerance.
    #[serde(default = "default_ode_tol")]
    pub ode: f64,
    /// Closed-form parametrization vs. ODE profile agreement.
    #[serde(default = "default_parametric")]
    pub parametric_agreement: f64,
    /// Disk-vs-strip energy identity agreement.
    #[serde(default = "default_energy")]
    pub energy_agreement: f64,
    /// Relative defect allowed between the realized boundary flux and `M`.
    #[serde(default = "default_flux")]
    pub flux_defect: f64,
    /// Eigenstructure spot-check residual.
    #[serde(default = "default_eigen")]
    pub eigen_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode: default_ode_tol(),
            parametric_agreement: default_parametric(),
            energy_agreement: default_energy(),
            flux_defect: default_flux(),
            eigen_residual: default_eigen(),
        }
    }
}

fn default_ode_tol() -> f64 {
    DEFAULT_ODE_TOL
}

fn default_parametric() -> f64 {
    tols::PROFILE_PARAMETRIC_AGREEMENT
}

fn default_energy() -> f64 {
    tols::ENERGY_AGREEMENT
}

fn default_flux() -> f64 {
    DEFAULT_FLUX_DEFECT
}

fn default_eigen() -> f64 {
    DEFAULT_EIGEN_RESIDUAL
}

/// One validated run: problem selection, grid, boundary mass and flux
/// shape, check tolerances, artifact directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: f64,
    #[serde(rename = "N")]
    pub n_sym: u32,
    #[serde(default)]
    pub branch: BranchChoice,
    #[serde(default)]
    pub grid: GridConfig,
    /// Zero-order weight exponent override; default is the midpoint of the
    /// admissible window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Target circle integral of the prescribed flux density.
    #[serde(rename = "M", default = "default_mass")]
    pub m_target: f64,
    #[serde(default)]
    pub psi: PsiConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_mass() -> f64 {
    1.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// Construct the validated problem parameters (branch and beta applied).
    pub fn params(&self) -> Result<ProblemParams, String> {
        let prm = ProblemParams::new(self.p, self.n_sym, self.branch.into())
            .map_err(|e| format!("config fields `p`/`N`: {e}"))?;
        match self.beta {
            Some(beta) => prm
                .with_beta(beta)
                .map_err(|e| format!("config field `beta`: {e}")),
            None => Ok(prm),
        }
    }

    /// Flux density samples on the boundary grid (length `grid.n_theta`,
    /// circle integral `M`).
    pub fn psi_samples(&self) -> Vec<f64> {
        let n = self.grid.n_theta;
        let base = self.m_target / TAU;
        match self.psi.kind.as_str() {
            "cosine" => {
                let amp = self.psi.amplitude.expect("validated");
                let mode = self.psi.mode.expect("validated") as f64;
                (0..n)
                    .map(|i| base * (1.0 + amp * (TAU * mode * i as f64 / n as f64).cos()))
                    .collect()
            }
            "custom-samples" => self.psi.samples.clone().expect("validated"),
            _ => vec![base; n],
        }
    }

    /// The normal form: pretty JSON with all defaults filled.
    pub fn normalized(&self) -> String {
        json_string(self)
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.p.is_finite() && self.p > 2.0) {
            return Err(format!("config field `p` must exceed 2 (got {})", self.p));
        }
        if self.n_sym < 1 {
            return Err("config field `N` must be at least 1".to_string());
        }
        if self.grid.n_theta < tols::MIN_GRID {
            return Err(format!(
                "config field `grid.n_theta` must be at least {} (got {})",
                tols::MIN_GRID,
                self.grid.n_theta
            ));
        }
        if self.grid.n_y < tols::MIN_GRID {
            return Err(format!(
                "config field `grid.n_y` must be at least {} (got {})",
                tols::MIN_GRID,
                self.grid.n_y
            ));
        }
        if let Some(y) = self.grid.y_max {
            if !(y.is_finite() && y > 0.0) {
                return Err(format!(
                    "config field `grid.y_max` must be positive (got {y})"
                ));
            }
        }
        if !(self.m_target.is_finite() && self.m_target != 0.0) {
            return Err(format!(
                "config field `M` must be nonzero and finite (got {})",
                self.m_target
            ));
        }
        for (name, value) in [
            ("ode", self.tolerances.ode),
            ("parametric_agreement", self.tolerances.parametric_agreement),
            ("energy_agreement", self.tolerances.energy_agreement),
            ("flux_defect", self.tolerances.flux_defect),
            ("eigen_residual", self.tolerances.eigen_residual),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!(
                    "config field `tolerances.{name}` must be positive (got {value})"
                ));
            }
        }
        self.validate_psi()?;
        self.params()?;
        Ok(())
    }

    fn validate_psi(&self) -> Result<(), String> {
        let psi = &self.psi;
        let reject_param = |field: &str, allowed: &str| {
            format!("config field `psi.{field}` applies only to kind \"{allowed}\"")
        };
        match psi.kind.as_str() {
            "constant" => {
                if psi.amplitude.is_some() || psi.mode.is_some() {
                    return Err(reject_param("amplitude`/`psi.mode", "cosine"));
                }
                if psi.samples.is_some() {
                    return Err(reject_param("samples", "custom-samples"));
                }
            }
            "cosine" => {
                if psi.samples.is_some() {
                    return Err(reject_param("samples", "custom-samples"));
                }
                let amp = psi
                    .amplitude
                    .ok_or("config field `psi.amplitude` is required for kind \"cosine\"")?;
                if !amp.is_finite() {
                    return Err(format!(
                        "config field `psi.amplitude` must be finite (got {amp})"
                    ));
                }
                let mode = psi
                    .mode
                    .ok_or("config field `psi.mode` is required for kind \"cosine\"")?;
                if mode == 0 || mode as usize % self.grid.n_theta == 0 {
                    return Err(format!(
                        "config field `psi.mode` must be nonzero and not a multiple of \
                         grid.n_theta = {} (got {mode}); such modes alias to a constant \
                         and change the mass",
                        self.grid.n_theta
                    ));
                }
            }
            "custom-samples" => {
                if psi.amplitude.is_some() || psi.mode.is_some() {
                    return Err(reject_param("amplitude`/`psi.mode", "cosine"));
                }
                let samples = psi
                    .samples
                    .as_ref()
                    .ok_or("config field `psi.samples` is required for kind \"custom-samples\"")?;
                if samples.len() != self.grid.n_theta {
                    return Err(format!(
                        "config field `psi.samples` must provide exactly grid.n_theta = {} \
                         values (got {})",
                        self.grid.n_theta,
                        samples.len()
                    ));
                }
                if !samples.iter().all(|s| s.is_finite()) {
                    return Err("config field `psi.samples` contains non-finite values".to_string());
                }
                let mass = samples.iter().sum::<f64>() * TAU / samples.len() as f64;
                let defect = (mass - self.m_target).abs();
                if defect > tols::BOUNDARY_MASS_DEFECT * self.m_target.abs().max(1.0) {
                    return Err(format!(
                        "config field `psi.samples`: circle integral {mass:.12e} misses \
                         M = {:.12e} by {defect:.3e}",
                        self.m_target
                    ));
                }
            }
            other => {
                return Err(format!(
                    "config field `psi.kind` must be one of \"constant\", \"cosine\", \
                     \"custom-samples\" (got \"{other}\")"
                ));
            }
        }
        Ok(())
    }
}

/// Parse and validate a configuration from JSON text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, String> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => format!("invalid configuration: {e}"),
        _ => format!("malformed configuration JSON: {e}"),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parse and validate a configuration file.
pub fn parse_config_file(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_config_str(&text)
}

/// The built-in default run: `p = 4`, `N = 3`, everything else defaulted.
pub fn default_config() -> RunConfig {
    parse_config_str(r#"{"p": 4, "N": 3}"#).expect("built-in default config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_documented_defaults() {
        let cfg = parse_config_str(r#"{"p": 4, "N": 3}"#).unwrap();
        assert_eq!(cfg.p, 4.0);
        assert_eq!(cfg.n_sym, 3);
        assert_eq!(cfg.branch, BranchChoice::Larger);
        assert_eq!(cfg.grid.n_theta, tols::DEFAULT_NX);
        assert_eq!(cfg.grid.n_y, tols::DEFAULT_NY);
        assert_eq!(cfg.grid.y_max, None);
        assert_eq!(cfg.m_target, 1.0);
        assert_eq!(cfg.psi.kind, "constant");
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn serialization_is_a_parse_fixed_point() {
        let cfg = parse_config_str(r#"{"p": 4, "N": 3, "grid": {"n_theta": 64}}"#).unwrap();
        let normal = cfg.normalized();
        let reparsed = parse_config_str(&normal).unwrap();
        assert_eq!(reparsed, cfg);
        assert_eq!(reparsed.normalized(), normal);
    }

    #[test]
    fn p_below_two_is_rejected_by_name() {
        let err = parse_config_str(r#"{"p": 1.5, "N": 3}"#).unwrap_err();
        assert!(err.contains("`p`"), "{err}");
    }

    #[test]
    fn zero_symmetry_order_is_rejected_by_name() {
        let err = parse_config_str(r#"{"p": 4, "N": 0}"#).unwrap_err();
        assert!(err.contains("`N`"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config_str(r#"{"p": 4, "N": 3, "zeta": 1}"#).unwrap_err();
        assert!(err.contains("zeta"), "{err}");
        let err =
            parse_config_str(r#"{"p": 4, "N": 3, "grid": {"n_theta": 64, "zz": 1}}"#).unwrap_err();
        assert!(err.contains("zz"), "{err}");
    }

    #[test]
    fn grid_minimums_are_enforced_by_name() {
        let err = parse_config_str(r#"{"p": 4, "N": 3, "grid": {"n_theta": 16}}"#).unwrap_err();
        assert!(err.contains("`grid.n_theta`"), "{err}");
        let err = parse_config_str(r#"{"p": 4, "N": 3, "grid": {"n_y": 8}}"#).unwrap_err();
        assert!(err.contains("`grid.n_y`"), "{err}");
    }

    #[test]
    fn malformed_json_is_reported_as_such() {
        let err = parse_config_str("{\"p\": 4,").unwrap_err();
        assert!(err.starts_with("malformed configuration JSON"), "{err}");
    }

    #[test]
    fn zero_mass_is_rejected_by_name() {
        let err = parse_config_str(r#"{"p": 4, "N": 3, "M": 0}"#).unwrap_err();
        assert!(err.contains("`M`"), "{err}");
    }

    #[test]
    fn beta_outside_admissible_window_is_rejected_by_name() {
        let err = parse_config_str(r#"{"p": 4, "N": 3, "beta": 99}"#).unwrap_err();
        assert!(err.contains("`beta`"), "{err}");
    }

    #[test]
    fn constant_psi_has_exact_mass() {
        let cfg = parse_config_str(r#"{"p": 4, "N": 3, "M": 2.5}"#).unwrap();
        let psi = cfg.psi_samples();
        assert_eq!(psi.len(), cfg.grid.n_theta);
        let mass = psi.iter().sum::<f64>() * TAU / psi.len() as f64;
        assert!((mass - 2.5).abs() < 1e-12);
    }

    #[test]
    fn cosine_psi_keeps_the_mass_and_needs_its_params() {
        let cfg = parse_config_str(
            r#"{"p": 4, "N": 3, "M": 1.5,
                "psi": {"kind": "cosine", "amplitude": 0.4, "mode": 2}}"#,
        )
        .unwrap();
        let psi = cfg.psi_samples();
        let mass = psi.iter().sum::<f64>() * TAU / psi.len() as f64;
        assert!((mass - 1.5).abs() < 1e-12, "cosine perturbation moved the mass");
        assert!(psi.iter().any(|&v| (v - 1.5 / TAU).abs() > 1e-3));

        let err = parse_config_str(r#"{"p": 4, "N": 3, "psi": {"kind": "cosine"}}"#).unwrap_err();
        assert!(err.contains("`psi.amplitude`"), "{err}");
        let err = parse_config_str(
            r#"{"p": 4, "N": 3, "psi": {"kind": "cosine", "amplitude": 0.4, "mode": 0}}"#,
        )
        .unwrap_err();
        assert!(err.contains("`psi.mode`"), "{err}");
    }

    #[test]
    fn constant_psi_rejects_foreign_params() {
        let err = parse_config_str(r#"{"p": 4, "N": 3, "psi": {"amplitude": 0.1}}"#).unwrap_err();
        assert!(err.contains("psi."), "{err}");
    }

    #[test]
    fn custom_samples_are_validated_for_length_and_mass() {
        let err = parse_config_str(
            r#"{"p": 4, "N": 3, "psi": {"kind": "custom-samples", "samples": [1, 2, 3]}}"#,
        )
        .unwrap_err();
        assert!(err.contains("`psi.samples`"), "{err}");

        // Correct length, wrong circle integral.
        let n = tols::DEFAULT_NX;
        let samples: Vec<String> = (0..n).map(|_| "1.0".to_string()).collect();
        let text = format!(
            r#"{{"p": 4, "N": 3, "M": 1.0,
                "psi": {{"kind": "custom-samples", "samples": [{}]}}}}"#,
            samples.join(",")
        );
        let err = parse_config_str(&text).unwrap_err();
        assert!(err.contains("`psi.samples`"), "{err}");

        // Constant samples at M/2π carry exactly the right mass.
        let value = 1.0 / TAU;
        let samples: Vec<String> = (0..n).map(|_| format!("{value:.17e}")).collect();
        let text = format!(
            r#"{{"p": 4, "N": 3, "M": 1.0,
                "psi": {{"kind": "custom-samples", "samples": [{}]}}}}"#,
            samples.join(",")
        );
        let cfg = parse_config_str(&text).unwrap();
        assert_eq!(cfg.psi_samples().len(), n);
    }

    #[test]
    fn unknown_psi_kind_is_rejected_by_name() {
        let err = parse_config_str(r#"{"p": 4, "N": 3, "psi": {"kind": "spline"}}"#).unwrap_err();
        assert!(err.contains("`psi.kind`"), "{err}");
    }

    #[test]
    fn params_reflect_branch_and_beta() {
        let cfg = parse_config_str(r#"{"p": 4, "N": 2, "branch": "smaller"}"#).unwrap();
        let prm = cfg.params().unwrap();
        assert_eq!(prm.branch, Branch::Smaller);

        let cfg = parse_config_str(r#"{"p": 4, "N": 3, "beta": 1.0}"#).unwrap();
        let prm = cfg.params().unwrap();
        assert_eq!(prm.beta, 1.0);
    }
}
