//! Run configuration: one JSON document, versioned, unknown keys rejected.

use crate::error::CliError;
use qed_sbs::fidelity::Macrofraction;
use qed_sbs::sbs::{SbsThresholds, Tiling};
use qed_sbs::{MomentumVector, PhysicalScenario, Polarization, SolidAngleRegion, UnitDirection};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the output directory.
pub const OUTPUT_DIR_ENV: &str = "QEDSBS_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumPair {
    pub p: MomentumVector,
    pub p_prime: MomentumVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TilingSpec {
    /// Equal patches over the complement of a polar cap `unobserved`.
    FibonacciBand { patches: usize, both_polarizations: bool },
    Explicit { macrofractions: Vec<Macrofraction> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Center of the momentum distribution; its spread is the scenario's.
    pub mean_p: MomentumVector,
    pub cells_per_axis: usize,
}

/// Log-spaced s = Ω̄t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            s_min: 1e-2,
            s_max: 1e3,
            points: 200,
        }
    }
}

impl TimeGrid {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.s_min > 0.0 && self.s_max > self.s_min && self.s_max.is_finite()) || self.points < 2 {
            return Err(CliError::Config(format!(
                "time_grid must satisfy 0 < s_min < s_max and points >= 2, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.s_min.ln(), self.s_max.ln());
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| match i {
                0 => self.s_min,
                _ if i + 1 == self.points => self.s_max,
                _ => (a + (b - a) * i as f64 / last).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    /// Fock truncation N.
    pub truncation: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self { truncation: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub scenario: PhysicalScenario,
    pub unobserved: SolidAngleRegion,
    pub momenta: MomentumPair,
    pub macrofraction: Macrofraction,
    pub tiling: TilingSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub thresholds: SbsThresholds,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, e: qed_sbs::Error| CliError::Config(format!("{name}: {e}"));
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.scenario.validate().map_err(|e| field("scenario", e))?;
        self.unobserved.validate().map_err(|e| field("unobserved", e))?;
        self.macrofraction.validate().map_err(|e| field("macrofraction", e))?;
        self.time_grid.validate()?;
        if self.grid.cells_per_axis < 2 {
            return Err(CliError::Config("grid.cells_per_axis must be >= 2".into()));
        }
        if self.oracle.truncation < 1 {
            return Err(CliError::Config("oracle.truncation must be >= 1".into()));
        }
        let finite = |v: &MomentumVector| v.iter().all(|x| x.is_finite());
        if !finite(&self.momenta.p) || !finite(&self.momenta.p_prime) || !finite(&self.grid.mean_p) {
            return Err(CliError::Config("momenta must be finite".into()));
        }
        self.build_tiling()?;
        Ok(())
    }

    pub fn build_tiling(&self) -> Result<Tiling, CliError> {
        let tiling = match &self.tiling {
            TilingSpec::FibonacciBand {
                patches,
                both_polarizations,
            } => {
                let theta_b = match self.unobserved {
                    SolidAngleRegion::PolarCap {
                        theta_min,
                        theta_max,
                        phi_min,
                        phi_max,
                    } if theta_min == 0.0 && phi_max - phi_min >= 2.0 * PI - 1e-12 => theta_max,
                    _ => {
                        return Err(CliError::Config(
                            "tiling.fibonacci_band requires unobserved to be a full-azimuth polar cap from θ = 0".into(),
                        ))
                    }
                };
                Tiling::fibonacci_band(theta_b, *patches, *both_polarizations)
            }
            TilingSpec::Explicit { macrofractions } => {
                let t = Tiling {
                    macrofractions: macrofractions.clone(),
                    unobserved: self.unobserved.clone(),
                };
                t.validate().map(|_| t)
            }
        };
        tiling.map_err(|e| CliError::Config(format!("tiling: {e}")))
    }

    /// Directory for default output files: env override, then config, then `.`.
    pub fn output_directory(&self) -> PathBuf {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .or_else(|| self.output.directory.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// θ_T = 400
    #[value(name = "fig2-a")]
    Fig2A,
    /// θ_T = 25
    #[value(name = "fig2-b")]
    Fig2B,
}

impl Preset {
    pub fn theta(self) -> f64 {
        match self {
            Preset::Fig2A => 400.0,
            Preset::Fig2B => 25.0,
        }
    }

    /// α = 10⁵, δp0 = 0.05, unobserved θ ∈ [0, π/4], ΔΩ0/4π = 0.05, β = 0.01,
    /// |Δp| = 0.05 in the plane transverse to v̂0.
    pub fn config(self) -> RunConfig {
        let beta = 0.01;
        let h = 0.025 / 2f64.sqrt();
        RunConfig {
            schema_version: SCHEMA_VERSION,
            scenario: PhysicalScenario {
                coupling_alpha: 1e5,
                cutoff_over_thermal: self.theta(),
                velocity_beta: beta,
                momentum_spread: 0.05,
                cutoff_regularization: Default::default(),
            },
            unobserved: SolidAngleRegion::cap(PI / 4.0),
            momenta: MomentumPair {
                p: MomentumVector::new(h, h, beta),
                p_prime: MomentumVector::new(-h, -h, beta),
            },
            macrofraction: Macrofraction {
                center: UnitDirection::y(),
                solid_angle: 0.05 * 4.0 * PI,
                polarization: Polarization::Second,
            },
            tiling: TilingSpec::FibonacciBand {
                patches: 32,
                both_polarizations: true,
            },
            grid: GridSpec {
                mean_p: MomentumVector::new(0.0, 0.0, beta),
                cells_per_axis: 4,
            },
            time_grid: TimeGrid::default(),
            output: OutputSpec::default(),
            oracle: OracleSpec::default(),
            thresholds: SbsThresholds::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for p in [Preset::Fig2A, Preset::Fig2B] {
            let cfg = p.config();
            cfg.validate().unwrap();
            let back = RunConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_json(), cfg.to_json());
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let mut v: serde_json::Value = serde_json::from_str(&Preset::Fig2A.config().to_json()).unwrap();
        v["scenario"]["colour"] = serde_json::json!(1);
        let err = RunConfig::from_json(&serde_json::to_string_pretty(&v).unwrap()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("colour") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn schema_version_is_checked() {
        let mut cfg = Preset::Fig2B.config();
        cfg.schema_version = 7;
        assert!(matches!(RunConfig::from_json(&cfg.to_json()), Err(CliError::Config(_))));
    }

    #[test]
    fn time_grid_is_log_spaced_and_increasing() {
        let s = TimeGrid::default().values();
        assert_eq!(s.len(), 200);
        assert_eq!(s[0], 1e-2);
        assert_eq!(s[199], 1e3);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        let bad = TimeGrid {
            s_min: 2.0,
            s_max: 1.0,
            points: 10,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn band_tiling_needs_a_cap() {
        let mut cfg = Preset::Fig2A.config();
        cfg.unobserved = SolidAngleRegion::FullSphere;
        assert!(cfg.validate().is_err());
    }
}
