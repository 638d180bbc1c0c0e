//! SBS proximity over time for a momentum grid and a tiling.

use crate::config::RunConfig;
use crate::error::CliError;
use qed_sbs::decoherence::dipole_validity_time;
use qed_sbs::sbs::{pointer_probabilities, SbsAnalyzer, SbsReport, SbsThresholds};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimedReport {
    #[serde(flatten)]
    pub report: SbsReport,
    /// s beyond Ω̄τ_dip
    pub validity_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbsSeries {
    pub dipole_validity_time: f64,
    pub redundancy_count: usize,
    pub macrofractions: usize,
    pub grid_cells: usize,
    pub distinct_differences: usize,
    pub thresholds: SbsThresholds,
    pub reports: Vec<TimedReport>,
}

pub fn build(cfg: &RunConfig) -> Result<SbsSeries, CliError> {
    let sc = &cfg.scenario;
    let tiling = cfg.build_tiling()?;
    let grid = pointer_probabilities(&cfg.grid.mean_p, sc.momentum_spread, cfg.grid.cells_per_axis)?;
    let analyzer = SbsAnalyzer::new(&grid, &tiling, sc)?;
    let tau_dip = dipole_validity_time(sc);
    let reports = cfg
        .time_grid
        .values()
        .into_par_iter()
        .map(|s| TimedReport {
            report: analyzer.report(s, &cfg.thresholds),
            validity_warning: s > tau_dip,
        })
        .collect();
    Ok(SbsSeries {
        dipole_validity_time: tau_dip,
        redundancy_count: analyzer.redundancy_triples().len(),
        macrofractions: tiling.macrofractions.len(),
        grid_cells: grid.len(),
        distinct_differences: analyzer.difference_count(),
        thresholds: cfg.thresholds,
        reports,
    })
}

pub fn to_json(series: &SbsSeries) -> String {
    serde_json::to_string_pretty(series).expect("report serializes")
}
