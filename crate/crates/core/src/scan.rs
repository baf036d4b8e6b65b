//! Phase-diagram scan over the channel parameters (γ, p): per-cell
//! classification of entanglement sudden death and filter recovery, with CSV,
//! PGM and SVG emission.

use crate::adaptation::{run_pipeline, PipelineInput, PipelineSpec, StageOp};
use crate::channels::amplitude_damping;
use crate::optimize::{
    genetic_optimize, grid_search_diag, OptimizationProblem, PipelineTemplate, SearchSpace,
};
use crate::states::BellKind;
use crate::{fmt_sig12, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Dead band around classification boundaries.
pub const DEAD_BAND: f64 = 1e-8;
/// Diagonal grid resolution used by the per-cell filter search.
pub const DEFAULT_R_STEPS: usize = 200;
/// Werner separability threshold.
const WERNER_THRESHOLD: f64 = 1.0 / 3.0;

/// Per-cell verdict over the (γ, p) plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// p ≤ 1/3: the isotropic noise alone already broke the entanglement.
    DepolarizingBroken,
    /// Both Bell inputs survive the unfiltered pipeline.
    Preserving,
    /// Only the Φ− input dies; a basis swap remedies it.
    EsdPhiOnly,
    /// Both inputs die unfiltered and the optimized filter revives one.
    EsdBothRecovered,
    /// Both inputs die and no searched filter helps.
    EsdBothUnrecovered,
}

impl Classification {
    pub const ALL: [Classification; 5] = [
        Classification::DepolarizingBroken,
        Classification::Preserving,
        Classification::EsdPhiOnly,
        Classification::EsdBothRecovered,
        Classification::EsdBothUnrecovered,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::DepolarizingBroken => "depolarizing_broken",
            Classification::Preserving => "preserving",
            Classification::EsdPhiOnly => "esd_phi_only",
            Classification::EsdBothRecovered => "esd_both_recovered",
            Classification::EsdBothUnrecovered => "esd_both_unrecovered",
        }
    }

    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|c| c == self).unwrap()
    }
}

/// Diagnostics for one (γ, p) grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub gamma: f64,
    pub p: f64,
    pub min_pt_eig_phi: f64,
    pub min_pt_eig_psi: f64,
    pub phi_entangled_unfiltered: bool,
    pub psi_entangled_unfiltered: bool,
    /// Optimal diagonal-filter parameter; None when no filter search ran (or
    /// none helped).
    pub best_r: Option<f64>,
    /// Concurrence of the (optimally filtered, if searched) Ψ− output.
    pub filtered_concurrence: f64,
    pub success_rate: f64,
    pub classification: Classification,
}

/// Scan configuration; defaults reproduce the qualitative phase-diagram
/// geometry. γ stays below 1 because complete damping is a constant map that
/// no filter can adapt around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub gamma_steps: usize,
    pub p_steps: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub seed: u64,
    pub r_steps: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            gamma_steps: 50,
            p_steps: 50,
            gamma_min: 0.01,
            gamma_max: 0.99,
            p_min: 0.05,
            p_max: 1.0,
            seed: 0,
            r_steps: DEFAULT_R_STEPS,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_steps < 2 || self.p_steps < 2 {
            return Err(Error::domain("scan grids need at least 2 steps per axis"));
        }
        if self.r_steps < 2 {
            return Err(Error::domain("r_steps must be at least 2"));
        }
        for (name, lo, hi) in [
            ("gamma", self.gamma_min, self.gamma_max),
            ("p", self.p_min, self.p_max),
        ] {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
                return Err(Error::domain(format!("bad {name} range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn gamma_at(&self, i: usize) -> f64 {
        self.gamma_min
            + i as f64 * (self.gamma_max - self.gamma_min) / (self.gamma_steps - 1) as f64
    }

    pub fn p_at(&self, j: usize) -> f64 {
        self.p_min + j as f64 * (self.p_max - self.p_min) / (self.p_steps - 1) as f64
    }
}

/// Classification counts for a whole grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScanSummary {
    pub total: usize,
    pub counts: Vec<(Classification, usize)>,
}

impl ScanSummary {
    fn tally(records: &[ScanRecord]) -> Self {
        let mut counts = [0usize; 5];
        for r in records {
            counts[r.classification.index()] += 1;
        }
        Self {
            total: records.len(),
            counts: Classification::ALL.iter().copied().zip(counts).collect(),
        }
    }

    pub fn count(&self, class: Classification) -> usize {
        self.counts
            .iter()
            .find(|(c, _)| *c == class)
            .map(|(_, n)| *n)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutput {
    pub config: ScanConfig,
    pub records: Vec<ScanRecord>,
    pub summary: ScanSummary,
}

fn unfiltered_symmetric(
    kind: BellKind,
    p: f64,
    gamma: f64,
) -> Result<crate::adaptation::PipelineRun> {
    let spec = PipelineSpec::symmetric(
        PipelineInput::Werner { kind, p },
        vec![StageOp::Channel(amplitude_damping(gamma)?)],
    );
    run_pipeline(&spec)
}

/// Classifies one (γ, p) cell: runs the unfiltered symmetric pipeline for
/// both Bell inputs, and where both die with p above the Werner threshold,
/// searches for a recovering filter (diagonal grid first, genetic fallback
/// over full filters).
pub fn classify_point(gamma: f64, p: f64, seed: u64) -> Result<ScanRecord> {
    classify_point_with(gamma, p, seed, DEFAULT_R_STEPS)
}

pub fn classify_point_with(gamma: f64, p: f64, seed: u64, r_steps: usize) -> Result<ScanRecord> {
    let phi = unfiltered_symmetric(BellKind::PhiMinus, p, gamma)?;
    let psi = unfiltered_symmetric(BellKind::PsiMinus, p, gamma)?;
    let phi_e = phi.report.entangled;
    let psi_e = psi.report.entangled;

    let mut record = ScanRecord {
        gamma,
        p,
        min_pt_eig_phi: phi.report.min_pt_eigenvalue,
        min_pt_eig_psi: psi.report.min_pt_eigenvalue,
        phi_entangled_unfiltered: phi_e,
        psi_entangled_unfiltered: psi_e,
        best_r: None,
        filtered_concurrence: psi.report.concurrence,
        success_rate: 1.0,
        classification: Classification::Preserving,
    };

    if p <= WERNER_THRESHOLD + DEAD_BAND {
        record.classification = Classification::DepolarizingBroken;
        return Ok(record);
    }
    if !phi_e && !psi_e {
        // genuinely broken composite: look for an adapting filter on the Ψ− input
        let template = PipelineTemplate::symmetric_adaptation(BellKind::PsiMinus, p, gamma)?;
        let mut problem = OptimizationProblem::new(template);
        problem.seed = seed;
        match grid_search_diag(&problem, r_steps) {
            Ok(res) if res.objective_value > DEAD_BAND => {
                record.best_r = Some(res.params[0][0]);
                record.filtered_concurrence = res.objective_value;
                record.success_rate = res.success_rate;
                record.classification = Classification::EsdBothRecovered;
            }
            _ => {
                // diagonal grid found nothing: free the unitaries too
                problem.space = SearchSpace::FullFilter;
                match genetic_optimize(&problem) {
                    Ok(res) if res.objective_value > DEAD_BAND => {
                        record.best_r = Some(res.filters[0].r());
                        record.filtered_concurrence = res.objective_value;
                        record.success_rate = res.success_rate;
                        record.classification = Classification::EsdBothRecovered;
                    }
                    _ => {
                        record.filtered_concurrence = 0.0;
                        record.classification = Classification::EsdBothUnrecovered;
                    }
                }
            }
        }
        return Ok(record);
    }
    if !phi_e && psi_e {
        record.classification = Classification::EsdPhiOnly;
        return Ok(record);
    }
    debug_assert!(psi_e, "Ψ− died while Φ− survived at γ={gamma}, p={p}");
    Ok(record)
}

/// Runs the whole grid. Cells are evaluated in parallel but records are
/// returned in deterministic row-major order, p outer, γ inner.
pub fn scan_grid(config: &ScanConfig) -> Result<ScanOutput> {
    config.validate()?;
    let cells = config.p_steps * config.gamma_steps;
    let records: Vec<ScanRecord> = (0..cells)
        .into_par_iter()
        .map(|idx| {
            let j = idx / config.gamma_steps;
            let i = idx % config.gamma_steps;
            let seed = cell_seed(config.seed, idx as u64);
            classify_point_with(config.gamma_at(i), config.p_at(j), seed, config.r_steps)
        })
        .collect::<Result<_>>()?;
    let summary = ScanSummary::tally(&records);
    Ok(ScanOutput {
        config: *config,
        records,
        summary,
    })
}

fn cell_seed(seed: u64, idx: u64) -> u64 {
    seed ^ idx.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// CSV header, fixed column order.
pub const CSV_HEADER: &str = "gamma,p,min_pt_eig_phi,min_pt_eig_psi,phi_entangled,psi_entangled,best_r,filtered_concurrence,success_rate,classification";

/// Writes records as CSV with 12-significant-digit floats; best_r is empty
/// when absent. Identical inputs produce byte-identical output.
pub fn write_csv<W: Write>(records: &[ScanRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_sig12(r.gamma),
            fmt_sig12(r.p),
            fmt_sig12(r.min_pt_eig_phi),
            fmt_sig12(r.min_pt_eig_psi),
            r.phi_entangled_unfiltered,
            r.psi_entangled_unfiltered,
            r.best_r.map(fmt_sig12).unwrap_or_default(),
            fmt_sig12(r.filtered_concurrence),
            fmt_sig12(r.success_rate),
            r.classification.as_str(),
        )?;
    }
    Ok(())
}

/// Binary PGM (P5) heatmap: one byte per cell holding the classification
/// index, γ along x, p along y.
pub fn write_pgm<W: Write>(output: &ScanOutput, mut out: W) -> std::io::Result<()> {
    let w = output.config.gamma_steps;
    let h = output.config.p_steps;
    write!(out, "P5\n{w} {h}\n255\n")?;
    let bytes: Vec<u8> = output
        .records
        .iter()
        .map(|r| r.classification.index() as u8)
        .collect();
    out.write_all(&bytes)
}

const SVG_COLORS: [&str; 5] = [
    "#9e9e9e", // depolarizing broken
    "#f5f5f5", // preserving
    "#ffd54f", // phi-only death
    "#43a047", // both died, recovered
    "#d32f2f", // both died, unrecovered
];

/// SVG heatmap with a five-entry legend; cell size 8px, γ along x, p along y
/// (p grows downward).
pub fn write_svg<W: Write>(output: &ScanOutput, mut out: W) -> std::io::Result<()> {
    let cell = 8usize;
    let w = output.config.gamma_steps * cell;
    let h = output.config.p_steps * cell;
    let legend_h = 5 * 18 + 10;
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{}\" shape-rendering=\"crispEdges\">",
        h + legend_h
    )?;
    for (idx, r) in output.records.iter().enumerate() {
        let j = idx / output.config.gamma_steps;
        let i = idx % output.config.gamma_steps;
        writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\"/>",
            i * cell,
            j * cell,
            SVG_COLORS[r.classification.index()]
        )?;
    }
    for (k, class) in Classification::ALL.iter().enumerate() {
        let y = h + 14 + 18 * k;
        writeln!(
            out,
            "<rect x=\"4\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>",
            y - 10,
            SVG_COLORS[k]
        )?;
        writeln!(
            out,
            "<text x=\"22\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\">{}</text>",
            class.as_str()
        )?;
    }
    writeln!(out, "</svg>")
}
