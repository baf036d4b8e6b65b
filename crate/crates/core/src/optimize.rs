//! Derivative-free search for adaptation filters: an exhaustive grid over
//! diagonal filters and a seeded genetic algorithm over full filter
//! parameterizations (r plus two unitaries per slot).

use crate::adaptation::{
    run_pipeline, Configuration, LocalFilter, PipelineInput, PipelineSpec, StageOp,
};
use crate::channels::amplitude_damping;
use crate::states::BellKind;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Two candidates within this objective distance count as tied; ties break
/// toward the higher success rate.
pub const OBJECTIVE_TIE_BAND: f64 = 1e-9;
/// Hard floor on the success rate below which a point is infeasible.
pub const SUCCESS_FLOOR: f64 = 1e-12;
const INFEASIBLE_FITNESS: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximize the Wootters concurrence of the normalized output.
    Concurrence,
    /// Maximize `-min_pt_eigenvalue` (most negative partial transpose).
    MinPtEigenvalue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchSpace {
    /// One parameter per slot: `F = diag(1, √r)`.
    DiagonalOnly,
    /// Seven parameters per slot: `r` plus the six Euler angles of U and V.
    FullFilter,
}

impl SearchSpace {
    pub fn params_per_slot(self) -> usize {
        match self {
            SearchSpace::DiagonalOnly => 1,
            SearchSpace::FullFilter => 7,
        }
    }
}

/// Genetic-algorithm hyperparameters. The defaults are sized for the smooth,
/// low-dimensional filter landscapes of this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub elitism: usize,
    pub mutation_sigma: f64,
    pub crossover_prob: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 200,
            tournament: 4,
            elitism: 4,
            mutation_sigma: 0.05,
            crossover_prob: 0.5,
        }
    }
}

/// A pipeline with free filter slots to be filled by the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineTemplate {
    pub configuration: Configuration,
    pub input: PipelineInput,
    pub stages: Vec<TemplateStage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateStage {
    Fixed(StageOp),
    FreeFilter,
}

impl PipelineTemplate {
    /// The standard adaptation workflow: an isotropic-noise state enters a
    /// free filter and then the amplitude-damping channel, mirrored on both
    /// qubits.
    pub fn symmetric_adaptation(kind: BellKind, p: f64, gamma: f64) -> Result<Self> {
        Ok(Self {
            configuration: Configuration::Symmetric,
            input: PipelineInput::Werner { kind, p },
            stages: vec![
                TemplateStage::FreeFilter,
                TemplateStage::Fixed(StageOp::Channel(amplitude_damping(gamma)?)),
            ],
        })
    }

    /// Number of free filter stages (before any per-side doubling).
    pub fn free_stages(&self) -> usize {
        self.stages
            .iter()
            .filter(|s| matches!(s, TemplateStage::FreeFilter))
            .count()
    }
}

/// A filter-optimization problem over a pipeline template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationProblem {
    pub template: PipelineTemplate,
    pub objective: Objective,
    pub space: SearchSpace,
    /// Minimum acceptable success rate; candidates below it are infeasible.
    pub s_min: f64,
    pub seed: u64,
    /// Mirror one filter onto both qubits of a symmetric slot; identical
    /// filters suffice for the symmetric workflow. `false` gives each side
    /// its own independently parameterized filter.
    pub identical_filters: bool,
    pub ga: GaConfig,
}

impl OptimizationProblem {
    pub fn new(template: PipelineTemplate) -> Self {
        Self {
            template,
            objective: Objective::Concurrence,
            space: SearchSpace::DiagonalOnly,
            s_min: 0.0,
            seed: 0,
            identical_filters: true,
            ga: GaConfig::default(),
        }
    }

    /// Number of independently parameterized filter slots.
    pub fn slot_count(&self) -> usize {
        let per_stage =
            if self.template.configuration == Configuration::Symmetric && !self.identical_filters {
                2
            } else {
                1
            };
        self.template.free_stages() * per_stage
    }

    fn success_floor(&self) -> f64 {
        self.s_min.max(SUCCESS_FLOOR)
    }

    /// Fills the template's free slots with concrete filters.
    pub fn instantiate(&self, filters: &[LocalFilter]) -> Result<PipelineSpec> {
        if filters.len() != self.slot_count() {
            return Err(Error::domain(format!(
                "expected {} filters, got {}",
                self.slot_count(),
                filters.len()
            )));
        }
        let symmetric = self.template.configuration == Configuration::Symmetric;
        let mut stages_a = Vec::new();
        let mut stages_b = Vec::new();
        let mut next = 0usize;
        for stage in &self.template.stages {
            match stage {
                TemplateStage::Fixed(op) => {
                    stages_b.push(op.clone());
                    if symmetric {
                        stages_a.push(op.clone());
                    }
                }
                TemplateStage::FreeFilter => {
                    if symmetric {
                        if self.identical_filters {
                            let f = filters[next];
                            next += 1;
                            stages_a.push(StageOp::Filter(f));
                            stages_b.push(StageOp::Filter(f));
                        } else {
                            stages_a.push(StageOp::Filter(filters[next]));
                            stages_b.push(StageOp::Filter(filters[next + 1]));
                            next += 2;
                        }
                    } else {
                        stages_b.push(StageOp::Filter(filters[next]));
                        next += 1;
                    }
                }
            }
        }
        Ok(PipelineSpec {
            configuration: self.template.configuration,
            input: self.template.input,
            stages_a,
            stages_b,
        })
    }

    /// Runs the pipeline at the given filters; `None` marks an infeasible
    /// candidate (annihilated state or success rate under the floor).
    pub fn evaluate(&self, filters: &[LocalFilter]) -> Result<Option<Evaluation>> {
        let spec = self.instantiate(filters)?;
        let run = match run_pipeline(&spec) {
            Ok(run) => run,
            Err(Error::ZeroSuccess { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        if run.outcome.success_rate < self.success_floor() {
            return Ok(None);
        }
        let objective_value = match self.objective {
            Objective::Concurrence => run.report.concurrence,
            Objective::MinPtEigenvalue => -run.report.min_pt_eigenvalue,
        };
        Ok(Some(Evaluation {
            objective_value,
            success_rate: run.outcome.success_rate,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub objective_value: f64,
    pub success_rate: f64,
}

fn better(candidate: &Evaluation, incumbent: &Evaluation) -> bool {
    if candidate.objective_value > incumbent.objective_value + OBJECTIVE_TIE_BAND {
        return true;
    }
    (candidate.objective_value - incumbent.objective_value).abs() <= OBJECTIVE_TIE_BAND
        && candidate.success_rate > incumbent.success_rate
}

/// Best filters found for a problem, with enough bookkeeping to re-evaluate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    /// Realized filter per slot.
    pub filters: Vec<LocalFilter>,
    /// Raw search-space parameters per slot (normalized to `[0,1]`).
    pub params: Vec<Vec<f64>>,
    pub objective_value: f64,
    pub success_rate: f64,
    pub evaluations: u64,
    pub converged: bool,
    pub seed: u64,
}

/// Exhaustive scan over identical diagonal filters, `r ∈ {k/(steps-1)}`.
pub fn grid_search_diag(
    problem: &OptimizationProblem,
    r_steps: usize,
) -> Result<OptimizationResult> {
    if problem.space != SearchSpace::DiagonalOnly {
        return Err(Error::domain(
            "grid_search_diag runs on the DiagonalOnly space",
        ));
    }
    if r_steps < 2 {
        return Err(Error::domain("r_steps must be at least 2"));
    }
    let slots = problem.slot_count();
    let mut best: Option<(f64, Evaluation)> = None;
    let mut evaluations = 0u64;
    for k in 0..r_steps {
        let r = k as f64 / (r_steps - 1) as f64;
        let filters = vec![LocalFilter::diagonal(r)?; slots];
        evaluations += 1;
        if let Some(eval) = problem.evaluate(&filters)? {
            let is_better = match &best {
                None => true,
                Some((_, incumbent)) => better(&eval, incumbent),
            };
            if is_better {
                best = Some((r, eval));
            }
        }
    }
    let (r, eval) = best.ok_or(Error::NoFeasiblePoint)?;
    Ok(OptimizationResult {
        filters: vec![LocalFilter::diagonal(r)?; slots],
        params: vec![vec![r]; slots],
        objective_value: eval.objective_value,
        success_rate: eval.success_rate,
        evaluations,
        converged: true,
        seed: problem.seed,
    })
}

fn decode_slot(space: SearchSpace, genes: &[f64]) -> LocalFilter {
    match space {
        SearchSpace::DiagonalOnly => {
            LocalFilter::diagonal(genes[0].clamp(0.0, 1.0)).expect("clamped r")
        }
        SearchSpace::FullFilter => {
            let tau = std::f64::consts::TAU;
            LocalFilter::new(
                genes[0].clamp(0.0, 1.0),
                [genes[1] * tau, genes[2] * tau, genes[3] * tau],
                [genes[4] * tau, genes[5] * tau, genes[6] * tau],
            )
            .expect("clamped r")
        }
    }
}

fn decode(problem: &OptimizationProblem, genome: &[f64]) -> Vec<LocalFilter> {
    let per = problem.space.params_per_slot();
    genome
        .chunks(per)
        .map(|g| decode_slot(problem.space, g))
        .collect()
}

/// Seeded, reproducible genetic optimization over the problem's search space.
///
/// Tournament selection, uniform crossover, Gaussian mutation on the
/// normalized genome, elitism; infeasible candidates carry a fitness sentinel
/// of -1 instead of being resampled. Identical seeds give bitwise-identical
/// results.
pub fn genetic_optimize(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    let ga = problem.ga;
    if ga.population < 2 || ga.elitism >= ga.population || ga.tournament == 0 {
        return Err(Error::domain("malformed GA configuration"));
    }
    let dim = problem.slot_count() * problem.space.params_per_slot();
    if dim == 0 {
        return Err(Error::domain("template has no free filter slots"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let normal = Normal::new(0.0, ga.mutation_sigma).map_err(|e| Error::domain(e.to_string()))?;

    let mut evaluations = 0u64;
    let fitness_of = |genome: &Vec<f64>, evals: &mut u64| -> Result<(f64, Evaluation)> {
        *evals += 1;
        match problem.evaluate(&decode(problem, genome))? {
            Some(eval) => Ok((eval.objective_value, eval)),
            None => Ok((
                INFEASIBLE_FITNESS,
                Evaluation {
                    objective_value: INFEASIBLE_FITNESS,
                    success_rate: 0.0,
                },
            )),
        }
    };

    let mut population: Vec<Vec<f64>> = (0..ga.population)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut scored: Vec<(f64, Evaluation)> = Vec::with_capacity(ga.population);
    for genome in &population {
        scored.push(fitness_of(genome, &mut evaluations)?);
    }

    let mut best: Option<(Vec<f64>, Evaluation)> = None;
    let mut last_improvement = 0usize;
    for (genome, (fit, eval)) in population.iter().zip(&scored) {
        if *fit > INFEASIBLE_FITNESS {
            let take = best.as_ref().is_none_or(|(_, inc)| better(eval, inc));
            if take {
                best = Some((genome.clone(), *eval));
            }
        }
    }

    for generation in 0..ga.generations {
        // rank indices: feasible first by (objective, success), deterministic
        let mut order: Vec<usize> = (0..ga.population).collect();
        order.sort_by(|&i, &j| {
            let (fi, ei) = &scored[i];
            let (fj, ej) = &scored[j];
            fj.partial_cmp(fi)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| {
                    ej.success_rate
                        .partial_cmp(&ei.success_rate)
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .then_with(|| i.cmp(&j))
        });

        let mut next_pop: Vec<Vec<f64>> = order[..ga.elitism]
            .iter()
            .map(|&i| population[i].clone())
            .collect();

        while next_pop.len() < ga.population {
            let a = tournament_pick(&scored, ga.tournament, &mut rng);
            let b = tournament_pick(&scored, ga.tournament, &mut rng);
            let mut child = population[a].clone();
            for (gene, other) in child.iter_mut().zip(&population[b]) {
                if rng.random::<f64>() < ga.crossover_prob {
                    *gene = *other;
                }
            }
            for gene in child.iter_mut() {
                *gene = (*gene + normal.sample(&mut rng)).clamp(0.0, 1.0);
            }
            next_pop.push(child);
        }

        population = next_pop;
        scored.clear();
        for genome in &population {
            scored.push(fitness_of(genome, &mut evaluations)?);
        }
        for (genome, (fit, eval)) in population.iter().zip(&scored) {
            if *fit > INFEASIBLE_FITNESS {
                let take = best.as_ref().is_none_or(|(_, inc)| better(eval, inc));
                if take {
                    best = Some((genome.clone(), *eval));
                    last_improvement = generation + 1;
                }
            }
        }
    }

    let (genome, eval) = best.ok_or(Error::NoFeasiblePoint)?;
    let stall = ga.generations.saturating_sub(last_improvement);
    let converged = stall >= (ga.generations / 10).max(10).min(ga.generations);
    let per = problem.space.params_per_slot();
    Ok(OptimizationResult {
        filters: decode(problem, &genome),
        params: genome.chunks(per).map(|c| c.to_vec()).collect(),
        objective_value: eval.objective_value,
        success_rate: eval.success_rate,
        evaluations,
        converged,
        seed: problem.seed,
    })
}

fn tournament_pick<R: Rng>(scored: &[(f64, Evaluation)], size: usize, rng: &mut R) -> usize {
    let n = scored.len();
    let mut winner = rng.random_range(0..n);
    for _ in 1..size {
        let challenger = rng.random_range(0..n);
        let (fw, ew) = &scored[winner];
        let (fc, ec) = &scored[challenger];
        let challenger_wins = if *fc <= INFEASIBLE_FITNESS && *fw <= INFEASIBLE_FITNESS {
            false
        } else if *fw <= INFEASIBLE_FITNESS {
            true
        } else if *fc <= INFEASIBLE_FITNESS {
            false
        } else {
            better(ec, ew)
        };
        if challenger_wins {
            winner = challenger;
        }
    }
    winner
}
