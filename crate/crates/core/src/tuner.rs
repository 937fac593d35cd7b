//! Heuristic tuning of the rescaling weights and the threshold.
//!
//! Each candidate is a gene vector `(a, b, omega, threshold)` paired with a
//! throughput; its fitness is the mean WindowDiff of the full pipeline over a
//! validation set (lower is better). A genetic algorithm and a particle swarm
//! are run once per throughput in the model bank, then the best few
//! individuals of each are pooled, re-evaluated, and the minimum is selected.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::merge::MergeConfig;
use crate::metrics::window_diff;
use crate::pipeline::{segment_vector, PipelineConfig};
use crate::regressor::RidgeModel;
use crate::scaling::ScalingParams;
use crate::synth::SynthRecord;

/// Throughputs the tuner searches over.
pub const THROUGHPUTS: [usize; 3] = [8, 16, 32];
/// Individuals each method contributes to the final selection, per throughput.
pub const TOP_PER_METHOD: usize = 5;
/// Rows in the final ranking.
pub const REPORT_ROWS: usize = 10;

const CACHE_GRID: f64 = 1e6;

pub type ModelBank = BTreeMap<usize, RidgeModel>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Genetic,
    Pso,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Genetic => "Genetic",
            Algorithm::Pso => "PSO",
        })
    }
}

/// The four continuous hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Genes {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub threshold: f64,
}

impl Genes {
    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.omega, self.threshold]
    }

    pub fn from_array([a, b, omega, threshold]: [f64; 4]) -> Self {
        Self { a, b, omega, threshold }
    }

    /// Clamps every gene to `[0, 1]`, then rescales `a` and `b` by
    /// `1/(a+b)` when their sum exceeds 1.
    pub fn repair(self) -> Self {
        let clamp = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        let [mut a, mut b, omega, threshold] = self.to_array().map(clamp);
        let sum = a + b;
        if sum > 1.0 {
            a /= sum;
            b /= sum;
            if a + b > 1.0 {
                b = 1.0 - a;
            }
        }
        Self { a, b, omega, threshold }
    }

    pub fn is_feasible(&self) -> bool {
        self.to_array().iter().all(|v| (0.0..=1.0).contains(v)) && self.a + self.b <= 1.0
    }

    pub fn scaling(&self) -> Result<ScalingParams> {
        ScalingParams::new(self.a, self.b, self.omega)
    }

    pub fn merge(&self) -> Result<MergeConfig> {
        MergeConfig::new(self.threshold)
    }

    fn cache_key(&self, throughput: usize) -> (usize, [i64; 4]) {
        (throughput, self.to_array().map(|v| (v * CACHE_GRID).round() as i64))
    }

    fn lexicographic(&self, other: &Self) -> Ordering {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(x, y)| x.total_cmp(&y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_array(std::array::from_fn(|_| rng.random::<f64>())).repair()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningCandidate {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub threshold: f64,
    pub throughput: usize,
    /// Validation WindowDiff.
    pub fitness: f64,
    pub algorithm: Algorithm,
}

impl TuningCandidate {
    pub fn new(genes: Genes, throughput: usize, fitness: f64, algorithm: Algorithm) -> Self {
        let Genes { a, b, omega, threshold } = genes;
        Self {
            a,
            b,
            omega,
            threshold,
            throughput,
            fitness,
            algorithm,
        }
    }

    pub fn genes(&self) -> Genes {
        Genes {
            a: self.a,
            b: self.b,
            omega: self.omega,
            threshold: self.threshold,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.genes().is_feasible() && THROUGHPUTS.contains(&self.throughput)
    }
}

/// Ascending fitness, then smaller throughput, then lexicographic genes.
pub fn rank_order(x: &TuningCandidate, y: &TuningCandidate) -> Ordering {
    x.fitness
        .total_cmp(&y.fitness)
        .then(x.throughput.cmp(&y.throughput))
        .then_with(|| x.genes().lexicographic(&y.genes()))
}

/// Mean validation WindowDiff of the pipeline configured by `c`.
pub fn evaluate_candidate(c: &TuningCandidate, bank: &ModelBank, validation: &[SynthRecord]) -> Result<f64> {
    evaluate_genes(&c.genes(), c.throughput, bank, validation)
}

fn evaluate_genes(genes: &Genes, throughput: usize, bank: &ModelBank, validation: &[SynthRecord]) -> Result<f64> {
    let model = bank.get(&throughput).ok_or(Error::MissingModel(throughput))?;
    if validation.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let cfg = PipelineConfig::new(genes.scaling()?, genes.merge()?, model);
    let mut total = 0.0;
    let mut counted = 0usize;
    for rec in validation {
        if rec.segmentation.len() < 2 {
            continue;
        }
        let (predicted, _) = segment_vector(&rec.matrix, &cfg)?;
        total += window_diff(&rec.segmentation, &predicted, None)?;
        counted += 1;
    }
    Ok(if counted == 0 { 0.0 } else { total / counted as f64 })
}

/// Fitness oracle shared by the optimizers: caches results on a 1e-6 gene
/// grid and keeps counters for auditing.
pub struct FitnessEvaluator<'a> {
    bank: &'a ModelBank,
    validation: &'a [SynthRecord],
    cache: Mutex<HashMap<(usize, [i64; 4]), f64>>,
    requests: AtomicUsize,
    pipeline_evaluations: AtomicUsize,
    infeasible: AtomicUsize,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(bank: &'a ModelBank, validation: &'a [SynthRecord]) -> Result<Self> {
        if validation.is_empty() {
            return Err(Error::EmptyValidation);
        }
        Ok(Self {
            bank,
            validation,
            cache: Mutex::new(HashMap::new()),
            requests: AtomicUsize::new(0),
            pipeline_evaluations: AtomicUsize::new(0),
            infeasible: AtomicUsize::new(0),
        })
    }

    pub fn bank(&self) -> &ModelBank {
        self.bank
    }

    pub fn fitness(&self, genes: &Genes, throughput: usize) -> Result<f64> {
        self.requests.fetch_add(1, AtomicOrdering::Relaxed);
        if !genes.is_feasible() || !THROUGHPUTS.contains(&throughput) {
            self.infeasible.fetch_add(1, AtomicOrdering::Relaxed);
        }
        let key = genes.cache_key(throughput);
        if let Some(&f) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(f);
        }
        let f = evaluate_genes(genes, throughput, self.bank, self.validation)?;
        self.pipeline_evaluations.fetch_add(1, AtomicOrdering::Relaxed);
        self.cache.lock().expect("cache poisoned").insert(key, f);
        Ok(f)
    }

    pub fn fitness_batch(&self, genes: &[Genes], throughput: usize) -> Result<Vec<f64>> {
        genes.par_iter().map(|g| self.fitness(g, throughput)).collect()
    }

    /// Total fitness requests, including cache hits.
    pub fn requests(&self) -> usize {
        self.requests.load(AtomicOrdering::Relaxed)
    }

    pub fn pipeline_evaluations(&self) -> usize {
        self.pipeline_evaluations.load(AtomicOrdering::Relaxed)
    }

    /// Requests made for candidates outside the feasible set. Always 0 for
    /// the built-in optimizers.
    pub fn infeasible_requests(&self) -> usize {
        self.infeasible.load(AtomicOrdering::Relaxed)
    }
}

/// One stream per (algorithm, throughput), so GA and PSO never share draws.
fn optimizer_rng(seed: u64, algorithm: Algorithm, throughput: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = match algorithm {
        Algorithm::Genetic => 0u64,
        Algorithm::Pso => 1u64 << 32,
    };
    rng.set_stream(tag | throughput as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub epochs: usize,
    pub population: usize,
    pub offspring_per_epoch: usize,
    /// Probability that a gene is inherited from the first parent.
    pub crossover_rate: f64,
    pub mutation_variance: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            population: 200,
            offspring_per_epoch: 100,
            crossover_rate: 0.5,
            mutation_variance: 0.1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 || self.population < self.offspring_per_epoch {
            return Err(Error::InvalidConfig(format!(
                "population ({}) must be positive and at least offspring_per_epoch ({})",
                self.population, self.offspring_per_epoch
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_variance) {
            return Err(Error::InvalidConfig(
                "crossover_rate and mutation_variance must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub throughput: usize,
    /// Final population, best first.
    pub ranked: Vec<TuningCandidate>,
    /// Best fitness of the initial population, then after every epoch.
    pub best_history: Vec<f64>,
}

/// Elitist GA: rank-weighted parent choice, uniform-mask crossover, Gaussian
/// mutation of every gene, repair, and truncation of parents + offspring
/// back to the population size.
pub fn ga_optimize(cfg: &GaConfig, throughput: usize, evaluator: &FitnessEvaluator<'_>) -> Result<GaOutcome> {
    cfg.validate()?;
    if !evaluator.bank().contains_key(&throughput) {
        return Err(Error::MissingModel(throughput));
    }
    let mut rng = optimizer_rng(cfg.seed, Algorithm::Genetic, throughput);
    let mutation = Normal::new(0.0, cfg.mutation_variance.sqrt()).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let initial: Vec<Genes> = (0..cfg.population).map(|_| Genes::random(&mut rng)).collect();
    let fitness = evaluator.fitness_batch(&initial, throughput)?;
    let mut population: Vec<TuningCandidate> = initial
        .into_iter()
        .zip(fitness)
        .map(|(g, f)| TuningCandidate::new(g, throughput, f, Algorithm::Genetic))
        .collect();
    population.sort_by(rank_order);
    let mut best_history = vec![population[0].fitness];

    // linear ranking: the best individual weighs `population`, the worst 1
    let weights: Vec<usize> = (1..=cfg.population).rev().collect();
    let parents = WeightedIndex::new(&weights).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    for _ in 0..cfg.epochs {
        let children: Vec<Genes> = (0..cfg.offspring_per_epoch)
            .map(|_| {
                let p1 = population[parents.sample(&mut rng)].genes().to_array();
                let p2 = population[parents.sample(&mut rng)].genes().to_array();
                let child: [f64; 4] = std::array::from_fn(|i| {
                    let gene = if rng.random_bool(cfg.crossover_rate) {
                        p1[i]
                    } else {
                        p2[i]
                    };
                    gene + mutation.sample(&mut rng)
                });
                Genes::from_array(child).repair()
            })
            .collect();
        let fitness = evaluator.fitness_batch(&children, throughput)?;
        population.extend(
            children
                .into_iter()
                .zip(fitness)
                .map(|(g, f)| TuningCandidate::new(g, throughput, f, Algorithm::Genetic)),
        );
        population.sort_by(rank_order);
        population.truncate(cfg.population);
        best_history.push(population[0].fitness);
    }
    Ok(GaOutcome {
        throughput,
        ranked: population,
        best_history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub particles: usize,
    pub inertia: f64,
    pub cognition: f64,
    pub social: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            particles: 30,
            inertia: 0.5,
            cognition: 1.0,
            social: 1.0,
            iterations: 20,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::InvalidConfig("particles must be at least 1".into()));
        }
        if [self.inertia, self.cognition, self.social]
            .iter()
            .any(|c| !(c.is_finite() && *c >= 0.0))
        {
            return Err(Error::InvalidConfig(
                "PSO coefficients must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoOutcome {
    pub throughput: usize,
    /// Personal bests, best first.
    pub ranked: Vec<TuningCandidate>,
    /// Global best fitness after initialization, then after every iteration.
    pub gbest_history: Vec<f64>,
    /// Final particle positions (repaired), in particle order.
    pub positions: Vec<Genes>,
}

/// Canonical global-best PSO over the four genes; positions are repaired
/// into the feasible set after every move.
pub fn pso_optimize(cfg: &PsoConfig, throughput: usize, evaluator: &FitnessEvaluator<'_>) -> Result<PsoOutcome> {
    cfg.validate()?;
    if !evaluator.bank().contains_key(&throughput) {
        return Err(Error::MissingModel(throughput));
    }
    let mut rng = optimizer_rng(cfg.seed, Algorithm::Pso, throughput);
    let mut positions: Vec<[f64; 4]> = (0..cfg.particles).map(|_| Genes::random(&mut rng).to_array()).collect();
    let mut velocities = vec![[0.0f64; 4]; cfg.particles];

    let as_genes = |p: &[[f64; 4]]| p.iter().map(|&x| Genes::from_array(x)).collect::<Vec<_>>();
    let mut pbest = positions.clone();
    let mut pbest_fit = evaluator.fitness_batch(&as_genes(&positions), throughput)?;
    let mut g = argmin(&pbest_fit);
    let mut gbest_history = vec![pbest_fit[g]];

    for _ in 0..cfg.iterations {
        let gbest = pbest[g];
        for ((x, v), pb) in positions.iter_mut().zip(velocities.iter_mut()).zip(&pbest) {
            for d in 0..4 {
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                v[d] = cfg.inertia * v[d] + cfg.cognition * r1 * (pb[d] - x[d]) + cfg.social * r2 * (gbest[d] - x[d]);
                x[d] += v[d];
            }
            *x = Genes::from_array(*x).repair().to_array();
        }
        let fit = evaluator.fitness_batch(&as_genes(&positions), throughput)?;
        for (i, f) in fit.into_iter().enumerate() {
            if f < pbest_fit[i] {
                pbest_fit[i] = f;
                pbest[i] = positions[i];
            }
        }
        g = argmin(&pbest_fit);
        gbest_history.push(pbest_fit[g]);
    }

    let mut ranked: Vec<TuningCandidate> = pbest
        .iter()
        .zip(&pbest_fit)
        .map(|(&x, &f)| TuningCandidate::new(Genes::from_array(x), throughput, f, Algorithm::Pso))
        .collect();
    ranked.sort_by(rank_order);
    Ok(PsoOutcome {
        throughput,
        ranked,
        gbest_history,
        positions: as_genes(&positions),
    })
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1).then(x.0.cmp(&y.0)))
        .map(|(i, _)| i)
        .expect("non-empty")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub best: TuningCandidate,
    /// Every pooled candidate after re-evaluation, best first.
    pub pooled: Vec<TuningCandidate>,
}

/// Pools the best [`TOP_PER_METHOD`] distinct individuals of each method per
/// throughput, re-evaluates them and returns the minimum. Ties go to the
/// smaller throughput, then to the lexicographically smaller genes.
pub fn select_best(
    ga_results: &[TuningCandidate],
    pso_results: &[TuningCandidate],
    evaluator: &FitnessEvaluator<'_>,
) -> Result<Selection> {
    let mut pool = Vec::new();
    for results in [ga_results, pso_results] {
        let mut sorted = results.to_vec();
        sorted.sort_by(rank_order);
        let mut taken: BTreeMap<usize, usize> = BTreeMap::new();
        let mut seen = HashSet::new();
        for c in sorted {
            let n = taken.entry(c.throughput).or_default();
            if *n < TOP_PER_METHOD && seen.insert(c.genes().cache_key(c.throughput)) {
                *n += 1;
                pool.push(c);
            }
        }
    }
    if pool.is_empty() {
        return Err(Error::NoCandidates);
    }
    let fitness = pool
        .par_iter()
        .map(|c| evaluator.fitness(&c.genes(), c.throughput))
        .collect::<Result<Vec<_>>>()?;
    for (c, f) in pool.iter_mut().zip(fitness) {
        c.fitness = f;
    }
    pool.sort_by(rank_order);
    Ok(Selection {
        best: pool[0],
        pooled: pool,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoChoice {
    Ga,
    Pso,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub throughput: usize,
    pub best_history: Vec<f64>,
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub runs: Vec<RunSummary>,
    /// The best [`REPORT_ROWS`] pooled candidates after re-evaluation.
    pub ranking: Vec<TuningCandidate>,
    pub best: TuningCandidate,
    pub pipeline_evaluations: usize,
}

/// Runs the chosen optimizers once per throughput in the bank (restricted to
/// [`THROUGHPUTS`]) and selects the best pooled candidate.
pub fn tune(
    bank: &ModelBank,
    validation: &[SynthRecord],
    choice: AlgoChoice,
    ga_cfg: &GaConfig,
    pso_cfg: &PsoConfig,
) -> Result<TuningReport> {
    let evaluator = FitnessEvaluator::new(bank, validation)?;
    let throughputs: Vec<usize> = bank.keys().copied().filter(|t| THROUGHPUTS.contains(t)).collect();
    if throughputs.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut runs = Vec::new();
    let mut ga_pool = Vec::new();
    let mut pso_pool = Vec::new();
    for &t in &throughputs {
        if matches!(choice, AlgoChoice::Ga | AlgoChoice::Both) {
            let out = ga_optimize(ga_cfg, t, &evaluator)?;
            runs.push(RunSummary {
                algorithm: Algorithm::Genetic,
                throughput: t,
                best_fitness: out.ranked[0].fitness,
                best_history: out.best_history,
            });
            ga_pool.extend(out.ranked);
        }
        if matches!(choice, AlgoChoice::Pso | AlgoChoice::Both) {
            let out = pso_optimize(pso_cfg, t, &evaluator)?;
            runs.push(RunSummary {
                algorithm: Algorithm::Pso,
                throughput: t,
                best_fitness: out.ranked[0].fitness,
                best_history: out.gbest_history,
            });
            pso_pool.extend(out.ranked);
        }
    }
    let selection = select_best(&ga_pool, &pso_pool, &evaluator)?;
    let mut ranking = selection.pooled;
    ranking.truncate(REPORT_ROWS);
    Ok(TuningReport {
        runs,
        ranking,
        best: selection.best,
        pipeline_evaluations: evaluator.pipeline_evaluations(),
    })
}
