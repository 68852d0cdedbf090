//! The genetic-algorithm main loop.
//!
//! One generation is select → breed → evaluate → update:
//! * selection keeps the top `elite_fraction` of the ranked population and
//!   adds, per remaining member and coin toss, a force-mutated copy;
//! * breeding draws random parent pairs (no self-pairing) and applies the
//!   crossover dispatcher plus mutation to each offspring until the
//!   population is refilled;
//! * the next population is parents ∪ children, ranked and trimmed back to
//!   the configured size.
//!
//! Fitness is cached by canonical genome serialization. Each genome trains
//! with a seed derived from (run seed, genome key), never from a shared
//! stream, so evaluations of distinct genomes may run on any number of
//! worker threads without changing a single byte of the run log. All
//! breeding randomness flows through one sequential [`RngStream`].

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::genome::{crossover, mutate, Genome};
use crate::primitives::ALL_PRIMITIVES;
use crate::rng::{hash64, RngStream};
use crate::trainer::FitnessReport;

/// Scores one genome. `train_seed` is the derived per-genome seed.
pub trait Evaluator: Sync {
    fn evaluate(&self, genome: &Genome, train_seed: u64) -> FitnessReport;
}

/// GA hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub elite_fraction: f64,
    pub p_hybrid: f64,
    pub p_select_coin: f64,
    pub p_mutate: f64,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 40,
            generations: 8,
            elite_fraction: 0.15,
            p_hybrid: 0.5,
            p_select_coin: 0.5,
            p_mutate: 1.0,
            max_depth: 8,
            seed: 1,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.population_size < 4 || !self.population_size.is_multiple_of(2) {
            return Err("population size must be even and at least 4".into());
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err("elite fraction must lie strictly between 0 and 1".into());
        }
        for (name, p) in [
            ("p_hybrid", self.p_hybrid),
            ("p_select_coin", self.p_select_coin),
            ("p_mutate", self.p_mutate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must lie in [0, 1]"));
            }
        }
        if self.max_depth == 0 {
            return Err("max depth must be at least 1".into());
        }
        Ok(())
    }

    fn elite_count(&self) -> usize {
        let count = (self.elite_fraction * self.population_size as f64).ceil() as usize;
        count.clamp(1, self.population_size)
    }
}

/// A genome with its fitness record.
#[derive(Debug, Clone)]
pub struct EvaluatedGenome {
    pub genome: Genome,
    pub fitness: f64,
    pub report: FitnessReport,
    pub key: String,
}

/// Ranked population. Members are sorted by fitness (descending), then
/// total node count (simpler first), then key.
#[derive(Debug, Clone)]
pub struct Population {
    pub members: Vec<EvaluatedGenome>,
    pub generation: usize,
}

impl Population {
    pub fn best(&self) -> &EvaluatedGenome {
        &self.members[0]
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("breeding needs at least 2 parents, selection produced {0}")]
    InsufficientParents(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Per-generation summary plus the full ranked population listing.
#[derive(Debug, Clone, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_genome: String,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub median_fitness: f64,
    pub population: Vec<MemberRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberRecord {
    pub genome: String,
    pub fitness: f64,
    pub valid: bool,
}

/// Full transcript of a run: one record per generation plus counters.
#[derive(Debug, Clone, Serialize)]
pub struct RunLog {
    pub generations: Vec<GenerationRecord>,
    pub total_evaluations: u64,
    pub cache_hits: u64,
}

impl RunLog {
    /// JSON-lines form: one generation record per line, then a summary
    /// record with the evaluation counters.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.generations {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
        out.push_str(&format!(
            "{{\"total_evaluations\":{},\"cache_hits\":{}}}\n",
            self.total_evaluations, self.cache_hits
        ));
        out
    }

    pub fn best_genome(&self) -> &str {
        &self
            .generations
            .last()
            .expect("a run log has at least the initial generation")
            .best_genome
    }
}

/// Selection: the top-ranked elites, plus a force-mutated copy of each
/// remaining member whose coin lands heads. Order is deterministic:
/// elites in rank order, then the mutated copies in rank order.
pub fn select(pop: &Population, cfg: &GaConfig, rng: &mut RngStream) -> Vec<Genome> {
    let elite_count = cfg.elite_count().min(pop.members.len());
    let mut parents: Vec<Genome> = pop.members[..elite_count]
        .iter()
        .map(|m| m.genome.clone())
        .collect();
    for member in &pop.members[elite_count..] {
        if rng.next_f64() < cfg.p_select_coin {
            parents.push(mutate(&member.genome, 1.0, rng));
        }
    }
    parents
}

/// Breeding: random parent pairs (mom ≠ dad), crossover, then mutation of
/// both offsprings, until `population_size − |parents|` children exist.
/// With an odd target the final pair's second offspring is dropped.
pub fn breed(
    parents: &[Genome],
    cfg: &GaConfig,
    rng: &mut RngStream,
) -> Result<Vec<Genome>, EngineError> {
    let target = cfg.population_size.saturating_sub(parents.len());
    if target == 0 {
        return Ok(Vec::new());
    }
    if parents.len() < 2 {
        return Err(EngineError::InsufficientParents(parents.len()));
    }
    let mut children = Vec::with_capacity(target);
    while children.len() < target {
        let mom = rng.next_index(parents.len());
        let mut dad = rng.next_index(parents.len() - 1);
        if dad >= mom {
            dad += 1;
        }
        let (first, second) = crossover(&parents[mom], &parents[dad], cfg.p_hybrid, cfg.max_depth, rng);
        let first = mutate(&first, cfg.p_mutate, rng);
        let second = mutate(&second, cfg.p_mutate, rng);
        children.push(first);
        if children.len() < target {
            children.push(second);
        }
    }
    Ok(children)
}

/// Drives a run: owns the breeding stream, the fitness cache, and the
/// evaluation counters.
pub struct Engine<'a, E: Evaluator> {
    cfg: GaConfig,
    evaluator: &'a E,
    pool: Option<rayon::ThreadPool>,
    rng: RngStream,
    cache: HashMap<String, FitnessReport>,
    total_evaluations: u64,
    cache_hits: u64,
}

impl<'a, E: Evaluator> Engine<'a, E> {
    /// `workers` is the evaluation thread count; 1 evaluates inline and 0
    /// uses one thread per core. The run log is identical for any value.
    pub fn new(cfg: GaConfig, evaluator: &'a E, workers: usize) -> Result<Self, EngineError> {
        cfg.validate().map_err(EngineError::InvalidConfig)?;
        let pool = if workers == 1 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .expect("thread pool construction"),
            )
        };
        let rng = RngStream::new(cfg.seed);
        Ok(Engine {
            cfg,
            evaluator,
            pool,
            rng,
            cache: HashMap::new(),
            total_evaluations: 0,
            cache_hits: 0,
        })
    }

    pub fn config(&self) -> &GaConfig {
        &self.cfg
    }

    /// Evaluate a genome list into a ranked population. Distinct uncached
    /// genomes are trained (possibly in parallel); duplicates and cached
    /// keys count as cache hits.
    fn evaluate_all(&mut self, genomes: Vec<Genome>, generation: usize) -> Population {
        let keys: Vec<String> = genomes.iter().map(Genome::key).collect();

        let mut pending: Vec<(String, Genome)> = Vec::new();
        for (genome, key) in genomes.iter().zip(&keys) {
            if !self.cache.contains_key(key) && !pending.iter().any(|(k, _)| k == key) {
                pending.push((key.clone(), genome.clone()));
            }
        }
        self.total_evaluations += pending.len() as u64;
        self.cache_hits += (genomes.len() - pending.len()) as u64;

        let run_seed = self.cfg.seed;
        let evaluator = self.evaluator;
        let evaluate = |(key, genome): &(String, Genome)| {
            evaluator.evaluate(genome, hash64(run_seed, key))
        };
        let reports: Vec<FitnessReport> = match &self.pool {
            None => pending.iter().map(evaluate).collect(),
            Some(pool) => pool.install(|| pending.par_iter().map(evaluate).collect()),
        };
        for ((key, _), report) in pending.into_iter().zip(reports) {
            self.cache.insert(key, report);
        }

        let mut members: Vec<EvaluatedGenome> = genomes
            .into_iter()
            .zip(keys)
            .map(|(genome, key)| {
                let report = self.cache[&key].clone();
                let fitness = if report.valid { report.test_accuracy } else { 0.0 };
                EvaluatedGenome {
                    genome,
                    fitness,
                    report,
                    key,
                }
            })
            .collect();
        members.sort_by(|a, b| {
            b.fitness
                .total_cmp(&a.fitness)
                .then_with(|| a.genome.node_count().cmp(&b.genome.node_count()))
                .then_with(|| a.key.cmp(&b.key))
        });
        Population {
            members,
            generation,
        }
    }

    /// Initial population: uniform draws (with replacement) from the
    /// eleven whole-line candidates, each rendered as a leaf pair.
    pub fn initialize(&mut self) -> Population {
        self.initialize_seeded(&[])
    }

    /// Initial population with the first slots pinned to `seeds`; the
    /// remainder is drawn randomly. Seeded slots consume no draws.
    pub fn initialize_seeded(&mut self, seeds: &[Genome]) -> Population {
        let mut genomes: Vec<Genome> = seeds
            .iter()
            .take(self.cfg.population_size)
            .cloned()
            .collect();
        while genomes.len() < self.cfg.population_size {
            let p = ALL_PRIMITIVES[self.rng.next_index(ALL_PRIMITIVES.len())];
            genomes.push(Genome::uniform(crate::expr::Expr::leaf(p)));
        }
        self.evaluate_all(genomes, 0)
    }

    /// Advance one generation: parents ∪ children, re-ranked and trimmed
    /// to the configured size (lowest-ranked members trim first, so the
    /// best never drops).
    pub fn step(&mut self, pop: &Population) -> Result<Population, EngineError> {
        let parents = select(pop, &self.cfg, &mut self.rng);
        let children = breed(&parents, &self.cfg, &mut self.rng)?;
        let mut next = parents;
        next.extend(children);
        let mut population = self.evaluate_all(next, pop.generation + 1);
        population.members.truncate(self.cfg.population_size);
        debug_assert_eq!(population.members.len(), self.cfg.population_size);
        Ok(population)
    }

    pub fn run(&mut self) -> Result<RunLog, EngineError> {
        self.run_seeded(&[])
    }

    /// Full run with optional pinned initial genomes.
    pub fn run_seeded(&mut self, seeds: &[Genome]) -> Result<RunLog, EngineError> {
        let mut pop = self.initialize_seeded(seeds);
        let mut generations = vec![record(&pop)];
        for _ in 0..self.cfg.generations {
            pop = self.step(&pop)?;
            generations.push(record(&pop));
        }
        Ok(RunLog {
            generations,
            total_evaluations: self.total_evaluations,
            cache_hits: self.cache_hits,
        })
    }
}

fn record(pop: &Population) -> GenerationRecord {
    let n = pop.members.len();
    let mean = pop.members.iter().map(|m| m.fitness).sum::<f64>() / n as f64;
    // members are sorted by fitness, so the middle elements are the median
    let median = if n % 2 == 1 {
        pop.members[n / 2].fitness
    } else {
        (pop.members[n / 2 - 1].fitness + pop.members[n / 2].fitness) / 2.0
    };
    GenerationRecord {
        generation: pop.generation,
        best_genome: pop.best().key.clone(),
        best_fitness: pop.best().fitness,
        mean_fitness: mean,
        median_fitness: median,
        population: pop
            .members
            .iter()
            .map(|m| MemberRecord {
                genome: m.key.clone(),
                fitness: m.fitness,
                valid: m.report.valid,
            })
            .collect(),
    }
}
