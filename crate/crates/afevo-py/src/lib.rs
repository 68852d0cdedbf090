//! Python bindings.
//!
//! Exposes genomes, the genetic operators, and the two workhorse entry
//! points (`train`, `evolve`) as an in-process extension module. Complex
//! results come back as JSON/JSON-lines strings so Python can `json.loads`
//! them without a bespoke object layer.
//!
//! Build with `cargo build -p afevo-py --release`, then import the
//! produced `libafevo.so` as `afevo` (see `python/smoke_test.py`).

use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use afevo_core::expr::ALL_OPERATORS;
use afevo_core::primitives::ALL_PRIMITIVES;
use afevo_core::{
    genome, load_csv, make_synthetic, parse_genome, Dataset, Engine, GaConfig, MlpConfig,
    RngStream, SyntheticKind, TrainerEvaluator,
};

/// A piecewise activation function: `left|right` expression pair.
#[pyclass(frozen)]
struct Genome {
    inner: afevo_core::Genome,
}

#[pymethods]
impl Genome {
    /// Parse the textual form, e.g. "Sin|(+:Swish:Swish)".
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inner = parse_genome(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Genome { inner })
    }

    /// Activation value at x (left gene for x < 0, right otherwise).
    fn value(&self, x: f64) -> f64 {
        self.inner.eval_dual(x).value
    }

    /// Exact derivative at x.
    fn derivative(&self, x: f64) -> f64 {
        self.inner.eval_dual(x).deriv
    }

    /// (value, derivative) pair at x.
    fn value_dual(&self, x: f64) -> (f64, f64) {
        let d = self.inner.eval_dual(x);
        (d.value, d.deriv)
    }

    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn depth(&self) -> usize {
        self.inner.max_gene_depth()
    }

    fn left(&self) -> String {
        self.inner.left.to_string()
    }

    fn right(&self) -> String {
        self.inner.right.to_string()
    }

    fn __str__(&self) -> String {
        self.inner.key()
    }

    fn __repr__(&self) -> String {
        format!("Genome(\"{}\")", self.inner.key())
    }
}

/// Canonical names of the eleven candidate primitives.
#[pyfunction]
fn primitives() -> Vec<&'static str> {
    ALL_PRIMITIVES.iter().map(|p| p.name()).collect()
}

/// Tokens of the eight expression operators.
#[pyfunction]
fn operators() -> Vec<&'static str> {
    ALL_OPERATORS.iter().map(|op| op.token()).collect()
}

/// Coin-dispatched crossover (hybrid with probability p_hybrid, else
/// inheritance). Deterministic in the seed.
#[pyfunction]
#[pyo3(signature = (mom, dad, seed, p_hybrid=0.5, max_depth=8))]
fn crossover(
    mom: &Genome,
    dad: &Genome,
    seed: u64,
    p_hybrid: f64,
    max_depth: usize,
) -> (Genome, Genome) {
    let mut rng = RngStream::new(seed);
    let (a, b) = genome::crossover(&mom.inner, &dad.inner, p_hybrid, max_depth, &mut rng);
    (Genome { inner: a }, Genome { inner: b })
}

/// Replace one random gene with a random primitive leaf (probability
/// p_mutate). Deterministic in the seed.
#[pyfunction]
#[pyo3(signature = (g, seed, p_mutate=1.0))]
fn mutate(g: &Genome, seed: u64, p_mutate: f64) -> Genome {
    let mut rng = RngStream::new(seed);
    Genome {
        inner: genome::mutate(&g.inner, p_mutate, &mut rng),
    }
}

fn build_dataset(
    dataset: &str,
    n: usize,
    noise: f64,
    dataset_seed: u64,
    run_seed: u64,
) -> PyResult<Dataset> {
    if let Some(path) = dataset.strip_prefix("csv:") {
        return load_csv(Path::new(path), run_seed)
            .map_err(|e| PyValueError::new_err(e.to_string()));
    }
    let kind: SyntheticKind = dataset.parse().map_err(|()| {
        PyValueError::new_err(format!(
            "unknown dataset '{dataset}'; expected two-moons, circles, spirals, or csv:PATH"
        ))
    })?;
    if n < 8 {
        return Err(PyValueError::new_err("dataset size must be at least 8"));
    }
    Ok(make_synthetic(kind, n, noise, dataset_seed))
}

fn mlp_config(hidden: Vec<usize>, epochs: usize, lr: f64, batch: usize, init_seed: u64) -> PyResult<MlpConfig> {
    let cfg = MlpConfig {
        hidden_layers: hidden,
        epochs,
        learning_rate: lr,
        batch_size: batch,
        init_seed,
    };
    cfg.validate().map_err(PyValueError::new_err)?;
    Ok(cfg)
}

/// Train one genome and return its fitness report as a JSON string.
#[pyfunction]
#[pyo3(signature = (genome_text, dataset="two-moons", n=400, noise=0.2, dataset_seed=7,
                    epochs=200, lr=0.05, hidden=vec![16, 16], batch=32, init_seed=42, seed=1))]
#[allow(clippy::too_many_arguments)]
fn train(
    genome_text: &str,
    dataset: &str,
    n: usize,
    noise: f64,
    dataset_seed: u64,
    epochs: usize,
    lr: f64,
    hidden: Vec<usize>,
    batch: usize,
    init_seed: u64,
    seed: u64,
) -> PyResult<String> {
    let g = parse_genome(genome_text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let data = build_dataset(dataset, n, noise, dataset_seed, seed)?;
    let cfg = mlp_config(hidden, epochs, lr, batch, init_seed)?;
    let report = afevo_core::evaluate_genome(&g, &data, &cfg, seed);
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

/// Run the genetic algorithm and return the run log as JSON lines (one
/// record per generation plus a summary record).
#[pyfunction]
#[pyo3(signature = (pop=40, gens=8, seed=1, elite=0.15, p_hybrid=0.5, p_select_coin=0.5,
                    p_mutate=1.0, max_depth=8, dataset="two-moons", n=400, noise=0.2,
                    dataset_seed=7, epochs=200, lr=0.05, hidden=vec![16, 16], batch=32,
                    init_seed=42, workers=1))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    pop: usize,
    gens: usize,
    seed: u64,
    elite: f64,
    p_hybrid: f64,
    p_select_coin: f64,
    p_mutate: f64,
    max_depth: usize,
    dataset: &str,
    n: usize,
    noise: f64,
    dataset_seed: u64,
    epochs: usize,
    lr: f64,
    hidden: Vec<usize>,
    batch: usize,
    init_seed: u64,
    workers: usize,
) -> PyResult<String> {
    let data = build_dataset(dataset, n, noise, dataset_seed, seed)?;
    let evaluator = TrainerEvaluator {
        data: &data,
        cfg: mlp_config(hidden, epochs, lr, batch, init_seed)?,
    };
    let ga = GaConfig {
        population_size: pop,
        generations: gens,
        elite_fraction: elite,
        p_hybrid,
        p_select_coin,
        p_mutate,
        max_depth,
        seed,
    };
    let mut engine =
        Engine::new(ga, &evaluator, workers).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let log = engine
        .run()
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(log.to_jsonl())
}

#[pymodule]
fn afevo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Genome>()?;
    m.add_function(wrap_pyfunction!(primitives, m)?)?;
    m.add_function(wrap_pyfunction!(operators, m)?)?;
    m.add_function(wrap_pyfunction!(crossover, m)?)?;
    m.add_function(wrap_pyfunction!(mutate, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    Ok(())
}
