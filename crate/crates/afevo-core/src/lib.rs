//! Evolving piecewise activation functions for neural networks.
//!
//! A genetic algorithm searches over activation functions represented as
//! expression trees built from eleven closed-form primitives (including
//! ELiSH and HardELiSH) and eight binary operators. Each individual is a
//! piecewise function — one gene for negative inputs, one for
//! non-negative inputs — and its fitness is the test accuracy of a small
//! MLP classifier trained from scratch with that function as its hidden
//! activation.
//!
//! The crate is organized along those lines:
//! * [`primitives`] — the candidate functions, values and derivatives;
//! * [`expr`] — expression trees, the prefix grammar, and dual-number
//!   evaluation;
//! * [`genome`] — piecewise individuals and the genetic operators;
//! * [`engine`] — the GA loop with fitness caching and deterministic
//!   parallel evaluation;
//! * [`trainer`] — the from-scratch MLP fitness evaluator and datasets;
//! * [`rng`] — the portable seeded random stream everything draws from.

pub mod engine;
pub mod expr;
pub mod genome;
pub mod primitives;
pub mod rng;
pub mod trainer;

pub use engine::{Engine, Evaluator, GaConfig, Population, RunLog};
pub use expr::{parse, DualValue, Expr, Operator, SyntaxError};
pub use genome::{parse_genome, Genome};
pub use primitives::Primitive;
pub use rng::RngStream;
pub use trainer::{
    evaluate_genome, load_csv, make_synthetic, Dataset, FitnessReport, MlpConfig, SyntheticKind,
    TrainerEvaluator,
};
