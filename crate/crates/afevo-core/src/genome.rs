//! Piecewise individuals and the genetic operators that breed them.
//!
//! A genome carries two genes: the left expression applies for `x < 0`
//! and the right one for `x ≥ 0` (zero belongs to the right piece). Its
//! textual form is `left|right` in the expression grammar, e.g.
//! `Sin|(+:Swish:Swish)`.
//!
//! Breeding uses three operators:
//! * inheritance — offspring take whole genes from opposite parents at
//!   the fixed left/right cutoff;
//! * hybrid — each offspring gene is a randomly drawn binary operator
//!   applied to the parents' corresponding genes;
//! * mutation — one randomly chosen gene is replaced by a random
//!   primitive leaf.
//!
//! All randomness flows through an explicit [`RngStream`], so replaying a
//! seed reproduces offspring byte-for-byte.

use crate::expr::{self, DualValue, Expr, SyntaxError, ALL_OPERATORS};
use crate::primitives::ALL_PRIMITIVES;
use crate::rng::RngStream;

/// A piecewise activation function: one gene per half-axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    /// Gene applied for `x < 0`.
    pub left: Expr,
    /// Gene applied for `x ≥ 0`.
    pub right: Expr,
}

impl Genome {
    pub fn new(left: Expr, right: Expr) -> Genome {
        Genome { left, right }
    }

    /// Whole-line genome: the same expression on both pieces.
    pub fn uniform(e: Expr) -> Genome {
        Genome {
            left: e.clone(),
            right: e,
        }
    }

    /// Evaluate value and derivative at `x`, dispatching on the sign.
    pub fn eval_dual(&self, x: f64) -> DualValue {
        if x < 0.0 {
            self.left.eval_dual(x)
        } else {
            self.right.eval_dual(x)
        }
    }

    /// Canonical textual form `left|right`.
    pub fn key(&self) -> String {
        format!("{}|{}", self.left, self.right)
    }

    pub fn node_count(&self) -> usize {
        self.left.node_count() + self.right.node_count()
    }

    pub fn max_gene_depth(&self) -> usize {
        self.left.depth().max(self.right.depth())
    }
}

impl std::fmt::Display for Genome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}|{}", self.left, self.right)
    }
}

/// Parse the `left|right` textual form.
pub fn parse_genome(text: &str) -> Result<Genome, SyntaxError> {
    match text.find('|') {
        Some(cut) => {
            let left = expr::parse(&text[..cut])?;
            let right = expr::parse(&text[cut + 1..]).map_err(|e| SyntaxError {
                position: e.position + cut + 1,
                reason: e.reason,
            })?;
            Ok(Genome { left, right })
        }
        None => Err(SyntaxError {
            position: text.len(),
            reason: "expected 'left|right' genome, found no '|'".into(),
        }),
    }
}

/// Inheritance crossover: offspring take whole genes from opposite
/// parents at the fixed cutoff. Consumes no randomness.
pub fn inheritance(mom: &Genome, dad: &Genome) -> (Genome, Genome) {
    (
        Genome::new(mom.left.clone(), dad.right.clone()),
        Genome::new(dad.left.clone(), mom.right.clone()),
    )
}

/// Hybrid crossover: draw two operators (one per gene position) and
/// combine the parents' corresponding genes; the second offspring uses
/// the same operators with the operand order swapped.
///
/// If any offspring gene would exceed `max_depth`, the whole pair falls
/// back to [`inheritance`]. The operator draws are consumed either way.
pub fn hybrid(mom: &Genome, dad: &Genome, max_depth: usize, rng: &mut RngStream) -> (Genome, Genome) {
    let op1 = ALL_OPERATORS[rng.next_index(ALL_OPERATORS.len())];
    let op2 = ALL_OPERATORS[rng.next_index(ALL_OPERATORS.len())];

    let left_depth = 1 + mom.left.depth().max(dad.left.depth());
    let right_depth = 1 + mom.right.depth().max(dad.right.depth());
    if left_depth > max_depth || right_depth > max_depth {
        return inheritance(mom, dad);
    }

    let first = Genome::new(
        Expr::node(op1, mom.left.clone(), dad.left.clone()),
        Expr::node(op2, mom.right.clone(), dad.right.clone()),
    );
    let second = Genome::new(
        Expr::node(op1, dad.left.clone(), mom.left.clone()),
        Expr::node(op2, dad.right.clone(), mom.right.clone()),
    );
    (first, second)
}

/// Crossover dispatcher: a single coin toss picks hybrid (probability
/// `p_hybrid`) or inheritance.
pub fn crossover(
    mom: &Genome,
    dad: &Genome,
    p_hybrid: f64,
    max_depth: usize,
    rng: &mut RngStream,
) -> (Genome, Genome) {
    if rng.next_f64() < p_hybrid {
        hybrid(mom, dad, max_depth, rng)
    } else {
        inheritance(mom, dad)
    }
}

/// Mutation: with probability `p_mutate`, replace one uniformly chosen
/// gene by a uniformly chosen primitive leaf. The gate draw is always
/// consumed; the gene and primitive draws only on a hit.
pub fn mutate(g: &Genome, p_mutate: f64, rng: &mut RngStream) -> Genome {
    if rng.next_f64() >= p_mutate {
        return g.clone();
    }
    let replace_left = rng.next_index(2) == 0;
    let leaf = Expr::leaf(ALL_PRIMITIVES[rng.next_index(ALL_PRIMITIVES.len())]);
    if replace_left {
        Genome::new(leaf, g.right.clone())
    } else {
        Genome::new(g.left.clone(), leaf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::Primitive;

    fn g(text: &str) -> Genome {
        parse_genome(text).unwrap()
    }

    #[test]
    fn textual_round_trip() {
        for t in [
            "Swish|Swish",
            "Sin|(+:Swish:Swish)",
            "(max:(+:(min:ELU:ReLU):Swish):(*:ELU:Linear))|ELiSH",
        ] {
            assert_eq!(g(t).to_string(), t);
        }
        assert!(parse_genome("Swish").is_err());
        assert!(parse_genome("Swish|").is_err());
        assert!(parse_genome("|Swish").is_err());
        // error position is relative to the whole genome string
        let err = parse_genome("Swish|(min:ELU)").unwrap_err();
        assert_eq!(err.position, 14);
    }

    #[test]
    fn piece_dispatch() {
        let genome = g("Sin|Swish");
        assert_eq!(genome.eval_dual(2.0), Expr::leaf(Primitive::Swish).eval_dual(2.0));
        assert_eq!(genome.eval_dual(-2.0), Expr::leaf(Primitive::Sin).eval_dual(-2.0));
        // the boundary belongs to the right piece
        assert_eq!(genome.eval_dual(0.0), Expr::leaf(Primitive::Swish).eval_dual(0.0));
    }

    #[test]
    fn double_swish_value() {
        // Sin on the left, Swish+Swish on the right: at x=1 the value is
        // 2·σ(1) = 1.4621171572600098 by direct composition.
        let genome = g("Sin|(+:Swish:Swish)");
        let expected = 2.0 / (1.0 + (-1.0f64).exp());
        assert!((expected - 1.4621171572600098).abs() < 1e-15);
        assert!((genome.eval_dual(1.0).value - expected).abs() < 1e-12);
    }

    #[test]
    fn inheritance_swaps_genes() {
        let mom = g("Sin|Sigmoid");
        let dad = g("ReLU|ELU");
        let (c1, c2) = inheritance(&mom, &dad);
        assert_eq!(c1.to_string(), "Sin|ELU");
        assert_eq!(c2.to_string(), "ReLU|Sigmoid");

        // self-cross is the identity
        let (s1, s2) = inheritance(&mom, &mom);
        assert_eq!(s1, mom);
        assert_eq!(s2, mom);
    }

    #[test]
    fn inheritance_preserves_gene_multiset() {
        let mut rng = RngStream::new(99);
        for _ in 0..200 {
            let mom = random_genome(&mut rng);
            let dad = random_genome(&mut rng);
            let (c1, c2) = inheritance(&mom, &dad);
            let mut parents = vec![
                mom.left.to_string(),
                mom.right.to_string(),
                dad.left.to_string(),
                dad.right.to_string(),
            ];
            let mut children = vec![
                c1.left.to_string(),
                c1.right.to_string(),
                c2.left.to_string(),
                c2.right.to_string(),
            ];
            parents.sort();
            children.sort();
            assert_eq!(parents, children);
        }
    }

    #[test]
    fn hybrid_shares_ops_and_swaps_operands() {
        let mom = g("Sin|Sigmoid");
        let dad = g("ReLU|ELU");
        let mut rng = RngStream::new(4);
        let (c1, c2) = hybrid(&mom, &dad, 8, &mut rng);
        let (op1, op2) = match (&c1.left, &c1.right) {
            (Expr::Node { op: a, .. }, Expr::Node { op: b, .. }) => (*a, *b),
            _ => panic!("hybrid offspring genes must be operator nodes"),
        };
        assert_eq!(c1.left, Expr::node(op1, mom.left.clone(), dad.left.clone()));
        assert_eq!(c1.right, Expr::node(op2, mom.right.clone(), dad.right.clone()));
        assert_eq!(c2.left, Expr::node(op1, dad.left.clone(), mom.left.clone()));
        assert_eq!(c2.right, Expr::node(op2, dad.right.clone(), mom.right.clone()));

        // depth grows by exactly one over the deeper parent gene
        assert_eq!(c1.left.depth(), 1 + mom.left.depth().max(dad.left.depth()));
    }

    #[test]
    fn hybrid_respects_depth_cap() {
        let mut rng = RngStream::new(7);
        let mut genome = g("ReLU|ReLU");
        // grow until the cap binds, then confirm the fallback
        for _ in 0..40 {
            let (c1, _) = hybrid(&genome.clone(), &genome.clone(), 8, &mut rng);
            assert!(c1.max_gene_depth() <= 8);
            genome = c1;
        }
        assert_eq!(genome.max_gene_depth(), 8);
        // a capped pair falls back to inheritance: genes unchanged
        let (c1, c2) = hybrid(&genome.clone(), &genome.clone(), 8, &mut rng);
        assert_eq!(c1, genome);
        assert_eq!(c2, genome);
    }

    #[test]
    fn crossover_degenerate_coins() {
        let mom = g("Sin|Sigmoid");
        let dad = g("ReLU|ELU");
        let mut rng = RngStream::new(11);
        for _ in 0..50 {
            let (c1, _) = crossover(&mom, &dad, 0.0, 8, &mut rng);
            assert_eq!(c1.to_string(), "Sin|ELU", "p_hybrid=0 is always inheritance");
        }
        for _ in 0..50 {
            let (c1, _) = crossover(&mom, &dad, 1.0, 8, &mut rng);
            assert!(matches!(c1.left, Expr::Node { .. }), "p_hybrid=1 is always hybrid");
        }
    }

    #[test]
    fn crossover_coin_is_fair() {
        // Binomial oracle: 10^4 tosses at p=0.5 stay within 3σ of the
        // mean, i.e. the hybrid fraction lies in [0.48, 0.52] for a fair
        // coin (σ = 0.005).
        let mom = g("Sin|Sigmoid");
        let dad = g("ReLU|ELU");
        let mut rng = RngStream::new(2718);
        let n = 10_000;
        let hybrids = (0..n)
            .filter(|_| {
                let (c1, _) = crossover(&mom, &dad, 0.5, 8, &mut rng);
                matches!(c1.left, Expr::Node { .. })
            })
            .count();
        let fraction = hybrids as f64 / n as f64;
        assert!((0.48..=0.52).contains(&fraction), "hybrid fraction {fraction}");
    }

    #[test]
    fn mutate_replaces_one_gene_with_a_leaf() {
        // both genes multi-node, so a leaf replacement is always visible
        let genome = g("(max:(+:(min:ELU:ReLU):Swish):(*:ELU:Linear))|(+:Swish:Swish)");
        let mut rng = RngStream::new(5);
        let mut left_hits = 0;
        for _ in 0..100 {
            let mutated = mutate(&genome, 1.0, &mut rng);
            let left_changed = mutated.left != genome.left;
            let right_changed = mutated.right != genome.right;
            assert!(left_changed ^ right_changed, "exactly one gene changes");
            let replaced = if left_changed { &mutated.left } else { &mutated.right };
            assert_eq!(replaced.node_count(), 1, "replacement is a single leaf");
            left_hits += left_changed as usize;
        }
        assert!((20..=80).contains(&left_hits), "gene choice should be roughly uniform");
    }

    #[test]
    fn mutate_zero_probability_is_identity() {
        let genome = g("Sin|(+:Swish:Swish)");
        let mut rng = RngStream::new(9);
        for _ in 0..20 {
            assert_eq!(mutate(&genome, 0.0, &mut rng), genome);
        }
    }

    #[test]
    fn operators_replay_deterministically() {
        let mom = g("Sin|Sigmoid");
        let dad = g("(min:ELU:ReLU)|ELU");
        let transcript = |seed: u64| {
            let mut rng = RngStream::new(seed);
            let mut out = String::new();
            for _ in 0..50 {
                let (c1, c2) = crossover(&mom, &dad, 0.5, 8, &mut rng);
                let m = mutate(&c1, 1.0, &mut rng);
                out.push_str(&format!("{c1}/{c2}/{m};"));
            }
            out
        };
        assert_eq!(transcript(123), transcript(123));
        assert_ne!(transcript(123), transcript(124));
    }

    fn random_genome(rng: &mut RngStream) -> Genome {
        let mut leaf = || Expr::leaf(ALL_PRIMITIVES[rng.next_index(ALL_PRIMITIVES.len())]);
        let left = leaf();
        let right = leaf();
        Genome::new(left, right)
    }
}
