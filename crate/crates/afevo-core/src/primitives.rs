//! The eleven candidate activation functions.
//!
//! Each primitive is a total function over the reals with a closed-form
//! value and derivative. At a kink (ReLU/ELU/SeLU/ELiSH at 0, HardSigmoid
//! and HardELiSH at ±1) the derivative is the right-hand one, matching the
//! "x ≥ 0 belongs to the right piece" convention used for genomes.
//!
//! ELiSH shares its positive part with Swish bit-for-bit (both call the
//! same `swish` helper), and its negative part is the product of the ELU
//! and Sigmoid curves. HardELiSH replaces the sigmoid factor with the
//! piecewise-linear hard sigmoid.

use std::fmt;
use std::str::FromStr;

/// SeLU scaling constants. Fixed, never configurable.
pub const SELU_ALPHA: f64 = 1.6732632423543772;
/// See [`SELU_ALPHA`].
pub const SELU_LAMBDA: f64 = 1.0507009873554805;

/// One of the eleven named candidate activation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    ELiSH,
    HardELiSH,
    Swish,
    ReLU,
    ELU,
    SeLU,
    Softplus,
    HardSigmoid,
    Sigmoid,
    Sin,
    Linear,
}

/// All primitives, in canonical order. Uniform draws index into this table.
pub const ALL_PRIMITIVES: [Primitive; 11] = [
    Primitive::ELiSH,
    Primitive::HardELiSH,
    Primitive::Swish,
    Primitive::ReLU,
    Primitive::ELU,
    Primitive::SeLU,
    Primitive::Softplus,
    Primitive::HardSigmoid,
    Primitive::Sigmoid,
    Primitive::Sin,
    Primitive::Linear,
];

/// Numerically stable logistic sigmoid.
#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let z = x.exp();
        z / (1.0 + z)
    }
}

#[inline]
fn swish(x: f64) -> f64 {
    x * sigmoid(x)
}

/// d/dx [x·σ(x)] = σ(x) + x·σ(x)·(1 − σ(x)).
#[inline]
fn swish_deriv(x: f64) -> f64 {
    let s = sigmoid(x);
    s + x * s * (1.0 - s)
}

/// Hard sigmoid: max(0, min(1, (x+1)/2)).
#[inline]
fn hard_sigmoid(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        (x + 1.0) / 2.0
    }
}

/// Right-hand derivative of the hard sigmoid.
#[inline]
fn hard_sigmoid_deriv(x: f64) -> f64 {
    if (-1.0..1.0).contains(&x) {
        0.5
    } else {
        0.0
    }
}

/// Softplus ln(1+eˣ) in overflow-free form: max(x,0) + ln1p(e^(−|x|)).
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl Primitive {
    /// Evaluate the primitive at `x`. Finite for every finite `x`.
    #[inline]
    pub fn value(self, x: f64) -> f64 {
        match self {
            Primitive::ELiSH => {
                if x >= 0.0 {
                    swish(x)
                } else {
                    x.exp_m1() * sigmoid(x)
                }
            }
            Primitive::HardELiSH => {
                if x >= 0.0 {
                    x * hard_sigmoid(x)
                } else {
                    x.exp_m1() * hard_sigmoid(x)
                }
            }
            Primitive::Swish => swish(x),
            Primitive::ReLU => {
                if x >= 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Primitive::ELU => {
                if x >= 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
            Primitive::SeLU => {
                if x >= 0.0 {
                    SELU_LAMBDA * x
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
                }
            }
            Primitive::Softplus => softplus(x),
            Primitive::HardSigmoid => hard_sigmoid(x),
            Primitive::Sigmoid => sigmoid(x),
            Primitive::Sin => x.sin(),
            Primitive::Linear => x,
        }
    }

    /// Exact analytic derivative at `x` (right-hand at kinks).
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Primitive::ELiSH => {
                if x >= 0.0 {
                    swish_deriv(x)
                } else {
                    // d/dx [(eˣ−1)·σ(x)] = eˣ·σ + (eˣ−1)·σ·(1−σ)
                    let s = sigmoid(x);
                    x.exp() * s + x.exp_m1() * s * (1.0 - s)
                }
            }
            Primitive::HardELiSH => {
                let hs = hard_sigmoid(x);
                let dhs = hard_sigmoid_deriv(x);
                if x >= 0.0 {
                    hs + x * dhs
                } else {
                    x.exp() * hs + x.exp_m1() * dhs
                }
            }
            Primitive::Swish => swish_deriv(x),
            Primitive::ReLU => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Primitive::ELU => {
                if x >= 0.0 {
                    1.0
                } else {
                    x.exp()
                }
            }
            Primitive::SeLU => {
                if x >= 0.0 {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp()
                }
            }
            Primitive::Softplus => sigmoid(x),
            Primitive::HardSigmoid => hard_sigmoid_deriv(x),
            Primitive::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Primitive::Sin => x.cos(),
            Primitive::Linear => 1.0,
        }
    }

    /// Canonical, case-sensitive name.
    pub fn name(self) -> &'static str {
        match self {
            Primitive::ELiSH => "ELiSH",
            Primitive::HardELiSH => "HardELiSH",
            Primitive::Swish => "Swish",
            Primitive::ReLU => "ReLU",
            Primitive::ELU => "ELU",
            Primitive::SeLU => "SeLU",
            Primitive::Softplus => "Softplus",
            Primitive::HardSigmoid => "HardSigmoid",
            Primitive::Sigmoid => "Sigmoid",
            Primitive::Sin => "Sin",
            Primitive::Linear => "Linear",
        }
    }

    /// Input points where the derivative is discontinuous.
    pub fn kinks(self) -> &'static [f64] {
        match self {
            Primitive::ELiSH | Primitive::ReLU | Primitive::ELU | Primitive::SeLU => &[0.0],
            Primitive::HardELiSH => &[-1.0, 0.0, 1.0],
            Primitive::HardSigmoid => &[-1.0, 1.0],
            _ => &[],
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Primitive {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        ALL_PRIMITIVES
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or(())
    }
}
