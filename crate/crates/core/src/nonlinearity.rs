//! Semilinear terms `f(y)` with analytic first and second derivatives.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearityKind {
    /// `f ≡ 0`, the linear baseline.
    Zero,
    /// `f(y) = sin(y)`.
    Sin,
    /// `f(y) = -y + y³`.
    Cubic,
    /// `f(y) = exp(y)`.
    Exp,
}

impl NonlinearityKind {
    pub const ALL: [NonlinearityKind; 4] = [Self::Zero, Self::Sin, Self::Cubic, Self::Exp];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Sin => "sin",
            Self::Cubic => "cubic",
            Self::Exp => "exp",
        }
    }
}

impl fmt::Display for NonlinearityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NonlinearityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownNonlinearity(s.to_owned()))
    }
}

/// Evaluator for `f`, `f'`, `f''`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
}

impl Nonlinearity {
    /// Non-monotone kinds are accepted but logged, since the usual monotonicity
    /// assumption `f'(y) >= 0` does not hold for them.
    pub fn new(kind: NonlinearityKind) -> Self {
        let nl = Self { kind };
        if !nl.is_monotone() {
            log::warn!(
                target: "bangbang::nonlinearity",
                "nonlinearity `{kind}` is not monotone (min f' = {}); linearized systems may be indefinite",
                nl.min_derivative().unwrap_or(f64::NEG_INFINITY)
            );
        }
        nl
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.kind == NonlinearityKind::Zero
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Sin => y.sin(),
            NonlinearityKind::Cubic => -y + y * y * y,
            NonlinearityKind::Exp => y.exp(),
        }
    }

    #[inline]
    pub fn deriv(&self, y: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Sin => y.cos(),
            NonlinearityKind::Cubic => -1.0 + 3.0 * y * y,
            NonlinearityKind::Exp => y.exp(),
        }
    }

    #[inline]
    pub fn deriv2(&self, y: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Sin => -y.sin(),
            NonlinearityKind::Cubic => 6.0 * y,
            NonlinearityKind::Exp => y.exp(),
        }
    }

    /// Whether `f'(y) >= 0` for every real `y`.
    pub fn is_monotone(&self) -> bool {
        matches!(self.kind, NonlinearityKind::Zero | NonlinearityKind::Exp)
    }

    /// Global infimum of `f'`, when finite.
    pub fn min_derivative(&self) -> Option<f64> {
        match self.kind {
            NonlinearityKind::Zero | NonlinearityKind::Exp => Some(0.0),
            NonlinearityKind::Sin | NonlinearityKind::Cubic => Some(-1.0),
        }
    }
}

pub fn make_nonlinearity(kind: &str) -> Result<Nonlinearity, Error> {
    kind.parse().map(Nonlinearity::new)
}
