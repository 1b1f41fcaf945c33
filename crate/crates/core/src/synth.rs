//! Synthetic distributions with known inequality properties.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::ShareDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Every entity holds the same amount.
    Uniform,
    /// The first entity holds everything.
    Monopoly,
    /// Half the entities share everything equally, the rest hold nothing.
    TwoSocietyA,
    /// One entity holds half, the others split the remaining half equally.
    TwoSocietyB,
    /// Seeded heavy-tailed amounts (Pareto, shape 1.16).
    ParetoLike,
}

/// Pareto shape giving the 80/20 split.
const PARETO_SHAPE: f64 = 1.16;

impl SynthKind {
    pub const ALL: [SynthKind; 5] = [
        SynthKind::Uniform,
        SynthKind::Monopoly,
        SynthKind::TwoSocietyA,
        SynthKind::TwoSocietyB,
        SynthKind::ParetoLike,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SynthKind::Uniform => "uniform",
            SynthKind::Monopoly => "monopoly",
            SynthKind::TwoSocietyA => "two-society-a",
            SynthKind::TwoSocietyB => "two-society-b",
            SynthKind::ParetoLike => "pareto-like",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        SynthKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower)
            .ok_or_else(|| Error::invalid_argument(format!("unknown synthetic kind `{s}`")))
    }
}

/// Generates `n` entities of the given shape. `seed` only affects
/// [`SynthKind::ParetoLike`].
pub fn synth(kind: SynthKind, n: usize, seed: u64) -> Result<ShareDistribution> {
    if n < 2 {
        return Err(Error::invalid_argument(format!(
            "synthetic distributions need at least 2 entities, got {n}"
        )));
    }
    let quantities: Vec<f64> = match kind {
        SynthKind::Uniform => vec![1.0; n],
        SynthKind::Monopoly => (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
        SynthKind::TwoSocietyA => {
            let holders = n / 2;
            (0..n).map(|i| if i < holders { 1.0 } else { 0.0 }).collect()
        }
        SynthKind::TwoSocietyB => (0..n)
            .map(|i| if i == 0 { (n - 1) as f64 } else { 1.0 })
            .collect(),
        SynthKind::ParetoLike => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    (1.0 - u).powf(-1.0 / PARETO_SHAPE)
                })
                .collect()
        }
    };
    ShareDistribution::from_quantities(&quantities)
}
