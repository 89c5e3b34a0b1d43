use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::{PiecewiseLogLinearDensity, PositiveDensity};
use crate::real::Real;

/// Whether a random density ends at a support edge or in an exponential tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Style {
    Bounded,
    Unbounded,
}

/// Random even log-concave density with `pieces` linear pieces of the potential.
///
/// Breakpoint spacings and slope increments are unit-rate exponentials; the
/// first slope is zero (a plateau) with probability ½. A single bounded piece
/// is always flat, giving a uniform density. Deterministic in `seed`.
pub fn random_density<T: Real>(seed: u64, pieces: usize, style: Style) -> PiecewiseLogLinearDensity<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw(&mut rng, pieces.max(1), style)
}

/// Random density with `K ∈ {1..5}` pieces and a random style.
pub fn random_log_concave<T: Real>(seed: u64) -> PiecewiseLogLinearDensity<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = rng.random_range(1..=5);
    let style = if rng.random_bool(0.5) { Style::Bounded } else { Style::Unbounded };
    draw(&mut rng, pieces, style)
}

/// Random nonincreasing log-concave density on `[0, ∞)`.
pub fn random_positive_density<T: Real>(seed: u64, pieces: usize, style: Style) -> PositiveDensity<T> {
    PositiveDensity::from_even(random_density(seed, pieces, style))
}

fn draw<T: Real>(rng: &mut ChaCha8Rng, pieces: usize, style: Style) -> PiecewiseLogLinearDensity<T> {
    let bounded = style == Style::Bounded;
    let mut breakpoints = vec![0.0f64];
    let n_bp = pieces + usize::from(bounded);
    while breakpoints.len() < n_bp {
        let gap: f64 = rng.sample(Exp1);
        breakpoints.push(breakpoints.last().unwrap() + gap.max(1e-3));
    }
    let mut slopes = Vec::with_capacity(pieces);
    let flat_start = if bounded && pieces == 1 { true } else { rng.random_bool(0.5) };
    let mut s = if flat_start { 0.0 } else { rng.sample::<f64, _>(Exp1) };
    slopes.push(s);
    for _ in 1..pieces {
        s += rng.sample::<f64, _>(Exp1).max(1e-3);
        slopes.push(s);
    }
    if !bounded && slopes[pieces - 1] == 0.0 {
        slopes[pieces - 1] = rng.sample::<f64, _>(Exp1).max(1e-3);
    }
    PiecewiseLogLinearDensity::normalized(
        breakpoints.into_iter().map(T::lit).collect(),
        slopes.into_iter().map(T::lit).collect(),
        bounded,
    )
    .expect("generator produces valid potentials")
}
