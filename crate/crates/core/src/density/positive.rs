use serde::{Deserialize, Serialize};

use super::{Density, PiecewiseLogLinearDensity};
use crate::error::Result;
use crate::real::{c, Real};

/// Nonincreasing log-concave density on `[0, ∞)` with a convex piecewise-linear
/// potential. Shares its parameterization with [`PiecewiseLogLinearDensity`],
/// but `log_f0` is normalized for unit mass on the half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct PositiveDensity<T: Real> {
    /// Even density whose restriction to `[0, ∞)`, doubled, is this density.
    folded: PiecewiseLogLinearDensity<T>,
}

impl<T: Real> PositiveDensity<T> {
    pub fn normalized(breakpoints: Vec<T>, slopes: Vec<T>, bounded: bool) -> Result<Self> {
        Ok(PositiveDensity { folded: PiecewiseLogLinearDensity::normalized(breakpoints, slopes, bounded)? })
    }

    /// Uniform on `[0, L]`.
    pub fn uniform(len: T) -> Result<Self> {
        Self::normalized(vec![T::zero(), len], vec![T::zero()], true)
    }

    /// Exponential with the given mean.
    pub fn exponential(mean: T) -> Result<Self> {
        Self::normalized(vec![T::zero()], vec![T::one() / mean], false)
    }

    pub fn breakpoints(&self) -> &[T] {
        self.folded.breakpoints()
    }

    pub fn slopes(&self) -> &[T] {
        self.folded.slopes()
    }

    pub fn scale(&self, lambda: T) -> Result<Self> {
        Ok(PositiveDensity { folded: self.folded.scale(lambda)? })
    }

    /// `2 f(x)` on `[0, ∞)` for an even density `f`.
    pub fn from_even(folded: PiecewiseLogLinearDensity<T>) -> Self {
        PositiveDensity { folded }
    }
}

impl<T: Real> Density<T> for PositiveDensity<T> {
    fn pdf(&self, x: T) -> T {
        if x < T::zero() {
            T::zero()
        } else {
            c::<T>(2.0) * self.folded.pdf(x)
        }
    }
    fn support(&self) -> (T, T) {
        (T::zero(), self.folded.edge().unwrap_or(T::infinity()))
    }
    fn knots(&self) -> Vec<T> {
        self.folded.knots().into_iter().filter(|&k| k > T::zero()).collect()
    }
    fn peak(&self) -> T {
        c::<T>(2.0) * self.folded.peak()
    }
    fn describe(&self) -> String {
        format!("positive{}", self.folded.describe())
    }
    fn cell_mass(&self, a: T, b: T) -> T {
        let a = a.max(T::zero());
        if b <= a {
            return T::zero();
        }
        c::<T>(2.0) * (self.folded.half_cdf(b) - self.folded.half_cdf(a))
    }
    fn upper_tail_point(&self, eps: T) -> T {
        self.folded.upper_tail_point(eps * c(0.5))
    }
}

/// `f_sym(x) = (f(x)1_{x>0} + f(−x)1_{x<0}) / 2`.
pub fn symmetrize<T: Real>(f: &PositiveDensity<T>) -> PiecewiseLogLinearDensity<T> {
    f.folded.clone()
}

/// Even extension of any density supported on `[0, ∞)`.
#[derive(Debug, Clone, Copy)]
pub struct Symmetrized<D> {
    inner: D,
}

impl<D> Symmetrized<D> {
    pub fn new(inner: D) -> Self {
        Symmetrized { inner }
    }
}

impl<T: Real, D: Density<T>> Density<T> for Symmetrized<D> {
    fn pdf(&self, x: T) -> T {
        self.inner.pdf(x.abs()) * c(0.5)
    }
    fn support(&self) -> (T, T) {
        let (_, hi) = self.inner.support();
        (-hi, hi)
    }
    fn knots(&self) -> Vec<T> {
        let k = self.inner.knots();
        let mut out: Vec<T> = k.iter().rev().map(|&x| -x).collect();
        out.push(T::zero());
        out.extend(k);
        out
    }
    fn peak(&self) -> T {
        self.inner.peak() * c(0.5)
    }
    fn is_even(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        format!("sym({})", self.inner.describe())
    }
}
