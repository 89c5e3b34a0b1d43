use serde::{Deserialize, Serialize};

use super::{to_grid, Density, Gaussian, GridDensity};
use crate::error::{Error, Result};
use crate::real::{c, Real};

/// Scale mixture of centred Gaussians `Σ α_i N(0, Σ_i)` with diagonal `Σ_i`.
///
/// Each entry of `spectra` lists the diagonal of one covariance; in one
/// dimension every spectrum has a single entry (the variance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct GaussianMixtureSpec<T: Real> {
    weights: Vec<T>,
    spectra: Vec<Vec<T>>,
}

impl<T: Real> GaussianMixtureSpec<T> {
    pub fn new(weights: Vec<T>, spectra: Vec<Vec<T>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != spectra.len() {
            return Err(Error::OutOfRange("one weight per component required".into()));
        }
        if weights.iter().any(|w| !(*w >= T::zero())) {
            return Err(Error::OutOfRange("mixture weights must be nonnegative".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > c(1e-9) {
            return Err(Error::OutOfRange(format!("mixture weights sum to {total}, not 1")));
        }
        let dim = spectra[0].len();
        if dim == 0 || spectra.iter().any(|s| s.len() != dim) {
            return Err(Error::OutOfRange("all spectra must share a positive dimension".into()));
        }
        if spectra.iter().flatten().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::OutOfRange("variances must be positive".into()));
        }
        Ok(GaussianMixtureSpec { weights, spectra })
    }

    /// One-dimensional mixture with the given component variances.
    pub fn one_dim(weights: Vec<T>, variances: Vec<T>) -> Result<Self> {
        Self::new(weights, variances.into_iter().map(|v| vec![v]).collect())
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn spectra(&self) -> &[Vec<T>] {
        &self.spectra
    }

    pub fn dim(&self) -> usize {
        self.spectra[0].len()
    }

    /// `Σ α_i σ_i²` (one-dimensional only).
    pub fn variance(&self) -> Result<T> {
        self.require_1d()?;
        Ok(self.weights.iter().zip(&self.spectra).map(|(&w, s)| w * s[0]).sum())
    }

    fn require_1d(&self) -> Result<()> {
        if self.dim() != 1 {
            return Err(Error::OutOfRange(format!("expected a 1-D mixture, got dimension {}", self.dim())));
        }
        Ok(())
    }

    /// The mixture as an analytic density (one-dimensional only).
    pub fn density(&self) -> Result<Mixture<T>> {
        self.require_1d()?;
        let parts = self
            .weights
            .iter()
            .zip(&self.spectra)
            .filter(|(w, _)| **w > T::zero())
            .map(|(&w, s)| Ok((w, Box::new(Gaussian::new(s[0])?) as Box<dyn Density<T> + Send + Sync>)))
            .collect::<Result<Vec<_>>>()?;
        Mixture::new(parts)
    }
}

/// Finite mixture `Σ w_i f_i` of arbitrary densities.
pub struct Mixture<T: Real> {
    parts: Vec<(T, Box<dyn Density<T> + Send + Sync>)>,
}

impl<T: Real> Mixture<T> {
    pub fn new(parts: Vec<(T, Box<dyn Density<T> + Send + Sync>)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Empty);
        }
        let total: T = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| !(*w >= T::zero())) || (total - T::one()).abs() > c(1e-9) {
            return Err(Error::OutOfRange("mixture weights must form a probability vector".into()));
        }
        Ok(Mixture { parts })
    }

    /// `λ f + (1 − λ) g`.
    pub fn pair(lambda: T, f: Box<dyn Density<T> + Send + Sync>, g: Box<dyn Density<T> + Send + Sync>) -> Result<Self> {
        Self::new(vec![(lambda, f), (T::one() - lambda, g)])
    }
}

impl<T: Real> Density<T> for Mixture<T> {
    fn pdf(&self, x: T) -> T {
        self.parts.iter().map(|(w, d)| *w * d.pdf(x)).sum()
    }
    fn support(&self) -> (T, T) {
        self.parts.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), (_, d)| {
            let (a, b) = d.support();
            (lo.min(a), hi.max(b))
        })
    }
    fn knots(&self) -> Vec<T> {
        let mut k: Vec<T> = self.parts.iter().flat_map(|(_, d)| {
            let (a, b) = d.support();
            let mut k = d.knots();
            k.extend([a, b].into_iter().filter(|x| x.is_finite()));
            k
        }).collect();
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        k.dedup();
        k
    }
    /// Largest value over 0 and the knots; exact for mixtures of even unimodal parts.
    fn peak(&self) -> T {
        let mut best = self.pdf(T::zero());
        for k in self.knots() {
            best = best.max(self.pdf(k));
        }
        best
    }
    fn is_even(&self) -> bool {
        self.parts.iter().all(|(_, d)| d.is_even())
    }
    fn describe(&self) -> String {
        let inner: Vec<String> = self.parts.iter().map(|(w, d)| format!("{w}*{}", d.describe())).collect();
        format!("mixture({})", inner.join(" + "))
    }
    fn mass(&self) -> T {
        self.parts.iter().map(|(w, d)| *w * d.mass()).sum()
    }
    fn mean(&self) -> T {
        self.parts.iter().map(|(w, d)| *w * d.mean()).sum()
    }
    fn abs_moment(&self, p: T) -> T {
        self.parts.iter().map(|(w, d)| *w * d.abs_moment(p)).sum()
    }
    fn interval_mass(&self, a: T, b: T) -> T {
        self.parts.iter().map(|(w, d)| *w * d.interval_mass(a, b)).sum()
    }
    fn cell_mass(&self, a: T, b: T) -> T {
        self.parts.iter().map(|(w, d)| *w * d.cell_mass(a, b)).sum()
    }
    fn upper_tail_point(&self, eps: T) -> T {
        self.parts.iter().map(|(_, d)| d.upper_tail_point(eps)).fold(T::neg_infinity(), T::max)
    }
    fn lower_tail_point(&self, eps: T) -> T {
        self.parts.iter().map(|(_, d)| d.lower_tail_point(eps)).fold(T::infinity(), T::min)
    }
}

/// Grid density of a one-dimensional Gaussian mixture on `n_points` nodes.
pub fn mixture<T: Real>(spec: &GaussianMixtureSpec<T>, n_points: usize) -> Result<GridDensity<T>> {
    let d = spec.density()?;
    let eps = c::<T>(super::DEFAULT_TAIL_EPS);
    let w = d.upper_tail_point(eps * c(0.25));
    to_grid(&d, w, n_points, eps)
}
