//! Closed-form capacities and capacity bounds for additive-noise channels.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::density::{Density, GaussianMixtureSpec};
use crate::error::{Error, Result};
use crate::functionals::{entropy_power, relative_entropy_from_gaussianity, shannon_entropy, Units};
use crate::inequality::{BoundReport, Scale, Verdict};
use crate::real::Real;

/// `½ log(πe/6)`, the largest distance from Gaussianity of a symmetric log-concave density.
pub fn gaussianity_slack() -> f64 {
    0.5 * (PI * E / 6.0).ln()
}

/// `log(e/2)`, the largest excess over exponential noise for nonincreasing log-concave positive noise.
pub fn panc_slack() -> f64 {
    1.0 - 2f64.ln()
}

/// Lower and upper capacity bounds, in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_source: String,
    pub upper_source: String,
    pub noise: String,
    pub budget: f64,
}

impl CapacityBounds {
    fn new(lower: f64, upper: f64, sources: (&str, &str), noise: String, budget: f64) -> Result<Self> {
        if lower > upper + 1e-9 {
            return Err(Error::Consistency(format!("lower bound {lower} exceeds upper bound {upper}")));
        }
        Ok(CapacityBounds {
            lower,
            upper,
            lower_source: sources.0.to_string(),
            upper_source: sources.1.to_string(),
            noise,
            budget,
        })
    }
}

/// Eigenvalues of a diagonal noise covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EigenSpectrum(Vec<f64>);

impl EigenSpectrum {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Empty);
        }
        if eigenvalues.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::OutOfRange("eigenvalues must be positive and finite".into()));
        }
        Ok(EigenSpectrum(eigenvalues))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for EigenSpectrum {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        EigenSpectrum::new(v)
    }
}

impl From<EigenSpectrum> for Vec<f64> {
    fn from(s: EigenSpectrum) -> Self {
        s.0
    }
}

fn check_budget(p: f64) -> Result<()> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::OutOfRange(format!("budget must be finite and ≥ 0, got {p}")));
    }
    Ok(())
}

/// `½ log(1 + P/σ²)`.
pub fn awgn_capacity<T: Real>(p: T, noise_var: T) -> Result<T> {
    check_budget(p.as_f64())?;
    if !(noise_var > T::zero()) {
        return Err(Error::OutOfRange(format!("noise variance must be positive, got {noise_var}")));
    }
    Ok((p / noise_var).ln_1p() * T::from(0.5).unwrap())
}

/// `½ log(1 + P/N) ≤ C ≤ ½ log((P + Var)/N)` with `N` the noise entropy power.
pub fn shannon_bounds<D: Density<f64> + ?Sized>(noise: &D, p: f64) -> Result<CapacityBounds> {
    check_budget(p)?;
    let var = noise.variance();
    if !var.is_finite() || !(var > 0.0) {
        return Err(Error::OutOfRange("noise needs a finite positive variance".into()));
    }
    let n = entropy_power(noise);
    let lower = 0.5 * (p / n).ln_1p();
    let upper = 0.5 * ((p + var) / n).ln();
    CapacityBounds::new(lower, upper.max(lower), ("entropy_power", "variance"), noise.describe(), p)
}

/// `C(P, Var) + D(N)`. For symmetric log-concave noise, a distance from
/// Gaussianity beyond `½ log(πe/6)` is reported as an inconsistency.
pub fn ihara_upper<D: Density<f64> + ?Sized>(noise: &D, p: f64) -> Result<f64> {
    let d = relative_entropy_from_gaussianity(noise);
    if noise.is_symmetric_log_concave() && d > gaussianity_slack() + 1e-7 {
        return Err(Error::Consistency(format!(
            "distance from Gaussianity {d} exceeds ½log(πe/6) for {}",
            noise.describe()
        )));
    }
    Ok(awgn_capacity(p, noise.variance())? + d)
}

/// `½ log[12(P + Var)] − h(N)`, a lower bound on capacity with log-concave inputs,
/// checked against a capacity estimate `(value, tolerance)` when one is supplied:
/// `0 ≤ C − L ≤ ½ log(πe/6)`.
pub fn restricted_capacity_chain<D: Density<f64> + ?Sized>(noise: &D, p: f64, estimate: Option<(f64, f64)>) -> Result<BoundReport> {
    check_budget(p)?;
    if !noise.is_symmetric_log_concave() {
        return Err(Error::OutOfRange("restricted capacity chain needs symmetric log-concave noise".into()));
    }
    let l = 0.5 * (12.0 * (p + noise.variance())).ln() - shannon_entropy(noise);
    let slack = gaussianity_slack();
    match estimate {
        None => Ok(BoundReport::new(
            "restricted_capacity",
            noise.describe(),
            &[("budget", p), ("lower_bound", l)],
            l,
            f64::NAN,
            f64::NAN,
            0.0,
            Scale::Nats,
            false,
        )
        .with_verdict(Verdict::Unchecked)),
        Some((c, tol)) => {
            let excess = c - l;
            Ok(BoundReport::new(
                "restricted_capacity",
                noise.describe(),
                &[("budget", p), ("lower_bound", l), ("estimate", c)],
                excess,
                slack,
                (slack - excess).min(excess),
                tol,
                Scale::Nats,
                false,
            ))
        }
    }
}

/// `log(1 + P/a)`, the capacity of the positive channel with exponential noise of mean `a`.
pub fn panc_exponential_capacity<T: Real>(p: T, a: T) -> Result<T> {
    check_budget(p.as_f64())?;
    if !(a > T::zero()) {
        return Err(Error::OutOfRange(format!("noise mean must be positive, got {a}")));
    }
    Ok((p / a).ln_1p())
}

fn nonincreasing_on_support<D: Density<f64> + ?Sized>(noise: &D) -> bool {
    let hi = noise.upper_tail_point(1e-12);
    let n = 512;
    let mut prev = f64::INFINITY;
    for i in 0..=n {
        let x = hi * i as f64 / n as f64;
        let f = noise.pdf(x);
        if f > prev * (1.0 + 1e-12) + 1e-300 {
            return false;
        }
        prev = f;
    }
    true
}

/// `D(N‖E) = log a + 1 − h(N)` for `E` exponential with the noise mean `a`.
pub fn exponential_divergence<D: Density<f64> + ?Sized>(noise: &D) -> Result<f64> {
    let (lo, _) = noise.support();
    if lo < 0.0 {
        return Err(Error::OutOfRange("positive channel noise must live on [0, ∞)".into()));
    }
    let a = noise.mean();
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::OutOfRange("positive noise needs a finite positive mean".into()));
    }
    Ok(a.ln() + 1.0 - shannon_entropy(noise))
}

/// `log(1 + P/a) ≤ C⁺ ≤ log(1 + P/a) + D(N‖E)`; for nonincreasing noise the
/// excess is also checked against `log(e/2)`.
pub fn verdu_bounds<D: Density<f64> + ?Sized>(noise: &D, p: f64) -> Result<CapacityBounds> {
    let d = exponential_divergence(noise)?;
    let lower = panc_exponential_capacity(p, noise.mean())?;
    if nonincreasing_on_support(noise) && d > panc_slack() + 1e-7 {
        return Err(Error::Consistency(format!(
            "D(N‖E) = {d} exceeds log(e/2) for nonincreasing {}",
            noise.describe()
        )));
    }
    CapacityBounds::new(lower, lower + d.max(0.0), ("exponential_noise", "exponential_divergence"), noise.describe(), p)
}

/// Water-filling allocation over a diagonal Gaussian channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFilling {
    pub level: f64,
    pub allocation: Vec<f64>,
    pub capacity: f64,
}

impl WaterFilling {
    /// Largest deviation of `λ_i + σ̃_i` from the level over active channels,
    /// and of `λ_i` below the level over inactive ones.
    pub fn kkt_residual(&self, spectrum: &EigenSpectrum) -> f64 {
        spectrum
            .eigenvalues()
            .iter()
            .zip(&self.allocation)
            .map(|(&l, &s)| if s > 0.0 { (l + s - self.level).abs() } else { (self.level - l).max(0.0) })
            .fold(0.0, f64::max)
    }
}

/// `σ̃_i = (ν − λ_i)⁺` with `Σ σ̃_i = P`, capacity `Σ ½ log(1 + σ̃_i/λ_i)`.
///
/// The level is found exactly: with eigenvalues sorted, the active set is the
/// largest prefix `k` with `λ_k < (P + Σ_{i≤k} λ_i)/k`.
pub fn water_filling(spectrum: &EigenSpectrum, p: f64) -> Result<WaterFilling> {
    check_budget(p)?;
    let lam = spectrum.eigenvalues();
    let mut sorted = lam.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut level = sorted[0] + p;
    let mut partial = 0.0;
    for (k, &l) in sorted.iter().enumerate() {
        partial += l;
        let nu = (p + partial) / (k + 1) as f64;
        if k > 0 && nu <= l {
            break;
        }
        level = nu;
    }
    let allocation: Vec<f64> = lam.iter().map(|&l| (level - l).max(0.0)).collect();
    let capacity = lam.iter().zip(&allocation).map(|(&l, &s)| 0.5 * (s / l).ln_1p()).sum();
    Ok(WaterFilling { level, allocation, capacity })
}

/// `(C(Λ₁) + C(Λ₂))/2 − C((Λ₁ + Λ₂)/2)`, nonnegative by convexity in the spectrum.
pub fn water_filling_midpoint_gap(a: &EigenSpectrum, b: &EigenSpectrum, p: f64) -> Result<f64> {
    if a.eigenvalues().len() != b.eigenvalues().len() {
        return Err(Error::OutOfRange("spectra must have the same dimension".into()));
    }
    let mid = EigenSpectrum::new(a.eigenvalues().iter().zip(b.eigenvalues()).map(|(x, y)| 0.5 * (x + y)).collect())?;
    let ca = water_filling(a, p)?.capacity;
    let cb = water_filling(b, p)?.capacity;
    Ok(0.5 * (ca + cb) - water_filling(&mid, p)?.capacity)
}

/// `Σ α_i C_P(Z_i)`, an upper bound on capacity under Gaussian-mixture noise.
pub fn gaussian_mixture_bound(spec: &GaussianMixtureSpec<f64>, p: f64) -> Result<f64> {
    let mut total = 0.0;
    for (&w, lam) in spec.weights().iter().zip(spec.spectra()) {
        if w > 0.0 {
            total += w * water_filling(&EigenSpectrum::new(lam.clone())?, p)?.capacity;
        }
    }
    Ok(total)
}

/// Bounds and an optional capacity estimate for one noise, as reported by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub noise: String,
    #[serde(rename = "P")]
    pub budget: f64,
    pub lower_shannon: f64,
    pub upper_shannon: f64,
    pub upper_ihara: f64,
    pub awgn: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ba_estimate: Option<f64>,
    pub units: Units,
}

impl CapacityReport {
    pub fn new<D: Density<f64> + ?Sized>(noise: &D, p: f64, ba_estimate: Option<f64>) -> Result<Self> {
        let sb = shannon_bounds(noise, p)?;
        Ok(CapacityReport {
            noise: noise.describe(),
            budget: p,
            lower_shannon: sb.lower,
            upper_shannon: sb.upper,
            upper_ihara: ihara_upper(noise, p)?,
            awgn: awgn_capacity(p, noise.variance())?,
            ba_estimate,
            units: Units::Nats,
        })
    }

    pub fn in_units(mut self, units: Units) -> Self {
        if self.units == units {
            return self;
        }
        let to_nats = |x: f64| match self.units {
            Units::Nats => x,
            Units::Bits => x * 2f64.ln(),
        };
        let conv = |x: f64| units.from_nats(to_nats(x));
        self.lower_shannon = conv(self.lower_shannon);
        self.upper_shannon = conv(self.upper_shannon);
        self.upper_ihara = conv(self.upper_ihara);
        self.awgn = conv(self.awgn);
        self.ba_estimate = self.ba_estimate.map(conv);
        self.units = units;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Gaussian, PiecewiseLogLinearDensity};

    #[test]
    fn awgn_examples() {
        assert!((awgn_capacity(1.0, 1.0).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-16);
        assert_eq!(awgn_capacity(0.0, 1.0).unwrap(), 0.0);
        assert!((awgn_capacity(3.0, 1.0).unwrap() - 2f64.ln()).abs() < 1e-16);
        assert!(awgn_capacity(1.0, 0.0).is_err());
    }

    #[test]
    fn water_filling_examples() {
        let wf = water_filling(&EigenSpectrum::new(vec![1.0, 4.0]).unwrap(), 3.0).unwrap();
        assert_eq!(wf.level, 4.0);
        assert_eq!(wf.allocation, vec![3.0, 0.0]);
        assert_eq!(wf.capacity, 2f64.ln());
        let wf = water_filling(&EigenSpectrum::new(vec![1.0, 1.0]).unwrap(), 2.0).unwrap();
        assert_eq!(wf.allocation, vec![1.0, 1.0]);
        assert!((wf.capacity - 2f64.ln()).abs() < 1e-15);
        let s = EigenSpectrum::new(vec![3.0, 0.5, 2.0]).unwrap();
        assert_eq!(water_filling(&s, 0.0).unwrap().capacity, 0.0);
        let wf = water_filling(&s, 2.7).unwrap();
        assert!(wf.kkt_residual(&s) < 1e-12);
        assert!((wf.allocation.iter().sum::<f64>() - 2.7).abs() < 1e-12);
    }

    #[test]
    fn gaussian_bounds_collapse() {
        let g = Gaussian::new(1.0).unwrap();
        let b = shannon_bounds(&g, 1.0).unwrap();
        assert!((b.lower - b.upper).abs() < 1e-9);
        assert!((ihara_upper(&g, 1.0).unwrap() - b.lower).abs() < 1e-9);
    }

    #[test]
    fn uniform_panc_divergence() {
        let u = crate::density::PositiveDensity::uniform(2.0).unwrap();
        assert!((exponential_divergence(&u).unwrap() - panc_slack()).abs() < 1e-12);
        let e = crate::density::PositiveDensity::exponential(1.5).unwrap();
        let b = verdu_bounds(&e, 1.5).unwrap();
        assert!((b.upper - b.lower).abs() < 1e-12);
        assert!((b.lower - 2f64.ln()).abs() < 1e-12);
        let sym: PiecewiseLogLinearDensity<f64> = PiecewiseLogLinearDensity::uniform(1.0).unwrap();
        assert!(exponential_divergence(&sym).is_err());
    }
}
