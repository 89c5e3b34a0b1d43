//! Densities with closed-form pdfs used as fixtures and noise models.

use super::Density;
use crate::error::{Error, Result};
use crate::functionals::constants::{a_pq, beta};
use crate::real::{c, Real};
use crate::special::{gamma, ln_gamma, EULER_GAMMA};

/// Centered Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian<T> {
    variance: T,
}

impl<T: Real> Gaussian<T> {
    pub fn new(variance: T) -> Result<Self> {
        if !(variance > T::zero()) || !variance.is_finite() {
            return Err(Error::OutOfRange("Gaussian variance must be positive".into()));
        }
        Ok(Gaussian { variance })
    }

    pub fn sd(&self) -> T {
        self.variance.sqrt()
    }
}

impl<T: Real> Density<T> for Gaussian<T> {
    fn pdf(&self, x: T) -> T {
        (-(x * x) / (self.variance + self.variance)).exp() / (T::TAU() * self.variance).sqrt()
    }
    fn support(&self) -> (T, T) {
        (T::neg_infinity(), T::infinity())
    }
    fn peak(&self) -> T {
        T::one() / (T::TAU() * self.variance).sqrt()
    }
    fn is_even(&self) -> bool {
        true
    }
    fn is_symmetric_log_concave(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        format!("gaussian(var={})", self.variance)
    }
    fn mass(&self) -> T {
        T::one()
    }
    fn mean(&self) -> T {
        T::zero()
    }
    fn variance(&self) -> T {
        self.variance
    }
    fn abs_moment(&self, p: T) -> T {
        // σ^p 2^{p/2} Γ((p+1)/2) / √π
        let half = c::<T>(0.5);
        (p * half * (self.variance + self.variance).ln() + ln_gamma((p + T::one()) * half)).exp() / T::PI().sqrt()
    }
    fn entropy(&self) -> T {
        c::<T>(0.5) * (T::TAU() * T::E() * self.variance).ln()
    }
    fn power_integral(&self, q: T) -> T {
        (T::TAU() * self.variance).powf((T::one() - q) * c(0.5)) / q.sqrt()
    }
    fn log_abs_moment(&self) -> T {
        c::<T>(0.5) * self.variance.ln() - (c::<T>(EULER_GAMMA) + T::LN_2()) * c(0.5)
    }
    fn upper_tail_point(&self, eps: T) -> T {
        // Mills bound: P(X > zσ) ≤ φ(z)/z
        let mut z = c::<T>(1.0);
        while z < c(40.0) {
            let tail = (-(z * z) * c(0.5)).exp() / (z * T::TAU().sqrt());
            if tail < eps {
                break;
            }
            z += c(0.05);
        }
        z * self.sd()
    }
}

/// Triangular density on `[−w, w]` with peak `1/w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle<T> {
    half_width: T,
}

impl<T: Real> Triangle<T> {
    pub fn new(half_width: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::OutOfRange("triangle half-width must be positive".into()));
        }
        Ok(Triangle { half_width })
    }
}

impl<T: Real> Density<T> for Triangle<T> {
    fn pdf(&self, x: T) -> T {
        let w = self.half_width;
        ((w - x.abs()) / (w * w)).max(T::zero())
    }
    fn support(&self) -> (T, T) {
        (-self.half_width, self.half_width)
    }
    fn knots(&self) -> Vec<T> {
        vec![T::zero()]
    }
    fn peak(&self) -> T {
        T::one() / self.half_width
    }
    fn is_even(&self) -> bool {
        true
    }
    fn is_symmetric_log_concave(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        format!("triangle(w={})", self.half_width)
    }
    fn mean(&self) -> T {
        T::zero()
    }
    fn variance(&self) -> T {
        self.half_width * self.half_width / c(6.0)
    }
    fn entropy(&self) -> T {
        c::<T>(0.5) + self.half_width.ln()
    }
}

/// Generalized Gaussian `g_{p,q}(x/λ)/λ` with
/// `g_{p,q}(x) = A_{p,q}^{-1} (1 + β|x|^p/p)^{−1/(1−q)}` for `q < 1` and
/// `A_{p,1}^{-1} exp(−|x|^p/p)` for `q = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedGaussian<T> {
    p: T,
    q: T,
    scale: T,
    norm: T,
    beta: T,
}

impl<T: Real> GeneralizedGaussian<T> {
    /// Requires `p ∈ (0, 2]` and `1/(1+p) < q ≤ 1`.
    pub fn new(p: T, q: T) -> Result<Self> {
        let norm = a_pq(p, q)?;
        let b = if q < T::one() { beta(p, q) } else { T::nan() };
        Ok(GeneralizedGaussian { p, q, scale: T::one(), norm, beta: b })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// Normalizing constant of the unit-scale density.
    pub fn normalizer(&self) -> T {
        self.norm
    }

    /// `E|Z|^p` of the unit-scale density: `β^{−2}` for `q < 1`, 1 for `q = 1`.
    pub fn unit_scale_p_moment(&self) -> T {
        if self.q < T::one() {
            T::one() / (self.beta * self.beta)
        } else {
            T::one()
        }
    }

    pub fn with_scale(mut self, scale: T) -> Self {
        self.scale = scale;
        self
    }

    /// Rescaled so that `E|Z|^p = m`.
    pub fn with_p_moment(self, m: T) -> Self {
        let s = (m / self.unit_scale_p_moment()).powf(T::one() / self.p);
        self.with_scale(s)
    }

    fn unit_pdf(&self, x: T) -> T {
        let ap = x.abs().powf(self.p);
        if self.q < T::one() {
            (T::one() + self.beta * ap / self.p).powf(-T::one() / (T::one() - self.q)) / self.norm
        } else {
            (-ap / self.p).exp() / self.norm
        }
    }
}

impl<T: Real> Density<T> for GeneralizedGaussian<T> {
    fn pdf(&self, x: T) -> T {
        self.unit_pdf(x / self.scale) / self.scale
    }
    fn support(&self) -> (T, T) {
        (T::neg_infinity(), T::infinity())
    }
    fn knots(&self) -> Vec<T> {
        vec![-self.scale, T::zero(), self.scale]
    }
    fn peak(&self) -> T {
        T::one() / (self.norm * self.scale)
    }
    fn is_even(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        format!("generalized_gaussian(p={}, q={}, scale={})", self.p, self.q, self.scale)
    }
    fn mean(&self) -> T {
        T::zero()
    }
}

/// Half-Gaussian on `[0, ∞)`: `|Z|` for `Z ~ N(0, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfGaussian<T> {
    sigma: T,
}

impl<T: Real> HalfGaussian<T> {
    pub fn new(sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(Error::OutOfRange("sigma must be positive".into()));
        }
        Ok(HalfGaussian { sigma })
    }

    /// Scaled so that the mean equals `a`.
    pub fn with_mean(a: T) -> Result<Self> {
        Self::new(a * (T::PI() * c(0.5)).sqrt())
    }
}

impl<T: Real> Density<T> for HalfGaussian<T> {
    fn pdf(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        let s = self.sigma;
        c::<T>(2.0) * (-(x * x) / (s * s * c(2.0))).exp() / (T::TAU().sqrt() * s)
    }
    fn support(&self) -> (T, T) {
        (T::zero(), T::infinity())
    }
    fn peak(&self) -> T {
        c::<T>(2.0) / (T::TAU().sqrt() * self.sigma)
    }
    fn describe(&self) -> String {
        format!("half_gaussian(sigma={})", self.sigma)
    }
    fn mass(&self) -> T {
        T::one()
    }
    fn mean(&self) -> T {
        self.sigma * (c::<T>(2.0) / T::PI()).sqrt()
    }
    fn abs_moment(&self, p: T) -> T {
        let half = c::<T>(0.5);
        self.sigma.powf(p) * c::<T>(2.0).powf(p * half) * gamma((p + T::one()) * half) / T::PI().sqrt()
    }
    fn entropy(&self) -> T {
        c::<T>(0.5) * (T::PI() * T::E() * self.sigma * self.sigma * c(0.5)).ln()
    }
}
