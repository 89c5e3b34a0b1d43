//! One-dimensional densities and the operations that build them.
//!
//! Every density implements [`Density`]. The trait's default methods compute
//! functionals by adaptive Gauss–Legendre quadrature split at the density's
//! kinks; concrete types override them with closed forms where those exist.

mod analytic;
mod grid;
mod mixture;
mod piecewise;
mod positive;
mod random;

pub use analytic::{Gaussian, GeneralizedGaussian, HalfGaussian, Triangle};
pub use grid::{convolve, to_grid, to_grid_range, GridDensity, DEFAULT_GRID_POINTS, DEFAULT_TAIL_EPS};
pub use mixture::{mixture, GaussianMixtureSpec, Mixture};
pub use piecewise::PiecewiseLogLinearDensity;
pub(crate) use piecewise::exp_segment_first_moment;
pub use positive::{symmetrize, PositiveDensity, Symmetrized};
pub use random::{random_density, random_log_concave, random_positive_density, Style};

use crate::quad::{self, Tolerance};
use crate::real::{c, Real};

/// A probability density on the real line.
pub trait Density<T: Real>: Send + Sync {
    fn pdf(&self, x: T) -> T;

    /// Closed support `[lo, hi]`; either end may be infinite.
    fn support(&self) -> (T, T);

    /// Points inside the support where the density is not smooth.
    fn knots(&self) -> Vec<T> {
        Vec::new()
    }

    /// `‖f‖_∞`.
    fn peak(&self) -> T;

    fn is_even(&self) -> bool {
        false
    }

    /// True when the density is known to be even and log-concave.
    fn is_symmetric_log_concave(&self) -> bool {
        false
    }

    fn describe(&self) -> String {
        "density".to_string()
    }

    /// `∫ g(x, f(x)) dx` over the support.
    fn integrate(&self, g: &dyn Fn(T, T) -> T) -> T {
        let (lo, hi) = self.support();
        let mut breaks = self.knots();
        breaks.push(T::zero());
        let h = |x: T| g(x, self.pdf(x));
        quad::integrate_split(lo, hi, &breaks, &h, Tolerance::default())
    }

    fn mass(&self) -> T {
        self.integrate(&|_, f| f)
    }

    fn mean(&self) -> T {
        if self.is_even() {
            return T::zero();
        }
        self.integrate(&|x, f| x * f) / self.mass()
    }

    fn variance(&self) -> T {
        let mu = self.mean();
        self.integrate(&|x, f| (x - mu) * (x - mu) * f) / self.mass()
    }

    /// `E|X|^p`.
    fn abs_moment(&self, p: T) -> T {
        self.integrate(&|x, f| if f > T::zero() { x.abs().powf(p) * f } else { T::zero() })
    }

    /// Shannon differential entropy in nats.
    fn entropy(&self) -> T {
        self.integrate(&|_, f| if f > T::zero() { -f * f.ln() } else { T::zero() })
    }

    /// `∫ f^q`.
    fn power_integral(&self, q: T) -> T {
        self.integrate(&|_, f| if f > T::zero() { f.powf(q) } else { T::zero() })
    }

    /// `E log|X|`.
    fn log_abs_moment(&self) -> T {
        self.integrate(&|x, f| if f > T::zero() && x != T::zero() { x.abs().ln() * f } else { T::zero() })
    }

    /// Lebesgue measure of the support.
    fn support_measure(&self) -> T {
        let (lo, hi) = self.support();
        hi - lo
    }

    /// Mass of `[a, b]`.
    fn interval_mass(&self, a: T, b: T) -> T {
        let (lo, hi) = self.support();
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return T::zero();
        }
        let f = |x: T| self.pdf(x);
        quad::integrate_split(a, b, &self.knots(), &f, Tolerance::default())
    }

    /// Mass of a short cell `[a, b]` by a fixed rule split at kinks.
    fn cell_mass(&self, a: T, b: T) -> T {
        let (lo, hi) = self.support();
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return T::zero();
        }
        let f = |x: T| self.pdf(x);
        let mut lo = a;
        let mut total = T::zero();
        let mut inner: Vec<T> = self.knots().into_iter().filter(|&k| k > a && k < b).collect();
        inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for k in inner.into_iter().chain(std::iter::once(b)) {
            total += quad::gl6(lo, k, &f);
            lo = k;
        }
        total
    }

    /// A point `r` with mass above `r` below `eps`.
    fn upper_tail_point(&self, eps: T) -> T {
        let (_, hi) = self.support();
        if hi.is_finite() {
            return hi;
        }
        let mut r = self.knots().into_iter().fold(T::zero(), T::max) + T::one();
        let f = |x: T| self.pdf(x);
        for _ in 0..200 {
            let tail = quad::integrate(r, T::infinity(), &f, Tolerance::default());
            if tail < eps {
                return r;
            }
            r = r * c(1.25) + T::one();
        }
        r
    }

    /// A point `r` with mass below `r` below `eps`.
    fn lower_tail_point(&self, eps: T) -> T {
        let (lo, _) = self.support();
        if lo.is_finite() {
            return lo;
        }
        if self.is_even() {
            return -self.upper_tail_point(eps);
        }
        let mut r = self.knots().into_iter().fold(T::zero(), T::min) - T::one();
        let f = |x: T| self.pdf(x);
        for _ in 0..200 {
            let tail = quad::integrate(T::neg_infinity(), r, &f, Tolerance::default());
            if tail < eps {
                return r;
            }
            r = r * c(1.25) - T::one();
        }
        r
    }
}

impl<T: Real, D: Density<T> + ?Sized> Density<T> for &D {
    fn pdf(&self, x: T) -> T {
        (**self).pdf(x)
    }
    fn support(&self) -> (T, T) {
        (**self).support()
    }
    fn knots(&self) -> Vec<T> {
        (**self).knots()
    }
    fn peak(&self) -> T {
        (**self).peak()
    }
    fn is_even(&self) -> bool {
        (**self).is_even()
    }
    fn is_symmetric_log_concave(&self) -> bool {
        (**self).is_symmetric_log_concave()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn integrate(&self, g: &dyn Fn(T, T) -> T) -> T {
        (**self).integrate(g)
    }
    fn mass(&self) -> T {
        (**self).mass()
    }
    fn mean(&self) -> T {
        (**self).mean()
    }
    fn variance(&self) -> T {
        (**self).variance()
    }
    fn abs_moment(&self, p: T) -> T {
        (**self).abs_moment(p)
    }
    fn entropy(&self) -> T {
        (**self).entropy()
    }
    fn power_integral(&self, q: T) -> T {
        (**self).power_integral(q)
    }
    fn log_abs_moment(&self) -> T {
        (**self).log_abs_moment()
    }
    fn support_measure(&self) -> T {
        (**self).support_measure()
    }
    fn interval_mass(&self, a: T, b: T) -> T {
        (**self).interval_mass(a, b)
    }
    fn cell_mass(&self, a: T, b: T) -> T {
        (**self).cell_mass(a, b)
    }
    fn upper_tail_point(&self, eps: T) -> T {
        (**self).upper_tail_point(eps)
    }
    fn lower_tail_point(&self, eps: T) -> T {
        (**self).lower_tail_point(eps)
    }
}
