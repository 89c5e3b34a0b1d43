//! Moments, entropies, entropy powers, divergences and related constants.
//!
//! Everything is in nats. Functions take any [`Density`] and rely on its
//! closed forms when it has them.

use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::real::{c, Real};

pub mod constants {
    //! `β`, `A_{p,1}`, `A_{p,q}` and the entropy-power constants built on them.

    use serde::{Deserialize, Serialize};

    use crate::error::{Error, Result};
    use crate::real::{c, Real};
    use crate::special::ln_gamma;

    /// `β = q/(1−q) − 1/p`.
    pub fn beta<T: Real>(p: T, q: T) -> T {
        q / (T::one() - q) - T::one() / p
    }

    /// `A_{p,1} = 2 p^{1/p} Γ(1 + 1/p)`.
    pub fn a_p1<T: Real>(p: T) -> T {
        let ip = T::one() / p;
        c::<T>(2.0) * (ip * p.ln() + ln_gamma(T::one() + ip)).exp()
    }

    /// `∫ (1 + β|x|^p/p)^{−r} dx = A_{p,1} β^{−1/p} Γ(r − 1/p) / Γ(r)`.
    fn power_kernel_integral<T: Real>(p: T, b: T, r: T) -> T {
        let ip = T::one() / p;
        a_p1(p) * (-ip * b.ln() + ln_gamma(r - ip) - ln_gamma(r)).exp()
    }

    pub fn check_pq<T: Real>(p: T, q: T) -> Result<()> {
        if !(p > T::zero() && p <= c(2.0)) {
            return Err(Error::OutOfRange(format!("p = {p} must lie in (0, 2]")));
        }
        if !(q > T::one() / (T::one() + p) && q <= T::one()) {
            return Err(Error::ParameterCondition { p: p.as_f64(), q: q.as_f64() });
        }
        Ok(())
    }

    /// Normalizer of the generalized Gaussian `g_{p,q}`.
    pub fn a_pq<T: Real>(p: T, q: T) -> Result<T> {
        check_pq(p, q)?;
        if q == T::one() {
            return Ok(a_p1(p));
        }
        Ok(power_kernel_integral(p, beta(p, q), T::one() / (T::one() - q)))
    }

    /// Constants attached to the pair `(p, q)`.
    #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
    pub struct ConstantsPQ {
        pub p: f64,
        pub q: f64,
        /// `None` at `q = 1`.
        pub beta: Option<f64>,
        pub a_p1: f64,
        pub a_pq: f64,
        /// `N_q` of the unit-scale `g_{p,q}` as given by the closed-form display
        /// `(1/e)(A_{p,q}/A_{2,q} · (1 + β/p)^{1/(1−q)})²`.
        pub nq_max_display: f64,
        /// `E|Z|^p` of the unit-scale `g_{p,q}` (`β^{−2}` for `q < 1`).
        pub unit_p_moment: f64,
        /// `h_q` of the maximizer rescaled to `E|Z|^p = 1`.
        pub max_renyi_entropy: f64,
        /// `N_q` of the maximizer rescaled to `E|Z|^p = 1`; the sharp constant in
        /// `N_q(X) ≤ C σ_p(X)²`.
        pub nq_max: f64,
    }

    /// Requires `p ∈ (0, 2]` and `q ∈ (1/(1+p), 1]`; the `N_q` fields also need
    /// `q > 1/3` so that `A_{2,q}` exists, and are NaN otherwise.
    pub fn constants(p: f64, q: f64) -> Result<ConstantsPQ> {
        let a = a_pq(p, q)?;
        let a2 = a_pq(2.0, q).ok();
        let ap1 = a_p1(p);
        let (b, moment, h) = if q < 1.0 {
            let b = beta(p, q);
            // ∫ g^q = J(q/(1−q)) / A^q
            let int_q = power_kernel_integral(p, b, q / (1.0 - q)) / a.powf(q);
            let h_unit = int_q.ln() / (1.0 - q);
            let m = 1.0 / (b * b);
            (Some(b), m, h_unit - m.ln() / p)
        } else {
            (None, 1.0, ap1.ln() + 1.0 / p)
        };
        let e = std::f64::consts::E;
        let (display, nq) = match a2 {
            Some(a2) => {
                let display = match b {
                    Some(b) => (a / a2 * (1.0 + b / p).powf(1.0 / (1.0 - q))).powi(2) / e,
                    None => (ap1 / a2 * (1.0 / p).exp()).powi(2) / e,
                };
                (display, (2.0 * h).exp() / (a2 * a2 * e))
            }
            None => (f64::NAN, f64::NAN),
        };
        Ok(ConstantsPQ {
            p,
            q,
            beta: b,
            a_p1: ap1,
            a_pq: a,
            nq_max_display: display,
            unit_p_moment: moment,
            max_renyi_entropy: h,
            nq_max: nq,
        })
    }
}

/// Order of a Rényi entropy or divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RenyiOrder<T> {
    Zero,
    One,
    Infinity,
    Finite(T),
}

impl<T: Real> RenyiOrder<T> {
    /// Orders within `1e−6` of 1 map to the Shannon branch.
    pub fn new(q: T) -> Result<Self> {
        if q.is_nan() || q < T::zero() {
            return Err(Error::OutOfRange(format!("Rényi order {q} must be nonnegative")));
        }
        Ok(if q == T::zero() {
            RenyiOrder::Zero
        } else if q.is_infinite() {
            RenyiOrder::Infinity
        } else if (q - T::one()).abs() < c(1e-6) {
            RenyiOrder::One
        } else {
            RenyiOrder::Finite(q)
        })
    }

    pub fn value(&self) -> T {
        match *self {
            RenyiOrder::Zero => T::zero(),
            RenyiOrder::One => T::one(),
            RenyiOrder::Infinity => T::infinity(),
            RenyiOrder::Finite(q) => q,
        }
    }
}

/// Unit of an information quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Converts a value given in nats.
    pub fn from_nats(self, x: f64) -> f64 {
        match self {
            Units::Nats => x,
            Units::Bits => x / std::f64::consts::LN_2,
        }
    }
}

/// `σ_p = (E|X|^p)^{1/p}`.
pub fn moment_p<T: Real, D: Density<T> + ?Sized>(d: &D, p: T) -> Result<T> {
    if !(p > T::zero()) {
        return Err(Error::OutOfRange(format!("moment order {p} must be positive")));
    }
    Ok((d.abs_moment(p) / d.mass()).powf(T::one() / p))
}

/// `E log|X|`, the `p ↓ 0` limit of `log σ_p`.
pub fn log_moment_limit<T: Real, D: Density<T> + ?Sized>(d: &D) -> T {
    d.log_abs_moment()
}

/// Shannon differential entropy.
pub fn shannon_entropy<T: Real, D: Density<T> + ?Sized>(d: &D) -> T {
    d.entropy()
}

/// `h_q`; `h_0` of an unbounded density is `+∞`.
pub fn renyi_entropy<T: Real, D: Density<T> + ?Sized>(d: &D, order: RenyiOrder<T>) -> T {
    match order {
        RenyiOrder::Zero => d.support_measure().ln(),
        RenyiOrder::One => d.entropy(),
        RenyiOrder::Infinity => -d.peak().ln(),
        RenyiOrder::Finite(q) => d.power_integral(q).ln() / (T::one() - q),
    }
}

/// `N = e^{2h} / (2πe)`.
pub fn entropy_power<T: Real, D: Density<T> + ?Sized>(d: &D) -> T {
    (d.entropy() * c(2.0)).exp() / (T::TAU() * T::E())
}

/// `N_q = e^{2h_q} / (A_{2,q}² e)` for `q ∈ (1/3, 1]`.
pub fn renyi_entropy_power<T: Real, D: Density<T> + ?Sized>(d: &D, q: T) -> Result<T> {
    let a = constants::a_pq(c(2.0), q)?;
    let h = renyi_entropy(d, RenyiOrder::new(q)?);
    Ok((h * c(2.0)).exp() / (a * a * T::E()))
}

/// A divergence value with the mass of `f` that falls where the reference vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence<T> {
    pub value: T,
    pub unsupported_mass: T,
}

/// Mass below which unsupported regions are ignored.
pub const SUPPORT_SLACK: f64 = 1e-10;

fn unsupported<T: Real, F: Density<T> + ?Sized, U: Density<T> + ?Sized>(f: &F, u: &U) -> T {
    f.integrate(&|x, fx| if fx > T::zero() && !(u.pdf(x) > T::zero()) { fx } else { T::zero() })
}

/// `D(f‖u) = ∫ f log(f/u)`, integrated with `f`'s own rule.
pub fn relative_entropy<T: Real, F: Density<T> + ?Sized, U: Density<T> + ?Sized>(f: &F, u: &U) -> Divergence<T> {
    let bad = unsupported(f, u);
    if bad > c(SUPPORT_SLACK) {
        return Divergence { value: T::infinity(), unsupported_mass: bad };
    }
    let value = f.integrate(&|x, fx| {
        let ux = u.pdf(x);
        if fx > T::zero() && ux > T::zero() {
            fx * (fx / ux).ln()
        } else {
            T::zero()
        }
    });
    Divergence { value, unsupported_mass: bad }
}

/// `D(X) = ½ log(2πe Var X) − h(X)`.
pub fn relative_entropy_from_gaussianity<T: Real, D: Density<T> + ?Sized>(d: &D) -> T {
    (T::TAU() * T::E() * d.variance()).ln() * c(0.5) - d.entropy()
}

/// `D_α(f‖u) = (α−1)^{−1} log ∫ f^α u^{1−α}`; `α = 1` is `D(f‖u)`.
pub fn renyi_divergence<T: Real, F: Density<T> + ?Sized, U: Density<T> + ?Sized>(f: &F, u: &U, alpha: T) -> Result<Divergence<T>> {
    match RenyiOrder::new(alpha)? {
        RenyiOrder::One => Ok(relative_entropy(f, u)),
        RenyiOrder::Finite(a) => {
            let bad = unsupported(f, u);
            if a > T::one() && bad > c(SUPPORT_SLACK) {
                return Ok(Divergence { value: T::infinity(), unsupported_mass: bad });
            }
            let integral = f.integrate(&|x, fx| {
                let ux = u.pdf(x);
                if fx > T::zero() && ux > T::zero() {
                    fx.powf(a) * ux.powf(T::one() - a)
                } else {
                    T::zero()
                }
            });
            Ok(Divergence { value: integral.ln() / (a - T::one()), unsupported_mass: bad })
        }
        _ => Err(Error::OutOfRange("Rényi divergence needs a finite positive order".into())),
    }
}

/// `α`-escort density `f^α / ∫ f^α`.
#[derive(Debug, Clone)]
pub struct Escort<D, T> {
    inner: D,
    alpha: T,
    norm: T,
}

impl<T: Real, D: Density<T>> Escort<D, T> {
    pub fn new(inner: D, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::OutOfRange("escort order must be positive".into()));
        }
        let norm = inner.power_integral(alpha);
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::InfiniteMass);
        }
        Ok(Escort { inner, alpha, norm })
    }
}

impl<T: Real, D: Density<T>> Density<T> for Escort<D, T> {
    fn pdf(&self, x: T) -> T {
        let f = self.inner.pdf(x);
        if f > T::zero() {
            f.powf(self.alpha) / self.norm
        } else {
            T::zero()
        }
    }
    fn support(&self) -> (T, T) {
        self.inner.support()
    }
    fn knots(&self) -> Vec<T> {
        self.inner.knots()
    }
    fn peak(&self) -> T {
        self.inner.peak().powf(self.alpha) / self.norm
    }
    fn is_even(&self) -> bool {
        self.inner.is_even()
    }
    fn describe(&self) -> String {
        format!("escort({}, alpha={})", self.inner.describe(), self.alpha)
    }
    fn integrate(&self, g: &dyn Fn(T, T) -> T) -> T {
        let (a, n) = (self.alpha, self.norm);
        self.inner.integrate(&|x, f| g(x, if f > T::zero() { f.powf(a) / n } else { T::zero() }))
    }
    fn power_integral(&self, q: T) -> T {
        self.inner.power_integral(q * self.alpha) / self.norm.powf(q)
    }
}

/// `I_q(f‖u) = q/(1−q) log ∫ (f/‖f‖_q)(u/‖u‖_q)^{q−1}` for `q ∈ (0, 1]`.
pub fn relative_q_entropy<T: Real, F: Density<T> + ?Sized, U: Density<T> + ?Sized>(f: &F, u: &U, q: T) -> Result<Divergence<T>> {
    if !(q > T::zero() && q <= T::one()) {
        return Err(Error::OutOfRange(format!("relative q-entropy needs q in (0, 1], got {q}")));
    }
    let order = RenyiOrder::new(q)?;
    if order == RenyiOrder::One {
        return Ok(relative_entropy(f, u));
    }
    let bad = unsupported(f, u);
    if bad > c(SUPPORT_SLACK) {
        return Ok(Divergence { value: T::infinity(), unsupported_mass: bad });
    }
    let cross = f.integrate(&|x, fx| {
        let ux = u.pdf(x);
        if fx > T::zero() && ux > T::zero() {
            fx * ux.powf(q - T::one())
        } else {
            T::zero()
        }
    });
    let log_norm_f = f.power_integral(q).ln() / q;
    let log_norm_u = u.power_integral(q).ln() / q;
    let value = q / (T::one() - q) * (cross.ln() - log_norm_f - (q - T::one()) * log_norm_u);
    Ok(Divergence { value, unsupported_mass: bad })
}

/// `I_q(f‖u)` through the escort identity `D_{1/q}(f_q‖u_q)`.
pub fn relative_q_entropy_escort<T: Real, F: Density<T>, U: Density<T>>(f: F, u: U, q: T) -> Result<Divergence<T>> {
    if !(q > T::zero() && q <= T::one()) {
        return Err(Error::OutOfRange(format!("relative q-entropy needs q in (0, 1], got {q}")));
    }
    let fq = Escort::new(f, q)?;
    let uq = Escort::new(u, q)?;
    renyi_divergence(&fq, &uq, T::one() / q)
}

/// `L_f² = ‖f‖_∞² Var(f)`.
pub fn isotropic_constant_sq<T: Real, D: Density<T> + ?Sized>(d: &D) -> T {
    let m = d.peak();
    m * m * d.variance()
}

#[cfg(test)]
mod tests {
    use super::constants::*;
    use super::*;
    use crate::density::{Gaussian, PiecewiseLogLinearDensity as P};

    #[test]
    fn constants_at_known_points() {
        let two_pi = std::f64::consts::TAU;
        assert!((a_p1(2.0_f64) - two_pi.sqrt()).abs() < 1e-14);
        assert!((a_p1(1.0_f64) - 2.0).abs() < 1e-14);
        let k = constants(2.0, 1.0).unwrap();
        assert!((k.a_pq * k.a_pq * std::f64::consts::E - two_pi * std::f64::consts::E).abs() < 1e-12);
        assert!((k.nq_max - 1.0).abs() < 1e-12);
        assert!((k.nq_max_display - 1.0).abs() < 1e-12);
        let k = constants(2.0, 0.5).unwrap();
        assert_eq!(k.beta, Some(0.5));
        assert!((k.a_pq - std::f64::consts::PI).abs() < 1e-12);
        assert!(matches!(a_pq(1.0_f64, 0.5), Err(Error::ParameterCondition { .. })));
        assert!(a_pq(2.5_f64, 0.9).is_err());
    }

    #[test]
    fn renyi_order_branches() {
        assert_eq!(RenyiOrder::new(1.0 + 1e-7).unwrap(), RenyiOrder::One);
        assert_eq!(RenyiOrder::new(0.0_f64).unwrap(), RenyiOrder::Zero);
        assert_eq!(RenyiOrder::new(f64::INFINITY).unwrap(), RenyiOrder::Infinity);
        assert!(RenyiOrder::new(-0.5_f64).is_err());
    }

    #[test]
    fn uniform_and_exponential_values() {
        let u = P::<f64>::uniform(1.0).unwrap();
        let e = P::<f64>::symmetric_exponential(1.0).unwrap();
        let ln2 = 2f64.ln();
        for q in [0.0, 0.3, 1.0, 2.5, f64::INFINITY] {
            assert!((renyi_entropy(&u, RenyiOrder::new(q).unwrap()) - ln2).abs() < 1e-14);
        }
        assert!((renyi_entropy(&e, RenyiOrder::One) - (1.0 + ln2)).abs() < 1e-14);
        assert!((renyi_entropy(&e, RenyiOrder::Infinity) - ln2).abs() < 1e-14);
        assert!(renyi_entropy(&e, RenyiOrder::Zero).is_infinite());
        assert!((moment_p(&u, 2.0).unwrap() - 3f64.sqrt().recip()).abs() < 1e-13);
        assert!((moment_p(&e, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((log_moment_limit(&u) + 1.0).abs() < 1e-12);
        assert!((log_moment_limit(&e) + crate::special::EULER_GAMMA).abs() < 1e-11);
        assert!(moment_p(&u, 0.0).is_err());
    }

    #[test]
    fn entropy_powers_and_isotropic_constants() {
        let g = Gaussian::new(3.0_f64).unwrap();
        assert!((entropy_power(&g) - 3.0).abs() < 1e-12);
        let u = P::<f64>::uniform(3f64.sqrt()).unwrap();
        let pe = std::f64::consts::PI * std::f64::consts::E;
        assert!((entropy_power(&u) - 6.0 / pe).abs() < 1e-13);
        let e = P::<f64>::symmetric_exponential(1.0).unwrap();
        assert!((entropy_power(&e) / e.variance() - std::f64::consts::E / std::f64::consts::PI).abs() < 1e-12);
        assert!((isotropic_constant_sq(&u) - 1.0 / 12.0).abs() < 1e-14);
        assert!((isotropic_constant_sq(&e) - 0.5).abs() < 1e-12);
        assert!((isotropic_constant_sq(&g) - 1.0 / std::f64::consts::TAU).abs() < 1e-14);
        assert!((renyi_entropy_power(&g, 1.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn divergences_from_gaussianity() {
        let u = P::<f64>::uniform(1.0).unwrap();
        let pe = std::f64::consts::PI * std::f64::consts::E;
        assert!((relative_entropy_from_gaussianity(&u) - 0.5 * (pe / 6.0).ln()).abs() < 1e-13);
        let e = P::<f64>::symmetric_exponential(1.0).unwrap();
        let want = 0.5 * (std::f64::consts::PI / std::f64::consts::E).ln();
        assert!((relative_entropy_from_gaussianity(&e) - want).abs() < 1e-12);
        let z = Gaussian::new(1.0 / 3.0).unwrap();
        let d = relative_entropy(&u, &z);
        assert!((d.value - 0.5 * (pe / 6.0).ln()).abs() < 1e-10);
        let back = relative_entropy(&z, &u);
        assert!(back.value.is_infinite() && back.unsupported_mass > 0.05);
    }

    #[test]
    fn relative_q_entropy_routes_agree() {
        // bounded f: against a Gaussian, u^{q−1} grows too fast for exponential tails
        let f = P::<f64>::normalized(vec![0.0, 0.5, 2.0], vec![0.4, 1.5], true).unwrap();
        let u = Gaussian::new(1.7_f64).unwrap();
        for q in [0.4, 0.75] {
            let direct = relative_q_entropy(&f, &u, q).unwrap().value;
            let escort = relative_q_entropy_escort(f.clone(), u, q).unwrap().value;
            assert!(direct > 0.0);
            assert!((direct - escort).abs() < 1e-9, "{direct} vs {escort}");
        }
        let one = relative_q_entropy(&f, &u, 1.0).unwrap().value;
        assert!((one - relative_entropy(&f, &u).value).abs() < 1e-15);
        assert!(relative_q_entropy(&f, &f, 0.5).unwrap().value.abs() < 1e-12);
    }
}
