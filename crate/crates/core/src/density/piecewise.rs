use serde::{Deserialize, Serialize};

use super::Density;
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::real::{c, Real};

/// Even log-concave density `f(x) = exp(log_f0 − V(|x|))` with `V` convex and
/// piecewise linear on `[0, ∞)`.
///
/// `breakpoints` starts at 0. A bounded density carries one more breakpoint than
/// slopes (the last one is the support edge); an unbounded density has one
/// breakpoint per slope and its final piece extends to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Repr<T>", into = "Repr<T>", bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct PiecewiseLogLinearDensity<T: Real> {
    breakpoints: Vec<T>,
    slopes: Vec<T>,
    log_f0: T,
    bounded: bool,
    /// Potential value `V` at each piece start, relative to `V(0) = −log_f0`.
    levels: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct Repr<T> {
    breakpoints: Vec<T>,
    slopes: Vec<T>,
    log_f0: T,
    bounded: bool,
}

impl<T: Real> TryFrom<Repr<T>> for PiecewiseLogLinearDensity<T> {
    type Error = Error;
    fn try_from(r: Repr<T>) -> Result<Self> {
        Self::new(r.breakpoints, r.slopes, r.log_f0, r.bounded)
    }
}

impl<T: Real> From<PiecewiseLogLinearDensity<T>> for Repr<T> {
    fn from(d: PiecewiseLogLinearDensity<T>) -> Self {
        Repr { breakpoints: d.breakpoints, slopes: d.slopes, log_f0: d.log_f0, bounded: d.bounded }
    }
}

/// `∫_0^L e^{−s u} du`.
pub(crate) fn exp_segment<T: Real>(s: T, len: T) -> T {
    if s == T::zero() {
        return len;
    }
    if len.is_infinite() {
        return T::one() / s;
    }
    -(-s * len).exp_m1() / s
}

/// `∫_0^L u e^{−s u} du`.
pub(crate) fn exp_segment_first_moment<T: Real>(s: T, len: T) -> T {
    if s == T::zero() {
        return len * len * c(0.5);
    }
    if len.is_infinite() {
        return T::one() / (s * s);
    }
    let x = s * len;
    // 1 − e^{−x}(1 + x), with a series for small x
    let num = if x < c(1e-2) {
        let mut term = x * x * c(0.5);
        let mut acc = term;
        for n in 3..12 {
            let nf = T::from_usize_lossy(n);
            term = -term * x / nf;
            acc += term * (nf - T::one());
        }
        acc
    } else {
        -(-x).exp_m1() - x * (-x).exp()
    };
    num / (s * s)
}

impl<T: Real> PiecewiseLogLinearDensity<T> {
    /// Validates the potential and precomputes piece levels. Does not normalize.
    pub fn new(breakpoints: Vec<T>, slopes: Vec<T>, log_f0: T, bounded: bool) -> Result<Self> {
        if slopes.is_empty() {
            return Err(Error::Empty);
        }
        let expected = slopes.len() + usize::from(bounded);
        if breakpoints.len() != expected {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints for {} slopes (bounded = {bounded})",
                breakpoints.len(),
                slopes.len()
            )));
        }
        if breakpoints[0] != T::zero() {
            return Err(Error::InvalidPotential("first breakpoint must be 0".into()));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) || slopes.iter().any(|s| !s.is_finite()) || !log_f0.is_finite() {
            return Err(Error::InvalidPotential("non-finite parameter".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPotential("breakpoints must increase strictly".into()));
        }
        if slopes[0] < T::zero() || slopes.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidPotential("slopes must be nonnegative and nondecreasing".into()));
        }
        if !bounded && *slopes.last().unwrap() <= T::zero() {
            return Err(Error::InfiniteMass);
        }
        let mut levels = Vec::with_capacity(slopes.len());
        let mut v = -log_f0;
        levels.push(v);
        for k in 1..slopes.len() {
            v += slopes[k - 1] * (breakpoints[k] - breakpoints[k - 1]);
            levels.push(v);
        }
        Ok(PiecewiseLogLinearDensity { breakpoints, slopes, log_f0, bounded, levels })
    }

    /// Rescales so the total mass is 1; piece masses use the exponential-segment primitive.
    pub fn normalize(&self) -> Result<Self> {
        let m = self.raw_mass();
        if !m.is_finite() {
            return Err(Error::InfiniteMass);
        }
        Self::new(self.breakpoints.clone(), self.slopes.clone(), self.log_f0 - m.ln(), self.bounded)
    }

    /// Validated and normalized in one step.
    pub fn normalized(breakpoints: Vec<T>, slopes: Vec<T>, bounded: bool) -> Result<Self> {
        Self::new(breakpoints, slopes, T::zero(), bounded)?.normalize()
    }

    /// Uniform density on `[−w, w]`.
    pub fn uniform(half_width: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::OutOfRange("uniform half-width must be positive".into()));
        }
        Self::new(vec![T::zero(), half_width], vec![T::zero()], -(half_width + half_width).ln(), true)
    }

    /// Symmetrized exponential `(c/2) e^{−c|x|}`.
    pub fn symmetric_exponential(rate: T) -> Result<Self> {
        if !(rate > T::zero()) {
            return Err(Error::OutOfRange("rate must be positive".into()));
        }
        Self::new(vec![T::zero()], vec![rate], (rate * c(0.5)).ln(), false)
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    pub fn log_f0(&self) -> T {
        self.log_f0
    }

    pub fn bounded(&self) -> bool {
        self.bounded
    }

    pub fn pieces(&self) -> usize {
        self.slopes.len()
    }

    /// Right end of the support on `[0, ∞)`.
    pub fn edge(&self) -> Option<T> {
        self.bounded.then(|| *self.breakpoints.last().unwrap())
    }

    /// Potential `V(|x|) = −log f(x)` (infinite outside the support).
    pub fn potential(&self, x: T) -> T {
        let r = x.abs();
        if let Some(e) = self.edge() {
            if r > e {
                return T::infinity();
            }
        }
        let k = self.piece_index(r);
        self.levels[k] + self.slopes[k] * (r - self.breakpoints[k])
    }

    fn piece_index(&self, r: T) -> usize {
        let k = self.breakpoints[..self.slopes.len()].partition_point(|&b| b <= r);
        k.saturating_sub(1)
    }

    fn piece_len(&self, k: usize) -> T {
        if k + 1 < self.breakpoints.len() {
            self.breakpoints[k + 1] - self.breakpoints[k]
        } else {
            T::infinity()
        }
    }

    /// Unnormalized mass `2 Σ e^{−v_k} ∫ e^{−s_k u} du`.
    fn raw_mass(&self) -> T {
        let two = c::<T>(2.0);
        (0..self.pieces())
            .map(|k| (-self.levels[k]).exp() * exp_segment(self.slopes[k], self.piece_len(k)))
            .sum::<T>()
            * two
    }

    /// `∫_0^r f` in closed form.
    pub fn half_cdf(&self, r: T) -> T {
        if r <= T::zero() {
            return T::zero();
        }
        let mut acc = T::zero();
        for k in 0..self.pieces() {
            let start = self.breakpoints[k];
            if r <= start {
                break;
            }
            let len = self.piece_len(k).min(r - start);
            acc += (-self.levels[k]).exp() * exp_segment(self.slopes[k], len);
        }
        acc
    }

    /// Density of `λX`.
    pub fn scale(&self, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::OutOfRange("scale must be positive".into()));
        }
        Self::new(
            self.breakpoints.iter().map(|&b| b * lambda).collect(),
            self.slopes.iter().map(|&s| s / lambda).collect(),
            self.log_f0 - lambda.ln(),
            self.bounded,
        )
    }

    /// `∫_0^∞ h(x) dx` split at the breakpoints.
    fn piece_quad(&self, h: &dyn Fn(T) -> T) -> T {
        let tol = Tolerance { abs: 1e-15, rel: 1e-13 };
        (0..self.pieces())
            .map(|k| {
                let a = self.breakpoints[k];
                quad::integrate(a, a + self.piece_len(k), h, tol)
            })
            .sum()
    }

    /// `∫_0^∞ g(x) f(x) dx`.
    fn half_integral(&self, g: &dyn Fn(T) -> T) -> T {
        self.piece_quad(&|x| g(x) * self.pdf(x))
    }

    /// Point-sampled check of evenness, monotonicity and midpoint log-concavity.
    pub fn check_shape(&self, probes: &[(T, T)]) -> bool {
        let tiny = c::<T>(1e-12);
        probes.iter().all(|&(x, y)| {
            let (fx, fy) = (self.pdf(x), self.pdf(y));
            let fm = self.pdf((x + y) * c(0.5));
            let even = (self.pdf(-x) - fx).abs() <= tiny * fx.max(T::one());
            let unimodal = fx <= self.peak() * (T::one() + tiny);
            let concave = fx == T::zero() || fy == T::zero() || fm.ln() + tiny >= (fx.ln() + fy.ln()) * c(0.5);
            even && unimodal && concave
        })
    }
}

impl<T: Real> Density<T> for PiecewiseLogLinearDensity<T> {
    fn pdf(&self, x: T) -> T {
        (-self.potential(x)).exp()
    }

    fn support(&self) -> (T, T) {
        match self.edge() {
            Some(e) => (-e, e),
            None => (T::neg_infinity(), T::infinity()),
        }
    }

    fn knots(&self) -> Vec<T> {
        let inner = &self.breakpoints[1..self.pieces()];
        let mut k: Vec<T> = inner.iter().rev().map(|&b| -b).collect();
        k.push(T::zero());
        k.extend(inner.iter().copied());
        k
    }

    fn peak(&self) -> T {
        self.log_f0.exp()
    }

    fn is_even(&self) -> bool {
        true
    }

    fn is_symmetric_log_concave(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        serde_json::to_string(&Repr {
            breakpoints: self.breakpoints.iter().map(|x| x.as_f64()).collect(),
            slopes: self.slopes.iter().map(|x| x.as_f64()).collect(),
            log_f0: self.log_f0.as_f64(),
            bounded: self.bounded,
        })
        .unwrap_or_default()
    }

    fn integrate(&self, g: &dyn Fn(T, T) -> T) -> T {
        self.piece_quad(&|x| {
            let f = self.pdf(x);
            g(x, f) + g(-x, f)
        })
    }

    fn mass(&self) -> T {
        self.raw_mass()
    }

    fn mean(&self) -> T {
        T::zero()
    }

    fn variance(&self) -> T {
        self.abs_moment(c(2.0)) / self.mass()
    }

    fn abs_moment(&self, p: T) -> T {
        c::<T>(2.0) * self.half_integral(&|x| x.powf(p))
    }

    fn entropy(&self) -> T {
        // −∫ f log f = 2 Σ ∫ V e^{−V} on each piece
        let mut acc = T::zero();
        for k in 0..self.pieces() {
            let (v, s, len) = (self.levels[k], self.slopes[k], self.piece_len(k));
            let w = (-v).exp();
            acc += w * (v * exp_segment(s, len) + s * exp_segment_first_moment(s, len));
        }
        c::<T>(2.0) * acc
    }

    fn power_integral(&self, q: T) -> T {
        let mut acc = T::zero();
        for k in 0..self.pieces() {
            acc += (-q * self.levels[k]).exp() * exp_segment(q * self.slopes[k], self.piece_len(k));
        }
        c::<T>(2.0) * acc
    }

    fn log_abs_moment(&self) -> T {
        c::<T>(2.0) * self.half_integral(&|x| if x > T::zero() { x.ln() } else { T::zero() })
    }

    fn support_measure(&self) -> T {
        match self.edge() {
            Some(e) => e + e,
            None => T::infinity(),
        }
    }

    fn interval_mass(&self, a: T, b: T) -> T {
        if b <= a {
            return T::zero();
        }
        let signed = |x: T| if x >= T::zero() { self.half_cdf(x) } else { -self.half_cdf(-x) };
        signed(b) - signed(a)
    }

    fn cell_mass(&self, a: T, b: T) -> T {
        self.interval_mass(a, b)
    }

    fn upper_tail_point(&self, eps: T) -> T {
        if let Some(e) = self.edge() {
            return e;
        }
        let k = self.pieces() - 1;
        let (x0, v, s) = (self.breakpoints[k], self.levels[k], self.slopes[k]);
        // mass beyond r is e^{−v − s(r − x0)} / s
        let excess = ((-v).exp() / (s * eps)).ln() / s;
        x0 + excess.max(T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_plateau_normalizes_to_half() {
        let d = PiecewiseLogLinearDensity::<f64>::normalized(vec![0.0, 1.0], vec![0.0], true).unwrap();
        assert!((d.peak() - 0.5).abs() < 1e-15);
        assert!((d.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_unbounded_piece_is_symmetric_exponential() {
        let d = PiecewiseLogLinearDensity::<f64>::normalized(vec![0.0], vec![1.0], false).unwrap();
        assert!((d.peak() - 0.5).abs() < 1e-15);
        assert!((d.pdf(2.0) - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn plateau_with_exponential_tail_matches_closed_form_and_trapezoid() {
        // plateau [0,1], then slope 1 on [1,2]
        let d = PiecewiseLogLinearDensity::<f64>::normalized(vec![0.0, 1.0, 2.0], vec![0.0, 1.0], true).unwrap();
        let cst = 1.0 / (2.0 * (2.0 - (-1.0f64).exp()));
        assert!((d.peak() - cst).abs() < 1e-15);
        // independent trapezoid oracle on the unnormalized potential
        let n = 200_000;
        let h = 2.0 / n as f64;
        let raw = |x: f64| if x <= 1.0 { 1.0 } else { (-(x - 1.0)).exp() };
        let trap: f64 = (0..=n).map(|i| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * raw(i as f64 * h)
        }).sum::<f64>() * h * 2.0;
        assert!((trap * cst - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_infinite_mass_and_bad_slopes() {
        assert_eq!(PiecewiseLogLinearDensity::<f64>::new(vec![0.0], vec![0.0], 0.0, false), Err(Error::InfiniteMass));
        assert!(PiecewiseLogLinearDensity::<f64>::new(vec![0.0, 1.0], vec![2.0, 1.0], 0.0, false).is_err());
        assert!(PiecewiseLogLinearDensity::<f64>::new(vec![], vec![], 0.0, false).is_err());
        assert!(PiecewiseLogLinearDensity::<f64>::new(vec![0.0, 2.0, 1.0], vec![0.0, 1.0], 0.0, true).is_err());
    }

    #[test]
    fn exp_segment_moment_series_is_continuous() {
        let s = 1.0_f64;
        let below = exp_segment_first_moment(s, 0.00999999);
        let above = exp_segment_first_moment(s, 0.01000001);
        assert!((below - above).abs() < 1e-9);
        let tiny = exp_segment_first_moment(1.0_f64, 1e-9);
        assert!((tiny - (0.5e-18 - 1e-27 / 3.0)).abs() < 1e-32);
    }

    #[test]
    fn closed_forms_match_generic_quadrature() {
        let d = PiecewiseLogLinearDensity::<f64>::normalized(vec![0.0, 0.7, 1.9], vec![0.3, 1.1, 2.5], false).unwrap();
        let tol = Tolerance::default();
        let f = |x: f64| d.pdf(x);
        let knots = d.knots();
        let q = |g: &dyn Fn(f64) -> f64| quad::integrate_split(f64::NEG_INFINITY, f64::INFINITY, &knots, g, tol);
        assert!((q(&f) - 1.0).abs() < 1e-11);
        let ent = q(&|x| { let v = f(x); if v > 0.0 { -v * v.ln() } else { 0.0 } });
        assert!((ent - d.entropy()).abs() < 1e-10);
        let pq = q(&|x| f(x).powf(0.37));
        assert!((pq - d.power_integral(0.37)).abs() < 1e-10);
        assert!((d.half_cdf(1.3) * 2.0 - d.interval_mass(-1.3, 1.3)).abs() < 1e-15);
        let cdf = quad::integrate_split(0.0, 1.3, &knots, &f, tol);
        assert!((cdf - d.half_cdf(1.3)).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_uses_documented_field_names() {
        let d = PiecewiseLogLinearDensity::<f64>::symmetric_exponential(1.0).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"breakpoints\"") && s.contains("\"log_f0\"") && s.contains("\"bounded\":false"));
        let back: PiecewiseLogLinearDensity<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let bad = r#"{"breakpoints":[0.0],"slopes":[0.0],"log_f0":0.0,"bounded":false}"#;
        assert!(serde_json::from_str::<PiecewiseLogLinearDensity<f64>>(bad).is_err());
    }
}
