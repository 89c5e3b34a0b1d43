//! Every inequality as a signed gap: `gap ≥ 0` means the bound holds.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{
    convolve, random_log_concave, to_grid, Density, Gaussian, GeneralizedGaussian,
    PiecewiseLogLinearDensity, PositiveDensity, Triangle, DEFAULT_GRID_POINTS, DEFAULT_TAIL_EPS,
};
use crate::error::{Error, Result};
use crate::functionals::{
    constants, entropy_power, isotropic_constant_sq, log_moment_limit, moment_p, relative_entropy_from_gaussianity,
    relative_q_entropy, renyi_entropy, renyi_entropy_power, RenyiOrder, Units,
};
use crate::real::{c, Real};
use crate::special::{gamma, ln_gamma};

/// Tolerance for gaps evaluated in closed form or by adaptive quadrature.
pub const CLOSED_FORM_TOL: f64 = 1e-7;
/// Tolerance for gaps that go through a grid (convolutions, `I_q`).
pub const GRID_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Equality,
    Violated,
    /// No oracle was available to test the claim.
    Unchecked,
    /// Reported for exploration; never a pass/fail gate.
    Exploratory,
}

impl Verdict {
    /// `equality` iff `|gap| ≤ tol` (sharp bounds only), `violated` iff `gap < −tol`.
    pub fn classify(gap: f64, tol: f64, sharp: bool) -> Verdict {
        if gap.is_nan() || gap < -tol {
            Verdict::Violated
        } else if sharp && gap.abs() <= tol {
            Verdict::Equality
        } else {
            Verdict::Holds
        }
    }
}

/// Scale of the reported numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Nats,
    Bits,
    /// Dimensionless ratios and moments; unaffected by the unit flag.
    Ratio,
}

/// One evaluated inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub units: Scale,
    pub sharp: bool,
}

impl BoundReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        inputs: String,
        params: &[(&str, f64)],
        lhs: f64,
        rhs: f64,
        gap: f64,
        tolerance: f64,
        units: Scale,
        sharp: bool,
    ) -> Self {
        BoundReport {
            name: name.to_string(),
            inputs,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs,
            rhs,
            gap,
            tolerance,
            verdict: Verdict::classify(gap, tolerance, sharp),
            units,
            sharp,
        }
    }

    /// Same report judged at a different tolerance.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        if !matches!(self.verdict, Verdict::Unchecked | Verdict::Exploratory) {
            self.verdict = Verdict::classify(self.gap, tol, self.sharp);
        }
        self
    }

    pub fn with_verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict != Verdict::Violated
    }

    /// Converts nat-valued reports to bits; ratios are left alone.
    pub fn in_units(mut self, units: Units) -> Self {
        if self.units == Scale::Nats && units == Units::Bits {
            let k = Units::Bits.from_nats(1.0);
            self.lhs *= k;
            self.rhs *= k;
            self.gap *= k;
            self.tolerance *= k;
            self.units = Scale::Bits;
        }
        self
    }
}

fn require_even<T: Real, D: Density<T> + ?Sized>(d: &D) -> Result<()> {
    if d.is_even() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("{} is not an even density", d.describe())))
    }
}

fn check_p_unit<T: Real>(p: T) -> Result<()> {
    if p > T::zero() && p <= c(2.0) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("p = {p} must lie in (0, 2]")))
    }
}

/// `log[2 (p+1)^{1/p}]`.
pub fn uniform_constant<T: Real>(p: T) -> T {
    c::<T>(2.0).ln() + (p + T::one()).ln() / p
}

/// `h(X) ≥ log σ_p(X) + log[2(p+1)^{1/p}]` for `p ∈ (0, 2]`; equality iff uniform.
pub fn thm1_gap<T: Real, D: Density<T> + ?Sized>(d: &D, p: T) -> Result<BoundReport> {
    check_p_unit(p)?;
    require_even(d)?;
    let lhs = d.entropy();
    let rhs = moment_p(d, p)?.ln() + uniform_constant(p);
    Ok(BoundReport::new(
        "thm1",
        d.describe(),
        &[("p", p.as_f64())],
        lhs.as_f64(),
        rhs.as_f64(),
        (lhs - rhs).as_f64(),
        CLOSED_FORM_TOL,
        Scale::Nats,
        true,
    ))
}

/// `6/(πe) ≤ N/Var ≤ 1`; the gap is the distance to the nearer end.
pub fn sandwich<T: Real, D: Density<T> + ?Sized>(d: &D) -> Result<BoundReport> {
    require_even(d)?;
    let ratio = (entropy_power(d) / d.variance()).as_f64();
    let lower = 6.0 / (std::f64::consts::PI * std::f64::consts::E);
    let gap = (ratio - lower).min(1.0 - ratio);
    Ok(BoundReport::new(
        "sandwich",
        d.describe(),
        &[("lower", lower), ("upper", 1.0)],
        ratio,
        lower,
        gap,
        CLOSED_FORM_TOL,
        Scale::Ratio,
        true,
    ))
}

/// `D(X) ≤ ½ log(πe/6)`; equality iff uniform.
pub fn gaussianity_gap<T: Real, D: Density<T> + ?Sized>(d: &D) -> Result<BoundReport> {
    require_even(d)?;
    let lhs = relative_entropy_from_gaussianity(d).as_f64();
    let rhs = 0.5 * (std::f64::consts::PI * std::f64::consts::E / 6.0).ln();
    Ok(BoundReport::new("gaussianity", d.describe(), &[], lhs, rhs, rhs - lhs, CLOSED_FORM_TOL, Scale::Nats, true))
}

/// `f(0)^p ∫|x|^p f ≤ 2^{−p} Γ(p+1) (∫f)^{p+1}` for any `p > 0`.
pub fn rev_hensley_gap<T: Real, D: Density<T> + ?Sized>(d: &D, p: T) -> Result<BoundReport> {
    if !(p > T::zero()) {
        return Err(Error::OutOfRange(format!("p = {p} must be positive")));
    }
    require_even(d)?;
    let lhs = d.peak().powf(p) * d.abs_moment(p);
    let rhs = c::<T>(2.0).powf(-p) * gamma(p + T::one()) * d.mass().powf(p + T::one());
    Ok(BoundReport::new(
        "rev_hensley",
        d.describe(),
        &[("p", p.as_f64())],
        lhs.as_f64(),
        rhs.as_f64(),
        (rhs - lhs).as_f64(),
        CLOSED_FORM_TOL,
        Scale::Ratio,
        true,
    ))
}

/// `h_∞(X) ≥ log σ_p(X) + (1/p) log[2^p / Γ(p+1)]`.
pub fn hinf_gap<T: Real, D: Density<T> + ?Sized>(d: &D, p: T) -> Result<BoundReport> {
    if !(p > T::zero()) {
        return Err(Error::OutOfRange(format!("p = {p} must be positive")));
    }
    require_even(d)?;
    let lhs = renyi_entropy(d, RenyiOrder::Infinity);
    let rhs = moment_p(d, p)?.ln() + (p * c::<T>(2.0).ln() - ln_gamma(p + T::one())) / p;
    Ok(BoundReport::new(
        "hinf",
        d.describe(),
        &[("p", p.as_f64())],
        lhs.as_f64(),
        rhs.as_f64(),
        (lhs - rhs).as_f64(),
        CLOSED_FORM_TOL,
        Scale::Nats,
        true,
    ))
}

/// `L_f² = f(0)² Var ≤ ½`; equality at the symmetrized exponential.
pub fn isotropic_gap<T: Real, D: Density<T> + ?Sized>(d: &D) -> Result<BoundReport> {
    require_even(d)?;
    let lhs = isotropic_constant_sq(d).as_f64();
    Ok(BoundReport::new("isotropic", d.describe(), &[], lhs, 0.5, 0.5 - lhs, CLOSED_FORM_TOL, Scale::Ratio, true))
}

/// `h_q(X) ≥ log σ_p(X) + log[2(p+1)^{1/p}]` for `p ∈ (0,2]`, `q ∈ [0,1]`.
///
/// At `q = 0` an unbounded density has `h_0 = ∞` and the bound holds trivially.
pub fn renyi_gap<T: Real, D: Density<T> + ?Sized>(d: &D, p: T, q: T) -> Result<BoundReport> {
    check_p_unit(p)?;
    require_even(d)?;
    if !(q >= T::zero() && q <= T::one()) {
        return Err(Error::OutOfRange(format!("q = {q} must lie in [0, 1]")));
    }
    let lhs = renyi_entropy(d, RenyiOrder::new(q)?);
    let rhs = moment_p(d, p)?.ln() + uniform_constant(p);
    Ok(BoundReport::new(
        "renyi",
        d.describe(),
        &[("p", p.as_f64()), ("q", q.as_f64())],
        lhs.as_f64(),
        rhs.as_f64(),
        (lhs - rhs).as_f64(),
        CLOSED_FORM_TOL,
        Scale::Nats,
        true,
    ))
}

/// The `p ↓ 0` form: `h_q(X) ≥ E log|X| + log(2e)`.
pub fn renyi_log_gap<T: Real, D: Density<T> + ?Sized>(d: &D, q: T) -> Result<BoundReport> {
    require_even(d)?;
    if !(q >= T::zero() && q <= T::one()) {
        return Err(Error::OutOfRange(format!("q = {q} must lie in [0, 1]")));
    }
    let lhs = renyi_entropy(d, RenyiOrder::new(q)?);
    let rhs = log_moment_limit(d) + (c::<T>(2.0) * T::E()).ln();
    Ok(BoundReport::new(
        "renyi_log",
        d.describe(),
        &[("q", q.as_f64())],
        lhs.as_f64(),
        rhs.as_f64(),
        (lhs - rhs).as_f64(),
        CLOSED_FORM_TOL,
        Scale::Nats,
        true,
    ))
}

/// `log q / (q − 1)`, continuous at 1 (value 1) and 0 at `q = ∞`.
pub fn order_slack(q: f64) -> f64 {
    if q.is_infinite() {
        0.0
    } else if (q - 1.0).abs() < 1e-6 {
        1.0 - (q - 1.0) / 2.0
    } else {
        q.ln() / (q - 1.0)
    }
}

/// Non-sharp bound for `q > 1`: `h_q ≥ log σ_p + log[2(p+1)^{1/p}] − (1 − log q/(q−1))`,
/// from the Shannon case and the order comparison between 1 and `q`.
///
/// The often-quoted slack `log q/(q−1)` alone fails, e.g. for the symmetrized
/// exponential at large `q`; it is kept in the params as `display_slack`.
pub fn renyi_gap_above_one<T: Real, D: Density<T> + ?Sized>(d: &D, p: T, q: T) -> Result<BoundReport> {
    check_p_unit(p)?;
    require_even(d)?;
    if !(q > T::one()) {
        return Err(Error::OutOfRange(format!("q = {q} must exceed 1")));
    }
    let lhs = renyi_entropy(d, RenyiOrder::new(q)?);
    let display_slack = order_slack(q.as_f64());
    let slack = 1.0 - display_slack;
    let rhs = (moment_p(d, p)?.ln() + uniform_constant(p)).as_f64() - slack;
    let lhs = lhs.as_f64();
    Ok(BoundReport::new(
        "renyi_above_one",
        d.describe(),
        &[("p", p.as_f64()), ("q", q.as_f64()), ("slack", slack), ("display_slack", display_slack)],
        lhs,
        rhs,
        lhs - rhs,
        CLOSED_FORM_TOL,
        Scale::Nats,
        false,
    ))
}

/// Order comparison for log-concave densities: `h_q − h_p ≤ s(q) − s(p)` for
/// `p ≥ q > 0`, with `s(r) = log r/(r−1)`; equality at the symmetrized exponential.
pub fn renyi_order_gap<T: Real, D: Density<T> + ?Sized>(d: &D, q: T, p: T) -> Result<BoundReport> {
    if !(q > T::zero() && p >= q) {
        return Err(Error::OutOfRange("order comparison needs p ≥ q > 0".into()));
    }
    let lhs = (renyi_entropy(d, RenyiOrder::new(q)?) - renyi_entropy(d, RenyiOrder::new(p)?)).as_f64();
    let rhs = order_slack(q.as_f64()) - order_slack(p.as_f64());
    Ok(BoundReport::new(
        "renyi_order",
        d.describe(),
        &[("q", q.as_f64()), ("p", p.as_f64())],
        lhs,
        rhs,
        rhs - lhs,
        CLOSED_FORM_TOL,
        Scale::Nats,
        true,
    ))
}

/// Rényi entropies are nonincreasing in the order: `h_{q1} ≥ h_{q2}` for `q1 < q2`.
pub fn renyi_monotonicity<T: Real, D: Density<T> + ?Sized>(d: &D, q1: T, q2: T) -> Result<BoundReport> {
    if !(q1 < q2) {
        return Err(Error::OutOfRange("monotonicity needs q1 < q2".into()));
    }
    let lhs = renyi_entropy(d, RenyiOrder::new(q1)?).as_f64();
    let rhs = renyi_entropy(d, RenyiOrder::new(q2)?).as_f64();
    let gap = if lhs.is_infinite() && lhs > 0.0 { f64::INFINITY } else { lhs - rhs };
    Ok(BoundReport::new(
        "renyi_monotone",
        d.describe(),
        &[("q1", q1.as_f64()), ("q2", q2.as_f64())],
        lhs,
        rhs,
        gap,
        1e-8,
        Scale::Nats,
        false,
    ))
}

/// `h(f) ≥ (1/p)[log E X^p + log(p+1)]` for nonincreasing log-concave `f` on `(0, ∞)`.
pub fn positive_halfline_gap<T: Real, D: Density<T> + ?Sized>(f: &D, p: T) -> Result<BoundReport> {
    check_p_unit(p)?;
    if f.support().0 < T::zero() {
        return Err(Error::OutOfRange(format!("{} is not supported on [0, ∞)", f.describe())));
    }
    let lhs = f.entropy();
    let rhs = ((f.abs_moment(p) / f.mass()).ln() + (p + T::one()).ln()) / p;
    Ok(BoundReport::new(
        "halfline",
        f.describe(),
        &[("p", p.as_f64())],
        lhs.as_f64(),
        rhs.as_f64(),
        (lhs - rhs).as_f64(),
        CLOSED_FORM_TOL,
        Scale::Nats,
        true,
    ))
}

/// Constant of the `N_q` reverse EPI, `(A_{2,q}²/12)(1 + β/2)^{2/(1−q)}`; `πe/6` at `q = 1`.
pub fn repi_constant(q: f64) -> Result<f64> {
    if RenyiOrder::new(q)? == RenyiOrder::One {
        return Ok(std::f64::consts::PI * std::f64::consts::E / 6.0);
    }
    let a = constants::a_pq(2.0, q)?;
    let b = constants::beta(2.0, q);
    Ok(a * a / 12.0 * (1.0 + b / 2.0).powf(2.0 / (1.0 - q)))
}

/// Reverse EPI for independent even log-concave `X`, `Y`:
/// `N_q(X+Y) ≤ K_q [N_q(X) + N_q(Y)]`, with the sum's density obtained by grid
/// convolution on `n_points` nodes per input.
pub fn repi_check<T: Real, A: Density<T> + ?Sized, B: Density<T> + ?Sized>(
    a: &A,
    b: &B,
    q: T,
    n_points: usize,
) -> Result<BoundReport> {
    require_even(a)?;
    require_even(b)?;
    let k = repi_constant(q.as_f64())?;
    let eps = c::<T>(DEFAULT_TAIL_EPS);
    let w = a.upper_tail_point(eps * c(0.25)).max(b.upper_tail_point(eps * c(0.25)));
    let ga = to_grid(a, w, n_points, eps)?;
    let gb = to_grid(b, w, n_points, eps)?;
    let sum = convolve(&ga, &gb)?;
    let lhs = renyi_entropy_power(&sum, q)?.as_f64();
    let nx = renyi_entropy_power(a, q)?.as_f64();
    let ny = renyi_entropy_power(b, q)?.as_f64();
    let rhs = k * (nx + ny);
    Ok(BoundReport::new(
        "repi",
        format!("{} + {}", a.describe(), b.describe()),
        &[("q", q.as_f64()), ("constant", k), ("n_x", nx), ("n_y", ny)],
        lhs,
        rhs,
        rhs - lhs,
        GRID_TOL,
        Scale::Ratio,
        false,
    ))
}

/// `Z` with `E|Z|^p = E|X|^p` from the `q`-Rényi maximizing family.
fn matched_maximizer<T: Real, D: Density<T> + ?Sized>(d: &D, p: T, q: T) -> Result<GeneralizedGaussian<T>> {
    let m = d.abs_moment(p) / d.mass();
    Ok(GeneralizedGaussian::new(p, q)?.with_p_moment(m))
}

/// Identity `I_q(X‖Z) = h_q(Z) − h_q(X)` for `Z` the `h_q`-maximizer with the
/// same `p`-th moment as `X`; the gap is the signed discrepancy.
pub fn q_entropy_identity<T: Real, D: Density<T> + ?Sized>(d: &D, p: T, q: T) -> Result<BoundReport> {
    let z = matched_maximizer(d, p, q)?;
    let lhs = relative_q_entropy(d, &z, q)?.value.as_f64();
    let order = RenyiOrder::new(q)?;
    let rhs = (renyi_entropy(&z, order) - renyi_entropy(d, order)).as_f64();
    let gap = -(lhs - rhs).abs();
    Ok(BoundReport::new(
        "q_entropy_identity",
        d.describe(),
        &[("p", p.as_f64()), ("q", q.as_f64())],
        lhs,
        rhs,
        gap,
        GRID_TOL,
        Scale::Nats,
        false,
    ))
}

/// `I_q(X‖Z) ≤ h_q(Z₁) − log[2(p+1)^{1/p}]`, `Z₁` the maximizer with unit `p`-th
/// moment; equality iff uniform. The printed closed-form constant is kept in
/// `params` as `display_constant`.
pub fn relative_q_entropy_gap<T: Real, D: Density<T> + ?Sized>(d: &D, p: T, q: T) -> Result<BoundReport> {
    check_p_unit(p)?;
    require_even(d)?;
    if !(q < T::one()) {
        return Err(Error::OutOfRange("relative q-entropy bound needs q < 1".into()));
    }
    let k = constants::constants(p.as_f64(), q.as_f64())?;
    let z = matched_maximizer(d, p, q)?;
    let lhs = relative_q_entropy(d, &z, q)?.value.as_f64();
    let rhs = k.max_renyi_entropy - uniform_constant(p.as_f64());
    let b = k.beta.unwrap_or(f64::NAN);
    let display = (k.a_pq * (1.0 + b / p.as_f64()).powf(1.0 / (1.0 - q.as_f64()))).ln() - uniform_constant(p.as_f64());
    Ok(BoundReport::new(
        "relative_q_entropy",
        d.describe(),
        &[("p", p.as_f64()), ("q", q.as_f64()), ("display_constant", display)],
        lhs,
        rhs,
        rhs - lhs,
        GRID_TOL,
        Scale::Nats,
        true,
    ))
}

/// `ℓ(t) = √(2t + (a²/3)(1−t)) · [t/2 + (1−t)/(2a)]`.
pub fn ell(a: f64, t: f64) -> f64 {
    (2.0 * t + a * a / 3.0 * (1.0 - t)).sqrt() * (t / 2.0 + (1.0 - t) / (2.0 * a))
}

/// Signs of `ℓ''(t)` on `t = 0.02, 0.04, …, 0.98` by central differences; holds iff both signs occur.
pub fn iso_nonconvexity_fixture(a: f64) -> BoundReport {
    let h = 1e-4;
    let second: Vec<f64> = (1..=49)
        .map(|i| {
            let t = 0.02 * i as f64;
            (ell(a, t + h) - 2.0 * ell(a, t) + ell(a, t - h)) / (h * h)
        })
        .collect();
    let lo = second.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = second.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let both = lo < 0.0 && hi > 0.0;
    let gap = hi.min(-lo);
    let r = BoundReport::new(
        "iso_nonconvexity",
        format!("ell(a={a})"),
        &[("a", a), ("t_min", 0.02), ("t_max", 0.98)],
        lo,
        hi,
        gap,
        0.0,
        Scale::Ratio,
        false,
    );
    if both {
        r.with_verdict(Verdict::Holds)
    } else {
        r.with_verdict(Verdict::Violated)
    }
}

/// Named groups of inequalities for [`batch_verify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Thm1,
    Sandwich,
    Gaussianity,
    RevHensley,
    Hinf,
    Isotropic,
    Renyi,
    RenyiLog,
    RenyiAboveOne,
    RenyiOrder,
    Halfline,
    Repi,
    QEntropy,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::Thm1,
        Suite::Sandwich,
        Suite::Gaussianity,
        Suite::RevHensley,
        Suite::Hinf,
        Suite::Isotropic,
        Suite::Renyi,
        Suite::RenyiLog,
        Suite::RenyiAboveOne,
        Suite::RenyiOrder,
        Suite::Halfline,
        Suite::Repi,
        Suite::QEntropy,
    ];

    pub fn parse(s: &str) -> Result<Suite> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown suite '{s}'")))
    }
}

/// Parameters of a randomized verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<Suite>,
    /// Moment orders for the `p`-indexed suites (restricted to `(0, 2]` where required).
    pub ps: Vec<f64>,
    /// Rényi orders in `[0, 1]`.
    pub qs: Vec<f64>,
    /// Evaluate every suite on the uniform, Gaussian, symmetrized exponential and triangle fixtures too.
    pub include_fixtures: bool,
    /// Overrides each report's default tolerance.
    pub tolerance: Option<f64>,
    /// Grid size for convolution-based suites.
    pub grid_points: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            seed: 1,
            trials: 100,
            suites: Suite::ALL.to_vec(),
            ps: vec![0.25, 0.5, 1.0, 1.5, 2.0],
            qs: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            include_fixtures: false,
            tolerance: None,
            grid_points: DEFAULT_GRID_POINTS / 2,
        }
    }
}

/// Worst case of one inequality over a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub inequality: String,
    pub trials: usize,
    pub min_gap: f64,
    /// Trial seed reproducing the worst density (`None` for fixtures).
    pub argmin_seed: Option<u64>,
    pub argmin_inputs: String,
}

/// A report tagged with the trial that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    /// `None` for fixtures.
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchOutcome {
    pub reports: Vec<TrialReport>,
    pub summary: Vec<SummaryRow>,
}

impl BatchOutcome {
    pub fn violations(&self) -> usize {
        self.reports.iter().filter(|r| r.report.verdict == Verdict::Violated).count()
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.reports {
            serde_json::to_writer(&mut w, r)?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// `inequality,trials,min_gap,argmin_seed`.
    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "inequality,trials,min_gap,argmin_seed")?;
        for row in &self.summary {
            let seed = row.argmin_seed.map(|s| s.to_string()).unwrap_or_else(|| "fixture".into());
            writeln!(w, "{},{},{:e},{}", row.inequality, row.trials, row.min_gap, seed)?;
        }
        Ok(())
    }
}

/// Seed of trial `i`, derived from the batch seed independently of scheduling.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng.next_u64()
}

/// The four shape fixtures, all with unit variance.
pub fn fixtures() -> Vec<Box<dyn Density<f64> + Send + Sync>> {
    vec![
        Box::new(PiecewiseLogLinearDensity::uniform(3f64.sqrt()).expect("valid")),
        Box::new(Gaussian::new(1.0).expect("valid")),
        Box::new(PiecewiseLogLinearDensity::symmetric_exponential(2f64.sqrt()).expect("valid")),
        Box::new(Triangle::new(6f64.sqrt()).expect("valid")),
    ]
}

fn positive_fixtures() -> Vec<PositiveDensity<f64>> {
    vec![PositiveDensity::uniform(1.0).expect("valid"), PositiveDensity::exponential(1.0).expect("valid")]
}

fn even_suite(d: &dyn Density<f64>, suite: Suite, cfg: &BatchConfig, bounded: bool) -> Result<Vec<BoundReport>> {
    let unit_ps = || cfg.ps.iter().copied().filter(|p| *p > 0.0 && *p <= 2.0);
    let mut out = Vec::new();
    match suite {
        Suite::Thm1 => {
            for p in unit_ps() {
                out.push(thm1_gap(d, p)?);
            }
        }
        Suite::Sandwich => out.push(sandwich(d)?),
        Suite::Gaussianity => out.push(gaussianity_gap(d)?),
        Suite::RevHensley => {
            for p in cfg.ps.iter().copied().chain([3.0]) {
                out.push(rev_hensley_gap(d, p)?);
            }
        }
        Suite::Hinf => {
            for p in cfg.ps.iter().copied().chain([3.0]) {
                out.push(hinf_gap(d, p)?);
            }
        }
        Suite::Isotropic => out.push(isotropic_gap(d)?),
        Suite::Renyi => {
            for p in unit_ps() {
                for &q in &cfg.qs {
                    if q == 0.0 && !bounded {
                        continue;
                    }
                    out.push(renyi_gap(d, p, q)?);
                }
            }
        }
        Suite::RenyiLog => {
            for &q in cfg.qs.iter().filter(|q| **q > 0.0 || bounded) {
                out.push(renyi_log_gap(d, q)?);
            }
        }
        Suite::RenyiAboveOne => {
            for p in unit_ps() {
                for q in [2.0, 5.0, f64::INFINITY] {
                    out.push(renyi_gap_above_one(d, p, q)?);
                }
            }
        }
        Suite::RenyiOrder => {
            let orders = [0.25, 0.5, 1.0, 2.0, f64::INFINITY];
            for (i, &q) in orders.iter().enumerate() {
                for &p in &orders[i + 1..] {
                    out.push(renyi_order_gap(d, q, p)?);
                }
            }
            let mono: Vec<f64> = cfg.qs.iter().copied().chain([2.0, f64::INFINITY]).collect();
            for w in mono.windows(2) {
                if w[0] == 0.0 && !bounded {
                    continue;
                }
                out.push(renyi_monotonicity(d, w[0], w[1])?);
            }
        }
        Suite::QEntropy => {
            for p in [1.0, 2.0] {
                for q in [0.6, 0.8] {
                    out.push(q_entropy_identity(d, p, q)?);
                    out.push(relative_q_entropy_gap(d, p, q)?);
                }
            }
        }
        Suite::Halfline | Suite::Repi => {}
    }
    Ok(out)
}

fn trial_reports(cfg: &BatchConfig, i: usize) -> Result<Vec<TrialReport>> {
    let seed = trial_seed(cfg.seed, i);
    let d: PiecewiseLogLinearDensity<f64> = random_log_concave(seed);
    let mut out = Vec::new();
    for &suite in &cfg.suites {
        let reports = match suite {
            Suite::Halfline => {
                let f = PositiveDensity::from_even(d.clone());
                cfg.ps.iter().filter(|p| **p > 0.0 && **p <= 2.0).map(|&p| positive_halfline_gap(&f, p)).collect::<Result<Vec<_>>>()?
            }
            Suite::Repi => {
                let other: PiecewiseLogLinearDensity<f64> = random_log_concave(trial_seed(seed, 1));
                let mut v = vec![repi_check(&d, &other, 1.0, cfg.grid_points)?];
                for q in [0.4, 0.7] {
                    v.push(repi_check(&d, &other, q, cfg.grid_points)?);
                }
                v
            }
            s => even_suite(&d, s, cfg, d.bounded())?,
        };
        out.extend(reports.into_iter().map(|r| TrialReport { trial: Some(i), seed: Some(seed), report: r }));
    }
    Ok(out)
}

fn fixture_reports(cfg: &BatchConfig) -> Result<Vec<TrialReport>> {
    let mut out = Vec::new();
    let fx = fixtures();
    for &suite in &cfg.suites {
        match suite {
            Suite::Halfline => {
                for f in positive_fixtures() {
                    for &p in cfg.ps.iter().filter(|p| **p > 0.0 && **p <= 2.0) {
                        out.push(positive_halfline_gap(&f, p)?);
                    }
                }
            }
            Suite::Repi => {
                for pair in [(0, 0), (1, 1), (0, 2)] {
                    for q in [1.0, 0.4, 0.7] {
                        out.push(repi_check(fx[pair.0].as_ref(), fx[pair.1].as_ref(), q, cfg.grid_points)?);
                    }
                }
            }
            s => {
                for d in &fx {
                    let bounded = d.support().1.is_finite();
                    out.extend(even_suite(d.as_ref(), s, cfg, bounded)?);
                }
            }
        }
    }
    Ok(out.into_iter().map(|r| TrialReport { trial: None, seed: None, report: r }).collect())
}

/// Runs the selected suites on `trials` random densities (and optionally the
/// fixtures). Trials run in parallel on the current rayon pool; the output is
/// ordered by trial index and identical for any number of workers.
pub fn batch_verify(cfg: &BatchConfig) -> Result<BatchOutcome> {
    if cfg.trials == 0 && !cfg.include_fixtures {
        return Err(Error::OutOfRange("need at least one trial".into()));
    }
    let per_trial: Vec<Result<Vec<TrialReport>>> = (0..cfg.trials).into_par_iter().map(|i| trial_reports(cfg, i)).collect();
    let mut reports = Vec::new();
    if cfg.include_fixtures {
        reports.extend(fixture_reports(cfg)?);
    }
    for r in per_trial {
        reports.extend(r?);
    }
    if let Some(tol) = cfg.tolerance {
        for r in &mut reports {
            r.report = r.report.clone().with_tolerance(tol);
        }
    }
    let summary = summarize(&reports);
    Ok(BatchOutcome { reports, summary })
}

fn summarize(reports: &[TrialReport]) -> Vec<SummaryRow> {
    let mut rows: BTreeMap<String, SummaryRow> = BTreeMap::new();
    let mut seen: BTreeMap<String, std::collections::BTreeSet<Option<usize>>> = BTreeMap::new();
    for r in reports {
        let name = r.report.name.clone();
        seen.entry(name.clone()).or_default().insert(r.trial);
        let row = rows.entry(name.clone()).or_insert_with(|| SummaryRow {
            inequality: name,
            trials: 0,
            min_gap: f64::INFINITY,
            argmin_seed: None,
            argmin_inputs: String::new(),
        });
        if row.argmin_inputs.is_empty() || !(r.report.gap >= row.min_gap) {
            row.min_gap = r.report.gap;
            row.argmin_seed = r.seed;
            row.argmin_inputs = r.report.inputs.clone();
        }
    }
    for (name, row) in rows.iter_mut() {
        row.trials = seen[name].len();
    }
    rows.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_classification() {
        assert_eq!(Verdict::classify(0.0, 1e-7, true), Verdict::Equality);
        assert_eq!(Verdict::classify(0.0, 1e-7, false), Verdict::Holds);
        assert_eq!(Verdict::classify(-1e-6, 1e-7, true), Verdict::Violated);
        assert_eq!(Verdict::classify(1e-3, 1e-7, true), Verdict::Holds);
        assert_eq!(Verdict::classify(f64::NAN, 1e-7, true), Verdict::Violated);
    }

    #[test]
    fn order_slack_limits() {
        assert!((order_slack(2.0) - 2f64.ln()).abs() < 1e-15);
        assert!((order_slack(1.0) - 1.0).abs() < 1e-15);
        assert!((order_slack(1.0 + 1e-8) - (1.0 + 1e-8f64).ln() / 1e-8).abs() < 1e-8);
        assert_eq!(order_slack(f64::INFINITY), 0.0);
    }

    #[test]
    fn ell_endpoints() {
        assert!((ell(1.4, 0.0) - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!((ell(1.4, 1.0) - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn trial_seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..50).map(|i| trial_seed(1, i)).collect();
        let b: Vec<u64> = (0..50).map(|i| trial_seed(1, i)).collect();
        assert_eq!(a, b);
        let set: std::collections::BTreeSet<_> = a.iter().collect();
        assert_eq!(set.len(), 50);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            let name = serde_json::to_value(s).unwrap();
            assert_eq!(Suite::parse(name.as_str().unwrap()).unwrap(), s);
        }
        assert!(Suite::parse("nope").is_err());
    }
}
