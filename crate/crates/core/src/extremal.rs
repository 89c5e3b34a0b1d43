//! The two-parameter plateau-plus-exponential family and the two-point
//! inequality `G(s, t; p) ≥ 0` that settles the entropy–moment bound on it.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{random_log_concave, Density, PiecewiseLogLinearDensity};
use crate::error::{Error, Result};
use crate::inequality::{thm1_gap, trial_seed, BoundReport, Scale, Verdict};
use crate::quad::{self, Tolerance};
use crate::real::{c, Real};
use crate::special::ln_gamma;

/// `1 − (1 + t) e^{−t}` without cancellation at small `t`.
fn one_minus_poly_exp(t: f64) -> f64 {
    crate::density::exp_segment_first_moment(1.0, t)
}

/// `1 − e^{−t}`.
fn one_minus_exp(t: f64) -> f64 {
    -(-t).exp_m1()
}

/// `f(x) = c` on `|x| ≤ a`, `c e^{−(|x|−a)}` on `a < |x| ≤ a + b`, with
/// `c = 1/(2(a + 1 − e^{−b}))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleDensity<T> {
    a: T,
    b: T,
    c: T,
}

impl<T: Real> SimpleDensity<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a >= T::zero()) || !(b > T::zero()) || !a.is_finite() || !b.is_finite() {
            return Err(Error::OutOfRange(format!("simple density needs a ≥ 0, b > 0 (got a={a}, b={b})")));
        }
        let cst = T::one() / (c::<T>(2.0) * (a + T::one() - (-b).exp()));
        Ok(SimpleDensity { a, b, c: cst })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn c(&self) -> T {
        self.c
    }

    /// The same density as a general piecewise log-linear density.
    pub fn to_piecewise(&self) -> Result<PiecewiseLogLinearDensity<T>> {
        let (bps, slopes) = if self.a > T::zero() {
            (vec![T::zero(), self.a, self.a + self.b], vec![T::zero(), T::one()])
        } else {
            (vec![T::zero(), self.b], vec![T::one()])
        };
        PiecewiseLogLinearDensity::new(bps, slopes, self.c.ln(), true)
    }
}

impl<T: Real> Density<T> for SimpleDensity<T> {
    fn pdf(&self, x: T) -> T {
        let r = x.abs();
        if r <= self.a {
            self.c
        } else if r <= self.a + self.b {
            self.c * (self.a - r).exp()
        } else {
            T::zero()
        }
    }
    fn support(&self) -> (T, T) {
        let e = self.a + self.b;
        (-e, e)
    }
    fn knots(&self) -> Vec<T> {
        if self.a > T::zero() {
            vec![-self.a, T::zero(), self.a]
        } else {
            vec![T::zero()]
        }
    }
    fn peak(&self) -> T {
        self.c
    }
    fn is_even(&self) -> bool {
        true
    }
    fn is_symmetric_log_concave(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        format!("simple(a={}, b={})", self.a, self.b)
    }
    fn mean(&self) -> T {
        T::zero()
    }
    fn entropy(&self) -> T {
        simple_entropy(self)
    }
}

/// `h = −log c + (1 − (1+b)e^{−b}) / (a + 1 − e^{−b})`.
pub fn simple_entropy<T: Real>(sd: &SimpleDensity<T>) -> T {
    let b = sd.b;
    let num = crate::density::exp_segment_first_moment(T::one(), b);
    -sd.c.ln() + num / (sd.a + T::one() - (-b).exp())
}

/// `∫_0^t (s + x)^p e^{−x} dx` by adaptive quadrature.
pub fn tail_integral(s: f64, t: f64, p: f64) -> f64 {
    let tol = Tolerance { abs: 1e-13, rel: 1e-13 };
    quad::integrate(0.0, t, &|x: f64| (s + x).powf(p) * (-x).exp(), tol)
}

/// `1 − e^{−t} Σ_{k≤n} t^k/k!`, summed as `e^{−t} Σ_{k>n} t^k/k!` when that avoids cancellation.
fn poisson_upper(n: u32, t: f64) -> f64 {
    if t < n as f64 + 1.0 {
        let mut term = (-t).exp();
        for k in 1..=n {
            term *= t / k as f64;
        }
        let mut acc = 0.0;
        for k in n + 1..n + 200 {
            term *= t / k as f64;
            acc += term;
            if term < acc * 1e-17 {
                break;
            }
        }
        acc
    } else {
        let mut term = 1.0;
        let mut head = 1.0;
        for k in 1..=n {
            term *= t / k as f64;
            head += term;
        }
        1.0 - (-t).exp() * head
    }
}

/// `∫_0^t (s + x)² e^{−x} dx = (s² + 2s + 2) − e^{−t}((s+t)² + 2(s+t) + 2)`.
pub fn tail_integral_p2(s: f64, t: f64) -> f64 {
    s * s * poisson_upper(0, t) + 2.0 * s * poisson_upper(1, t) + 2.0 * poisson_upper(2, t)
}

/// `log[s^{p+1} + (p+1) ∫_0^t (s+x)^p e^{−x} dx]`, the left side of the two-point inequality.
pub fn log_integral_term(s: f64, t: f64, p: f64) -> f64 {
    let integral = if p == 2.0 { tail_integral_p2(s, t) } else { tail_integral(s, t, p) };
    (s.powf(p + 1.0) + (p + 1.0) * integral).ln()
}

/// The same term after integrating by parts: `log ∫ (s+x)^{p+1} dμ` with `μ` having
/// density `e^{−x}` on `(0, t)` and an atom `e^{−t}` at `t`.
pub fn log_integral_term_measure(s: f64, t: f64, p: f64) -> f64 {
    let tol = Tolerance { abs: 1e-13, rel: 1e-13 };
    let body = quad::integrate(0.0, t, &|x: f64| (s + x).powf(p + 1.0) * (-x).exp(), tol);
    (body + (s + t).powf(p + 1.0) * (-t).exp()).ln()
}

/// `G(s,t;p) = (p+1) log A + p B/A − log[s^{p+1} + (p+1)∫_0^t (s+x)^p e^{−x} dx]`
/// with `A = s + 1 − e^{−t}`, `B = 1 − (1+t)e^{−t}`.
pub fn gap_g(s: f64, t: f64, p: f64) -> Result<f64> {
    if !(t > 0.0) || !(s >= 0.0) || !(p >= 0.0) {
        return Err(Error::OutOfRange(format!("G needs s ≥ 0, t > 0, p ≥ 0 (got s={s}, t={t}, p={p})")));
    }
    let a = s + one_minus_exp(t);
    let b = one_minus_poly_exp(t);
    Ok((p + 1.0) * a.ln() + p * b / a - log_integral_term(s, t, p))
}

/// The `p = 2` inequality in polynomial form,
/// `s³ + 3(1−e^{−t})s² + 6(1−(1+t)e^{−t})s + 3e^{−t}(2e^t − t² − 2t − 2) < A³ e^{2B/A}`,
/// cross-checked against `exp G(s, t; 2) = RHS/LHS`.
pub fn p2_closed_form_check(s: f64, t: f64) -> Result<BoundReport> {
    let g = gap_g(s, t, 2.0)?;
    let a = s + one_minus_exp(t);
    let b = one_minus_poly_exp(t);
    // 2 − e^{−t}(t² + 2t + 2)
    let tail = 2.0 * poisson_upper(2, t);
    let lhs = s.powi(3) + 3.0 * one_minus_exp(t) * s * s + 6.0 * b * s + 3.0 * tail;
    let rhs = a.powi(3) * (2.0 * b / a).exp();
    let mismatch = (g.exp() - rhs / lhs).abs() / (rhs / lhs);
    let report = BoundReport::new(
        "lemma_p2",
        format!("s={s}, t={t}"),
        &[("s", s), ("t", t), ("exp_g_mismatch", mismatch)],
        lhs,
        rhs,
        (rhs / lhs).ln(),
        0.0,
        Scale::Nats,
        false,
    );
    Ok(if mismatch > 1e-8 { report.with_verdict(Verdict::Violated) } else { report })
}

/// `u(t) = e^t − 1 − t`, `v(t) = 3e^{2t} − 2te^t − 12e^t + 2t² + 8t + 9`,
/// `w(t) = e^{3t} + 3e^{2t}(3t² − 4t − 13) + 3e^t(6t² + 20t + 19) − 4t³ − 18t² − 30t − 19`.
pub fn aux_uvw(t: f64) -> (f64, f64, f64) {
    let e1 = t.exp();
    let e2 = e1 * e1;
    let u = t.exp_m1() - t;
    let v = 3.0 * e2 - 2.0 * t * e1 - 12.0 * e1 + 2.0 * t * t + 8.0 * t + 9.0;
    let w = e2 * e1 + 3.0 * e2 * (3.0 * t * t - 4.0 * t - 13.0) + 3.0 * e1 * (6.0 * t * t + 20.0 * t + 19.0)
        - 4.0 * t.powi(3)
        - 18.0 * t * t
        - 30.0 * t
        - 19.0;
    (u, v, w)
}

/// Derivatives of `f` at 0 up to order 4 by fourth-order central stencils.
pub fn central_derivatives(f: &dyn Fn(f64) -> f64, h: f64) -> [f64; 5] {
    let y = |k: i32| f(k as f64 * h);
    let d0 = y(0);
    let d1 = (-y(2) + 8.0 * y(1) - 8.0 * y(-1) + y(-2)) / (12.0 * h);
    let d2 = (-y(2) + 16.0 * y(1) - 30.0 * y(0) + 16.0 * y(-1) - y(-2)) / (12.0 * h * h);
    let d3 = (-y(3) + 8.0 * y(2) - 13.0 * y(1) + 13.0 * y(-1) - 8.0 * y(-2) + y(-3)) / (8.0 * h.powi(3));
    let d4 = (-y(3) + 12.0 * y(2) - 39.0 * y(1) + 56.0 * y(0) - 39.0 * y(-1) + 12.0 * y(-2) - y(-3)) / (6.0 * h.powi(4));
    [d0, d1, d2, d3, d4]
}

/// Values and derivatives of `v` and `w` at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvwAtZero {
    pub v: [f64; 3],
    pub w: [f64; 5],
}

pub fn uvw_derivatives_at_zero() -> UvwAtZero {
    let h = 1e-2;
    let dv = central_derivatives(&|t| aux_uvw(t).1, h);
    let dw = central_derivatives(&|t| aux_uvw(t).2, h);
    UvwAtZero { v: [dv[0], dv[1], dv[2]], w: dw }
}

/// Smallest values of `u`, `v`, `w` relative to `e^{3t}` over a `t` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UvwTable {
    pub rows: Vec<(f64, f64, f64, f64)>,
    /// `min_t min(u, v, w) e^{−3t}`.
    pub min_scaled: f64,
}

pub fn uvw_table(ts: &[f64]) -> UvwTable {
    let rows: Vec<_> = ts.iter().map(|&t| {
        let (u, v, w) = aux_uvw(t);
        (t, u, v, w)
    }).collect();
    let min_scaled = rows
        .iter()
        .map(|&(t, u, v, w)| u.min(v).min(w) * (-3.0 * t).exp())
        .fold(f64::INFINITY, f64::min);
    UvwTable { rows, min_scaled }
}

/// Positive root of `log Γ(p+2) = p`, by bisection on `[2, 3]` to `1e−9`.
pub fn necessary_condition_root() -> f64 {
    let f = |p: f64| ln_gamma(p + 2.0) - p;
    let (mut lo, mut hi) = (2.0, 3.0);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inclusive arithmetic grid `start, start + step, …, ≤ end`.
pub fn linspace_step(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// One point of a `G` surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub s: f64,
    pub t: f64,
    pub p: f64,
    pub g: f64,
}

/// `G` on the product grid, row-major in `s`. Parallel over rows; the order is fixed.
pub fn surface(p: f64, s_grid: &[f64], t_grid: &[f64]) -> Result<Vec<SurfacePoint>> {
    let rows: Vec<Result<Vec<SurfacePoint>>> = s_grid
        .par_iter()
        .map(|&s| t_grid.iter().map(|&t| Ok(SurfacePoint { s, t, p, g: gap_g(s, t, p)? })).collect())
        .collect();
    let mut out = Vec::with_capacity(s_grid.len() * t_grid.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

pub fn write_surface_csv<W: Write>(points: &[SurfacePoint], mut w: W) -> std::io::Result<()> {
    writeln!(w, "s,t,p,G")?;
    for pt in points {
        writeln!(w, "{},{},{},{:e}", pt.s, pt.t, pt.p, pt.g)?;
    }
    Ok(())
}

fn argmin(points: &[SurfacePoint]) -> Option<SurfacePoint> {
    points.iter().copied().fold(None, |best: Option<SurfacePoint>, pt| match best {
        Some(b) if !(pt.g < b.g) => Some(b),
        _ => Some(pt),
    })
}

/// `min G ≥ 0` over the grid, for `p ∈ (0, 2]`.
pub fn extremal_grid_scan(p: f64, s_grid: &[f64], t_grid: &[f64]) -> Result<BoundReport> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::OutOfRange(format!("p = {p} must lie in (0, 2]; use exploratory_scan beyond 2")));
    }
    let pts = surface(p, s_grid, t_grid)?;
    let m = argmin(&pts).ok_or(Error::Empty)?;
    Ok(BoundReport::new(
        "lemma_grid",
        format!("s in [{}, {}], t in [{}, {}]", s_grid[0], s_grid[s_grid.len() - 1], t_grid[0], t_grid[t_grid.len() - 1]),
        &[("p", p), ("argmin_s", m.s), ("argmin_t", m.t), ("points", pts.len() as f64)],
        m.g,
        0.0,
        m.g,
        0.0,
        Scale::Nats,
        false,
    ))
}

/// `min G` for `p ∈ (2, p*)`, where the two-point inequality is conjectured but not known.
pub fn exploratory_scan(p: f64, s_grid: &[f64], t_grid: &[f64]) -> Result<BoundReport> {
    let pts = surface(p, s_grid, t_grid)?;
    let m = argmin(&pts).ok_or(Error::Empty)?;
    Ok(BoundReport::new(
        "lemma_exploratory",
        format!("p={p}"),
        &[("p", p), ("argmin_s", m.s), ("argmin_t", m.t), ("root", necessary_condition_root())],
        m.g,
        0.0,
        m.g,
        0.0,
        Scale::Nats,
        false,
    )
    .with_verdict(Verdict::Exploratory))
}

/// Minimum of the entropy–moment gap over the simple family on a grid, against
/// the minimum over `n_random` random even log-concave densities; the two must
/// agree to `1e−3`.
pub fn reduction_cross_check(p: f64, s_grid: &[f64], t_grid: &[f64], n_random: usize, seed: u64) -> Result<BoundReport> {
    let pts = surface(p, s_grid, t_grid)?;
    let simple_min = argmin(&pts).ok_or(Error::Empty)?.g / p;
    let gaps: Vec<Result<f64>> = (0..n_random)
        .into_par_iter()
        .map(|i| {
            let d: PiecewiseLogLinearDensity<f64> = random_log_concave(trial_seed(seed, i));
            Ok(thm1_gap(&d, p)?.gap)
        })
        .collect();
    let mut random_min = f64::INFINITY;
    for g in gaps {
        random_min = random_min.min(g?);
    }
    let diff = (simple_min - random_min).abs();
    let r = BoundReport::new(
        "reduction",
        format!("{n_random} random densities, seed {seed}"),
        &[("p", p), ("simple_min", simple_min), ("random_min", random_min)],
        random_min,
        simple_min,
        1e-3 - diff,
        0.0,
        Scale::Nats,
        false,
    );
    Ok(r)
}

/// Midpoint convexity of `p ↦ log ∫ (s+x)^{p+1} dμ`: returns
/// `(L(p1) + L(p2))/2 − L((p1+p2)/2) ≥ 0`.
pub fn convexity_in_p(s: f64, t: f64, p1: f64, p2: f64) -> f64 {
    let l = |p: f64| log_integral_term_measure(s, t, p);
    0.5 * (l(p1) + l(p2)) - l(0.5 * (p1 + p2))
}

/// The interpolation step of the proof: `(1 − p/2) L(0) + (p/2) L(2) − L(p) ≥ 0`.
pub fn interpolation_chain(s: f64, t: f64, p: f64) -> f64 {
    let l = |p: f64| log_integral_term(s, t, p);
    (1.0 - p / 2.0) * l(0.0) + p / 2.0 * l(2.0) - l(p)
}
