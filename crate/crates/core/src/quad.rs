//! Gauss–Legendre quadrature: fixed rules and an adaptive bisection driver.

use std::sync::OnceLock;

use crate::real::{c, Real};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut rule = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.reverse();
    rule
}

fn rule10() -> &'static [(f64, f64)] {
    static R: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(10))
}

fn rule6() -> &'static [(f64, f64)] {
    static R: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(6))
}

fn apply<T: Real>(rule: &[(f64, f64)], a: T, b: T, f: &dyn Fn(T) -> T) -> T {
    let half = (b - a) * c(0.5);
    let mid = (a + b) * c(0.5);
    let mut acc = T::zero();
    for &(x, w) in rule {
        acc += c::<T>(w) * f(mid + half * c(x));
    }
    acc * half
}

/// Six-point rule on a finite interval; used where many small cells are needed.
pub fn gl6<T: Real>(a: T, b: T, f: &dyn Fn(T) -> T) -> T {
    apply(rule6(), a, b, f)
}

/// Absolute and relative stopping tolerances for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-13, rel: 1e-12 }
    }
}

const MAX_DEPTH: u32 = 60;
/// Subdivision budget per call; divergent integrands stop here instead of recursing forever.
const MAX_SPLITS: usize = 20_000;

/// Adaptive Gauss–Legendre over a finite interval.
pub fn adaptive<T: Real>(a: T, b: T, f: &dyn Fn(T) -> T, tol: Tolerance) -> T {
    if b <= a {
        return T::zero();
    }
    let abs = c::<T>(tol.abs).max(T::tol_floor() * T::min_positive_value().sqrt());
    let rel = c::<T>(tol.rel).max(T::tol_floor());
    let whole = apply(rule10(), a, b, f);
    let mut budget = MAX_SPLITS;
    recurse(a, b, f, whole, abs, rel, 0, &mut budget)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real>(a: T, b: T, f: &dyn Fn(T) -> T, whole: T, abs: T, rel: T, depth: u32, budget: &mut usize) -> T {
    let mid = (a + b) * c(0.5);
    let left = apply(rule10(), a, mid, f);
    let right = apply(rule10(), mid, b, f);
    let halves = left + right;
    let err = (halves - whole).abs();
    if depth >= MAX_DEPTH || *budget == 0 || err <= abs || err <= rel * halves.abs() || !(mid > a && mid < b) {
        return halves;
    }
    *budget -= 1;
    let half_abs = abs * c(0.5);
    recurse(a, mid, f, left, half_abs, rel, depth + 1, budget) + recurse(mid, b, f, right, half_abs, rel, depth + 1, budget)
}

/// Adaptive integral over `[a, b]` where either end may be infinite.
///
/// Infinite ends are mapped onto a finite interval with `x = a + u / (1 - u)`.
pub fn integrate<T: Real>(a: T, b: T, f: &dyn Fn(T) -> T, tol: Tolerance) -> T {
    if a.is_finite() && b.is_finite() {
        return adaptive(a, b, f, tol);
    }
    if a.is_finite() {
        let g = |u: T| {
            let one_m = T::one() - u;
            if one_m <= T::zero() {
                return T::zero();
            }
            let v = f(a + u / one_m) / (one_m * one_m);
            if v.is_finite() {
                v
            } else {
                T::zero()
            }
        };
        return adaptive(T::zero(), T::one(), &g, tol);
    }
    if b.is_finite() {
        let g = |x: T| f(-x);
        return integrate(-b, T::infinity(), &g, tol);
    }
    integrate(T::neg_infinity(), T::zero(), f, tol) + integrate(T::zero(), T::infinity(), f, tol)
}

/// Integral over `[a, b]`, split at every interior breakpoint.
pub fn integrate_split<T: Real>(a: T, b: T, breaks: &[T], f: &dyn Fn(T) -> T, tol: Tolerance) -> T {
    let mut pts: Vec<T> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let mut total = T::zero();
    let mut lo = a;
    for p in pts.into_iter().chain(std::iter::once(b)) {
        total += integrate(lo, p, f, tol);
        lo = p;
    }
    total
}
