#![allow(dead_code)]

/// Composite Simpson rule on `n` (even) panels.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Simpson over `[a, b]` split at the given interior points.
pub fn simpson_split(a: f64, b: f64, knots: &[f64], n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut pts = vec![a];
    pts.extend(knots.iter().copied().filter(|&k| k > a && k < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| simpson(w[0], w[1], n, &f)).sum()
}

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[macro_export]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b, t): (f64, f64, f64) = ($a, $b, $tol);
        assert!((a - b).abs() <= t, "{} = {a} vs {} = {b} (diff {:e}, tol {t:e})", stringify!($a), stringify!($b), (a - b).abs());
    }};
}
