//! Gamma-function family.

use crate::real::{c, Real};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `log |Γ(x)|`, Lanczos approximation with reflection below 1/2.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = c::<T>(0.5);
    if x < half {
        // Γ(x)Γ(1−x) = π / sin(πx)
        let s = (T::PI() * x).sin().abs();
        return T::PI().ln() - s.ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = c::<T>(LANCZOS[0]);
    for (k, &coef) in LANCZOS.iter().enumerate().skip(1) {
        acc += c::<T>(coef) / (x + T::from_usize_lossy(k));
    }
    let t = x + c::<T>(LANCZOS_G) + half;
    c::<T>(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + acc.ln()
}

/// `Γ(x)` for positive arguments.
pub fn gamma<T: Real>(x: T) -> T {
    ln_gamma(x).exp()
}
