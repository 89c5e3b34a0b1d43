use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::Density;
use crate::error::{Error, Result};
use crate::real::{c, Real};

pub const DEFAULT_GRID_POINTS: usize = 8192;
/// Mass allowed outside a grid's window.
pub const DEFAULT_TAIL_EPS: f64 = 1e-10;

/// Density sampled on the uniform grid `left + i·step`.
///
/// Values are cell averages of the underlying density; mass uses trapezoidal
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity<T: Real> {
    left: T,
    step: T,
    values: Vec<T>,
}

impl<T: Real> GridDensity<T> {
    pub fn new(left: T, step: T, values: Vec<T>) -> Result<Self> {
        if !(step > T::zero()) || values.len() < 2 {
            return Err(Error::OutOfRange("grid needs a positive step and at least two points".into()));
        }
        if values.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::OutOfRange("grid values must be finite and nonnegative".into()));
        }
        Ok(GridDensity { left, step, values })
    }

    pub fn left(&self) -> T {
        self.left
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn right(&self) -> T {
        self.x(self.values.len() - 1)
    }

    pub fn x(&self, i: usize) -> T {
        self.left + self.step * T::from_usize_lossy(i)
    }

    fn weight(&self, i: usize) -> T {
        if i == 0 || i + 1 == self.values.len() {
            self.step * c(0.5)
        } else {
            self.step
        }
    }

    pub fn normalize(mut self) -> Result<Self> {
        let m = self.mass();
        if !(m > T::zero()) {
            return Err(Error::OutOfRange("grid density has no mass".into()));
        }
        for v in &mut self.values {
            *v /= m;
        }
        Ok(self)
    }

    /// Grid of `λX`.
    pub fn scale(&self, lambda: T) -> GridDensity<T> {
        GridDensity {
            left: self.left * lambda,
            step: self.step * lambda,
            values: self.values.iter().map(|&v| v / lambda).collect(),
        }
    }

    /// `f^α` renormalized on the same grid.
    pub fn escort(&self, alpha: T) -> Result<GridDensity<T>> {
        let values = self.values.iter().map(|&v| if v > T::zero() { v.powf(alpha) } else { T::zero() }).collect();
        GridDensity::new(self.left, self.step, values)?.normalize()
    }

    /// Largest pointwise asymmetry `|f(x_i) − f(x_{n−1−i})|`, meaningful on grids centred at 0.
    pub fn asymmetry(&self) -> T {
        let n = self.values.len();
        (0..n / 2).map(|i| (self.values[i] - self.values[n - 1 - i]).abs()).fold(T::zero(), T::max)
    }

    /// L¹ distance to a reference density evaluated at the nodes.
    pub fn l1_distance(&self, other: &dyn Density<T>) -> T {
        (0..self.values.len()).map(|i| self.weight(i) * (self.values[i] - other.pdf(self.x(i))).abs()).sum()
    }

    /// Two-column CSV: `x,f`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,f")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.x(i), v)?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with('x')) {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Parse(format!("line {}: missing column", n + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))
            };
            xs.push(parse(parts.next())?);
            fs.push(T::lit(parse(parts.next())?));
        }
        if xs.len() < 2 {
            return Err(Error::Parse("need at least two rows".into()));
        }
        let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        if xs.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0)) {
            return Err(Error::Parse("x column is not uniformly spaced".into()));
        }
        GridDensity::new(T::lit(xs[0]), T::lit(step), fs)
    }

    fn linear_log_cell(&self, a: T, b: T, fa: T, fb: T) -> T {
        // ∫_a^b log|x| (fa + (fb − fa)(x − a)/h) dx
        let h = b - a;
        let slope = (fb - fa) / h;
        let base = fa - slope * a;
        // primitives of log|x| and x log|x| on each side of 0
        let p0 = |x: T| if x == T::zero() { T::zero() } else { x * x.abs().ln() - x };
        let p1 = |x: T| {
            if x == T::zero() {
                T::zero()
            } else {
                x * x * c(0.5) * x.abs().ln() - x * x * c(0.25)
            }
        };
        base * (p0(b) - p0(a)) + slope * (p1(b) - p1(a))
    }
}

impl<T: Real> Density<T> for GridDensity<T> {
    /// Linear interpolation between nodes; zero outside the window.
    fn pdf(&self, x: T) -> T {
        if x < self.left || x > self.right() {
            return T::zero();
        }
        let u = (x - self.left) / self.step;
        let i = u.floor().to_usize().unwrap_or(0).min(self.values.len() - 2);
        let frac = u - T::from_usize_lossy(i);
        self.values[i] * (T::one() - frac) + self.values[i + 1] * frac
    }

    fn support(&self) -> (T, T) {
        (self.left, self.right())
    }

    fn peak(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    fn is_even(&self) -> bool {
        let tol = c::<T>(1e-10) * self.peak();
        (self.left + self.right()).abs() <= c::<T>(1e-9) * self.step && self.asymmetry() <= tol
    }

    fn describe(&self) -> String {
        format!("grid[{}, {}; n={}]", self.left, self.right(), self.values.len())
    }

    fn integrate(&self, g: &dyn Fn(T, T) -> T) -> T {
        self.values.iter().enumerate().map(|(i, &v)| self.weight(i) * g(self.x(i), v)).sum()
    }

    fn support_measure(&self) -> T {
        let n = self.values.iter().filter(|v| **v > T::zero()).count();
        self.step * T::from_usize_lossy(n)
    }

    /// Exact `∫ log|x|` against the piecewise-linear interpolant, cell by cell.
    fn log_abs_moment(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.values.len() - 1 {
            let (fa, fb) = (self.values[i], self.values[i + 1]);
            if fa > T::zero() || fb > T::zero() {
                acc += self.linear_log_cell(self.x(i), self.x(i + 1), fa, fb);
            }
        }
        acc
    }

    fn interval_mass(&self, a: T, b: T) -> T {
        self.integrate(&|x, f| if x >= a && x <= b { f } else { T::zero() })
    }

    fn upper_tail_point(&self, _eps: T) -> T {
        self.right()
    }

    fn lower_tail_point(&self, _eps: T) -> T {
        self.left
    }
}

/// Samples `d` on `n_points` nodes spanning `[−half_width, half_width]`.
///
/// Fails with the required half-width when more than `tail_eps` of the mass
/// lies outside the window.
pub fn to_grid<T: Real, D: Density<T> + ?Sized>(d: &D, half_width: T, n_points: usize, tail_eps: T) -> Result<GridDensity<T>> {
    to_grid_range(d, -half_width, half_width, n_points, tail_eps)
}

/// Samples `d` as cell averages on `n_points` nodes spanning `[left, right]`.
pub fn to_grid_range<T: Real, D: Density<T> + ?Sized>(
    d: &D,
    left: T,
    right: T,
    n_points: usize,
    tail_eps: T,
) -> Result<GridDensity<T>> {
    if n_points < 2 || !(right > left) {
        return Err(Error::OutOfRange("grid needs two points and a nonempty window".into()));
    }
    let (lo, hi) = d.support();
    let inside = d.interval_mass(left.max(lo), right.min(hi));
    let total = d.mass();
    if total - inside > tail_eps * total {
        let need = d.upper_tail_point(tail_eps * c(0.5)).max(-d.lower_tail_point(tail_eps * c(0.5)));
        return Err(Error::InsufficientCoverage { required: need.as_f64() });
    }
    let step = (right - left) / T::from_usize_lossy(n_points - 1);
    let half = step * c(0.5);
    let values = (0..n_points)
        .map(|i| {
            let x = left + step * T::from_usize_lossy(i);
            d.cell_mass(x - half, x + half) / step
        })
        .collect();
    GridDensity::new(left, step, values)?.normalize()
}

/// Density of the sum of independent variables with grid densities `a` and `b`.
pub fn convolve<T: Real>(a: &GridDensity<T>, b: &GridDensity<T>) -> Result<GridDensity<T>> {
    let rel = (a.step - b.step).abs() / a.step;
    if rel > c(1e-9) {
        return Err(Error::StepMismatch(a.step.as_f64(), b.step.as_f64()));
    }
    let n = a.len() + b.len() - 1;
    let size = n.next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let load = |v: &[T]| {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); size];
        for (slot, &x) in buf.iter_mut().zip(v) {
            slot.re = x;
        }
        buf
    };
    let mut fa = load(&a.values);
    let mut fb = load(&b.values);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let scale = a.step / T::from_usize_lossy(size);
    let floor = c::<T>(1e-15) * a.peak().max(b.peak()) * b.peak() * a.step;
    let values = fa[..n]
        .iter()
        .map(|z| {
            let v = z.re * scale;
            if v > floor {
                v
            } else {
                T::zero()
            }
        })
        .collect();
    GridDensity::new(a.left + b.left, a.step, values)?.normalize()
}
