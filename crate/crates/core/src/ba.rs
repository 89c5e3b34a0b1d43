//! Capacity of discretized additive-noise channels under an average-cost
//! budget, by Blahut–Arimoto with a Lagrange multiplier on the cost.
//!
//! Inputs sit on a lattice `x_i = x_0 + i h`; the output lattice has the same
//! step and extends the input range by the noise kernel, so every row of the
//! transition matrix is the same shifted kernel `W[i][i + k] = K_k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::inequality::{BoundReport, Scale};

/// Average-cost constraint on the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// `E X² ≤ P` over a symmetric input grid.
    Power,
    /// `E X ≤ P` over inputs in `[0, ∞)`.
    Mean,
}

impl Constraint {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Constraint::Power),
            "mean" => Ok(Constraint::Mean),
            other => Err(Error::Parse(format!("unknown constraint {other:?} (expected power or mean)"))),
        }
    }

    fn cost(self, x: f64) -> f64 {
        match self {
            Constraint::Power => x * x,
            Constraint::Mean => x,
        }
    }
}

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Number of input points.
    pub m: usize,
    /// Input range `[−w, w]` (power) or `[0, w]` (mean); `None` picks `4√P` or `12P`.
    pub input_width: Option<f64>,
    /// Number of output points; `None` sizes it to cover input ⊕ noise.
    pub n: Option<usize>,
    /// Noise mass allowed outside the kernel on each side.
    pub tail: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { m: 257, input_width: None, n: None, tail: 1e-8 }
    }
}

/// A discrete memoryless channel with a banded Toeplitz transition matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelInstance {
    pub inputs: Vec<f64>,
    pub costs: Vec<f64>,
    pub budget: f64,
    pub step: f64,
    /// Offset of the first kernel tap in steps: `W[i][j] = kernel[j − i]` with
    /// output `y_j = x_0 + (j + k_lo) h + shift`.
    pub k_lo: i64,
    /// Shift of the output cells against the input lattice, in `[0, h)`.
    pub shift: f64,
    pub kernel: Vec<f64>,
    pub constraint: Constraint,
}

impl ChannelInstance {
    pub fn n_outputs(&self) -> usize {
        self.inputs.len() + self.kernel.len() - 1
    }

    pub fn output(&self, j: usize) -> f64 {
        self.inputs[0] + (j as f64 + self.k_lo as f64) * self.step + self.shift
    }

    /// `W[i][j]`.
    pub fn transition(&self, i: usize, j: usize) -> f64 {
        j.checked_sub(i).and_then(|k| self.kernel.get(k)).copied().unwrap_or(0.0)
    }

    /// The channel whose kernel is `λ K_self + (1 − λ) K_other`.
    pub fn mix(&self, other: &ChannelInstance, lambda: f64) -> Result<ChannelInstance> {
        if self.step != other.step {
            return Err(Error::StepMismatch(self.step, other.step));
        }
        if self.inputs != other.inputs || self.shift != other.shift || self.constraint != other.constraint || self.budget != other.budget {
            return Err(Error::Consistency("channels differ in input lattice, cell shift or budget".into()));
        }
        let lo = self.k_lo.min(other.k_lo);
        let hi = (self.k_lo + self.kernel.len() as i64).max(other.k_lo + other.kernel.len() as i64);
        let mut kernel = vec![0.0; (hi - lo) as usize];
        for (ch, w) in [(self, lambda), (other, 1.0 - lambda)] {
            for (k, &v) in ch.kernel.iter().enumerate() {
                kernel[(ch.k_lo - lo) as usize + k] += w * v;
            }
        }
        Ok(ChannelInstance { kernel, k_lo: lo, ..self.clone() })
    }
}

fn input_grid(constraint: Constraint, p: f64, spec: &GridSpec) -> Result<Vec<f64>> {
    if spec.m < 2 {
        return Err(Error::OutOfRange("input grid needs at least two points".into()));
    }
    let (lo, hi) = match constraint {
        Constraint::Power => {
            let w = spec.input_width.unwrap_or(4.0 * p.sqrt());
            (-w, w)
        }
        Constraint::Mean => (0.0, spec.input_width.unwrap_or(12.0 * p)),
    };
    if !(hi > lo) {
        return Err(Error::OutOfRange("input range is empty".into()));
    }
    let h = (hi - lo) / (spec.m - 1) as f64;
    Ok((0..spec.m).map(|i| lo + h * i as f64).collect())
}

/// Discretizes `y = x + noise` on lattices of common step. Kernel taps are the
/// noise masses of the cells `[(k − ½)h + δ, (k + ½)h + δ]`, renormalized to
/// sum to 1. `δ = 0` for even noise; otherwise a finite lower support end is
/// put on a cell boundary.
pub fn build_channel<D: Density<f64> + ?Sized>(noise: &D, constraint: Constraint, p: f64, spec: &GridSpec) -> Result<ChannelInstance> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::OutOfRange(format!("budget must be positive, got {p}")));
    }
    if constraint == Constraint::Mean && noise.support().0 < 0.0 {
        return Err(Error::OutOfRange("mean-constrained channels need noise on [0, ∞)".into()));
    }
    let inputs = input_grid(constraint, p, spec)?;
    let h = inputs[1] - inputs[0];
    let hi = noise.upper_tail_point(spec.tail);
    let lo = noise.lower_tail_point(spec.tail);
    let shift = if !noise.is_even() && noise.support().0.is_finite() {
        (noise.support().0 + 0.5 * h).rem_euclid(h)
    } else {
        0.0
    };
    let mut k_lo = ((lo - shift) / h - 0.5).floor() as i64;
    let k_hi = ((hi - shift) / h + 0.5).ceil() as i64;
    let mut kernel: Vec<f64> = (k_lo..=k_hi)
        .map(|k| noise.cell_mass((k as f64 - 0.5) * h + shift, (k as f64 + 0.5) * h + shift))
        .collect();
    while kernel.last() == Some(&0.0) {
        kernel.pop();
    }
    let lead = kernel.iter().take_while(|&&v| v == 0.0).count();
    kernel.drain(..lead);
    k_lo += lead as i64;
    let total: f64 = kernel.iter().sum();
    if kernel.is_empty() || !(total > 0.0) {
        return Err(Error::InvalidPotential("noise kernel has no mass at this resolution".into()));
    }
    kernel.iter_mut().for_each(|v| *v /= total);
    let n = inputs.len() + kernel.len() - 1;
    if let Some(given) = spec.n {
        if given < n {
            return Err(Error::InsufficientCoverage { required: n as f64 });
        }
    }
    let costs = inputs.iter().map(|&x| constraint.cost(x)).collect();
    Ok(ChannelInstance { inputs, costs, budget: p, step: h, k_lo, shift, kernel, constraint })
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaOptions {
    /// Target width of the certified interval, in nats.
    pub tol: f64,
    /// Cap on the total number of Blahut–Arimoto sweeps.
    pub max_iter: usize,
    /// Relative tolerance on the achieved cost.
    pub cost_tol: f64,
}

impl Default for BaOptions {
    fn default() -> Self {
        BaOptions { tol: 1e-5, max_iter: 100_000, cost_tol: 1e-9 }
    }
}

/// Outcome of a constrained Blahut–Arimoto run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaResult {
    /// Mutual information of the returned input, which meets the budget.
    pub capacity: f64,
    /// Dual upper bound `max_i (D_i − s c_i) + s P` on the discrete capacity.
    pub upper: f64,
    /// `upper − capacity`.
    pub gap: f64,
    pub multiplier: f64,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub inputs: Vec<f64>,
    pub distribution: Vec<f64>,
}

struct Solver<'a> {
    ch: &'a ChannelInstance,
    neg_kernel_entropy: f64,
    log_q: Vec<f64>,
    d: Vec<f64>,
    w: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(ch: &'a ChannelInstance) -> Self {
        let neg_kernel_entropy = ch.kernel.iter().filter(|&&k| k > 0.0).map(|&k| k * k.ln()).sum();
        let m = ch.inputs.len();
        Solver { ch, neg_kernel_entropy, log_q: vec![0.0; ch.n_outputs()], d: vec![0.0; m], w: vec![0.0; m] }
    }

    /// Fills `D_i = Σ_k K_k log(K_k / q_{i+k})` for the current `p`.
    fn divergences(&mut self, p: &[f64]) {
        let k = &self.ch.kernel;
        let q = &mut self.log_q;
        q.iter_mut().for_each(|v| *v = 0.0);
        for (i, &pi) in p.iter().enumerate() {
            for (qj, &kk) in q[i..i + k.len()].iter_mut().zip(k) {
                *qj += pi * kk;
            }
        }
        q.iter_mut().for_each(|v| *v = v.max(1e-300).ln());
        for (i, di) in self.d.iter_mut().enumerate() {
            let cross: f64 = q[i..i + k.len()].iter().zip(k).map(|(lq, kk)| kk * lq).sum();
            *di = self.neg_kernel_entropy - cross;
        }
    }

    /// Cost of the tilted distribution `p_i e^{D_i − s c_i}` and its variance.
    fn tilted_cost(&mut self, p: &[f64], s: f64) -> (f64, f64) {
        let c = &self.ch.costs;
        let shift = self.d.iter().zip(c).map(|(d, c)| d - s * c).fold(f64::NEG_INFINITY, f64::max);
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (((w, &pi), &di), &ci) in self.w.iter_mut().zip(p).zip(&self.d).zip(c) {
            *w = pi * (di - s * ci - shift).exp();
            z += *w;
            m1 += *w * ci;
            m2 += *w * ci * ci;
        }
        let mean = m1 / z;
        (mean, (m2 / z - mean * mean).max(0.0))
    }

    /// Smallest `s ≥ 0` for which the tilted cost is within budget, by
    /// safeguarded Newton steps from `s0`.
    fn multiplier(&mut self, p: &[f64], s0: f64, cost_tol: f64) -> f64 {
        let target = self.ch.budget;
        if self.tilted_cost(p, 0.0).0 <= target {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        let mut s = s0.max(1e-12);
        for _ in 0..200 {
            let (g, var) = self.tilted_cost(p, s);
            if (g - target).abs() <= cost_tol * target {
                break;
            }
            if g > target {
                lo = s;
            } else {
                hi = s;
            }
            let newton = if var > 0.0 { s + (g - target) / var } else { f64::NAN };
            s = if newton > lo && newton < hi {
                newton
            } else if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * s.max(1e-3)
            };
            if hi.is_finite() && hi - lo <= 1e-15 * hi {
                break;
            }
        }
        // land on the feasible side
        if self.tilted_cost(p, s).0 > target * (1.0 + cost_tol) && hi.is_finite() {
            s = hi;
            self.tilted_cost(p, s);
        }
        s
    }
}

/// Constrained capacity of `ch`. Each sweep recomputes the output law, picks
/// the multiplier that makes the updated input meet the budget, and bounds the
/// capacity between the mutual information of the feasible input and the dual
/// value `max_i (D_i − s c_i) + s P`.
pub fn ba_capacity(ch: &ChannelInstance, opts: &BaOptions) -> BaResult {
    let m = ch.inputs.len();
    let target = ch.budget;
    let mut solver = Solver::new(ch);
    let mut p = vec![1.0 / m as f64; m];
    let mut s = 0.0;
    let mut best = (f64::NEG_INFINITY, f64::INFINITY, 0.0, 0.0);
    let mut best_p = p.clone();
    let mut iterations = 0;
    let mut feasible = p.iter().zip(&ch.costs).map(|(a, b)| a * b).sum::<f64>() <= target * (1.0 + opts.cost_tol);
    while iterations < opts.max_iter {
        iterations += 1;
        solver.divergences(&p);
        s = solver.multiplier(&p, s, opts.cost_tol);
        let (mut info, mut cost, mut max) = (0.0, 0.0, f64::NEG_INFINITY);
        for ((&pi, &di), &ci) in p.iter().zip(&solver.d).zip(&ch.costs) {
            info += pi * di;
            cost += pi * ci;
            max = max.max(di - s * ci);
        }
        let upper = max + s * target;
        if upper < best.1 {
            best.1 = upper;
        }
        if feasible && info > best.0 {
            best.0 = info;
            best.2 = s;
            best.3 = cost;
            best_p.copy_from_slice(&p);
        }
        if best.1 - best.0 <= opts.tol {
            break;
        }
        let z: f64 = solver.w.iter().sum();
        for (pi, &wi) in p.iter_mut().zip(&solver.w) {
            *pi = wi / z;
        }
        feasible = true;
    }
    let gap = (best.1 - best.0).max(0.0);
    BaResult {
        capacity: best.0,
        upper: best.1,
        gap,
        multiplier: best.2,
        cost: best.3,
        iterations,
        converged: gap <= opts.tol,
        inputs: ch.inputs.clone(),
        distribution: best_p,
    }
}

/// Estimates at successively doubled input resolutions on a fixed range, with
/// the change between consecutive levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub m: Vec<usize>,
    pub estimates: Vec<f64>,
    pub changes: Vec<f64>,
}

pub fn refinement_study<D: Density<f64> + ?Sized + Sync>(
    noise: &D,
    constraint: Constraint,
    p: f64,
    spec: &GridSpec,
    levels: usize,
    opts: &BaOptions,
) -> Result<Refinement> {
    let ms: Vec<usize> = (0..levels).map(|l| (spec.m - 1) * (1 << l) + 1).collect();
    let est: Vec<Result<f64>> = ms
        .par_iter()
        .map(|&m| {
            let ch = build_channel(noise, constraint, p, &GridSpec { m, ..*spec })?;
            Ok(ba_capacity(&ch, opts).capacity)
        })
        .collect();
    let estimates = est.into_iter().collect::<Result<Vec<_>>>()?;
    let changes = estimates.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    Ok(Refinement { m: ms, estimates, changes })
}

/// Convexity of capacity in the noise: for each `λ`,
/// `C(λu₁ + (1−λ)u₂) ≤ λ C(u₁) + (1−λ) C(u₂)` on a shared lattice, with the
/// endpoints represented by their dual upper bounds.
pub fn convexity_probe(
    noise1: &(dyn Density<f64> + Sync),
    noise2: &(dyn Density<f64> + Sync),
    lambdas: &[f64],
    p: f64,
    constraint: Constraint,
    spec: &GridSpec,
    opts: &BaOptions,
) -> Result<BoundReport> {
    let c1 = build_channel(noise1, constraint, p, spec)?;
    let c2 = build_channel(noise2, constraint, p, spec)?;
    let (r1, r2) = rayon::join(|| ba_capacity(&c1, opts), || ba_capacity(&c2, opts));
    let rows: Vec<Result<(f64, f64, f64)>> = lambdas
        .par_iter()
        .map(|&l| {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::OutOfRange(format!("mixing weight {l} outside [0, 1]")));
            }
            let mix = ba_capacity(&c1.mix(&c2, l)?, opts);
            Ok((l, mix.capacity, l * r1.upper + (1.0 - l) * r2.upper))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = rows
        .iter()
        .copied()
        .min_by(|a, b| (a.2 - a.1).total_cmp(&(b.2 - b.1)))
        .ok_or(Error::Empty)?;
    let mix_name = format!("mix({}, {})", noise1.describe(), noise2.describe());
    Ok(BoundReport::new(
        "capacity_convexity",
        mix_name,
        &[("budget", p), ("worst_lambda", worst.0), ("endpoint_1", r1.capacity), ("endpoint_2", r2.capacity)],
        worst.1,
        worst.2,
        worst.2 - worst.1,
        r1.gap.max(r2.gap) + opts.tol,
        Scale::Nats,
        false,
    ))
}
