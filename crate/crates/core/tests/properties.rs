mod common;

use logconcave::capacity::{water_filling_midpoint_gap, EigenSpectrum};
use logconcave::density::{convolve, random_density, random_log_concave, to_grid, Density, Style, DEFAULT_TAIL_EPS};
use logconcave::extremal::gap_g;
use logconcave::functionals::{
    entropy_power, isotropic_constant_sq, moment_p, relative_entropy, relative_q_entropy, renyi_entropy, RenyiOrder,
};
use logconcave::inequality::{order_slack, Verdict};
use logconcave::Piecewise;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn density() -> impl Strategy<Value = Piecewise> {
    any::<u64>().prop_map(random_log_concave)
}

fn order() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.05..0.95f64, Just(1.0), 1.05..20.0f64, Just(f64::INFINITY)]
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn generated_densities_are_even_normalized_log_concave(d in density(), xs in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 12)) {
        prop_assert!((d.mass() - 1.0).abs() < 1e-10);
        let edge = d.upper_tail_point(1e-9);
        let mut last = f64::INFINITY;
        for k in 0..=64 {
            let x = edge * k as f64 / 64.0;
            let f = d.pdf(x);
            prop_assert_eq!(f, d.pdf(-x));
            prop_assert!(f <= last * (1.0 + 1e-12));
            last = f;
        }
        for (a, b) in xs {
            let (x, y) = (edge * (2.0 * a - 1.0), edge * (2.0 * b - 1.0));
            let (fx, fy, fm) = (d.pdf(x), d.pdf(y), d.pdf(0.5 * (x + y)));
            if fx > 0.0 && fy > 0.0 {
                prop_assert!(fm.ln() >= 0.5 * (fx.ln() + fy.ln()) - 1e-12);
            }
        }
    }

    #[test]
    fn scaling_covariance(d in density(), p in 0.1..3.0f64) {
        for lambda in [0.1, 1.0, 7.0] {
            let s = d.scale(lambda).unwrap();
            prop_assert!((s.entropy() - d.entropy() - lambda.ln()).abs() < 1e-8);
            let ratio = moment_p(&s, p).unwrap() / (lambda * moment_p(&d, p).unwrap());
            prop_assert!((ratio - 1.0).abs() < 1e-8);
            prop_assert!((entropy_power(&s) / (lambda * lambda * entropy_power(&d)) - 1.0).abs() < 1e-8);
            prop_assert!((isotropic_constant_sq(&s) - isotropic_constant_sq(&d)).abs() < 1e-8);
        }
    }

    #[test]
    fn renyi_entropy_decreases_in_order(d in density(), q1 in order(), q2 in order()) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let h1 = renyi_entropy(&d, RenyiOrder::new(lo).unwrap());
        let h2 = renyi_entropy(&d, RenyiOrder::new(hi).unwrap());
        prop_assert!(h1 >= h2 - 1e-8, "h_{lo} = {h1} < h_{hi} = {h2}");
    }

    #[test]
    fn order_comparison(d in density(), a in 0.05..20.0f64, b in 0.05..20.0f64) {
        let (q, p) = if a <= b { (a, b) } else { (b, a) };
        let hq = renyi_entropy(&d, RenyiOrder::new(q).unwrap());
        let hp = renyi_entropy(&d, RenyiOrder::new(p).unwrap());
        prop_assert!(hq - hp <= order_slack(q) - order_slack(p) + 1e-8);
    }

    #[test]
    fn gibbs(d in density(), e in density(), q in 0.05..1.0f64) {
        let reference = random_density::<f64>(7, 2, Style::Unbounded);
        prop_assert!(relative_entropy(&d, &reference).value >= -1e-10);
        prop_assert!(relative_q_entropy(&d, &reference, q).unwrap().value >= -1e-9);
        let r = relative_entropy(&d, &e).value;
        prop_assert!(r >= -1e-10 || r.is_infinite());
    }

    #[test]
    fn convolution_preserves_evenness(a in density(), b in density()) {
        let w = a.upper_tail_point(1e-12).max(b.upper_tail_point(1e-12));
        let ga = to_grid(&a, w, 2048, DEFAULT_TAIL_EPS).unwrap();
        let gb = to_grid(&b, w, 2048, DEFAULT_TAIL_EPS).unwrap();
        let s = convolve(&ga, &gb).unwrap();
        prop_assert!(s.asymmetry() <= 1e-10);
        prop_assert!((s.mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_point_inequality(s in 0.0..20.0f64, t in 0.01..20.0f64, p in 0.01..2.0f64) {
        prop_assert!(gap_g(s, t, p).unwrap() > 0.0);
    }

    #[test]
    fn water_filling_is_convex(
        pairs in prop::collection::vec((0.01..10.0f64, 0.01..10.0f64), 1..6),
        p in 0.0..20.0f64,
    ) {
        let a = EigenSpectrum::new(pairs.iter().map(|x| x.0).collect()).unwrap();
        let b = EigenSpectrum::new(pairs.iter().map(|x| x.1).collect()).unwrap();
        prop_assert!(water_filling_midpoint_gap(&a, &b, p).unwrap() >= -1e-9);
    }

    #[test]
    fn verdict_classification(gap in -1.0..1.0f64, tol in 0.0..0.5f64, sharp in any::<bool>()) {
        let v = Verdict::classify(gap, tol, sharp);
        prop_assert_eq!(v == Verdict::Violated, gap < -tol);
        prop_assert_eq!(v == Verdict::Equality, sharp && gap.abs() <= tol);
    }
}

#[test]
fn order_comparison_equality_at_laplace() {
    let d = Piecewise::symmetric_exponential(1.0).unwrap();
    for (q, p) in [(0.5, 2.0), (1.0, 3.0), (0.2, f64::INFINITY)] {
        let hq = renyi_entropy(&d, RenyiOrder::new(q).unwrap());
        let hp = renyi_entropy(&d, RenyiOrder::new(p).unwrap());
        assert_close!(hq - hp, order_slack(q) - order_slack(p), 1e-5);
    }
}

/// Grid quadrature errors of mass, second moment and entropy against the closed
/// forms, at successively halved steps.
fn grid_errors(d: &Piecewise, w: f64, n: usize) -> [f64; 3] {
    let g = to_grid(d, w, n, DEFAULT_TAIL_EPS).unwrap();
    let h = g.step();
    let vals = g.values();
    let mass: f64 = vals.iter().sum::<f64>() * h;
    let m2: f64 = vals.iter().enumerate().map(|(i, f)| g.x(i).powi(2) * f).sum::<f64>() * h;
    let ent: f64 = vals.iter().filter(|f| **f > 0.0).map(|f| -f * f.ln()).sum::<f64>() * h;
    [(mass - 1.0).abs(), (m2 - d.abs_moment(2.0)).abs(), (ent - d.entropy()).abs()]
}

#[test]
fn grid_quadrature_is_second_order() {
    let d = Piecewise::normalized(vec![0.0, 0.8, 2.1], vec![0.3, 1.7, 2.9], false).unwrap();
    let w = 25.0;
    let ns = [1001, 2001, 4001];
    let e: Vec<[f64; 3]> = ns.iter().map(|&n| grid_errors(&d, w, n)).collect();
    for k in 1..3 {
        for level in 0..2 {
            let ratio = e[level][k] / e[level + 1][k];
            assert!((3.3..4.7).contains(&ratio), "quantity {k}, level {level}: ratio {ratio} ({e:?})");
        }
    }
}
