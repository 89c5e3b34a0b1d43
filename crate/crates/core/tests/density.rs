mod common;

use common::simpson;
use logconcave::density::{
    convolve, mixture, random_density, symmetrize, to_grid, Density, Gaussian, GaussianMixtureSpec, GeneralizedGaussian,
    HalfGaussian, PositiveDensity, Style, Triangle, DEFAULT_TAIL_EPS,
};
use logconcave::functionals::constants::a_p1;
use logconcave::{Error, Piecewise};

const LN2: f64 = std::f64::consts::LN_2;

#[test]
fn normalize_uniform_plateau() {
    let d = Piecewise::new(vec![0.0, 1.0], vec![0.0], 3.0, true).unwrap().normalize().unwrap();
    assert_close!(d.pdf(0.0), 0.5, 1e-14);
    assert_close!(d.pdf(0.99), 0.5, 1e-14);
    assert_eq!(d.pdf(1.01), 0.0);
    assert_close!(d.mass(), 1.0, 1e-14);
}

#[test]
fn normalize_single_tail_is_symmetric_exponential() {
    let d = Piecewise::new(vec![0.0], vec![1.0], 0.5f64.ln(), false).unwrap().normalize().unwrap();
    for x in [-3.0, -0.2, 0.0, 0.7, 5.0] {
        assert_close!(d.pdf(x), 0.5 * (-f64::abs(x)).exp(), 1e-14);
    }
}

#[test]
fn normalize_plateau_then_cut_tail() {
    let d = Piecewise::normalized(vec![0.0, 1.0, 2.0], vec![0.0, 1.0], true).unwrap();
    let c = 1.0 / (2.0 * (2.0 - (-1.0f64).exp()));
    assert_close!(d.pdf(0.0), c, 1e-14);
    let oracle = |x: f64| {
        let r = x.abs();
        if r <= 1.0 {
            c
        } else if r <= 2.0 {
            c * (-(r - 1.0)).exp()
        } else {
            0.0
        }
    };
    let trap = {
        let n = 200_000;
        let h = 4.0 / n as f64;
        (0..=n).map(|i| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * oracle(-2.0 + i as f64 * h)
        }).sum::<f64>() * h
    };
    assert_close!(trap, 1.0, 1e-6);
    assert_close!(d.mass(), 1.0, 1e-12);
}

#[test]
fn normalize_rejects_infinite_mass() {
    let r = Piecewise::new(vec![0.0], vec![0.0], 0.0, false);
    assert!(r.is_err(), "{r:?}");
}

#[test]
fn random_density_examples() {
    let u: Piecewise = random_density(7, 1, Style::Bounded);
    assert_eq!(u.slopes(), &[0.0]);
    let edge = u.edge().unwrap();
    assert_close!(u.pdf(0.0), 1.0 / (2.0 * edge), 1e-13);
    assert_close!(u.pdf(0.9 * edge), u.pdf(0.0), 1e-13);

    let d: Piecewise = random_density(7, 3, Style::Unbounded);
    assert_eq!(d.pieces(), 3);
    assert!(d.slopes().windows(2).all(|w| w[0] <= w[1]));
    assert!(d.slopes()[2] > 0.0);
    assert!(d.breakpoints().windows(2).all(|w| w[0] < w[1]));
    assert_close!(d.mass(), 1.0, 1e-10);
    let again: Piecewise = random_density(7, 3, Style::Unbounded);
    assert_eq!(d, again);
}

#[test]
fn grid_entropies() {
    let u = Piecewise::uniform(1.0).unwrap();
    let g = to_grid(&u, 1.5, 4096, DEFAULT_TAIL_EPS).unwrap();
    assert_close!(g.entropy(), LN2, 1e-6);

    let l = Piecewise::symmetric_exponential(1.0).unwrap();
    let w = l.upper_tail_point(1e-12);
    let g = to_grid(&l, w, 8192, DEFAULT_TAIL_EPS).unwrap();
    assert_close!(g.entropy(), 1.0 + LN2, 1e-5);

    let z = Gaussian::<f64>::new(1.0).unwrap();
    let g = to_grid(&z, 9.0, 8192, DEFAULT_TAIL_EPS).unwrap();
    assert_close!(g.entropy(), 0.5 * (std::f64::consts::TAU * std::f64::consts::E).ln(), 1e-6);
}

#[test]
fn grid_rejects_insufficient_coverage() {
    let z = Gaussian::<f64>::new(1.0).unwrap();
    match to_grid(&z, 2.0, 1024, DEFAULT_TAIL_EPS) {
        Err(Error::InsufficientCoverage { required }) => assert!(required > 2.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn convolve_uniforms_gives_triangle() {
    let u = Piecewise::uniform(1.0).unwrap();
    let g = to_grid(&u, 2.5, 4096, DEFAULT_TAIL_EPS).unwrap();
    let s = convolve(&g, &g).unwrap();
    let tri = Triangle::new(2.0).unwrap();
    assert!(s.l1_distance(&tri) < 2e-3, "{}", s.l1_distance(&tri));
    assert_close!(s.variance(), 2.0 / 3.0, 1e-6);
}

#[test]
fn convolve_gaussians_and_variance_additivity() {
    let a = Gaussian::<f64>::new(1.0).unwrap();
    let b = Gaussian::<f64>::new(2.0).unwrap();
    let w = 12.0;
    let ga = to_grid(&a, w, 4096, DEFAULT_TAIL_EPS).unwrap();
    let gb = to_grid(&b, w, 4096, DEFAULT_TAIL_EPS).unwrap();
    let s = convolve(&ga, &gb).unwrap();
    assert!(s.l1_distance(&Gaussian::<f64>::new(3.0).unwrap()) <= 1e-4);
    assert_close!(s.variance(), ga.variance() + gb.variance(), 1e-6);

    let r: Piecewise = random_density(11, 4, Style::Unbounded);
    let q: Piecewise = random_density(12, 2, Style::Bounded);
    let w = r.upper_tail_point(1e-13).max(q.upper_tail_point(1e-13));
    let gr = to_grid(&r, w, 4096, DEFAULT_TAIL_EPS).unwrap();
    let gq = to_grid(&q, w, 4096, DEFAULT_TAIL_EPS).unwrap();
    let s = convolve(&gr, &gq).unwrap();
    assert_close!(s.variance(), gr.variance() + gq.variance(), 1e-6);
    assert!(s.asymmetry() <= 1e-10);
}

#[test]
fn convolve_rejects_step_mismatch() {
    let z = Gaussian::<f64>::new(1.0).unwrap();
    let a = to_grid(&z, 10.0, 1024, DEFAULT_TAIL_EPS).unwrap();
    let b = to_grid(&z, 10.0, 2048, DEFAULT_TAIL_EPS).unwrap();
    assert!(matches!(convolve(&a, &b), Err(Error::StepMismatch(..))));
}

#[test]
fn symmetrize_examples() {
    let e = PositiveDensity::exponential(1.0).unwrap();
    let s = symmetrize(&e);
    assert_close!(s.pdf(1.3), 0.5 * (-1.3f64).exp(), 1e-14);
    assert_close!(s.entropy(), e.entropy() + LN2, 1e-10);
    assert_close!(s.entropy(), 1.0 + LN2, 1e-10);

    let u = PositiveDensity::uniform(1.0).unwrap();
    let s = symmetrize(&u);
    assert_close!(s.pdf(-0.7), 0.5, 1e-14);
    assert_close!(s.pdf(0.7), 0.5, 1e-14);
    assert_eq!(s.pdf(1.2), 0.0);
}

#[test]
fn symmetrized_half_gaussian_identities() {
    let hg = HalfGaussian::<f64>::new(1.3).unwrap();
    let s = logconcave::density::Symmetrized::new(hg);
    let f = |x: f64| (2.0 / std::f64::consts::PI).sqrt() / 1.3 * (-(x * x) / (2.0 * 1.69)).exp();
    let h_half = simpson(0.0, 15.0, 20_000, |x| {
        let v = f(x);
        if v > 0.0 { -v * v.ln() } else { 0.0 }
    });
    assert_close!(hg.entropy(), h_half, 1e-8);
    assert_close!(s.entropy(), h_half + LN2, 1e-8);
    for p in [0.5, 1.0, 2.0] {
        let m = simpson(0.0, 4.0, 20_000, |u| u.powf(2.0 * p) * f(u * u) * 2.0 * u);
        assert_close!(s.abs_moment(p), m, 1e-8);
        assert_close!(hg.abs_moment(p), m, 1e-8);
    }
}

#[test]
fn generalized_gaussian_normalizers() {
    let g = GeneralizedGaussian::<f64>::new(2.0, 1.0).unwrap();
    assert_close!(g.normalizer(), std::f64::consts::TAU.sqrt(), 1e-13);
    assert_close!(g.pdf(0.8), (-0.32f64).exp() / std::f64::consts::TAU.sqrt(), 1e-13);
    let g = GeneralizedGaussian::<f64>::new(1.0, 1.0).unwrap();
    assert_close!(g.normalizer(), 2.0, 1e-13);
    assert_close!(a_p1(2.0_f64), 2.0 * 2f64.sqrt() * 0.5 * std::f64::consts::PI.sqrt(), 1e-13);

    let g = GeneralizedGaussian::<f64>::new(2.0, 0.5).unwrap();
    let (lo, hi) = g.support();
    let hi = hi.min(1e3);
    let lo = lo.max(-1e3);
    let m = simpson(lo, hi, 400_000, |x| g.pdf(x));
    assert_close!(m, 1.0, 1e-6);
}

#[test]
fn generalized_gaussian_rejects_bad_order() {
    assert!(GeneralizedGaussian::<f64>::new(1.0, 0.4).is_err());
    assert!(GeneralizedGaussian::<f64>::new(2.5, 1.0).is_err());
}

#[test]
fn mixture_examples() {
    let spec = GaussianMixtureSpec::one_dim(vec![1.0], vec![1.0]).unwrap();
    let g = mixture(&spec, 8192).unwrap();
    assert!(g.l1_distance(&Gaussian::<f64>::new(1.0).unwrap()) < 1e-5);

    let spec = GaussianMixtureSpec::one_dim(vec![0.5, 0.5], vec![1.0, 4.0]).unwrap();
    assert_close!(spec.variance().unwrap(), 2.5, 1e-14);
    assert_close!(mixture(&spec, 8192).unwrap().variance(), 2.5, 1e-6);

    let spec = GaussianMixtureSpec::one_dim(vec![0.3, 0.7], vec![0.5, 2.0]).unwrap();
    let d = spec.density().unwrap();
    let oracle = simpson(-40.0, 40.0, 80_000, |x| {
        let n = |v: f64| (-(x * x) / (2.0 * v)).exp() / (std::f64::consts::TAU * v).sqrt();
        x * x * (0.3 * n(0.5) + 0.7 * n(2.0))
    });
    assert_close!(oracle, 1.55, 1e-9);
    assert_close!(d.variance(), 1.55, 1e-6);
    assert_close!(mixture(&spec, 8192).unwrap().variance(), 1.55, 1e-6);
}

#[test]
fn piecewise_json_roundtrip() {
    let d: Piecewise = random_density(3, 3, Style::Bounded);
    let s = serde_json::to_string(&d).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    for key in ["breakpoints", "slopes", "log_f0", "bounded"] {
        assert!(v.get(key).is_some(), "{key} missing in {s}");
    }
    let back: Piecewise = serde_json::from_str(&s).unwrap();
    assert_eq!(back.bounded(), d.bounded());
    let pairs = d.breakpoints().iter().zip(back.breakpoints()).chain(d.slopes().iter().zip(back.slopes()));
    for (a, b) in pairs {
        assert_close!(*a, *b, 1e-15 * a.abs().max(1.0));
    }
    assert_close!(back.log_f0(), d.log_f0(), 1e-15);
}

#[test]
fn grid_csv_roundtrip() {
    let z = Gaussian::<f64>::new(1.0).unwrap();
    let g = to_grid(&z, 9.0, 512, DEFAULT_TAIL_EPS).unwrap();
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    let back = logconcave::Grid::read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back.len(), g.len());
    assert_close!(back.l1_distance(&g), 0.0, 1e-9);
}
