use std::path::Path;

use anyhow::{bail, Context, Result};
use logconcave::density::{
    Density, Gaussian, GaussianMixtureSpec, HalfGaussian, PiecewiseLogLinearDensity, PositiveDensity, Triangle,
};

/// A noise density and whether it drives a positive (mean-constrained) channel.
pub struct Noise {
    pub density: Box<dyn Density<f64> + Send + Sync>,
    pub positive: bool,
    pub mixture: Option<GaussianMixtureSpec<f64>>,
}

impl Noise {
    fn even(d: impl Density<f64> + 'static) -> Self {
        Noise { density: Box::new(d), positive: false, mixture: None }
    }

    fn positive(d: impl Density<f64> + 'static) -> Self {
        Noise { density: Box::new(d), positive: true, mixture: None }
    }
}

pub const BUILTINS: &str = "gaussian, uniform, laplace, triangle, exponential, uniform+, half-gaussian, gmix:W@V,W@V,…";

/// Resolves a builtin name, a `gmix:` list, inline JSON or a JSON file.
///
/// Even builtins are scaled to `variance`, positive ones to `mean`.
pub fn load(spec: &str, variance: f64, mean: f64) -> Result<Noise> {
    let noise = match spec {
        "gaussian" => Noise::even(Gaussian::new(variance)?),
        "uniform" => Noise::even(PiecewiseLogLinearDensity::uniform((3.0 * variance).sqrt())?),
        "laplace" => Noise::even(PiecewiseLogLinearDensity::symmetric_exponential((2.0 / variance).sqrt())?),
        "triangle" => Noise::even(Triangle::new((6.0 * variance).sqrt())?),
        "exponential" => Noise::positive(PositiveDensity::exponential(mean)?),
        "uniform+" => Noise::positive(PositiveDensity::uniform(2.0 * mean)?),
        "half-gaussian" => Noise::positive(HalfGaussian::with_mean(mean)?),
        s if s.starts_with("gmix:") => {
            let spec = parse_mixture(&s[5..])?;
            Noise { density: Box::new(spec.density()?), positive: false, mixture: Some(spec) }
        }
        s => {
            let text = if s.trim_start().starts_with('{') {
                s.to_string()
            } else {
                std::fs::read_to_string(Path::new(s))
                    .with_context(|| format!("unknown noise {s:?}; expected one of {BUILTINS} or a JSON file"))?
            };
            let value: serde_json::Value = serde_json::from_str(&text).context("noise JSON")?;
            if let Some(folded) = value.get("folded") {
                let folded: PiecewiseLogLinearDensity<f64> =
                    serde_json::from_value(folded.clone()).context("positive noise JSON")?;
                Noise::positive(PositiveDensity::from_even(folded.normalize()?))
            } else {
                let d: PiecewiseLogLinearDensity<f64> = serde_json::from_value(value).context("noise JSON")?;
                Noise::even(d.normalize()?)
            }
        }
    };
    Ok(noise)
}

fn parse_mixture(s: &str) -> Result<GaussianMixtureSpec<f64>> {
    let mut weights = Vec::new();
    let mut variances = Vec::new();
    for part in s.split(',') {
        let (w, v) = part.split_once('@').with_context(|| format!("mixture component {part:?} is not W@V"))?;
        weights.push(w.trim().parse::<f64>()?);
        variances.push(v.trim().parse::<f64>()?);
    }
    Ok(GaussianMixtureSpec::one_dim(weights, variances)?)
}

/// `start:end:step`, inclusive of `end` up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, h] = parts[..] else {
        bail!("range {s:?} is not start:end:step");
    };
    let (a, b, h): (f64, f64, f64) = (a.parse()?, b.parse()?, h.parse()?);
    if !(h > 0.0) || !(b >= a) {
        bail!("range {s:?} needs step > 0 and end ≥ start");
    }
    Ok(logconcave::extremal::linspace_step(a, b, h))
}
