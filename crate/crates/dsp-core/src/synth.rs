//! Synthetic dataset generator.
//!
//! Samples are placed uniformly in [0,100]² and valued by a smooth sum of
//! sinusoids plus Gaussian noise whose scale depends on which region the
//! point falls in. The default layout is two concentric regions (a rough
//! inner disk inside a smooth outer one), so the best interpolation power
//! genuinely varies across space.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Side length of the square sampling domain.
pub const DOMAIN_SIDE: f64 = 100.0;

/// A disk with its own noise level. Regions are checked in list order; the
/// first one containing a point wins. Points outside every region get zero
/// noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseRegion {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub noise_scale: f64,
}

impl NoiseRegion {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.cx;
        let dy = y - self.cy;
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

/// One term of the base field: `amplitude * sin(freq_x*x + freq_y*y + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub freq_x: f64,
    pub freq_y: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Sinusoid {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.amplitude * (self.freq_x * x + self.freq_y * y + self.phase).sin()
    }
}

/// Generator configuration; also the on-disk JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_regions")]
    pub regions: Vec<NoiseRegion>,
    #[serde(default = "default_base_field")]
    pub base_field: Vec<Sinusoid>,
}

fn default_n() -> usize {
    200
}

fn default_regions() -> Vec<NoiseRegion> {
    vec![
        // Rough core.
        NoiseRegion {
            cx: 50.0,
            cy: 50.0,
            radius: 30.0,
            noise_scale: 3.0,
        },
        // Smooth remainder; radius comfortably covers the whole domain.
        NoiseRegion {
            cx: 50.0,
            cy: 50.0,
            radius: 1000.0,
            noise_scale: 0.1,
        },
    ]
}

fn default_base_field() -> Vec<Sinusoid> {
    vec![
        Sinusoid {
            amplitude: 10.0,
            freq_x: 0.055,
            freq_y: 0.0,
            phase: 0.4,
        },
        Sinusoid {
            amplitude: 8.0,
            freq_x: 0.0,
            freq_y: 0.047,
            phase: 1.3,
        },
        Sinusoid {
            amplitude: 5.0,
            freq_x: 0.035,
            freq_y: 0.042,
            phase: 2.1,
        },
    ]
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n: default_n(),
            seed: 0,
            regions: default_regions(),
            base_field: default_base_field(),
        }
    }
}

impl SyntheticConfig {
    /// The deterministic part of the field at a location.
    pub fn base_value(&self, x: f64, y: f64) -> f64 {
        self.base_field.iter().map(|s| s.eval(x, y)).sum()
    }

    /// Noise scale at a location (first matching region wins).
    pub fn noise_scale(&self, x: f64, y: f64) -> f64 {
        self.regions
            .iter()
            .find(|r| r.contains(x, y))
            .map(|r| r.noise_scale)
            .unwrap_or(0.0)
    }

    /// Generates using the config's own `n` and `seed`.
    pub fn generate(&self) -> Result<Dataset> {
        generate_synthetic(self.n, self, self.seed)
    }
}

/// Draws `n` samples (n ≥ 10) in [0,100]², deterministic per seed. The
/// config's `regions` and `base_field` shape the values; its `n`/`seed`
/// fields are ignored in favor of the explicit arguments.
pub fn generate_synthetic(n: usize, config: &SyntheticConfig, seed: u64) -> Result<Dataset> {
    if n < 10 {
        return Err(Error::invalid_argument(format!(
            "synthetic datasets need n >= 10, got {n}"
        )));
    }
    for r in &config.regions {
        if !r.radius.is_finite() || r.radius <= 0.0 || r.noise_scale.is_nan() || r.noise_scale < 0.0 {
            return Err(Error::invalid_argument(
                "regions need radius > 0 and noise_scale >= 0".to_string(),
            ));
        }
    }
    let mut rng = seeded_rng(seed, "synth");
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.random_range(0.0..DOMAIN_SIDE);
        let y: f64 = rng.random_range(0.0..DOMAIN_SIDE);
        // The normal draw always happens so the stream does not depend on
        // the region layout.
        let z: f64 = StandardNormal.sample(&mut rng);
        let value = config.base_value(x, y) + config.noise_scale(x, y) * z;
        samples.push(Sample::new(x, y, value));
    }
    Dataset::new(format!("synthetic-{seed}"), samples)
}
