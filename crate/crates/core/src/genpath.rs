//! Stationary Gaussian path generation.
//!
//! Three samplers cover the correlation models: direct draws for iid paths,
//! the AR(1) recursion, and circulant embedding for general summable
//! correlations. The embedding wraps the covariance into a circulant matrix
//! whose eigenvalues come from one FFT; a second FFT of complex white noise
//! scaled by the root eigenvalues yields two independent paths per transform,
//! of which the real part is kept. The spectrum is validated and cached so
//! each replicate pays a single FFT.

use std::sync::Arc;

use rand::{Rng, RngExt};
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::dependence::CorrelationModel;
use crate::error::{Error, Result};

/// One replicate of the stationary sequence.
#[derive(Debug, Clone)]
pub struct SamplePath {
    model: CorrelationModel,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(model: CorrelationModel, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("a sample path must be nonempty".into()));
        }
        Ok(Self { model, values })
    }

    pub fn model(&self) -> &CorrelationModel {
        &self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Independent standard normal draws.
pub fn generate_iid(n: u64, rng: &mut impl Rng) -> Result<SamplePath> {
    if n == 0 {
        return Err(Error::InvalidParameter("path length must be positive".into()));
    }
    let values = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    SamplePath::new(CorrelationModel::Iid, values)
}

/// Stationary AR(1) recursion X_{t+1} = phi X_t + sqrt(1 - phi^2) Z_t with
/// X_0 standard normal, so every marginal is standard normal.
pub fn generate_ar1(n: u64, phi: f64, rng: &mut impl Rng) -> Result<SamplePath> {
    if n == 0 {
        return Err(Error::InvalidParameter("path length must be positive".into()));
    }
    let model = CorrelationModel::ar1(phi)?;
    let innov = ((1.0 - phi) * (1.0 + phi)).sqrt();
    let mut values = Vec::with_capacity(n as usize);
    let mut x: f64 = rng.sample(StandardNormal);
    values.push(x);
    for _ in 1..n {
        let z: f64 = rng.sample(StandardNormal);
        x = phi * x + innov * z;
        values.push(x);
    }
    SamplePath::new(model, values)
}

/// Precomputed circulant spectrum for one (model, n) pair.
pub struct CirculantEmbedding {
    model: CorrelationModel,
    n: usize,
    size: usize,
    /// sqrt(lambda_j / size); folds the FFT normalization into the scale.
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    clipped: usize,
}

impl std::fmt::Debug for CirculantEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantEmbedding")
            .field("model", &self.model)
            .field("n", &self.n)
            .field("size", &self.size)
            .field("clipped", &self.clipped)
            .finish()
    }
}

/// Eigenvalues this far below zero, relative to the largest one, fail the
/// embedding; anything between is clipped to zero.
const EIGENVALUE_TOLERANCE: f64 = 1e-8;

impl CirculantEmbedding {
    pub fn new(model: &CorrelationModel, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("path length must be positive".into()));
        }
        let n = usize::try_from(n)
            .map_err(|_| Error::InvalidParameter(format!("path length {n} exceeds the address space")))?;
        let size = 2usize * n.saturating_sub(1).max(1);
        let size = size.next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(size);

        let mut buf: Vec<Complex<f64>> = (0..size)
            .map(|j| {
                let lag = j.min(size - j) as u64;
                Complex::new(model.rho_at(lag), 0.0)
            })
            .collect();
        fft.process(&mut buf);

        let mut max_eig = f64::NEG_INFINITY;
        let mut min_eig = f64::INFINITY;
        for z in &buf {
            max_eig = max_eig.max(z.re);
            min_eig = min_eig.min(z.re);
        }
        let tolerance = EIGENVALUE_TOLERANCE * max_eig.max(0.0);
        if min_eig < -tolerance {
            return Err(Error::EmbeddingFailure {
                size,
                min_eigenvalue: min_eig,
                tolerance,
            });
        }
        let mut clipped = 0usize;
        let inv_size = 1.0 / size as f64;
        let scale: Vec<f64> = buf
            .iter()
            .map(|z| {
                let lambda = if z.re < 0.0 {
                    clipped += 1;
                    0.0
                } else {
                    z.re
                };
                (lambda * inv_size).sqrt()
            })
            .collect();
        if clipped > 0 {
            log::warn!(
                "circulant embedding of {model:?} at n = {n}: clipped {clipped} eigenvalues in [{min_eig:.3e}, 0) to zero"
            );
        }
        Ok(Self {
            model: model.clone(),
            n,
            size,
            scale,
            fft,
            clipped,
        })
    }

    pub fn model(&self) -> &CorrelationModel {
        &self.model
    }

    pub fn embedding_size(&self) -> usize {
        self.size
    }

    pub fn clipped_count(&self) -> usize {
        self.clipped
    }

    /// Draws one path. The complex white noise costs two normals per
    /// frequency; taking the real part of the transform leaves each retained
    /// coordinate standard normal with the embedded covariance.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = self
            .scale
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf[..self.n].iter().map(|z| z.re).collect()
    }
}

/// One-shot circulant draw; builds the embedding, samples once.
pub fn generate_circulant(
    n: u64,
    model: &CorrelationModel,
    rng: &mut impl Rng,
) -> Result<SamplePath> {
    let embedding = CirculantEmbedding::new(model, n)?;
    SamplePath::new(model.clone(), embedding.sample(rng))
}
