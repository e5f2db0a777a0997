//! Colored-noise generation and the spectral tooling that verifies it.
//!
//! Sequences are synthesized in the frequency domain: independent
//! Gaussian spectral coefficients are shaped by `f^(-beta/2)`, made
//! Hermitian, and inverse-transformed. `beta` controls the temporal
//! correlation of the result; the periodogram of an ensemble has a
//! log-log slope of `-beta`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::seeding::mix_seed;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("buffer length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("sequence length must be at least 1")]
    EmptySequence,
    #[error("sequence length {0} is below the minimum of {1}")]
    TooShort(usize, usize),
    #[error("periodogram ensemble is empty")]
    EmptyEnsemble,
    #[error("periodogram frequency grids do not match")]
    MismatchedGrids,
    #[error("too few frequency bins ({0}) left after trimming")]
    TooFewBins(usize),
}

/// A generated colored-noise sequence, normalized to zero mean and unit
/// variance, tagged with the spectral exponent and seed that made it.
#[derive(Debug, Clone)]
pub struct NoiseSequence {
    pub values: Vec<f64>,
    pub beta: f64,
    pub seed: u64,
}

/// Split complex buffer; transform lengths must be powers of two.
#[derive(Debug, Clone)]
pub struct ComplexBuffer {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexBuffer {
    pub fn from_real(values: &[f64]) -> Self {
        ComplexBuffer { re: values.to_vec(), im: vec![0.0; values.len()] }
    }

    pub fn zeros(n: usize) -> Self {
        ComplexBuffer { re: vec![0.0; n], im: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }
}

/// One-sided power spectrum, DC excluded; frequencies in cycles/step.
#[derive(Debug, Clone)]
pub struct Periodogram {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

/// In-place radix-2 FFT.
///
/// Forward computes `X_k = sum_n x_n e^{-2 pi i k n / N}`; the inverse
/// applies the conjugate transform scaled by `1/N`, so
/// `ifft(fft(x)) = x`.
pub fn fft(buf: &ComplexBuffer, inverse: bool) -> Result<ComplexBuffer, NoiseError> {
    let n = buf.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(NoiseError::NotPowerOfTwo(n));
    }
    let mut re = buf.re.clone();
    let mut im = buf.im.clone();

    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let theta = sign * 2.0 * std::f64::consts::PI / len as f64;
        let (wr, wi) = (theta.cos(), theta.sin());
        for start in (0..n).step_by(len) {
            let mut cr = 1.0;
            let mut ci = 0.0;
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let tr = cr * re[b] - ci * im[b];
                let ti = cr * im[b] + ci * re[b];
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                let ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        re.iter_mut().for_each(|v| *v *= scale);
        im.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(ComplexBuffer { re, im })
}

/// Generate a colored-noise sequence with spectral exponent `beta`.
///
/// Spectral synthesis: draw independent standard Gaussian real and
/// imaginary coefficients, scale frequency `f_k` by `f_k^(-beta/2)`,
/// enforce Hermitian symmetry, inverse-transform and keep the real
/// part. The DC scale is pinned to the smallest nonzero frequency's
/// scale, non-power-of-two lengths synthesize at the next power of two
/// and truncate, and the output is normalized to zero mean and unit
/// variance so that `beta` changes only the correlation structure.
pub fn generate(beta: f64, length: usize, seed: u64) -> Result<NoiseSequence, NoiseError> {
    if length == 0 {
        return Err(NoiseError::EmptySequence);
    }
    let n = length.next_power_of_two().max(2);
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut spec = ComplexBuffer::zeros(n);
    for k in 0..=half {
        let f = if k == 0 { 1.0 / n as f64 } else { k as f64 / n as f64 };
        let scale = f.powf(-beta / 2.0);
        let (g0, g1) = gauss_pair(&mut rng);
        let (re, im) = if k == 0 || k == half {
            (g0 * scale, 0.0)
        } else {
            (g0 * scale, g1 * scale)
        };
        spec.re[k] = re;
        spec.im[k] = im;
        if k != 0 && k != half {
            spec.re[n - k] = re;
            spec.im[n - k] = -im;
        }
    }

    let time = fft(&spec, true)?;
    let mut values: Vec<f64> = time.re[..length].to_vec();

    // Explicit post-normalization to zero mean, unit variance.
    let mean = values.iter().sum::<f64>() / length as f64;
    values.iter_mut().for_each(|v| *v -= mean);
    let var = values.iter().map(|v| v * v).sum::<f64>() / length as f64;
    if var > 0.0 {
        let inv_sd = 1.0 / var.sqrt();
        values.iter_mut().for_each(|v| *v *= inv_sd);
    }
    Ok(NoiseSequence { values, beta, seed })
}

/// Minimum sequence length accepted by `periodogram`.
pub const PERIODOGRAM_MIN_LEN: usize = 8;

/// Periodogram over positive frequencies, DC excluded:
/// `power[k] = |X_k|^2 / N`.
///
/// Input is zero-padded to the next power of two; the reported grid
/// keeps `floor(len/2)` bins, which covers the full positive band when
/// `len` is itself a power of two.
pub fn periodogram(seq: &NoiseSequence) -> Result<Periodogram, NoiseError> {
    let len = seq.values.len();
    if len < PERIODOGRAM_MIN_LEN {
        return Err(NoiseError::TooShort(len, PERIODOGRAM_MIN_LEN));
    }
    let n = len.next_power_of_two();
    let mut buf = ComplexBuffer::zeros(n);
    buf.re[..len].copy_from_slice(&seq.values);
    let spec = fft(&buf, false)?;

    let m = len / 2;
    let mut frequencies = Vec::with_capacity(m);
    let mut power = Vec::with_capacity(m);
    for k in 1..=m {
        frequencies.push(k as f64 / n as f64);
        power.push((spec.re[k] * spec.re[k] + spec.im[k] * spec.im[k]) / n as f64);
    }
    Ok(Periodogram { frequencies, power })
}

/// Fraction of the highest-frequency bins excluded from the slope fit.
const SLOPE_TRIM_HIGH: f64 = 0.05;
/// Number of lowest-frequency bins excluded from the slope fit.
const SLOPE_TRIM_LOW: usize = 2;

/// Least-squares slope of mean log-power against log-frequency.
///
/// For colored noise with exponent `beta` the expected slope is
/// `-beta`. The lowest 2 and highest 5% of bins are excluded to reduce
/// leakage bias.
pub fn fit_psd_slope(ensemble: &[Periodogram]) -> Result<f64, NoiseError> {
    let first = ensemble.first().ok_or(NoiseError::EmptyEnsemble)?;
    for p in &ensemble[1..] {
        if p.frequencies != first.frequencies {
            return Err(NoiseError::MismatchedGrids);
        }
    }
    let m = first.frequencies.len();
    let hi_drop = ((m as f64) * SLOPE_TRIM_HIGH).ceil() as usize;
    let lo = SLOPE_TRIM_LOW;
    let hi = m.saturating_sub(hi_drop);
    if hi <= lo + 1 {
        return Err(NoiseError::TooFewBins(hi.saturating_sub(lo)));
    }

    let mut xs = Vec::with_capacity(hi - lo);
    let mut ys = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let mean_log_p = ensemble
            .iter()
            .map(|p| p.power[k].max(f64::MIN_POSITIVE).ln())
            .sum::<f64>()
            / ensemble.len() as f64;
        xs.push(first.frequencies[k].ln());
        ys.push(mean_log_p);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    Ok(num / den)
}

/// Two-dimensional random walk driven by two independent colored-noise
/// sequences; starts at the origin, `steps + 1` points.
pub fn random_walk_2d(beta: f64, steps: usize, seed: u64) -> Result<Vec<(f64, f64)>, NoiseError> {
    let dx = generate(beta, steps, mix_seed(seed, 0, 0x77a1))?;
    let dy = generate(beta, steps, mix_seed(seed, 1, 0x77a1))?;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut y) = (0.0, 0.0);
    out.push((x, y));
    for i in 0..steps {
        x += dx.values[i];
        y += dy.values[i];
        out.push((x, y));
    }
    Ok(out)
}

fn gauss_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}
