//! Weight initialization.

use rand::Rng;

use super::tensor::Tensor;

/// Uniform `±1/sqrt(fan_in)` for a `[fan_in, fan_out]` weight.
pub fn uniform_fan_in<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor {
    let bound = 1.0 / (fan_in as f64).sqrt();
    Tensor::uniform(&[fan_in, fan_out], -bound, bound, rng)
}

/// Orthogonal init with the given gain for a `[fan_in, fan_out]` weight.
///
/// A Gaussian matrix is orthonormalized with modified Gram-Schmidt along
/// its shorter side, so the columns (or rows, whichever fit) end up
/// orthonormal before scaling.
pub fn orthogonal<R: Rng>(fan_in: usize, fan_out: usize, gain: f64, rng: &mut R) -> Tensor {
    let transpose = fan_in < fan_out;
    let (rows, cols) = if transpose { (fan_out, fan_in) } else { (fan_in, fan_out) };

    // rows >= cols: orthonormalize the columns.
    let mut m = Tensor::randn(&[rows, cols], rng);
    let data = m.data_mut();
    for c in 0..cols {
        for prev in 0..c {
            let mut dot = 0.0;
            for r in 0..rows {
                dot += data[r * cols + c] * data[r * cols + prev];
            }
            for r in 0..rows {
                data[r * cols + c] -= dot * data[r * cols + prev];
            }
        }
        let norm = (0..rows).map(|r| data[r * cols + c].powi(2)).sum::<f64>().sqrt();
        // A zero column after projection is astronomically unlikely for
        // Gaussian input; resampling would complicate determinism.
        let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        for r in 0..rows {
            data[r * cols + c] *= inv;
        }
    }

    let mut out = Tensor::zeros(&[fan_in, fan_out]);
    {
        let od = out.data_mut();
        let md = m.data();
        if transpose {
            for r in 0..rows {
                for c in 0..cols {
                    od[c * fan_out + r] = gain * md[r * cols + c];
                }
            }
        } else {
            for v in od.iter_mut().zip(md.iter()) {
                *v.0 = gain * v.1;
            }
        }
    }
    out
}
