//! Central finite-difference gradient checking.

use super::param::Param;
use super::NnError;

/// Step size for central differences; 64-bit math keeps the truncation
/// and roundoff errors both far below the tolerances we assert.
pub const GRAD_CHECK_H: f64 = 1e-5;

/// Compare analytic gradients against central finite differences.
///
/// `loss` must rebuild its graph from scratch, run backward, and return
/// the scalar loss; gradients accumulate into `params`. Returns the max
/// relative error over every parameter element, with the denominator
/// floored at 1e-3 so finite-difference roundoff on near-zero gradients
/// does not register as disagreement.
pub fn grad_check<F>(params: &[Param], mut loss: F) -> Result<f64, NnError>
where
    F: FnMut() -> Result<f64, NnError>,
{
    for p in params {
        p.zero_grad();
    }
    let _ = loss()?;
    let analytic: Vec<Vec<f64>> = params.iter().map(|p| p.grad().data().to_vec()).collect();

    let mut max_rel: f64 = 0.0;
    for (pi, p) in params.iter().enumerate() {
        for j in 0..p.len() {
            let old = p.nudge(j, GRAD_CHECK_H);
            let up = loss()?;
            p.set_element(j, old - GRAD_CHECK_H);
            let down = loss()?;
            p.set_element(j, old);

            let fd = (up - down) / (2.0 * GRAD_CHECK_H);
            let an = analytic[pi][j];
            let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-3);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    // Restore clean analytic gradients for any caller inspection.
    for p in params {
        p.zero_grad();
    }
    let _ = loss()?;
    Ok(max_rel)
}
