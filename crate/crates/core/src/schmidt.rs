//! Normalisation, Schmidt decomposition and purity of joint amplitudes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::amplitude::JointAmplitude;
use crate::error::{Error, Result};

/// Coefficients below this are treated as numerical noise when reporting purity.
pub const COEFFICIENT_FLOOR: f64 = 1e-12;

/// Schmidt coefficients (descending) and mode functions.
///
/// Column `j` of `signal_modes`/`idler_modes` holds `f_j`/`g_j` sampled on the
/// corresponding axis, orthonormal with respect to that axis' step, so that
/// `Σ_j λ_j f_j(a) g_j(b)` reproduces the normalised amplitude.
#[derive(Debug, Clone)]
pub struct SchmidtResult {
    pub coefficients: Vec<f64>,
    pub signal_modes: DMatrix<Complex64>,
    pub idler_modes: DMatrix<Complex64>,
    pub purity: f64,
}

impl SchmidtResult {
    pub fn schmidt_number(&self) -> f64 {
        1.0 / self.purity
    }

    /// `Σ_j λ_j f_j ⊗ g_j` as a row-major matrix.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let (rows, cols) = (self.signal_modes.nrows(), self.idler_modes.nrows());
        let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
        for (j, &lambda) in self.coefficients.iter().enumerate() {
            if lambda < COEFFICIENT_FLOOR {
                break;
            }
            let f = self.signal_modes.column(j);
            let g = self.idler_modes.column(j);
            for a in 0..rows {
                let fa = f[a] * lambda;
                for (b, o) in out[a * cols..(a + 1) * cols].iter_mut().enumerate() {
                    *o += fa * g[b];
                }
            }
        }
        out
    }
}

/// Scales to unit norm under the grid measure, `Σ|m|² dA = 1`.
pub fn normalize(ja: &JointAmplitude) -> Result<JointAmplitude> {
    let norm = (ja.norm_sqr() * ja.measure()).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateState);
    }
    let mut out = ja.clone();
    out.scale(1.0 / norm);
    Ok(out)
}

/// Normalised matrix with `√dA` folded in, so its Frobenius norm is one.
fn measured_matrix(ja: &JointAmplitude) -> Result<DMatrix<Complex64>> {
    let frob = ja.frobenius_norm();
    if !(frob > 0.0 && frob.is_finite()) {
        return Err(Error::DegenerateState);
    }
    let scale = 1.0 / frob;
    Ok(DMatrix::from_row_iterator(
        ja.rows(),
        ja.cols(),
        ja.data().iter().map(|z| z * scale),
    ))
}

/// `Σλ⁴` over coefficients above the noise floor.
pub fn purity_from_coefficients(coefficients: &[f64]) -> f64 {
    coefficients
        .iter()
        .filter(|&&l| l >= COEFFICIENT_FLOOR)
        .map(|l| l.powi(4))
        .sum()
}

pub fn schmidt_decompose(ja: &JointAmplitude) -> Result<SchmidtResult> {
    let m = measured_matrix(ja)?;
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD did not return signal modes".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not return idler modes".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients: Vec<f64> = order.iter().map(|&j| svd.singular_values[j]).collect();
    let fs = 1.0 / ja.signal_axis().step().sqrt();
    let fi = 1.0 / ja.idler_axis().step().sqrt();
    let signal_modes = DMatrix::from_fn(u.nrows(), order.len(), |a, j| u[(a, order[j])] * fs);
    let idler_modes = DMatrix::from_fn(v_t.ncols(), order.len(), |b, j| v_t[(order[j], b)] * fi);
    let purity = purity_from_coefficients(&coefficients);
    Ok(SchmidtResult {
        coefficients,
        signal_modes,
        idler_modes,
        purity,
    })
}

pub fn purity(r: &SchmidtResult) -> f64 {
    r.purity
}

/// Purity from singular values alone; skips the mode vectors.
pub fn purity_of(ja: &JointAmplitude) -> Result<f64> {
    let m = measured_matrix(ja)?;
    let sv = m.singular_values();
    let p = purity_from_coefficients(sv.as_slice());
    if !p.is_finite() {
        return Err(Error::Numerical("purity is not finite".into()));
    }
    Ok(p)
}

/// Frobenius distance between two normalised states after removing the best
/// global phase, `√(2 − 2|⟨a|b⟩|)`.
pub fn state_distance(a: &JointAmplitude, b: &JointAmplitude) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() || a.domain() != b.domain() {
        return Err(Error::Dimension(format!(
            "cannot compare a {}x{} {} state with a {}x{} {} state",
            a.rows(),
            a.cols(),
            a.domain(),
            b.rows(),
            b.cols(),
            b.domain()
        )));
    }
    let (na, nb) = (a.frobenius_norm(), b.frobenius_norm());
    if !(na > 0.0 && nb > 0.0) {
        return Err(Error::DegenerateState);
    }
    let overlap: Complex64 = a.data().iter().zip(b.data()).map(|(x, y)| x.conj() * y).sum();
    Ok((2.0 - 2.0 * (overlap.norm() / (na * nb)).min(1.0)).max(0.0).sqrt())
}
