use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, EigValsh, UPLO};
use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Largest dimension for which spectral bounds come from a full eigensolve.
pub const DENSE_BOUNDS_MAX_DIM: usize = 2000;
/// Largest dimension for which eigenvectors come from a dense eigensolve.
pub const DENSE_EIGEN_MAX_DIM: usize = 4000;
/// Asymmetry above which a matrix is refused as non-Hermitian.
const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Relative margin added on each side of Lanczos estimates.
const LANCZOS_MARGIN: f64 = 0.01;
const LANCZOS_MAX_ITER: usize = 600;

/// Enclosure `E_min ≤ σ(H) ≤ E_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBounds {
    pub e_min: f64,
    pub e_max: f64,
}

impl SpectralBounds {
    pub fn width(&self) -> f64 {
        self.e_max - self.e_min
    }

    pub fn centre(&self) -> f64 {
        0.5 * (self.e_max + self.e_min)
    }
}

fn check_hermitian(h: &CsrMatrix) -> Result<()> {
    let asym = h.max_asymmetry();
    if asym > HERMITIAN_TOLERANCE {
        Err(Error::NotHermitian(asym))
    } else {
        Ok(())
    }
}

/// Spectral enclosure of a real symmetric `H`: exact extremal eigenvalues up
/// to [`DENSE_BOUNDS_MAX_DIM`], else Lanczos estimates widened by 1% of
/// the spectral width on each side.
pub fn spectral_bounds(h: &CsrMatrix) -> Result<SpectralBounds> {
    check_hermitian(h)?;
    if h.dim() == 0 {
        return Err(Error::Eigensolver("empty matrix".into()));
    }
    if h.dim() <= DENSE_BOUNDS_MAX_DIM {
        let values = h
            .to_dense()
            .eigvalsh(UPLO::Lower)
            .map_err(|e| Error::Eigensolver(e.to_string()))?;
        return Ok(SpectralBounds {
            e_min: values[0],
            e_max: values[values.len() - 1],
        });
    }
    let run = lanczos(h, false)?;
    let (lo, hi) = (run.lowest - run.lowest_residual, run.highest + run.highest_residual);
    let margin = LANCZOS_MARGIN * (hi - lo);
    Ok(SpectralBounds {
        e_min: lo - margin,
        e_max: hi + margin,
    })
}

/// Lowest eigenvalue and a normalised eigenvector, dense up to
/// [`DENSE_EIGEN_MAX_DIM`] and Lanczos beyond.
pub fn lowest_eigenpair(h: &CsrMatrix) -> Result<(f64, Vec<f64>)> {
    check_hermitian(h)?;
    if h.dim() <= DENSE_EIGEN_MAX_DIM {
        let (values, vectors) = h
            .to_dense()
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Eigensolver(e.to_string()))?;
        return Ok((values[0], vectors.column(0).to_vec()));
    }
    let run = lanczos(h, true)?;
    Ok((run.lowest, run.lowest_vector.expect("vector requested")))
}

struct LanczosRun {
    lowest: f64,
    highest: f64,
    lowest_residual: f64,
    highest_residual: f64,
    lowest_vector: Option<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deterministic start vector with weight on every basis state, so no
/// symmetry sector is missed.
fn start_vector(dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.754_877_666 + 0.3).sin())
        .collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn tridiagonal_eigh(alphas: &[f64], betas: &[f64]) -> Result<(Array1<f64>, Array2<f64>)> {
    let k = alphas.len();
    let mut t = Array2::zeros((k, k));
    for i in 0..k {
        t[[i, i]] = alphas[i];
        if i + 1 < k {
            t[[i, i + 1]] = betas[i];
            t[[i + 1, i]] = betas[i];
        }
    }
    t.eigh(UPLO::Lower).map_err(|e| Error::Eigensolver(e.to_string()))
}

/// Lanczos with full reorthogonalisation. Residual norms `β_k |y_k|` of the
/// extremal Ritz pairs bound the distance to true eigenvalues.
fn lanczos(h: &CsrMatrix, want_vector: bool) -> Result<LanczosRun> {
    let dim = h.dim();
    let (g_lo, g_hi) = h.gershgorin();
    let scale = g_lo.abs().max(g_hi.abs()).max(1e-300);
    let tol = 1e-10 * scale;
    let max_iter = LANCZOS_MAX_ITER.min(dim);

    let mut vectors: Vec<Vec<f64>> = vec![start_vector(dim)];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    for k in 0..max_iter {
        h.apply_real(&vectors[k], &mut w);
        let alpha = dot(&w, &vectors[k]);
        alphas.push(alpha);
        for _ in 0..2 {
            for v in &vectors {
                let c = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = dot(&w, &w).sqrt();
        let check = (k + 1) % 10 == 0 || k + 1 == max_iter || beta < tol;
        if check {
            let (values, y) = tridiagonal_eigh(&alphas, &betas)?;
            let last = alphas.len() - 1;
            let res_lo = beta * y[[last, 0]].abs();
            let res_hi = beta * y[[last, last]].abs();
            if (res_lo < tol && res_hi < tol) || beta < tol {
                let lowest_vector = want_vector.then(|| {
                    let mut x = vec![0.0; dim];
                    for (i, v) in vectors.iter().enumerate().take(alphas.len()) {
                        let c = y[[i, 0]];
                        x.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
                    }
                    let n = dot(&x, &x).sqrt();
                    x.iter_mut().for_each(|a| *a /= n);
                    x
                });
                return Ok(LanczosRun {
                    lowest: values[0],
                    highest: values[last],
                    lowest_residual: res_lo,
                    highest_residual: res_hi,
                    lowest_vector,
                });
            }
        }
        betas.push(beta);
        vectors.push(w.iter().map(|x| x / beta).collect());
    }
    Err(Error::Eigensolver(format!(
        "Lanczos did not converge in {max_iter} iterations"
    )))
}
