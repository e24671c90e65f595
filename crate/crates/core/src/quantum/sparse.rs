use ndarray::Array2;
use num_complex::Complex64;

/// Real matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles a square matrix from `(row, col, value)` triplets; repeated
    /// positions are summed and exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        let keep: Vec<bool> = vals.iter().map(|&v| v != 0.0).collect();
        let mut k = 0;
        let (mut cols_out, mut vals_out) = (Vec::with_capacity(cols.len()), Vec::with_capacity(vals.len()));
        for i in 0..cols.len() {
            if keep[i] {
                row_ptr[rows[i] + 1] += 1;
                cols_out.push(cols[i]);
                vals_out.push(vals[i]);
                k += 1;
            }
        }
        debug_assert_eq!(k, cols_out.len());
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            dim,
            row_ptr,
            cols: cols_out,
            vals: vals_out,
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let triplets = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        CsrMatrix::from_triplets(values.len(), triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    /// `Σ c_i M_i`, all of the same dimension.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> Self {
        let dim = terms.first().map_or(0, |(_, m)| m.dim);
        let triplets = terms
            .iter()
            .flat_map(|(c, m)| {
                assert_eq!(m.dim, dim);
                m.triplets().map(move |(r, col, v)| (r, col, c * v))
            })
            .collect();
        CsrMatrix::from_triplets(dim, triplets)
    }

    pub fn transpose(&self) -> Self {
        CsrMatrix::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v)).collect())
    }

    /// Largest `|M_ij − M_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        let diff = CsrMatrix::linear_combination(&[(1.0, self), (-1.0, &t)]);
        diff.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.dim, self.dim));
        for (r, c, v) in self.triplets() {
            a[[r, c]] = v;
        }
        a
    }

    /// `out = M x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k]] * self.vals[k];
            }
            out[r] = acc;
        }
    }

    pub fn apply_real(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k]] * self.vals[k];
            }
            out[r] = acc;
        }
    }

    /// Gershgorin enclosure of the spectrum of a symmetric matrix.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dim {
            let mut centre = 0.0;
            let mut radius = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r {
                    centre += self.vals[k];
                } else {
                    radius += self.vals[k].abs();
                }
            }
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        (lo, hi)
    }
}
