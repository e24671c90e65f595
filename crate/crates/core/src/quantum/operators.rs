use super::sparse::CsrMatrix;
use super::Basis;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Largest Hilbert space the engine will build unless told otherwise.
pub const DEFAULT_DIMENSION_CAP: usize = 250_000;

/// Observables and generators on one truncated space. Diagonal operators
/// are stored as their diagonals.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub basis: Basis,
    pub params: ModelParams,
    /// `a†a`.
    pub number: Vec<f64>,
    /// `J_z`.
    pub jz: Vec<f64>,
    /// `N = a†a + J_z + j`.
    pub excitations: Vec<f64>,
    /// `Π = exp(iπN)`, entries `(−1)^{n+m+j}`.
    pub parity: Vec<f64>,
    /// `a`.
    pub annihilation: CsrMatrix,
    /// `a + a†`.
    pub field_quadrature: CsrMatrix,
    /// `J₊`.
    pub raising: CsrMatrix,
    /// `J₊ + J₋`.
    pub spin_quadrature: CsrMatrix,
    /// `(a + a†)(J₊ + J₋)`.
    pub coupling: CsrMatrix,
    /// Undriven Hamiltonian `H_D`.
    pub h_dicke: CsrMatrix,
    /// Co-rotating Hamiltonian `H_ROT = H_D + δφ J_z`.
    pub h_rot: CsrMatrix,
}

/// Builds every operator for `params` (including `params.n_max`).
pub fn build_operators(params: &ModelParams) -> Result<OperatorSet> {
    OperatorSet::with_cap(params, DEFAULT_DIMENSION_CAP)
}

/// `(row, col, value)` of a one-factor operator acting on the field (`spin`
/// false) or the spin factor, lifted to the product space.
fn lift(basis: &Basis, entries: &[(usize, usize, f64)], on_spin: bool) -> CsrMatrix {
    let mut triplets = Vec::new();
    if on_spin {
        for &(r, c, v) in entries {
            for n in 0..basis.field_levels() {
                triplets.push((basis.index(n, r), basis.index(n, c), v));
            }
        }
    } else {
        for k in 0..basis.spin_levels() {
            for &(r, c, v) in entries {
                triplets.push((basis.index(r, k), basis.index(c, k), v));
            }
        }
    }
    CsrMatrix::from_triplets(basis.dim(), triplets)
}

fn field_lowering(n_max: usize) -> Vec<(usize, usize, f64)> {
    (1..=n_max).map(|n| (n - 1, n, (n as f64).sqrt())).collect()
}

/// `J₊|j, m⟩ = √(j(j+1) − m(m+1)) |j, m+1⟩`, which with `k = m + j` is
/// `√((k+1)(2j−k))`.
fn spin_raising(two_j: usize) -> Vec<(usize, usize, f64)> {
    (0..two_j)
        .map(|k| (k + 1, k, (((k + 1) * (two_j - k)) as f64).sqrt()))
        .collect()
}

fn symmetrize(entries: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64)> {
    entries
        .iter()
        .flat_map(|&(r, c, v)| [(r, c, v), (c, r, v)])
        .collect()
}

impl OperatorSet {
    pub fn with_cap(params: &ModelParams, cap: usize) -> Result<Self> {
        params.validate()?;
        let basis = Basis::new(params.two_j, params.n_max);
        let dim = (params.n_max as u128 + 1) * (params.two_j as u128 + 1);
        if dim > cap as u128 {
            return Err(Error::DimensionTooLarge {
                dim: dim.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        let dim = basis.dim();
        let mut number = Vec::with_capacity(dim);
        let mut jz = Vec::with_capacity(dim);
        let mut excitations = Vec::with_capacity(dim);
        let mut parity = Vec::with_capacity(dim);
        for i in 0..dim {
            let (n, k) = basis.levels(i);
            number.push(n as f64);
            jz.push(basis.m(k));
            // n + m + j = n + k is an integer for every j.
            excitations.push((n + k) as f64);
            parity.push(if (n + k) % 2 == 0 { 1.0 } else { -1.0 });
        }

        let lowering = field_lowering(params.n_max);
        let raising_entries = spin_raising(params.two_j as usize);
        let annihilation = lift(&basis, &lowering, false);
        let field_quadrature = lift(&basis, &symmetrize(&lowering), false);
        let raising = lift(&basis, &raising_entries, true);
        let spin_quadrature = lift(&basis, &symmetrize(&raising_entries), true);

        let spin_x = symmetrize(&raising_entries);
        let field_x = symmetrize(&lowering);
        let mut coupling_triplets = Vec::with_capacity(spin_x.len() * field_x.len());
        for &(sr, sc, sv) in &spin_x {
            for &(fr, fc, fv) in &field_x {
                coupling_triplets.push((basis.index(fr, sr), basis.index(fc, sc), sv * fv));
            }
        }
        let coupling = CsrMatrix::from_triplets(dim, coupling_triplets);

        let g = params.lambda / (params.two_j as f64).sqrt();
        let dicke_diag: Vec<f64> = (0..dim)
            .map(|i| params.omega0 * jz[i] + params.omega * number[i])
            .collect();
        let rot_diag: Vec<f64> = (0..dim)
            .map(|i| params.rotated_omega0() * jz[i] + params.omega * number[i])
            .collect();
        let h_dicke = CsrMatrix::linear_combination(&[(1.0, &CsrMatrix::diagonal(&dicke_diag)), (g, &coupling)]);
        let h_rot = CsrMatrix::linear_combination(&[(1.0, &CsrMatrix::diagonal(&rot_diag)), (g, &coupling)]);

        Ok(OperatorSet {
            basis,
            params: *params,
            number,
            jz,
            excitations,
            parity,
            annihilation,
            field_quadrature,
            raising,
            spin_quadrature,
            coupling,
            h_dicke,
            h_rot,
        })
    }

    /// Generator of the evolution: `H_ROT` when driven, else `H_D`.
    pub fn generator(&self, driven: bool) -> &CsrMatrix {
        if driven {
            &self.h_rot
        } else {
            &self.h_dicke
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}
