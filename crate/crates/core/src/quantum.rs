//! Validated kets and density matrices, partial trace and trace distance.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{c, eigvalsh, ComplexMatrix, C64};
use crate::tolerances::Tolerances;

/// Unit-norm ket.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return invalid("ket must have positive dimension");
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > Tolerances::DEFAULT.ket_norm {
            return invalid(format!("ket norm {norm} differs from 1"));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes the given amplitudes first.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return invalid("cannot normalize a zero or non-finite ket");
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    /// Computational basis ket `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut a = vec![c(0.0, 0.0); dim];
        a[index] = c(1.0, 0.0);
        Self { amplitudes: a }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Self { amplitudes }
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            mat: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    /// `⟨self|rho|self⟩`.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        let v = rho.matrix().apply(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(v)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .re
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(mat, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !mat.is_square() {
            return invalid(format!(
                "density matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            ));
        }
        let herm = mat.hermiticity_residual();
        if herm > tol.hermiticity {
            return invalid(format!("density matrix is not Hermitian (residual {herm:e})"));
        }
        let tr = mat.trace();
        if (tr - c(1.0, 0.0)).norm() > tol.trace {
            return invalid(format!("density matrix trace {tr} differs from 1"));
        }
        let min = min_eigenvalue(&mat)?;
        if min < tol.min_eigenvalue {
            return invalid(format!(
                "density matrix is not PSD (minimum eigenvalue {min:e})"
            ));
        }
        Ok(Self {
            mat: mat.hermitian_part(),
        })
    }

    /// Divides by the trace, then validates.
    pub fn from_unnormalized(mat: ComplexMatrix) -> Result<Self> {
        let tr = mat.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return invalid(format!("cannot normalize matrix with trace {tr}"));
        }
        Self::new(mat.scale_real(1.0 / tr))
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat.get(i, j)
    }

    /// `Tr(op · rho)` real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        (op * &self.mat).trace().re
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kron(&other.mat),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.mat).expect("density matrices are square")
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigvalsh(m)?.first().copied().unwrap_or(0.0))
}

/// Which factor of a bipartite system to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Reduced state of `rho` on an `dim_a ⊗ dim_b` system.
pub fn partial_trace(
    rho: &DensityMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<DensityMatrix> {
    if dim_a == 0 || dim_b == 0 || rho.dim() != dim_a * dim_b {
        return invalid(format!(
            "partial_trace: state of dimension {} is not {dim_a} x {dim_b}",
            rho.dim()
        ));
    }
    let m = rho.matrix();
    let out = match keep {
        Subsystem::A => {
            let mut r = ComplexMatrix::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    let s: C64 = (0..dim_b).map(|k| m.get(i * dim_b + k, j * dim_b + k)).sum();
                    r.set(i, j, s);
                }
            }
            r
        }
        Subsystem::B => {
            let mut r = ComplexMatrix::zeros(dim_b, dim_b);
            for i in 0..dim_b {
                for j in 0..dim_b {
                    let s: C64 = (0..dim_a).map(|k| m.get(k * dim_b + i, k * dim_b + j)).sum();
                    r.set(i, j, s);
                }
            }
            r
        }
    };
    Ok(DensityMatrix {
        mat: out.hermitian_part(),
    })
}

/// Half the sum of absolute eigenvalues of `rho - sigma`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return invalid(format!(
            "trace_distance: dimension mismatch {} vs {}",
            rho.dim(),
            sigma.dim()
        ));
    }
    let diff = rho.matrix() - sigma.matrix();
    let sum: f64 = eigvalsh(&diff)?.iter().map(|l| l.abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}
