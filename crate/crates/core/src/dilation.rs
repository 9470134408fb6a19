//! Realizes a non-unitary operator on a subsystem with a unitary on
//! ancilla ⊗ system followed by post-selecting the ancilla on `|0⟩`.
//!
//! Ordering is ancilla ⊗ system (⊗ environment): the ancilla is the most
//! significant tensor factor and outcome 0 means success.

use crate::error::{domain, invalid, Result};
use nalgebra::{DMatrix, DVector};

use crate::linalg::{c, eigvalsh, ComplexMatrix, C64};
use crate::quantum::DensityMatrix;
use crate::tolerances::Tolerances;

/// Contraction `A = η V` with `η = 1/σ_max(V)` and its unitary dilation
/// `W = [[A, √(I-AA†)], [√(I-A†A), -A†]]`.
#[derive(Debug, Clone)]
pub struct DilationResult {
    pub eta: f64,
    pub contraction: ComplexMatrix,
    pub w: ComplexMatrix,
}

impl DilationResult {
    /// Max entrywise `|W†W - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.w.rows();
        (&self.w.dagger() * &self.w).max_abs_diff(&ComplexMatrix::identity(n))
    }

    pub fn system_dim(&self) -> usize {
        self.contraction.rows()
    }
}

/// Largest singular value, from the spectrum of `V†V`.
pub fn max_singular_value(v: &ComplexMatrix) -> f64 {
    let gram = &v.dagger() * v;
    let top = eigvalsh(&gram).expect("Gram matrix is square").last().copied().unwrap_or(0.0);
    top.max(0.0).sqrt()
}

/// Builds both defect operators from one SVD `V = U Σ Q†`:
/// `√(I-AA†) = U √(1-Σ²/σ²) U†` and `√(I-A†A) = Q √(1-Σ²/σ²) Q†`, so the
/// direction of the largest singular value gets an exact zero.
pub fn dilate(v: &ComplexMatrix) -> Result<DilationResult> {
    v.ensure_square("dilate")?;
    let svd = v
        .inner()
        .clone()
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| crate::Error::Domain("SVD did not converge".into()))?;
    let sigma = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if sigma.is_nan() || sigma <= Tolerances::DEFAULT.zero_matrix {
        return invalid("cannot dilate the zero matrix");
    }
    let eta = 1.0 / sigma;
    let u = svd.u.expect("requested U");
    let q = svd.v_t.expect("requested V^T").adjoint();
    let defect: Vec<C64> = svd
        .singular_values
        .iter()
        .map(|&s| c((1.0 - (s * eta).powi(2)).max(0.0).sqrt(), 0.0))
        .collect();
    let defect = DMatrix::from_diagonal(&DVector::from_vec(defect));
    let top_right = ComplexMatrix::from_inner(&u * &defect * u.adjoint())?.hermitian_part();
    let bottom_left = ComplexMatrix::from_inner(&q * &defect * q.adjoint())?.hermitian_part();
    let a = v.scale_real(eta);
    let w = ComplexMatrix::from_blocks(&a, &top_right, &bottom_left, &-&a.dagger());
    Ok(DilationResult {
        eta,
        contraction: a,
        w,
    })
}

/// Both ancilla branches after running `W ⊗ I_B` on `|0⟩⟨0| ⊗ ρ_AB`.
#[derive(Debug, Clone)]
pub struct Postselection {
    pub dilation: DilationResult,
    pub success_prob: f64,
    pub success_state: DensityMatrix,
    /// `None` when the failure branch has zero weight.
    pub failure_state: Option<DensityMatrix>,
}

impl Postselection {
    /// Simulates the joint ancilla-system-environment evolution explicitly.
    pub fn prepare(rho_ab: &DensityMatrix, v_on_a: &ComplexMatrix) -> Result<Self> {
        let d_a = v_on_a.ensure_square("apply_postselected")?;
        let n = rho_ab.dim();
        if !n.is_multiple_of(d_a) {
            return invalid(format!(
                "state of dimension {n} has no factor of dimension {d_a}"
            ));
        }
        let d_b = n / d_a;
        let dilation = dilate(v_on_a)?;
        let big = dilation.w.kron(&ComplexMatrix::identity(d_b));
        let ancilla0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let joint = ancilla0.kron(rho_ab.matrix());
        let out = &(&big * &joint) * &big.dagger();
        let kept = out.block(0, 0, n, n);
        let dropped = out.block(n, n, n, n);
        let success_prob = kept.trace().re.clamp(0.0, 1.0);
        let tol = Tolerances::DEFAULT;
        if success_prob < tol.annihilation {
            return domain(format!("post-selection success probability {success_prob:e} vanishes"));
        }
        let success_state = DensityMatrix::from_unnormalized(kept)?;
        let fail_weight = dropped.trace().re;
        let failure_state = if fail_weight > tol.annihilation {
            Some(DensityMatrix::from_unnormalized(dropped)?)
        } else {
            None
        };
        Ok(Self {
            dilation,
            success_prob,
            success_state,
            failure_state,
        })
    }

    /// Samples the ancilla outcome: success iff `rand < success_prob`.
    /// A branch of zero weight is never selected.
    pub fn sample(&self, rand: f64) -> RoundOutcome<'_> {
        let success = rand < self.success_prob || self.failure_state.is_none();
        if success {
            RoundOutcome {
                success,
                state: Some(&self.success_state),
            }
        } else {
            RoundOutcome {
                success,
                state: self.failure_state.as_ref(),
            }
        }
    }
}

impl Postselection {
    /// Fraction of successes in `rounds` seeded ancilla measurements. Round
    /// `i` draws from its own stream, so the estimate does not depend on
    /// evaluation order.
    pub fn estimate_success(&self, rounds: usize, seed: u64) -> f64 {
        use rand::{Rng, SeedableRng};
        use rayon::prelude::*;
        if rounds == 0 {
            return 0.0;
        }
        let hits: usize = (0..rounds as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::randamp::mix(seed, i));
                self.sample(rng.random::<f64>()).success as usize
            })
            .sum();
        hits as f64 / rounds as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RoundOutcome<'a> {
    pub success: bool,
    pub state: Option<&'a DensityMatrix>,
}

/// Post-selected state of `ρ_AB` after the dilated `V` on A, and the success
/// probability `η² Tr[(V†V ⊗ I) ρ]`.
pub fn apply_postselected(
    rho_ab: &DensityMatrix,
    v_on_a: &ComplexMatrix,
) -> Result<(DensityMatrix, f64)> {
    let p = Postselection::prepare(rho_ab, v_on_a)?;
    Ok((p.success_state, p.success_prob))
}

/// One Monte-Carlo round with an externally supplied uniform `rand ∈ [0, 1)`.
/// Returns the success flag and the state of the selected branch.
pub fn sample_round(
    rho_ab: &DensityMatrix,
    v_on_a: &ComplexMatrix,
    rand: f64,
) -> Result<(bool, Option<DensityMatrix>)> {
    let p = Postselection::prepare(rho_ab, v_on_a)?;
    let outcome = p.sample(rand);
    Ok((outcome.success, outcome.state.cloned()))
}
