//! PT-symmetric Hamiltonians, their phase structure, and the normalized
//! non-unitary evolution they generate.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::linalg::{c, eigvals, expm, singular_values, ComplexMatrix, C64, I, ONE, ZERO};
use crate::quantum::DensityMatrix;
use crate::tolerances::Tolerances;

/// A PT-symmetric generator parameterized by dimension, scale and the
/// non-Hermiticity angle `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct PTHamiltonian {
    dim: usize,
    scale: f64,
    alpha: f64,
    matrix: ComplexMatrix,
}

impl PTHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Max entrywise `|P conj(H) P - H|` with `P` the exchange matrix.
    pub fn pt_residual(&self) -> f64 {
        pt_residual(&self.matrix)
    }
}

pub fn pt_residual(h: &ComplexMatrix) -> f64 {
    let p = ComplexMatrix::exchange(h.rows());
    (&(&p * &h.conj()) * &p).max_abs_diff(h)
}

/// `s · [[i sin α, 1], [1, -i sin α]]`.
pub fn build_qubit_hamiltonian(s: f64, alpha: f64) -> Result<PTHamiltonian> {
    if !s.is_finite() || s <= 0.0 {
        return invalid(format!("scale factor must be positive, got {s}"));
    }
    if !alpha.is_finite() {
        return invalid("alpha must be finite");
    }
    let g = alpha.sin();
    let matrix = ComplexMatrix::from_rows(&[[c(0.0, g), ONE], [ONE, c(0.0, -g)]]).scale_real(s);
    Ok(PTHamiltonian {
        dim: 2,
        scale: s,
        alpha,
        matrix,
    })
}

/// `(1/√2) · [[i sin α, 1, 0], [1, 0, 1], [0, 1, -i sin α]]`, i.e. `S_x + i (sin α/√2) S_z`.
pub fn build_qutrit_hamiltonian(alpha: f64) -> Result<PTHamiltonian> {
    if !alpha.is_finite() {
        return invalid("alpha must be finite");
    }
    let g = alpha.sin();
    let matrix = ComplexMatrix::from_rows(&[
        [c(0.0, g), ONE, ZERO],
        [ONE, ZERO, ONE],
        [ZERO, ONE, c(0.0, -g)],
    ])
    .scale_real(FRAC_1_SQRT_2);
    Ok(PTHamiltonian {
        dim: 3,
        scale: 1.0,
        alpha,
        matrix,
    })
}

/// Builds the PT Hamiltonian for dimension 2 (unit scale) or 3.
pub fn build_hamiltonian(dim: usize, alpha: f64) -> Result<PTHamiltonian> {
    match dim {
        2 => build_qubit_hamiltonian(1.0, alpha),
        3 => build_qutrit_hamiltonian(alpha),
        _ => invalid(format!("PT Hamiltonians are defined for d = 2 or 3, got {dim}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Unbroken,
    ExceptionalPoint,
    Broken,
}

/// Label from the α-interval convention: `α mod π` against `π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaConvention {
    BelowHalfPi,
    AtHalfPi,
    AboveHalfPi,
}

impl AlphaConvention {
    pub fn of(alpha: f64) -> Self {
        let reduced = alpha.rem_euclid(PI);
        if (reduced - FRAC_PI_2).abs() <= 1e-12 {
            AlphaConvention::AtHalfPi
        } else if reduced < FRAC_PI_2 {
            AlphaConvention::BelowHalfPi
        } else {
            AlphaConvention::AboveHalfPi
        }
    }

    /// The phase the interval convention would assign.
    pub fn nominal_phase(self) -> Phase {
        match self {
            AlphaConvention::BelowHalfPi => Phase::Unbroken,
            AlphaConvention::AtHalfPi => Phase::ExceptionalPoint,
            AlphaConvention::AboveHalfPi => Phase::Broken,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLabel {
    pub label: Phase,
    pub spectrum: Vec<C64>,
    /// Largest relative residual of a coalesced eigenvalue cluster's
    /// eigenspace; zero when no eigenvalues coalesce.
    pub defect: f64,
    /// Condition number of the eigenvector matrix (infinite if singular).
    pub eigvec_condition: f64,
    pub convention: Option<AlphaConvention>,
}

/// Classifies a PT Hamiltonian from its spectrum and diagonalizability.
pub fn classify_phase(h: &PTHamiltonian) -> PhaseLabel {
    let mut label = classify_matrix(&h.matrix, &Tolerances::DEFAULT);
    label.convention = Some(AlphaConvention::of(h.alpha));
    label
}

/// Spectrum-driven classification of an arbitrary square matrix.
///
/// Eigenvalues within `coalescence · max(1, ‖H‖)` of each other form a
/// cluster; a cluster whose eigenspace has lower dimension than its size is
/// defective. Either a defective cluster or an ill-conditioned eigenvector
/// matrix marks an exceptional point.
pub fn classify_matrix(h: &ComplexMatrix, tol: &Tolerances) -> PhaseLabel {
    let n = h.rows();
    let spectrum = eigvals(h).expect("classify_matrix needs a square matrix");
    let scale = singular_values(h).first().copied().unwrap_or(0.0).max(1.0);

    // group eigenvalues into clusters
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let mut members = vec![i];
        assigned[i] = true;
        let mut k = 0;
        while k < members.len() {
            let anchor = spectrum[members[k]];
            for j in 0..n {
                if !assigned[j] && (spectrum[j] - anchor).norm() <= tol.coalescence * scale {
                    assigned[j] = true;
                    members.push(j);
                }
            }
            k += 1;
        }
        clusters.push(members);
    }

    let mut defect = 0.0_f64;
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(n);
    for members in &clusters {
        let mean: C64 = members.iter().map(|&i| spectrum[i]).sum::<C64>() / members.len() as f64;
        let shifted = h - &ComplexMatrix::identity(n).scale(mean);
        let svd = shifted.inner().clone().svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let k = members.len();
        if k > 1 {
            // k-th smallest singular value: zero iff the eigenspace has dimension k
            defect = defect.max(svd.singular_values[order[k - 1]] / scale);
        }
        for &idx in order.iter().take(k) {
            columns.push((0..n).map(|j| v_t[(idx, j)].conj()).collect());
        }
    }
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (j, col) in columns.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            vecs.set(i, j, z);
        }
    }
    let sv = singular_values(&vecs);
    let smin = *sv.last().unwrap();
    let cond = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };

    let label = if defect > tol.defect_residual || cond > tol.defect_condition {
        Phase::ExceptionalPoint
    } else if spectrum.iter().any(|z| z.im.abs() > tol.real_spectrum) {
        Phase::Broken
    } else {
        Phase::Unbroken
    };
    PhaseLabel {
        label,
        spectrum,
        defect,
        eigvec_condition: cond,
        convention: None,
    }
}

/// Evolution time with its reduced form `t' = (δE/2) t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTime {
    pub t: f64,
    pub t_prime: f64,
    pub delta_e: f64,
}

impl EvolutionTime {
    pub fn new(t: f64, delta_e: f64) -> Self {
        Self {
            t,
            t_prime: 0.5 * delta_e * t,
            delta_e,
        }
    }
}

/// The special time `t = π/δE` (so `t' = π/2`), with `δE` the spread between
/// the largest and smallest real eigenvalue.
pub fn specific_time(h: &PTHamiltonian) -> Result<EvolutionTime> {
    let tol = Tolerances::DEFAULT;
    let phase = classify_phase(h);
    if phase.label != Phase::Unbroken {
        return domain(format!(
            "specific time undefined at δE→0 ({:?} at alpha = {})",
            phase.label, h.alpha
        ));
    }
    let (lo, hi) = phase
        .spectrum
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
    let delta_e = hi - lo;
    if delta_e <= tol.real_spectrum {
        return domain("specific time undefined at δE→0");
    }
    Ok(EvolutionTime::new(PI / delta_e, delta_e))
}

/// `exp(-i H t)`.
pub fn evolution_operator(h: &PTHamiltonian, t: f64) -> ComplexMatrix {
    expm(&h.matrix.scale(c(0.0, -t))).expect("Hamiltonian is square")
}

/// Closed form of the qubit evolution operator at reduced time `t'`
/// (unit scale): `(1/cos α) [[cos(t'-α), -i sin t'], [-i sin t', cos(t'+α)]]`.
pub fn qubit_closed_form(alpha: f64, t_prime: f64) -> ComplexMatrix {
    let k = 1.0 / alpha.cos();
    ComplexMatrix::from_rows(&[
        [c(k * (t_prime - alpha).cos(), 0.0), c(0.0, -k * t_prime.sin())],
        [c(0.0, -k * t_prime.sin()), c(k * (t_prime + alpha).cos(), 0.0)],
    ])
}

/// `sin α σ_z - i σ_x`: the qubit operator at the specific time with the
/// `1/cos α` prefactor dropped. Defined at the exceptional point as well.
pub fn qubit_specific_operator(alpha: f64) -> ComplexMatrix {
    let g = alpha.sin();
    ComplexMatrix::from_rows(&[[c(g, 0.0), -I], [-I, c(-g, 0.0)]])
}

/// How the PT map on Alice's side is realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum PtMap {
    /// Operator at the specific time `t = π/δE`.
    #[default]
    SpecificTime,
    /// `exp(-i H t)` for an explicit time.
    Time(f64),
}

impl PtMap {
    /// Operator on Alice's subsystem for a `dim`-level PT Hamiltonian.
    pub fn operator(&self, dim: usize, alpha: f64) -> Result<ComplexMatrix> {
        let h = build_hamiltonian(dim, alpha)?;
        match *self {
            PtMap::SpecificTime if dim == 2 => Ok(qubit_specific_operator(alpha)),
            PtMap::SpecificTime => Ok(evolution_operator(&h, specific_time(&h)?.t)),
            PtMap::Time(t) => Ok(evolution_operator(&h, t)),
        }
    }

    /// The time this map evolves for, if finite.
    pub fn time(&self, dim: usize, alpha: f64) -> Option<f64> {
        match *self {
            PtMap::Time(t) => Some(t),
            PtMap::SpecificTime => build_hamiltonian(dim, alpha)
                .ok()
                .and_then(|h| specific_time(&h).ok())
                .map(|e| e.t),
        }
    }
}

/// `V rho V† / Tr[V rho V†]`.
pub fn evolve_state(rho: &DensityMatrix, v: &ComplexMatrix) -> Result<DensityMatrix> {
    if !v.is_square() || v.rows() != rho.dim() {
        return invalid(format!(
            "evolve_state: operator {}x{} does not act on dimension {}",
            v.rows(),
            v.cols(),
            rho.dim()
        ));
    }
    let out = &(v * rho.matrix()) * &v.dagger();
    let norm = out.trace().re;
    if norm.is_nan() || norm <= Tolerances::DEFAULT.annihilation {
        return domain("state annihilated by evolution");
    }
    DensityMatrix::new(out.scale_real(1.0 / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ops::*;
    use crate::quantum::{partial_trace, PureState, Subsystem};
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        v
    }

    #[test]
    fn qubit_construction() {
        let h = build_qubit_hamiltonian(1.0, 0.0).unwrap();
        assert_eq!(h.matrix(), &sigma_x());
        let h = build_qubit_hamiltonian(1.0, FRAC_PI_2).unwrap();
        let expected = ComplexMatrix::from_rows(&[[I, ONE], [ONE, -I]]);
        assert!(h.matrix().max_abs_diff(&expected) < 1e-16);
        let h = build_qubit_hamiltonian(2.0, FRAC_PI_6).unwrap();
        let expected = ComplexMatrix::from_rows(&[[c(0.0, 1.0), c(2.0, 0.0)], [c(2.0, 0.0), c(0.0, -1.0)]]);
        assert!(h.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(build_qubit_hamiltonian(0.0, 0.1).is_err());
        assert!(build_qubit_hamiltonian(-1.0, 0.1).is_err());
    }

    #[test]
    fn qutrit_construction() {
        let h = build_qutrit_hamiltonian(0.0).unwrap();
        assert!(h.matrix().max_abs_diff(&spin1()[0]) < 1e-16);
        let h = build_qutrit_hamiltonian(FRAC_PI_2).unwrap();
        let r = FRAC_1_SQRT_2;
        let expected = ComplexMatrix::from_rows(&[
            [c(0.0, r), c(r, 0.0), ZERO],
            [c(r, 0.0), ZERO, c(r, 0.0)],
            [ZERO, c(r, 0.0), c(0.0, -r)],
        ]);
        assert!(h.matrix().max_abs_diff(&expected) < 1e-16);
        let v = sorted(eigvals(build_qutrit_hamiltonian(FRAC_PI_4).unwrap().matrix()).unwrap());
        let e = 3.0_f64.sqrt() / 2.0;
        for (z, x) in v.iter().zip([-e, 0.0, e]) {
            assert!((z - c(x, 0.0)).norm() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn pt_commutation_holds() {
        for k in 0..50 {
            let alpha = -4.0 + 0.17 * k as f64;
            assert!(build_qubit_hamiltonian(1.3, alpha).unwrap().pt_residual() <= 1e-12);
            assert!(build_qutrit_hamiltonian(alpha).unwrap().pt_residual() <= 1e-12);
        }
    }

    #[test]
    fn phase_examples() {
        let p = classify_phase(&build_qubit_hamiltonian(1.0, FRAC_PI_4).unwrap());
        assert_eq!(p.label, Phase::Unbroken);
        let s = sorted(p.spectrum);
        assert!((s[1].re - FRAC_1_SQRT_2).abs() < 1e-12 && (s[0].re + FRAC_1_SQRT_2).abs() < 1e-12);

        let p = classify_phase(&build_qubit_hamiltonian(1.0, FRAC_PI_2).unwrap());
        assert_eq!(p.label, Phase::ExceptionalPoint);
        assert!(p.spectrum.iter().all(|z| z.norm() < 1e-6));
        assert!(p.defect > 1e-6);
        assert_eq!(p.convention, Some(AlphaConvention::AtHalfPi));

        let p = classify_phase(&build_qubit_hamiltonian(1.0, 0.0).unwrap());
        assert_eq!(p.label, Phase::Unbroken);
    }

    #[test]
    fn broken_phase_from_spectrum() {
        // gain exceeds coupling: eigenvalues ±i√3
        let h = ComplexMatrix::from_rows(&[[c(0.0, 2.0), ONE], [ONE, c(0.0, -2.0)]]);
        let p = classify_matrix(&h, &Tolerances::DEFAULT);
        assert_eq!(p.label, Phase::Broken);
    }

    #[test]
    fn degenerate_hermitian_is_not_exceptional() {
        let p = classify_matrix(&ComplexMatrix::identity(3), &Tolerances::DEFAULT);
        assert_eq!(p.label, Phase::Unbroken);
        assert!(p.defect < 1e-12);
    }

    #[test]
    fn convention_label_disagrees_above_half_pi() {
        let h = build_qubit_hamiltonian(1.0, 2.0).unwrap();
        let p = classify_phase(&h);
        assert_eq!(p.label, Phase::Unbroken);
        assert_eq!(p.convention.unwrap().nominal_phase(), Phase::Broken);
    }

    #[test]
    fn specific_time_examples() {
        let t = specific_time(&build_qubit_hamiltonian(1.0, 0.0).unwrap()).unwrap();
        assert!((t.t - FRAC_PI_2).abs() < 1e-12 && (t.delta_e - 2.0).abs() < 1e-12);
        assert!((t.t_prime - FRAC_PI_2).abs() < 1e-12);
        let t = specific_time(&build_qubit_hamiltonian(1.0, FRAC_PI_3).unwrap()).unwrap();
        assert!((t.delta_e - 1.0).abs() < 1e-12 && (t.t - PI).abs() < 1e-12);
        let t = specific_time(&build_qutrit_hamiltonian(0.0).unwrap()).unwrap();
        assert!((t.delta_e - 2.0).abs() < 1e-12 && (t.t - FRAC_PI_2).abs() < 1e-12);
        let err = specific_time(&build_qubit_hamiltonian(1.0, FRAC_PI_2).unwrap()).unwrap_err();
        assert!(matches!(err, crate::Error::Domain(_)));
    }

    #[test]
    fn evolution_operator_examples() {
        let u = evolution_operator(&build_qubit_hamiltonian(1.0, 0.0).unwrap(), FRAC_PI_2);
        assert!(u.max_abs_diff(&sigma_x().scale(-I)) < 1e-14);

        let alpha = FRAC_PI_6;
        let h = build_qubit_hamiltonian(1.0, alpha).unwrap();
        let u = evolution_operator(&h, specific_time(&h).unwrap().t);
        let k = 2.0 / 3.0_f64.sqrt();
        let expected = ComplexMatrix::from_rows(&[
            [c(alpha.tan(), 0.0), c(0.0, -k)],
            [c(0.0, -k), c(-alpha.tan(), 0.0)],
        ]);
        assert!(u.max_abs_diff(&expected) < 1e-10, "{u:?}");
        assert!(u.max_abs_diff(&qubit_specific_operator(alpha).scale_real(1.0 / alpha.cos())) < 1e-10);

        let h = build_qubit_hamiltonian(1.0, FRAC_PI_2).unwrap();
        for &t in &[1.0, 10.0, 100.0] {
            let u = evolution_operator(&h, t);
            let expected = &ComplexMatrix::identity(2) - &h.matrix().scale(c(0.0, t));
            assert!(u.max_abs_diff(&expected) < 1e-11 * expected.max_abs());
        }
    }

    #[test]
    fn evolve_state_examples() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert_eq!(evolve_state(&rho, &ComplexMatrix::identity(2)).unwrap(), rho);

        let v = qubit_specific_operator(FRAC_PI_2);
        let out = evolve_state(&rho, &v).unwrap();
        let minus_y = ComplexMatrix::from_rows(&[[c(0.5, 0.0), c(0.0, 0.5)], [c(0.0, -0.5), c(0.5, 0.0)]]);
        assert!(out.matrix().max_abs_diff(&minus_y) < 1e-15);

        let r = c(FRAC_1_SQRT_2, 0.0);
        let phi = PureState::new(vec![r, ZERO, ZERO, r]).unwrap().projector();
        let id2 = ComplexMatrix::identity(2);
        let bob = |op: &ComplexMatrix| {
            let full = evolve_state(&phi, &(&v * op).kron(&id2)).unwrap();
            partial_trace(&full, 2, 2, Subsystem::B).unwrap()
        };
        assert!(bob(&id2).matrix().max_abs_diff(&minus_y) < 1e-15);
        assert!(bob(&sigma_x()).matrix().max_abs_diff(&minus_y.conj()) < 1e-15);
    }

    #[test]
    fn annihilation_is_domain_error() {
        let rho = PureState::basis(2, 0).projector();
        let v = ComplexMatrix::diag_real(&[0.0, 1.0]);
        assert!(matches!(evolve_state(&rho, &v), Err(crate::Error::Domain(_))));
    }
}
