//! Signaling gaps and distinguishability: brute-force evaluation through the
//! full bipartite evolution, next to the closed-form expressions.
//!
//! Sign convention: a gap is Bob's probability of the `|φ⟩` outcome when Alice
//! applied `A₊ = I` minus the same probability when she applied `A₋`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_state, PtMap};
use crate::error::{invalid, Result};
use crate::linalg::{c, ComplexMatrix, C64};
use crate::quantum::{partial_trace, trace_distance, DensityMatrix, PureState, Subsystem};
use crate::states::{canonical_two_qubit, two_qutrit, AliceOp, CanonicalQubitParams, QutritParams, StateSpec};

/// Alice's projective basis `{|φ⟩, |φ⊥⟩}` with
/// `|φ⟩ = cos(y/2)|0⟩ + e^{iv} sin(y/2)|1⟩`, `|φ⊥⟩ = sin(y/2)|0⟩ - e^{iv} cos(y/2)|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AliceMeasurement {
    pub y: f64,
    pub v: f64,
}

/// Bob's projective basis, `|φ⟩ = cos(z/2)|0⟩ + e^{iu} sin(z/2)|1⟩`.
/// `z = u = π/2` is the `σ_y` eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BobMeasurement {
    pub z: f64,
    pub u: f64,
}

fn qubit_basis(theta: f64, phase: f64) -> [PureState; 2] {
    let (s, co) = (0.5 * theta).sin_cos();
    let e = C64::from_polar(1.0, phase);
    let phi = PureState::new(vec![c(co, 0.0), e * s]).expect("unit norm");
    let perp = PureState::new(vec![c(s, 0.0), -e * co]).expect("unit norm");
    [phi, perp]
}

impl AliceMeasurement {
    pub fn new(y: f64, v: f64) -> Self {
        Self { y, v }
    }

    pub fn sigma_y() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
    }

    pub fn basis(&self) -> [PureState; 2] {
        qubit_basis(self.y, self.v)
    }
}

impl BobMeasurement {
    pub fn new(z: f64, u: f64) -> Self {
        Self { z, u }
    }

    pub fn sigma_y() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
    }

    pub fn basis(&self) -> [PureState; 2] {
        qubit_basis(self.z, self.u)
    }

    /// Bloch direction of `|φ⟩`.
    pub fn direction(&self) -> [f64; 3] {
        [self.z.sin() * self.u.cos(), self.z.sin() * self.u.sin(), self.z.cos()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    GapSigmaY,
    GapCanonical,
    GapArbitrary,
    Distinguishability,
    BobPerturbation,
    FullPerturbation,
    QutritPerturbation,
}

impl std::str::FromStr for Quantity {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown quantity {s:?}")))
    }
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::GapSigmaY,
        Quantity::GapCanonical,
        Quantity::GapArbitrary,
        Quantity::Distinguishability,
        Quantity::BobPerturbation,
        Quantity::FullPerturbation,
        Quantity::QutritPerturbation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::GapSigmaY => "gap_sigma_y",
            Quantity::GapCanonical => "gap_canonical",
            Quantity::GapArbitrary => "gap_arbitrary",
            Quantity::Distinguishability => "distinguishability",
            Quantity::BobPerturbation => "bob_perturbation",
            Quantity::FullPerturbation => "full_perturbation",
            Quantity::QutritPerturbation => "qutrit_perturbation",
        }
    }
}

/// Brute-force value next to the matching closed form, when one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub quantity: Quantity,
    pub alpha: f64,
    pub measurement: Option<(AliceMeasurement, BobMeasurement)>,
    pub brute: f64,
    pub closed_form: Option<f64>,
    pub abs_err: Option<f64>,
}

impl GapReport {
    fn new(quantity: Quantity, alpha: f64, brute: f64, closed_form: Option<f64>) -> Self {
        Self {
            quantity,
            alpha,
            measurement: None,
            brute,
            closed_form,
            abs_err: closed_form.map(|cf| (brute - cf).abs()),
        }
    }

    /// `brute / closed_form`, undefined when either side vanishes.
    pub fn ratio(&self) -> Option<f64> {
        let cf = self.closed_form?;
        if cf.abs() < 1e-14 || self.brute.abs() < 1e-14 {
            None
        } else {
            Some(self.brute / cf)
        }
    }
}

/// Scope of a before/after comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    Full,
    BobReduced,
}

fn local_dim(rho: &DensityMatrix) -> Result<usize> {
    let n = rho.dim();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return invalid(format!("state of dimension {n} is not a d x d bipartite state"));
    }
    Ok(d)
}

/// Bipartite state after Alice's encoding and the PT map on her side.
pub fn evolved_joint(rho: &DensityMatrix, op: AliceOp, alpha: f64, map: PtMap) -> Result<DensityMatrix> {
    let d = local_dim(rho)?;
    let v = map.operator(d, alpha)?;
    let local = &v * &op.matrix(d);
    evolve_state(rho, &local.kron(&ComplexMatrix::identity(d)))
}

/// Bob's reduced state after Alice's operation and the PT map.
pub fn bob_state_after(rho: &DensityMatrix, op: AliceOp, alpha: f64, map: PtMap) -> Result<DensityMatrix> {
    let d = local_dim(rho)?;
    partial_trace(&evolved_joint(rho, op, alpha, map)?, d, d, Subsystem::B)
}

/// `P(a, b)` for Alice's outcome `a` and Bob's outcome `b` (0 = `|φ⟩`, 1 = `|φ⊥⟩`).
pub fn joint_distribution(
    rho: &DensityMatrix,
    op: AliceOp,
    alpha: f64,
    ma: AliceMeasurement,
    mb: BobMeasurement,
    map: PtMap,
) -> Result<[[f64; 2]; 2]> {
    if rho.dim() != 4 {
        return invalid("joint_distribution is defined for two-qubit states");
    }
    let out = evolved_joint(rho, op, alpha, map)?;
    let a = ma.basis();
    let b = mb.basis();
    let mut table = [[0.0; 2]; 2];
    for (i, ka) in a.iter().enumerate() {
        for (j, kb) in b.iter().enumerate() {
            table[i][j] = ka.tensor(kb).expectation(&out).max(0.0);
        }
    }
    Ok(table)
}

/// Bob's `|φ⟩` probability, summed over Alice's outcomes.
pub fn bob_marginal(
    rho: &DensityMatrix,
    op: AliceOp,
    alpha: f64,
    ma: AliceMeasurement,
    mb: BobMeasurement,
    map: PtMap,
) -> Result<f64> {
    let t = joint_distribution(rho, op, alpha, ma, mb, map)?;
    Ok(t[0][0] + t[1][0])
}

/// Brute-force `P₊ - P₋` for Bob's `|φ⟩` outcome.
pub fn signaling_gap(
    rho: &DensityMatrix,
    alpha: f64,
    ma: AliceMeasurement,
    mb: BobMeasurement,
    map: PtMap,
) -> Result<f64> {
    Ok(bob_marginal(rho, AliceOp::Identity, alpha, ma, mb, map)?
        - bob_marginal(rho, AliceOp::FlipX, alpha, ma, mb, map)?)
}

/// Closed-form expressions, evaluated exactly as written unless noted.
pub mod closed_form {
    use super::*;

    fn s(alpha: f64) -> f64 {
        alpha.sin()
    }

    /// `4p sin α / (-3 + cos 2α)`.
    pub fn werner_gap(p: f64, alpha: f64) -> f64 {
        4.0 * p * s(alpha) / (-3.0 + (2.0 * alpha).cos())
    }

    /// `8βγ sin α / ((β²+γ²)(-3 + cos 2α))`.
    pub fn non_max_gap(beta: f64, gamma: f64, alpha: f64) -> f64 {
        8.0 * beta * gamma * s(alpha) / ((beta * beta + gamma * gamma) * (-3.0 + (2.0 * alpha).cos()))
    }

    /// σ_y gap for canonical parameters.
    pub fn canonical_gap(p: &CanonicalQubitParams, alpha: f64) -> f64 {
        let (my, myp, cyy) = (p.m[1], p.m_prime[1], p.c[1]);
        let g = s(alpha);
        let k = -3.0 + (2.0 * alpha).cos();
        2.0 * (cyy - my * myp) * k * g / ((k + 4.0 * my * g) * (1.0 + 2.0 * my * g + g * g))
    }

    /// Gap for an arbitrary Bob measurement `(z, u)`.
    pub fn arbitrary_gap(p: &CanonicalQubitParams, alpha: f64, mb: BobMeasurement) -> f64 {
        let (my, cyy) = (p.m[1], p.c[1]);
        let [mxp, myp, mzp] = p.m_prime;
        let (z, u) = (mb.z, mb.u);
        let g = s(alpha);
        let k = -3.0 + (2.0 * alpha).cos();
        let bracket = my * mxp * u.cos() * z.sin() + u.sin() * z.sin() * (-cyy + my * myp) + my * mzp * z.cos();
        -2.0 * (7.0 * g - (3.0 * alpha).sin()) * bracket / (k * k - 16.0 * my * my * g * g)
    }

    /// Trace-distance expression between Bob's two conditional states, as
    /// printed. Evaluates to half of the definitional trace distance.
    pub fn printed_trace_distance(p: &CanonicalQubitParams, alpha: f64) -> f64 {
        let (my, cyy) = (p.m[1], p.c[1]);
        let [mxp, myp, mzp] = p.m_prime;
        let g = s(alpha);
        let num = (cyy * cyy + mxp * mxp * my * my - 2.0 * cyy * my * myp + my * my * myp * myp + my * my * mzp * mzp)
            .max(0.0)
            .sqrt();
        let den = (-1.0 + 2.0 * my * g - g * g) * (1.0 + 2.0 * my * g + g * g);
        (num / den).abs() * (g + g * g * g).abs()
    }

    /// Bob's state after the PT map with `A₊ = I`, for canonical parameters:
    /// `R± = ½(1 ± (1+sin²α) m′_z / D)`, `U = ((1+sin²α) m′_x - i(2 C_yy sin α + (1+sin²α) m′_y)) / (2D)`
    /// with `D = 1 + 2 m_y sin α + sin²α`.
    pub fn bob_state(p: &CanonicalQubitParams, alpha: f64) -> ComplexMatrix {
        let g = s(alpha);
        let (my, cyy) = (p.m[1], p.c[1]);
        let [mxp, myp, mzp] = p.m_prime;
        let q = 1.0 + g * g;
        let d = 1.0 + 2.0 * my * g + g * g;
        let r_plus = 0.5 * (1.0 + q * mzp / d);
        let r_minus = 0.5 * (1.0 - q * mzp / d);
        let u = c(q * mxp, -(2.0 * cyy * g + q * myp)) / (2.0 * d);
        ComplexMatrix::from_rows(&[[c(r_plus, 0.0), u], [u.conj(), c(r_minus, 0.0)]])
    }

    /// Diagonal entries `R±` as printed, `½(1 + (1 ± sin²α) m′_z / D)`.
    pub fn printed_r_pm(p: &CanonicalQubitParams, alpha: f64) -> (f64, f64) {
        let g = s(alpha);
        let d = 1.0 + 2.0 * p.m[1] * g + g * g;
        let mzp = p.m_prime[2];
        (0.5 * (1.0 + (1.0 + g * g) * mzp / d), 0.5 * (1.0 + (1.0 - g * g) * mzp / d))
    }

    /// Werner-state Bob matrix after the PT map:
    /// `[[1/2, i p sin α/(1+sin²α)], [2 i p sin α/(-3+cos 2α), 1/2]]`.
    pub fn werner_bob_state(p: f64, alpha: f64) -> ComplexMatrix {
        let g = s(alpha);
        ComplexMatrix::from_rows(&[
            [c(0.5, 0.0), c(0.0, p * g / (1.0 + g * g))],
            [c(0.0, 2.0 * p * g / (-3.0 + (2.0 * alpha).cos())), c(0.5, 0.0)],
        ])
    }

    /// Initial off-diagonal of Bob's state for the non-maximally entangled
    /// family, as printed: `1 - 2β²/(β²+γ²)`.
    pub fn printed_non_max_initial_offdiag(beta: f64, gamma: f64) -> f64 {
        1.0 - 2.0 * beta * beta / (beta * beta + gamma * gamma)
    }

    /// Post-evolution off-diagonal for the non-maximally entangled family, as printed:
    /// `((β²-γ²)(-3+cos 2α) + 8iβγ sin α) / (4(β²+γ²)(1+sin²α))`.
    pub fn printed_non_max_offdiag(beta: f64, gamma: f64, alpha: f64) -> C64 {
        let g = s(alpha);
        let n2 = beta * beta + gamma * gamma;
        c(
            (beta * beta - gamma * gamma) * (-3.0 + (2.0 * alpha).cos()),
            8.0 * beta * gamma * g,
        ) / (4.0 * n2 * (1.0 + g * g))
    }

    /// Bob's distance from his initial state for the Werner family, `p sin α/(1+sin²α)`.
    pub fn werner_bob_perturbation(p: f64, alpha: f64) -> f64 {
        let g = s(alpha);
        (p * g / (1.0 + g * g)).abs()
    }
}

/// Sign relating the brute-force gap to the printed arbitrary-measurement
/// formula, fixed on the Werner family at `p = 1`, `α = π/4`, `σ_y`.
pub fn arbitrary_gap_sign() -> Result<f64> {
    let alpha = std::f64::consts::FRAC_PI_4;
    let params = CanonicalQubitParams::werner(1.0);
    let rho = canonical_two_qubit(&params)?;
    let brute = signaling_gap(&rho, alpha, AliceMeasurement::sigma_y(), BobMeasurement::sigma_y(), PtMap::SpecificTime)?;
    let formula = closed_form::arbitrary_gap(&params, alpha, BobMeasurement::sigma_y());
    Ok(if brute * formula >= 0.0 { 1.0 } else { -1.0 })
}

/// σ_y gap with the closed form matching the state's family.
pub fn gap_sigma_y(state: &StateSpec, alpha: f64) -> Result<GapReport> {
    let rho = state.build()?;
    let brute = signaling_gap(&rho, alpha, AliceMeasurement::sigma_y(), BobMeasurement::sigma_y(), PtMap::SpecificTime)?;
    let closed = match state {
        StateSpec::Werner { p } | StateSpec::WernerLike { dim: 2, p } => Some(closed_form::werner_gap(*p, alpha)),
        StateSpec::PhiPlus => Some(closed_form::werner_gap(1.0, alpha)),
        StateSpec::NonMax { beta, gamma } => Some(closed_form::non_max_gap(*beta, *gamma, alpha)),
        StateSpec::Canonical(p) => Some(closed_form::canonical_gap(p, alpha)),
        _ => None,
    };
    let mut report = GapReport::new(Quantity::GapSigmaY, alpha, brute, closed);
    report.measurement = Some((AliceMeasurement::sigma_y(), BobMeasurement::sigma_y()));
    Ok(report)
}

pub fn gap_canonical(params: &CanonicalQubitParams, alpha: f64) -> Result<GapReport> {
    let rho = canonical_two_qubit(params)?;
    let brute = signaling_gap(&rho, alpha, AliceMeasurement::sigma_y(), BobMeasurement::sigma_y(), PtMap::SpecificTime)?;
    let mut report = GapReport::new(Quantity::GapCanonical, alpha, brute, Some(closed_form::canonical_gap(params, alpha)));
    report.measurement = Some((AliceMeasurement::sigma_y(), BobMeasurement::sigma_y()));
    Ok(report)
}

pub fn gap_arbitrary(
    params: &CanonicalQubitParams,
    alpha: f64,
    ma: AliceMeasurement,
    mb: BobMeasurement,
) -> Result<GapReport> {
    let rho = canonical_two_qubit(params)?;
    gap_arbitrary_for(&rho, params, alpha, ma, mb, arbitrary_gap_sign()?)
}

/// [`gap_arbitrary`] with a prebuilt state and a precomputed sign.
pub fn gap_arbitrary_for(
    rho: &DensityMatrix,
    params: &CanonicalQubitParams,
    alpha: f64,
    ma: AliceMeasurement,
    mb: BobMeasurement,
    sign: f64,
) -> Result<GapReport> {
    let brute = signaling_gap(rho, alpha, ma, mb, PtMap::SpecificTime)?;
    let closed = sign * closed_form::arbitrary_gap(params, alpha, mb);
    let mut report = GapReport::new(Quantity::GapArbitrary, alpha, brute, Some(closed));
    report.measurement = Some((ma, mb));
    Ok(report)
}

/// Trace distance between Bob's states conditioned on `A₊` and `A₋`,
/// next to the printed closed form when the state has canonical parameters.
pub fn distinguishability(state: &StateSpec, alpha: f64) -> Result<GapReport> {
    let rho = state.build()?;
    let brute = conditional_distance(&rho, alpha, PtMap::SpecificTime)?;
    let closed = state
        .canonical_params()
        .map(|p| closed_form::printed_trace_distance(&p, alpha));
    Ok(GapReport::new(Quantity::Distinguishability, alpha, brute, closed))
}

/// `T(ρ_B|A₊, ρ_B|A₋)` for any `d x d` state.
pub fn conditional_distance(rho: &DensityMatrix, alpha: f64, map: PtMap) -> Result<f64> {
    let plus = bob_state_after(rho, AliceOp::Identity, alpha, map)?;
    let minus = bob_state_after(rho, AliceOp::FlipX, alpha, map)?;
    trace_distance(&plus, &minus)
}

/// Trace distance between the state before and after the PT map on Alice's
/// side (no encoding operation).
pub fn perturbation_distance(rho: &DensityMatrix, alpha: f64, map: PtMap, scope: Scope) -> Result<f64> {
    let d = local_dim(rho)?;
    let after = evolved_joint(rho, AliceOp::Identity, alpha, map)?;
    match scope {
        Scope::Full => trace_distance(rho, &after),
        Scope::BobReduced => trace_distance(
            &partial_trace(rho, d, d, Subsystem::B)?,
            &partial_trace(&after, d, d, Subsystem::B)?,
        ),
    }
}

/// Perturbation of Bob's qutrit by the PT map on Alice's qutrit. The closed
/// form is 0 when `m_y = C_yy = m_z = C_zz = 0` and absent otherwise.
pub fn qutrit_signaling_check(params: &QutritParams, alpha: f64, map: PtMap) -> Result<GapReport> {
    let rho = two_qutrit(params)?;
    let brute = perturbation_distance(&rho, alpha, map, Scope::BobReduced)?;
    let quiet = [params.m[1], params.c[1], params.m[2], params.c[2]].iter().all(|x| *x == 0.0);
    Ok(GapReport::new(Quantity::QutritPerturbation, alpha, brute, quiet.then_some(0.0)))
}

/// Any [`Quantity`] for any family under any PT map. Closed forms are only
/// attached at the specific time, where they were derived.
pub fn evaluate(
    state: &StateSpec,
    quantity: Quantity,
    alpha: f64,
    map: PtMap,
    measurement: Option<(AliceMeasurement, BobMeasurement)>,
) -> Result<GapReport> {
    let rho = state.build()?;
    let specific = map == PtMap::SpecificTime;
    let params = state.canonical_params().filter(|_| specific);
    let sigma_y = (AliceMeasurement::sigma_y(), BobMeasurement::sigma_y());
    let (brute, closed, measured) = match quantity {
        Quantity::GapSigmaY | Quantity::GapCanonical => {
            let brute = signaling_gap(&rho, alpha, sigma_y.0, sigma_y.1, map)?;
            let closed = if !specific {
                None
            } else if quantity == Quantity::GapCanonical {
                params.map(|p| closed_form::canonical_gap(&p, alpha))
            } else {
                gap_sigma_y(state, alpha)?.closed_form
            };
            (brute, closed, Some(sigma_y))
        }
        Quantity::GapArbitrary => {
            let (ma, mb) = measurement.unwrap_or(sigma_y);
            let brute = signaling_gap(&rho, alpha, ma, mb, map)?;
            let closed = match params {
                Some(p) => Some(arbitrary_gap_sign()? * closed_form::arbitrary_gap(&p, alpha, mb)),
                None => None,
            };
            (brute, closed, Some((ma, mb)))
        }
        Quantity::Distinguishability => {
            let brute = conditional_distance(&rho, alpha, map)?;
            (brute, params.map(|p| closed_form::printed_trace_distance(&p, alpha)), None)
        }
        Quantity::BobPerturbation => {
            let brute = perturbation_distance(&rho, alpha, map, Scope::BobReduced)?;
            let werner_p = match state {
                StateSpec::PhiPlus | StateSpec::Werner { .. } | StateSpec::WernerLike { dim: 2, .. } => state.p(),
                _ => None,
            };
            let closed = werner_p.filter(|_| specific).map(|p| closed_form::werner_bob_perturbation(p, alpha));
            (brute, closed, None)
        }
        Quantity::FullPerturbation => (perturbation_distance(&rho, alpha, map, Scope::Full)?, None, None),
        Quantity::QutritPerturbation => {
            let StateSpec::Qutrit(q) = state else {
                return invalid(format!("{} is defined for qutrit states only", quantity.as_str()));
            };
            let r = qutrit_signaling_check(q, alpha, map)?;
            (r.brute, r.closed_form, None)
        }
    };
    let mut report = GapReport::new(quantity, alpha, brute, closed);
    report.measurement = measured;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::werner;
    use crate::states::WernerParams;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn phi() -> DensityMatrix {
        StateSpec::PhiPlus.build().unwrap()
    }

    #[test]
    fn measurement_bases_are_orthonormal() {
        for &(a, b) in &[(0.3, 1.1), (2.0, -0.7), (FRAC_PI_2, FRAC_PI_2)] {
            let [p, q] = AliceMeasurement::new(a, b).basis();
            assert!(p.overlap(&q).norm() < 1e-12);
            let [p, q] = BobMeasurement::new(a, b).basis();
            assert!(p.overlap(&q).norm() < 1e-12);
        }
    }

    #[test]
    fn product_state_does_not_signal() {
        let rho = StateSpec::Product { a: [0.2, 0.5, -0.3], b: [0.1, -0.4, 0.6] }.build().unwrap();
        for &alpha in &[0.3, 1.0, FRAC_PI_2] {
            let g = signaling_gap(&rho, alpha, AliceMeasurement::new(0.4, 0.9), BobMeasurement::new(1.2, 0.5), PtMap::SpecificTime).unwrap();
            assert!(g.abs() < 1e-12);
        }
    }

    #[test]
    fn phi_plus_at_exceptional_point_is_deterministic() {
        let ma = AliceMeasurement::sigma_y();
        let mb = BobMeasurement::sigma_y();
        let t_plus = joint_distribution(&phi(), AliceOp::Identity, FRAC_PI_2, ma, mb, PtMap::SpecificTime).unwrap();
        let t_minus = joint_distribution(&phi(), AliceOp::FlipX, FRAC_PI_2, ma, mb, PtMap::SpecificTime).unwrap();
        // identity: Bob in |-y>, flip: Bob in |+y>
        assert!((t_plus[0][0] + t_plus[1][0]).abs() < 1e-12);
        assert!((t_minus[0][0] + t_minus[1][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_limit_has_equal_marginals() {
        let rho = canonical_two_qubit(&CanonicalQubitParams::new([0.1, 0.3, 0.0], [0.0, 0.2, 0.1], [0.2, -0.4, 0.3])).unwrap();
        let g = signaling_gap(&rho, 0.0, AliceMeasurement::new(0.1, 0.2), BobMeasurement::new(0.9, 1.3), PtMap::SpecificTime).unwrap();
        assert!(g.abs() < 1e-12);
    }

    #[test]
    fn werner_gap_formula() {
        for &p in &[0.0, 0.3, 1.0] {
            for &alpha in &[0.2, 0.8, 1.4] {
                let r = gap_sigma_y(&StateSpec::Werner { p }, alpha).unwrap();
                assert!(r.abs_err.unwrap() < 1e-12, "{r:?}");
            }
        }
        let r = gap_sigma_y(&StateSpec::Werner { p: 1.0 }, FRAC_PI_2).unwrap();
        assert!((r.brute + 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_max_gap_formula() {
        let r = gap_sigma_y(&StateSpec::NonMax { beta: 0.3, gamma: 0.8 }, 0.7).unwrap();
        assert!(r.abs_err.unwrap() < 1e-12, "{r:?}");
    }

    #[test]
    fn canonical_gap_examples() {
        let p = CanonicalQubitParams::new([0.0, 0.3, 0.0], [0.0, 0.2, 0.0], [0.0, 0.06, 0.0]);
        let r = gap_canonical(&p, 0.7).unwrap();
        assert!(r.brute.abs() < 1e-12 && r.closed_form.unwrap().abs() < 1e-12);
        for &q in &[0.2, 0.9] {
            let alpha = 1.1;
            let r = gap_canonical(&CanonicalQubitParams::werner(q), alpha).unwrap();
            let g = alpha.sin();
            assert!((r.closed_form.unwrap() + 2.0 * q * g / (1.0 + g * g)).abs() < 1e-12);
            assert!(r.abs_err.unwrap() < 1e-12);
        }
    }

    #[test]
    fn arbitrary_gap_examples() {
        assert_eq!(arbitrary_gap_sign().unwrap(), 1.0);
        let real = CanonicalQubitParams::new([0.2, 0.0, -0.1], [0.3, 0.1, 0.2], [0.4, 0.0, -0.2]);
        let r = gap_arbitrary(&real, 0.9, AliceMeasurement::new(0.3, 0.4), BobMeasurement::new(1.0, 2.0)).unwrap();
        assert!(r.brute.abs() < 1e-12 && r.closed_form.unwrap().abs() < 1e-12);

        let w = CanonicalQubitParams::werner(0.6);
        let alpha = 0.8;
        let r = gap_arbitrary(&w, alpha, AliceMeasurement::new(0.3, 0.4), BobMeasurement::sigma_y()).unwrap();
        let g = alpha.sin();
        assert!((r.brute + 2.0 * 0.6 * g / (1.0 + g * g)).abs() < 1e-12);
        assert!(r.abs_err.unwrap() < 1e-12);

        let r = gap_arbitrary(&w, alpha, AliceMeasurement::new(0.3, 0.4), BobMeasurement::new(1.1, 0.0)).unwrap();
        assert!(r.brute.abs() < 1e-12);
    }

    #[test]
    fn bob_state_examples() {
        let p = 0.7;
        let alpha = 0.9;
        let rho = werner(WernerParams::new(p).unwrap()).unwrap();
        let b = bob_state_after(&rho, AliceOp::Identity, alpha, PtMap::SpecificTime).unwrap();
        let g = alpha.sin();
        let expected = ComplexMatrix::from_rows(&[
            [c(0.5, 0.0), c(0.0, p * g / (1.0 + g * g))],
            [c(0.0, -p * g / (1.0 + g * g)), c(0.5, 0.0)],
        ]);
        assert!(b.matrix().max_abs_diff(&expected) < 1e-12);
        assert!(b.matrix().max_abs_diff(&closed_form::werner_bob_state(p, alpha)) < 1e-12);

        let real = CanonicalQubitParams::new([0.2, 0.0, -0.1], [0.3, 0.1, 0.2], [0.4, 0.0, -0.2]);
        let rho = canonical_two_qubit(&real).unwrap();
        let before = partial_trace(&rho, 2, 2, Subsystem::B).unwrap();
        let after = bob_state_after(&rho, AliceOp::Identity, 1.2, PtMap::SpecificTime).unwrap();
        assert!(before.matrix().max_abs_diff(after.matrix()) < 1e-12);

        let any = CanonicalQubitParams::new([0.1, 0.3, 0.0], [0.0, 0.2, 0.1], [0.2, -0.4, 0.3]);
        let rho = canonical_two_qubit(&any).unwrap();
        let before = partial_trace(&rho, 2, 2, Subsystem::B).unwrap();
        let after = bob_state_after(&rho, AliceOp::Identity, 0.0, PtMap::SpecificTime).unwrap();
        assert!(before.matrix().max_abs_diff(after.matrix()) < 1e-12);
        let after = bob_state_after(&rho, AliceOp::Identity, 0.6, PtMap::SpecificTime).unwrap();
        assert!(after.matrix().max_abs_diff(&closed_form::bob_state(&any, 0.6)) < 1e-12);
    }

    #[test]
    fn distinguishability_examples() {
        let r = distinguishability(&StateSpec::PhiPlus, FRAC_PI_2).unwrap();
        assert!((r.brute - 1.0).abs() < 1e-12);
        let r = distinguishability(
            &StateSpec::Canonical(CanonicalQubitParams::new([0.3, 0.0, 0.1], [0.1, 0.2, 0.0], [0.1, 0.0, 0.2])),
            1.0,
        )
        .unwrap();
        assert!(r.brute < 1e-12);
        let (p, alpha) = (0.45, 1.1);
        let r = distinguishability(&StateSpec::Werner { p }, alpha).unwrap();
        let g = alpha.sin();
        assert!((r.brute - 2.0 * p * g / (1.0 + g * g)).abs() < 1e-12);
        assert!((r.ratio().unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn perturbation_examples() {
        let (p, alpha) = (0.8, FRAC_PI_4);
        let rho = werner(WernerParams::new(p).unwrap()).unwrap();
        let d = perturbation_distance(&rho, alpha, PtMap::SpecificTime, Scope::BobReduced).unwrap();
        assert!((d - closed_form::werner_bob_perturbation(p, alpha)).abs() < 1e-12);
        let d = perturbation_distance(&rho, FRAC_PI_2, PtMap::SpecificTime, Scope::BobReduced).unwrap();
        assert!((d - p / 2.0).abs() < 1e-12);
        let rho = werner(WernerParams::new(0.0).unwrap()).unwrap();
        for &a in &[0.1, 0.9, FRAC_PI_2] {
            assert!(perturbation_distance(&rho, a, PtMap::SpecificTime, Scope::BobReduced).unwrap() < 1e-14);
        }
    }

    #[test]
    fn evaluate_attaches_closed_forms_only_at_specific_time() {
        let spec = StateSpec::Werner { p: 0.6 };
        let r = evaluate(&spec, Quantity::GapSigmaY, 0.7, PtMap::SpecificTime, None).unwrap();
        assert!(r.abs_err.unwrap() < 1e-12);
        let r = evaluate(&spec, Quantity::BobPerturbation, 0.7, PtMap::SpecificTime, None).unwrap();
        assert!(r.abs_err.unwrap() < 1e-12);
        let r = evaluate(&spec, Quantity::GapSigmaY, 0.7, PtMap::Time(0.4), None).unwrap();
        assert_eq!(r.closed_form, None);
        assert!(evaluate(&spec, Quantity::QutritPerturbation, 0.7, PtMap::SpecificTime, None).is_err());
        for q in Quantity::ALL {
            assert_eq!(q.as_str().parse::<Quantity>().unwrap(), q);
        }
    }

    #[test]
    fn qutrit_checks() {
        let r = qutrit_signaling_check(&QutritParams::default(), 0.9, PtMap::SpecificTime).unwrap();
        assert!(r.brute < 1e-12);
        let q = QutritParams::new([0.2, 0.0, 0.0], [0.1, 0.0, 0.1], [0.15, 0.0, 0.0]);
        let r = qutrit_signaling_check(&q, 0.9, PtMap::SpecificTime).unwrap();
        assert_eq!(r.closed_form, Some(0.0));
        assert!(r.brute < 1e-12, "{r:?}");
        for &t in &[0.3, 1.7, 5.0] {
            assert!(qutrit_signaling_check(&q, 0.9, PtMap::Time(t)).unwrap().brute < 1e-12);
        }
        // Without correlations Bob's marginal is I/3 whatever happens on A.
        let q = QutritParams::new([0.0, 0.0, 0.2], [0.0; 3], [0.0; 3]);
        assert!(qutrit_signaling_check(&q, 0.9, PtMap::SpecificTime).unwrap().brute < 1e-12);
        let q = QutritParams::new([0.0; 3], [0.0; 3], [0.0, 0.0, 0.2]);
        let r = qutrit_signaling_check(&q, 0.9, PtMap::SpecificTime).unwrap();
        assert!(r.brute > 1e-2, "{r:?}");
        let q = QutritParams::new([0.0; 3], [0.0; 3], [0.0, 0.2, 0.0]);
        let r = qutrit_signaling_check(&q, 0.9, PtMap::SpecificTime).unwrap();
        assert!(r.brute > 1e-2, "{r:?}");
    }
}
