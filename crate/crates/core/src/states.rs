//! Shared-state families and Alice's encoding operations.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{c, ops, ComplexMatrix, ZERO};
use crate::quantum::{DensityMatrix, PureState};

/// Alice's encoding: `A₊ = I` or `A₋` = the exchange matrix (`σ_x` for qubits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AliceOp {
    Identity,
    FlipX,
}

impl AliceOp {
    pub const BOTH: [AliceOp; 2] = [AliceOp::Identity, AliceOp::FlipX];

    pub fn matrix(self, dim: usize) -> ComplexMatrix {
        match self {
            AliceOp::Identity => ComplexMatrix::identity(dim),
            AliceOp::FlipX => ComplexMatrix::exchange(dim),
        }
    }
}

/// Amplitudes of `β|++⟩ + γ|--⟩` before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonMaxParams {
    pub beta: f64,
    pub gamma: f64,
}

impl NonMaxParams {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta.is_finite() && gamma.is_finite()) || beta * beta + gamma * gamma == 0.0 {
            return invalid(format!("non-maximally entangled state needs β²+γ² > 0, got ({beta}, {gamma})"));
        }
        Ok(Self { beta, gamma })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.beta * self.beta + self.gamma * self.gamma
    }

    /// The same state written in the canonical two-qubit form.
    pub fn canonical(&self) -> CanonicalQubitParams {
        let n2 = self.norm_sqr();
        let mx = (self.beta * self.beta - self.gamma * self.gamma) / n2;
        let bg = 2.0 * self.beta * self.gamma / n2;
        CanonicalQubitParams {
            m: [mx, 0.0, 0.0],
            m_prime: [mx, 0.0, 0.0],
            c: [1.0, -bg, bg],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WernerParams {
    pub p: f64,
}

impl WernerParams {
    pub fn new(p: f64) -> Result<Self> {
        check_isotropic_range(2, p)?;
        Ok(Self { p })
    }
}

/// Local magnetizations and diagonal correlators of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CanonicalQubitParams {
    pub m: [f64; 3],
    pub m_prime: [f64; 3],
    pub c: [f64; 3],
}

impl CanonicalQubitParams {
    pub fn new(m: [f64; 3], m_prime: [f64; 3], c: [f64; 3]) -> Self {
        Self { m, m_prime, c }
    }

    pub fn werner(p: f64) -> Self {
        Self::new([0.0; 3], [0.0; 3], [p, -p, p])
    }

    pub fn m_y(&self) -> f64 {
        self.m[1]
    }

    pub fn c_yy(&self) -> f64 {
        self.c[1]
    }

    /// `(1/4)(I + Σ mᵢ σᵢ⊗I + m′ᵢ I⊗σᵢ + Cᵢᵢ σᵢ⊗σᵢ)`, unvalidated.
    pub fn matrix(&self) -> ComplexMatrix {
        pauli_expansion(&ops::paulis(), 2, self.m, self.m_prime, self.c, 0.25)
    }

    /// Parameters of `(σ_x ⊗ I) ρ (σ_x ⊗ I)`: Alice's y and z components flip sign.
    pub fn after_flip_x(&self) -> Self {
        let mut out = *self;
        out.m[1] = -out.m[1];
        out.m[2] = -out.m[2];
        out.c[1] = -out.c[1];
        out.c[2] = -out.c[2];
        out
    }

    /// Random parameters of a valid state: uniform in `[-1, 1]⁹`, shrunk
    /// toward the maximally mixed state until the matrix is PSD.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut draw = || std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        Self::new(draw(), draw(), draw()).shrink_to_state()
    }

    /// [`CanonicalQubitParams::random`] with `m_y = C_yy = 0`, so the matrix is real.
    pub fn random_real<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut draw = || std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let mut p = Self::new(draw(), draw(), draw());
        p.m[1] = 0.0;
        p.c[1] = 0.0;
        p.shrink_to_state()
    }

    fn shrink_to_state(mut self) -> Self {
        while canonical_two_qubit(&self).is_err() {
            for v in [&mut self.m, &mut self.m_prime, &mut self.c] {
                v.iter_mut().for_each(|x| *x *= 0.8);
            }
        }
        self
    }

    /// Reads `Tr(σᵢ⊗I ρ)`, `Tr(I⊗σᵢ ρ)` and `Tr(σᵢ⊗σᵢ ρ)` back out of a state.
    pub fn readback(rho: &DensityMatrix) -> Self {
        let id = ComplexMatrix::identity(2);
        let p = ops::paulis();
        let mut out = Self::default();
        for (i, op) in p.iter().enumerate() {
            out.m[i] = rho.expectation(&op.kron(&id));
            out.m_prime[i] = rho.expectation(&id.kron(op));
            out.c[i] = rho.expectation(&op.kron(op));
        }
        out
    }
}

/// Spin-1 analogue of [`CanonicalQubitParams`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QutritParams {
    pub m: [f64; 3],
    pub m_prime: [f64; 3],
    pub c: [f64; 3],
}

impl QutritParams {
    pub fn new(m: [f64; 3], m_prime: [f64; 3], c: [f64; 3]) -> Self {
        Self { m, m_prime, c }
    }

    /// `(1/9)(I₉ + Σ mᵢ Sᵢ⊗I + m′ᵢ I⊗Sᵢ + Cᵢᵢ Sᵢ⊗Sᵢ)`, unvalidated.
    pub fn matrix(&self) -> ComplexMatrix {
        pauli_expansion(&ops::spin1(), 3, self.m, self.m_prime, self.c, 1.0 / 9.0)
    }

    /// Inverse of [`QutritParams::matrix`]. Since `Tr Sᵢ² = 2` and `Tr I₃ = 3`,
    /// `⟨Sᵢ⊗I⟩ = (2/3) mᵢ` and `⟨Sᵢ⊗Sᵢ⟩ = (4/9) Cᵢᵢ`.
    pub fn readback(rho: &DensityMatrix) -> Self {
        let id = ComplexMatrix::identity(3);
        let s = ops::spin1();
        let mut out = Self::default();
        for (i, op) in s.iter().enumerate() {
            out.m[i] = 1.5 * rho.expectation(&op.kron(&id));
            out.m_prime[i] = 1.5 * rho.expectation(&id.kron(op));
            out.c[i] = 2.25 * rho.expectation(&op.kron(op));
        }
        out
    }
}

fn pauli_expansion(
    basis: &[ComplexMatrix; 3],
    dim: usize,
    m: [f64; 3],
    m_prime: [f64; 3],
    corr: [f64; 3],
    prefactor: f64,
) -> ComplexMatrix {
    let id = ComplexMatrix::identity(dim);
    let mut acc = ComplexMatrix::identity(dim * dim);
    for i in 0..3 {
        acc = &acc + &basis[i].kron(&id).scale_real(m[i]);
        acc = &acc + &id.kron(&basis[i]).scale_real(m_prime[i]);
        acc = &acc + &basis[i].kron(&basis[i]).scale_real(corr[i]);
    }
    acc.scale_real(prefactor)
}

fn validate_family(mat: ComplexMatrix, what: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(mat).map_err(|e| match e {
        crate::Error::InvalidArgument(msg) => crate::Error::InvalidArgument(format!("{what}: {msg}")),
        other => other,
    })
}

fn check_isotropic_range(dim: usize, p: f64) -> Result<()> {
    let lo = -1.0 / ((dim * dim) as f64 - 1.0);
    if !(p.is_finite() && p >= lo - 1e-15 && p <= 1.0 + 1e-15) {
        return invalid(format!("p = {p} outside the PSD range [{lo}, 1] for d = {dim}"));
    }
    Ok(())
}

/// `(|0..0⟩ + ... + |d-1,d-1⟩)/√d`.
pub fn max_entangled_ket(dim: usize) -> PureState {
    let mut amps = vec![ZERO; dim * dim];
    let r = 1.0 / (dim as f64).sqrt();
    for i in 0..dim {
        amps[i * dim + i] = c(r, 0.0);
    }
    PureState::new(amps).expect("unit norm by construction")
}

/// Projector on `(β|++⟩ + γ|--⟩)/√(β²+γ²)`.
pub fn non_max_entangled(p: NonMaxParams) -> Result<DensityMatrix> {
    let p = NonMaxParams::new(p.beta, p.gamma)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureState::new(vec![c(h, 0.0), c(h, 0.0)])?;
    let minus = PureState::new(vec![c(h, 0.0), c(-h, 0.0)])?;
    let pp = plus.tensor(&plus);
    let mm = minus.tensor(&minus);
    let amps = pp
        .amplitudes()
        .iter()
        .zip(mm.amplitudes())
        .map(|(a, b)| a * p.beta + b * p.gamma)
        .collect();
    Ok(PureState::normalized(amps)?.projector())
}

/// `p |Φ⁺⟩⟨Φ⁺| + (1-p) I₄/4`, `Φ⁺ = (|00⟩+|11⟩)/√2`.
pub fn werner(p: WernerParams) -> Result<DensityMatrix> {
    werner_like(2, p.p)
}

/// `p |Φ⁺_d⟩⟨Φ⁺_d| + (1-p) I/d²`.
pub fn werner_like(dim: usize, p: f64) -> Result<DensityMatrix> {
    if !(2..=3).contains(&dim) {
        return invalid(format!("Werner-like states are built for d = 2 or 3, got {dim}"));
    }
    check_isotropic_range(dim, p)?;
    let n = dim * dim;
    let proj = max_entangled_ket(dim).projector().into_matrix();
    let mixed = ComplexMatrix::identity(n).scale_real((1.0 - p) / n as f64);
    validate_family(&proj.scale_real(p) + &mixed, "werner_like")
}

pub fn canonical_two_qubit(p: &CanonicalQubitParams) -> Result<DensityMatrix> {
    validate_family(p.matrix(), "canonical two-qubit parameters")
}

pub fn two_qutrit(p: &QutritParams) -> Result<DensityMatrix> {
    validate_family(p.matrix(), "two-qutrit parameters")
}

/// Single-qubit state with Bloch vector `r` (|r| ≤ 1).
pub fn bloch_state(r: [f64; 3]) -> Result<DensityMatrix> {
    let p = ops::paulis();
    let mut m = ComplexMatrix::identity(2);
    for i in 0..3 {
        m = &m + &p[i].scale_real(r[i]);
    }
    validate_family(m.scale_real(0.5), "Bloch vector")
}

/// A named, parameterized shared state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum StateSpec {
    PhiPlus,
    Werner { p: f64 },
    NonMax { beta: f64, gamma: f64 },
    Canonical(CanonicalQubitParams),
    /// `ρ_A ⊗ ρ_B` from two Bloch vectors.
    Product { a: [f64; 3], b: [f64; 3] },
    WernerLike { dim: usize, p: f64 },
    Qutrit(QutritParams),
}

impl StateSpec {
    pub fn family(&self) -> &'static str {
        match self {
            StateSpec::PhiPlus => "phi-plus",
            StateSpec::Werner { .. } => "werner",
            StateSpec::NonMax { .. } => "non-max",
            StateSpec::Canonical(_) => "canonical",
            StateSpec::Product { .. } => "product",
            StateSpec::WernerLike { .. } => "werner-like",
            StateSpec::Qutrit(_) => "qutrit",
        }
    }

    /// Local dimension of each party.
    pub fn local_dim(&self) -> usize {
        match self {
            StateSpec::WernerLike { dim, .. } => *dim,
            StateSpec::Qutrit(_) => 3,
            _ => 2,
        }
    }

    /// Mixing weight, for the families that have one.
    pub fn p(&self) -> Option<f64> {
        match self {
            StateSpec::Werner { p } | StateSpec::WernerLike { p, .. } => Some(*p),
            StateSpec::PhiPlus => Some(1.0),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<DensityMatrix> {
        match self {
            StateSpec::PhiPlus => werner_like(2, 1.0),
            StateSpec::Werner { p } => werner(WernerParams::new(*p)?),
            StateSpec::NonMax { beta, gamma } => non_max_entangled(NonMaxParams::new(*beta, *gamma)?),
            StateSpec::Canonical(params) => canonical_two_qubit(params),
            StateSpec::Product { a, b } => Ok(bloch_state(*a)?.tensor(&bloch_state(*b)?)),
            StateSpec::WernerLike { dim, p } => werner_like(*dim, *p),
            StateSpec::Qutrit(params) => two_qutrit(params),
        }
    }

    /// Canonical two-qubit parameters when the family is exactly of that form.
    pub fn canonical_params(&self) -> Option<CanonicalQubitParams> {
        match self {
            StateSpec::PhiPlus => Some(CanonicalQubitParams::werner(1.0)),
            StateSpec::Werner { p } => Some(CanonicalQubitParams::werner(*p)),
            StateSpec::WernerLike { dim: 2, p } => Some(CanonicalQubitParams::werner(*p)),
            StateSpec::NonMax { beta, gamma } => NonMaxParams::new(*beta, *gamma).ok().map(|n| n.canonical()),
            StateSpec::Canonical(params) => Some(*params),
            StateSpec::Product { .. } | StateSpec::WernerLike { .. } | StateSpec::Qutrit(_) => None,
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::PhiPlus => write!(f, "phi-plus"),
            StateSpec::Werner { p } => write!(f, "werner(p={p})"),
            StateSpec::NonMax { beta, gamma } => write!(f, "non-max(beta={beta}, gamma={gamma})"),
            StateSpec::Canonical(c) => write!(f, "canonical(m={:?}, m'={:?}, c={:?})", c.m, c.m_prime, c.c),
            StateSpec::Product { a, b } => write!(f, "product(a={a:?}, b={b:?})"),
            StateSpec::WernerLike { dim, p } => write!(f, "werner-like(d={dim}, p={p})"),
            StateSpec::Qutrit(q) => write!(f, "qutrit(m={:?}, m'={:?}, c={:?})", q.m, q.m_prime, q.c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{partial_trace, Subsystem};

    #[test]
    fn non_max_examples() {
        let phi = non_max_entangled(NonMaxParams { beta: 1.0, gamma: 1.0 }).unwrap();
        assert!(phi.matrix().max_abs_diff(max_entangled_ket(2).projector().matrix()) < 1e-15);

        let pp = non_max_entangled(NonMaxParams { beta: 1.0, gamma: 0.0 }).unwrap();
        assert!((pp.purity() - 1.0).abs() < 1e-14);
        let a = partial_trace(&pp, 2, 2, Subsystem::A).unwrap();
        assert!((a.purity() - 1.0).abs() < 1e-14);

        let s = non_max_entangled(NonMaxParams { beta: 3.0, gamma: 4.0 }).unwrap();
        let b = partial_trace(&s, 2, 2, Subsystem::B).unwrap();
        assert!((b.get(0, 1) - c(-7.0 / 50.0, 0.0)).norm() < 1e-15);

        assert!(non_max_entangled(NonMaxParams { beta: 0.0, gamma: 0.0 }).is_err());
    }

    #[test]
    fn non_max_is_canonical() {
        for &(b, g) in &[(1.0, 1.0), (3.0, 4.0), (0.2, -0.7), (1.0, 0.0)] {
            let n = NonMaxParams::new(b, g).unwrap();
            let direct = non_max_entangled(n).unwrap();
            let via = canonical_two_qubit(&n.canonical()).unwrap();
            assert!(direct.matrix().max_abs_diff(via.matrix()) < 1e-14);
        }
    }

    #[test]
    fn non_max_equal_weights_equals_werner_one() {
        for &b in &[0.3, 1.0, 5.0] {
            let a = non_max_entangled(NonMaxParams { beta: b, gamma: b }).unwrap();
            let w = werner(WernerParams { p: 1.0 }).unwrap();
            assert!(a.matrix().max_abs_diff(w.matrix()) < 1e-15);
        }
    }

    #[test]
    fn werner_examples() {
        let w1 = werner(WernerParams::new(1.0).unwrap()).unwrap();
        assert!(w1.matrix().max_abs_diff(max_entangled_ket(2).projector().matrix()) < 1e-15);
        let w0 = werner(WernerParams::new(0.0).unwrap()).unwrap();
        assert!(w0.matrix().max_abs_diff(DensityMatrix::maximally_mixed(4).matrix()) < 1e-15);
        // boundary of the PSD range still builds; below it does not
        assert!(werner(WernerParams { p: -1.0 / 3.0 }).is_ok());
        assert!(WernerParams::new(-0.34).is_err());
        assert!(WernerParams::new(1.01).is_err());
        // the separability boundary p = 1/3 is a valid state
        let w = werner(WernerParams::new(1.0 / 3.0).unwrap()).unwrap();
        assert!(w.eigenvalues()[0] > 0.0);
        let b = partial_trace(&werner(WernerParams::new(0.6).unwrap()).unwrap(), 2, 2, Subsystem::B).unwrap();
        assert!(b.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn werner_correlators() {
        let w = werner(WernerParams::new(0.7).unwrap()).unwrap();
        let r = CanonicalQubitParams::readback(&w);
        assert!((r.c[0] - 0.7).abs() < 1e-14 && (r.c[1] + 0.7).abs() < 1e-14 && (r.c[2] - 0.7).abs() < 1e-14);
        assert!(r.m.iter().chain(&r.m_prime).all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn canonical_examples() {
        let z = canonical_two_qubit(&CanonicalQubitParams::default()).unwrap();
        assert!(z.matrix().max_abs_diff(DensityMatrix::maximally_mixed(4).matrix()) < 1e-15);
        for &p in &[-0.2, 0.3, 0.9] {
            let a = canonical_two_qubit(&CanonicalQubitParams::werner(p)).unwrap();
            let b = werner(WernerParams::new(p).unwrap()).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
        }
        // σ_y⊗I and I⊗σ_z commute, so the eigenvalues are (1 ± 0.3 ± 0.5)/4.
        let s = canonical_two_qubit(&CanonicalQubitParams::new([0.0, 0.3, 0.0], [0.0, 0.0, 0.5], [0.0; 3])).unwrap();
        let ev = s.eigenvalues();
        let expected = [0.05, 0.2, 0.3, 0.45];
        for (got, want) in ev.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14, "{ev:?}");
        }
        let err = canonical_two_qubit(&CanonicalQubitParams::new([0.0; 3], [0.0; 3], [1.0, 1.0, 1.0])).unwrap_err();
        assert!(err.to_string().contains("minimum eigenvalue"));
    }

    #[test]
    fn qutrit_examples() {
        let z = two_qutrit(&QutritParams::default()).unwrap();
        assert!(z.matrix().max_abs_diff(DensityMatrix::maximally_mixed(9).matrix()) < 1e-15);
        let q = QutritParams::new([0.1, -0.2, 0.15], [0.05, 0.1, -0.1], [0.2, -0.1, 0.3]);
        let r = QutritParams::readback(&two_qutrit(&q).unwrap());
        for i in 0..3 {
            assert!((r.m[i] - q.m[i]).abs() < 1e-12);
            assert!((r.m_prime[i] - q.m_prime[i]).abs() < 1e-12);
            assert!((r.c[i] - q.c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn werner_like_examples() {
        for &p in &[0.0, 0.4, 1.0] {
            let a = werner_like(2, p).unwrap();
            let b = werner(WernerParams::new(p).unwrap()).unwrap();
            assert_eq!(a, b);
        }
        let w = werner_like(3, 0.0).unwrap();
        assert!(w.matrix().max_abs_diff(DensityMatrix::maximally_mixed(9).matrix()) < 1e-15);
        let w = werner_like(3, 1.0).unwrap();
        for keep in [Subsystem::A, Subsystem::B] {
            let m = partial_trace(&w, 3, 3, keep).unwrap();
            assert!(m.matrix().max_abs_diff(DensityMatrix::maximally_mixed(3).matrix()) < 1e-15);
        }
        assert!(werner_like(3, -0.2).is_err());
        assert!(werner_like(3, -0.125).is_ok());
        assert!(werner_like(4, 0.5).is_err());
    }

    #[test]
    fn random_params_are_states() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            assert!(canonical_two_qubit(&CanonicalQubitParams::random(&mut rng)).is_ok());
            let p = CanonicalQubitParams::random_real(&mut rng);
            assert_eq!((p.m_y(), p.c_yy()), (0.0, 0.0));
            assert!(canonical_two_qubit(&p).is_ok());
        }
    }

    #[test]
    fn flip_x_parameters_match_conjugation() {
        let p = CanonicalQubitParams::new([0.1, 0.2, -0.3], [0.2, -0.1, 0.25], [0.3, -0.2, 0.1]);
        let rho = canonical_two_qubit(&p).unwrap();
        let x = AliceOp::FlipX.matrix(2).kron(&ComplexMatrix::identity(2));
        let flipped = &(&x * rho.matrix()) * &x;
        assert!(flipped.max_abs_diff(&p.after_flip_x().matrix()) < 1e-15);
    }
}
