//! Numerical thresholds shared by every module.
//!
//! Validation routines take a [`Tolerances`] record; the free functions use
//! [`Tolerances::DEFAULT`].

/// Threshold record. Field defaults are listed on [`Tolerances::DEFAULT`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entrywise `|m - m†|` for a matrix to count as Hermitian.
    pub hermiticity: f64,
    /// Allowed deviation of a density matrix trace from 1.
    pub trace: f64,
    /// Smallest admissible eigenvalue of a density matrix.
    pub min_eigenvalue: f64,
    /// Allowed deviation of a ket norm from 1.
    pub ket_norm: f64,
    /// Eigenvalues below this make `sqrt_psd` fail instead of clamping.
    pub psd_domain: f64,
    /// Imaginary parts of Hermitian spectra below this are dropped.
    pub imag_discard: f64,
    /// Normalizations at or below this mean the state was annihilated.
    pub annihilation: f64,
    /// Max entrywise PT-commutation residual of a constructed Hamiltonian.
    pub pt_commutation: f64,
    /// `|Im E|` above this marks a complex (broken-phase) eigenvalue.
    pub real_spectrum: f64,
    /// Eigenvector-matrix condition number above which a spectrum is defective.
    pub defect_condition: f64,
    /// Relative eigenvalue separation below which eigenvalues are treated as
    /// coalesced when probing for an exceptional point.
    pub coalescence: f64,
    /// Relative residual of a coalesced cluster's eigenspace above which the
    /// cluster is defective.
    pub defect_residual: f64,
    /// Relative singular value below which a matrix counts as zero.
    pub zero_matrix: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermiticity: 1e-10,
        trace: 1e-10,
        min_eigenvalue: -1e-9,
        ket_norm: 1e-10,
        psd_domain: -1e-6,
        imag_discard: 1e-10,
        annihilation: 1e-12,
        pt_commutation: 1e-12,
        real_spectrum: 1e-9,
        defect_condition: 1e8,
        coalescence: 1e-5,
        defect_residual: 1e-6,
        zero_matrix: 1e-300,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
