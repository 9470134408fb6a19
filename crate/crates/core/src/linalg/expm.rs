//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005 degree selection). Works for defective inputs, which an
//! eigendecomposition route would not.

use nalgebra::DMatrix;

use super::{c, ComplexMatrix, C64};
use crate::error::{invalid, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
];
const THETA_13: f64 = 5.371_920_351_148_152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// `exp(m)` for a square complex matrix.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.ensure_square("expm")?;
    let a = m.inner();
    let norm = m.norm1();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    for (degree, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, coeffs);
            return finish(n, &u, &v, 0);
        }
    }

    let squarings = (norm / THETA_13).log2().ceil().max(0.0) as u32;
    let scaled = a * c(0.5_f64.powi(squarings as i32), 0.0);
    let (u, v) = pade13(&scaled);
    finish(n, &u, &v, squarings)
}

fn real(x: f64) -> C64 {
    c(x, 0.0)
}

/// Odd part `U` and even part `V` of the degree-m approximant, m ∈ {3,5,7,9}.
fn pade_low(a: &DMatrix<C64>, b: &[f64]) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.nrows();
    let ident = DMatrix::<C64>::identity(n, n);
    let a2 = a * a;
    let mut even_power = ident.clone();
    let mut odd_sum = DMatrix::<C64>::zeros(n, n);
    let mut even_sum = DMatrix::<C64>::zeros(n, n);
    for k in (0..b.len()).step_by(2) {
        even_sum += &even_power * real(b[k]);
        odd_sum += &even_power * real(b[k + 1]);
        if k + 2 < b.len() {
            even_power = &even_power * &a2;
        }
    }
    (a * odd_sum, even_sum)
}

fn pade13(a: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.nrows();
    let b = &B13;
    let ident = DMatrix::<C64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]);
    let u = a
        * (&a6 * inner_u
            + &a6 * real(b[7])
            + &a4 * real(b[5])
            + &a2 * real(b[3])
            + &ident * real(b[1]));
    let inner_v = &a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]);
    let v = &a6 * inner_v
        + &a6 * real(b[6])
        + &a4 * real(b[4])
        + &a2 * real(b[2])
        + &ident * real(b[0]);
    (u, v)
}

/// Solves `(V - U) R = (V + U)` and squares `R` the requested number of times.
fn finish(n: usize, u: &DMatrix<C64>, v: &DMatrix<C64>, squarings: u32) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    let Some(mut r) = q.lu().solve(&p) else {
        return invalid(format!("expm: singular Padé denominator ({n}x{n})"));
    };
    for _ in 0..squarings {
        r = &r * &r;
    }
    ComplexMatrix::from_inner(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ops::*, I, ONE, ZERO};
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Taylor series summed term by term until the terms vanish; used as an
    /// independent reference on small-norm inputs.
    fn taylor(m: &ComplexMatrix) -> ComplexMatrix {
        let n = m.rows();
        let mut term = ComplexMatrix::identity(n);
        let mut sum = term.clone();
        for k in 1..200 {
            term = (&term * m).scale_real(1.0 / k as f64);
            sum = &sum + &term;
            if term.max_abs() < 1e-300 {
                break;
            }
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let out = expm(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(out, ComplexMatrix::identity(3));
    }

    #[test]
    fn rotation_by_half_pi() {
        let m = sigma_x().scale(c(0.0, -FRAC_PI_2));
        let out = expm(&m).unwrap();
        let expected = sigma_x().scale(-I);
        assert!(out.max_abs_diff(&expected) < 1e-14, "{out:?}");
    }

    #[test]
    fn matches_taylor_across_degrees() {
        // norms chosen to land in every Padé degree branch plus scaling
        for &scale in &[1e-3, 0.1, 0.5, 1.5, 4.0, 12.0] {
            let m = ComplexMatrix::from_rows(&[
                [c(0.3, 0.1), c(-0.2, 0.4), c(0.1, 0.0)],
                [c(0.0, -0.5), c(0.2, 0.2), c(0.3, -0.1)],
                [c(0.25, 0.0), c(-0.1, 0.1), c(-0.4, 0.3)],
            ])
            .scale_real(scale / 1.2);
            let fast = expm(&m).unwrap();
            // the Taylor sum is accurate for moderate norms; square it down otherwise
            let k = (m.norm1().log2().ceil().max(0.0)) as i32;
            let mut slow = taylor(&m.scale_real(0.5_f64.powi(k)));
            for _ in 0..k {
                slow = &slow * &slow;
            }
            let rel = fast.max_abs_diff(&slow) / slow.max_abs();
            assert!(rel < 1e-12, "scale {scale}: rel err {rel}");
        }
    }

    #[test]
    fn nilpotent_input_is_exact() {
        // H = [[i, 1], [1, -i]] squares to zero, so exp(-iHt) = I - iHt.
        let h = ComplexMatrix::from_rows(&[[I, ONE], [ONE, -I]]);
        assert!((&h * &h).max_abs() < 1e-15);
        for &t in &[0.5, 3.0, 40.0] {
            let out = expm(&h.scale(c(0.0, -t))).unwrap();
            let expected = &ComplexMatrix::identity(2) - &h.scale(c(0.0, t));
            assert!(out.max_abs_diff(&expected) < 1e-12 * (1.0 + t), "t={t}");
        }
    }

    #[test]
    fn diagonal_input() {
        let m = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, PI), c(-2.0, 0.5)]);
        let out = expm(&m).unwrap();
        let expected = ComplexMatrix::diag(&[c(1.0, 0.0).exp(), c(0.0, PI).exp(), c(-2.0, 0.5).exp()]);
        assert!(out.max_abs_diff(&expected) < 1e-14);
        assert_eq!(out.get(0, 1), ZERO);
    }

    #[test]
    fn non_square_rejected() {
        assert!(expm(&ComplexMatrix::zeros(2, 3)).is_err());
    }
}
