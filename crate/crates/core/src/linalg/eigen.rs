use super::{c, ComplexMatrix, C64};
use crate::error::{domain, invalid, Result};
use crate::tolerances::Tolerances;

/// All eigenvalues of a square matrix, with multiplicity. Order is unspecified.
///
/// 2x2 inputs use the characteristic polynomial directly. Larger inputs use a
/// complex Schur form; if the QR iteration stalls (it can on nilpotent or
/// otherwise defective inputs) the roots of the characteristic polynomial are
/// found by simultaneous iteration instead.
pub fn eigvals(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = m.ensure_square("eigvals")?;
    match n {
        1 => Ok(vec![m.get(0, 0)]),
        2 => {
            let (a, b, cc, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5).powi(2) + b * cc;
            let root = disc.sqrt();
            Ok(vec![half_tr + root, half_tr - root])
        }
        _ => {
            let eps = f64::EPSILON;
            match m.inner().clone().try_schur(eps, 100 * n) {
                Some(schur) => {
                    let (_, t) = schur.unpack();
                    Ok((0..n).map(|i| t[(i, i)]).collect())
                }
                None => Ok(polynomial_roots(&characteristic_polynomial(m))),
            }
        }
    }
}

/// Monic characteristic polynomial coefficients, highest degree first
/// (Faddeev-LeVerrier).
fn characteristic_polynomial(m: &ComplexMatrix) -> Vec<C64> {
    let n = m.rows();
    let id = ComplexMatrix::identity(n);
    let mut coeffs = vec![c(1.0, 0.0)];
    let mut mk = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        let prev = *coeffs.last().unwrap();
        mk = &(m * &mk) + &id.scale(prev);
        let am = m * &mk;
        coeffs.push(-am.trace() / k as f64);
    }
    coeffs
}

/// Durand-Kerner iteration for the roots of a monic polynomial.
fn polynomial_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let eval = |z: C64| coeffs.iter().fold(c(0.0, 0.0), |acc, &a| acc * z + a);
    let radius = 1.0 + coeffs.iter().skip(1).map(|a| a.norm()).fold(0.0, f64::max);
    let seed = c(0.4, 0.9);
    let mut roots: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..10_000 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let zi = roots[i];
            let denom: C64 = (0..n).filter(|&j| j != i).map(|j| zi - roots[j]).product();
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(zi) / denom;
            roots[i] = zi - step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    roots
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>> {
    m.ensure_square("eigvalsh")?;
    let h = m.hermitian_part().into_inner();
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals)
}

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.inner().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Hermitian PSD square root. Eigenvalues in `[psd_domain, 0)` are clamped to 0.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    sqrt_psd_with(m, &Tolerances::DEFAULT)
}

pub fn sqrt_psd_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    m.ensure_square("sqrt_psd")?;
    let herm = m.hermiticity_residual();
    if herm > tol.hermiticity {
        return invalid(format!("sqrt_psd: matrix is not Hermitian (residual {herm:e})"));
    }
    let eig = m.hermitian_part().into_inner().symmetric_eigen();
    let mut roots = Vec::with_capacity(eig.eigenvalues.len());
    for &lambda in eig.eigenvalues.iter() {
        if lambda < tol.psd_domain {
            return domain(format!("sqrt_psd: eigenvalue {lambda:e} is significantly negative"));
        }
        roots.push(c(lambda.max(0.0).sqrt(), 0.0));
    }
    let q = &eig.eigenvectors;
    let d = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(roots));
    let root = q * d * q.adjoint();
    Ok(ComplexMatrix::wrap(root).hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ops::*, I, ONE};

    fn sorted_re(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_spectrum() {
        let v = sorted_re(eigvals(&ComplexMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap());
        for (z, e) in v.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - c(e, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn qubit_pt_spectrum_is_plus_minus_cos() {
        // characteristic polynomial: E^2 = 1 - sin^2(alpha)
        for &alpha in &[0.0, 0.3, 0.9, 1.4] {
            let s: f64 = f64::sin(alpha);
            let h = ComplexMatrix::from_rows(&[[c(0.0, s), ONE], [ONE, c(0.0, -s)]]);
            let v = sorted_re(eigvals(&h).unwrap());
            assert!((v[0] - c(-alpha.cos(), 0.0)).norm() < 1e-12);
            assert!((v[1] - c(alpha.cos(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn eigvals_has_small_residual() {
        let m = ComplexMatrix::from_rows(&[
            [c(0.3, 1.0), c(-0.2, 0.4), c(0.1, 0.0), c(0.0, 2.0)],
            [c(0.0, -0.5), c(0.2, 0.2), c(0.3, -0.1), ONE],
            [c(0.25, 0.0), c(-0.1, 0.1), c(-0.4, 0.3), I],
            [c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.5), c(-1.0, 0.0)],
        ]);
        for lambda in eigvals(&m).unwrap() {
            let shifted = &m - &ComplexMatrix::identity(4).scale(lambda);
            let smin = *singular_values(&shifted).last().unwrap();
            assert!(smin < 1e-10, "residual {smin}");
        }
    }

    #[test]
    fn defective_inputs_terminate() {
        let ep = ComplexMatrix::from_rows(&[[I, ONE], [ONE, -I]]);
        for z in eigvals(&ep).unwrap() {
            assert!(z.norm() < 1e-7);
        }
        let jordan = ComplexMatrix::from_real_rows(&[[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]]);
        for z in eigvals(&jordan).unwrap() {
            assert!((z - c(2.0, 0.0)).norm() < 1e-4);
        }
    }

    #[test]
    fn polynomial_fallback_matches_known_roots() {
        let m = ComplexMatrix::diag(&[c(1.0, 0.0), c(-2.0, 0.5), c(0.0, 3.0), c(4.0, -1.0)]);
        let mut roots = polynomial_roots(&characteristic_polynomial(&m));
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        let expected = [c(-2.0, 0.5), c(0.0, 3.0), c(1.0, 0.0), c(4.0, -1.0)];
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).norm() < 1e-10, "{roots:?}");
        }
    }

    #[test]
    fn eigvalsh_of_sigma_y() {
        let v = eigvalsh(&sigma_y()).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_examples() {
        let r = sqrt_psd(&ComplexMatrix::diag_real(&[4.0, 9.0])).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::diag_real(&[2.0, 3.0])) < 1e-14);
        let r = sqrt_psd(&ComplexMatrix::identity(3)).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-14);
        let plus_y = [c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(0.0, std::f64::consts::FRAC_1_SQRT_2)];
        let proj = ComplexMatrix::outer(&plus_y, &plus_y);
        let r = sqrt_psd(&proj).unwrap();
        assert!(r.max_abs_diff(&proj) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_negative_and_non_hermitian() {
        assert!(matches!(
            sqrt_psd(&ComplexMatrix::diag_real(&[1.0, -0.1])),
            Err(crate::Error::Domain(_))
        ));
        assert!(sqrt_psd(&ComplexMatrix::diag_real(&[1.0, -1e-12])).is_ok());
        assert!(matches!(
            sqrt_psd(&sigma_y().scale(I)),
            Err(crate::Error::InvalidArgument(_))
        ));
    }
}
