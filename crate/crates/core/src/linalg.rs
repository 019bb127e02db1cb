//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Everything here is a thin, tolerance-aware layer over `nalgebra`. Rank and
//! kernel decisions are always made from singular values with a threshold
//! relative to the largest one.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

use crate::error::{AdhmError, Result};
use crate::tolerance::ToleranceConfig;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Shorthand for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// 1×1 matrix.
pub fn scalar_matrix(z: C64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, z)
}

/// Builds a matrix from real row slices.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    ComplexMatrix::from_fn(r, c, |i, j| real(rows[i][j]))
}

pub fn diag(values: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(values))
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: &ComplexMatrix, what: &'static str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(AdhmError::Shape(format!("{what} has an empty dimension")));
    }
    if is_finite(m) {
        Ok(())
    } else {
        Err(AdhmError::NonFinite(what))
    }
}

pub fn ensure_square(m: &ComplexMatrix, what: &'static str) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(AdhmError::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub fn fro_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Relative entrywise distance `max|a-b| / max(1, max|a|, max|b|)`.
pub fn rel_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let scale = 1f64.max(max_abs(a)).max(max_abs(b));
    max_abs(&(a - b)) / scale
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn pow(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut out = identity(m.nrows());
    let mut base = m.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            out = &out * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    out
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let svd = SVD::new(m.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Full right-singular basis: returns `(sigma, V)` where `V` is `cols × cols`
/// unitary, columns ordered by descending singular value (padded with zeros
/// for the rows-short case).
fn right_singular(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let (r, c) = m.shape();
    let work = if r < c {
        let mut padded = ComplexMatrix::zeros(c, c);
        padded.rows_mut(0, r).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = SVD::new(work, false, true);
    let vt = svd.v_t.expect("requested V");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let v = ComplexMatrix::from_fn(c, c, |i, j| vt[(idx[j], i)].conj());
    (sigma, v)
}

/// Number of singular values strictly above `rel * sigma_max`.
pub fn rank_with(m: &ComplexMatrix, rel: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel * top).count()
}

/// Numerical rank relative to the largest singular value.
pub fn rank_tol(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<usize> {
    ensure_finite(m, "matrix")?;
    Ok(rank_with(m, tol.rank_rel_tol))
}

/// Orthonormal basis of the null space, using `threshold` as an absolute
/// singular-value cut-off.
pub fn kernel_abs(m: &ComplexMatrix, threshold: f64) -> Vec<ComplexVector> {
    let (sigma, v) = right_singular(m);
    let cols = m.ncols();
    let rank = sigma.iter().take(cols).filter(|&&x| x > threshold).count();
    (rank..cols).map(|j| v.column(j).into_owned()).collect()
}

/// Orthonormal basis of the numerical null space.
pub fn kernel_basis(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Vec<ComplexVector>> {
    ensure_finite(m, "matrix")?;
    let top = singular_values(m).first().copied().unwrap_or(0.0);
    Ok(kernel_abs(m, tol.rank_rel_tol * top))
}

/// Right-singular vector of the smallest singular value, with that value.
pub fn smallest_singular_pair(m: &ComplexMatrix) -> (f64, ComplexVector) {
    let (sigma, v) = right_singular(m);
    let cols = m.ncols();
    let s = if m.nrows() >= cols { sigma[cols - 1] } else { 0.0 };
    (s, v.column(cols - 1).into_owned())
}

/// Eigenvalues (with algebraic multiplicity) from a complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or(AdhmError::Numerical("Schur iteration did not converge"))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

pub fn determinant(m: &ComplexMatrix) -> Result<C64> {
    ensure_square(m, "matrix")?;
    Ok(m.clone().lu().determinant())
}

/// Inverse, refusing matrices that are numerically singular under `tol`.
pub fn inverse(m: &ComplexMatrix, tol: &ToleranceConfig, what: &'static str) -> Result<ComplexMatrix> {
    let n = ensure_square(m, what)?;
    ensure_finite(m, what)?;
    if rank_with(m, tol.rank_rel_tol) < n {
        return Err(AdhmError::Singular(what));
    }
    m.clone().try_inverse().ok_or(AdhmError::Singular(what))
}

/// Ratio `sigma_min / sigma_max`; zero for the zero matrix.
pub fn inverse_condition(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&top), Some(&bottom)) if top > 0.0 => bottom / top,
        _ => 0.0,
    }
}

pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let r = inverse_condition(m);
    if r == 0.0 {
        f64::INFINITY
    } else {
        1.0 / r
    }
}

/// Orthonormal completion: returns a `n × (n-1)` matrix whose columns span the
/// orthogonal complement of the unit vector `v`.
pub fn orthogonal_complement(v: &ComplexVector) -> ComplexMatrix {
    let n = v.len();
    let row = ComplexMatrix::from_fn(1, n, |_, j| v[j].conj());
    let basis = kernel_abs(&row, 0.5 * v.norm());
    let mut out = ComplexMatrix::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Greedy nearest-pair matching of two equally sized multisets. Returns the
/// largest distance among matched pairs, or `None` when the sizes differ.
pub fn greedy_match<T>(a: &[T], b: &[T], dist: impl Fn(&T, &T) -> f64) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push((dist(x, y), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst = 0.0f64;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        worst = worst.max(d);
        matched += 1;
        if matched == a.len() {
            break;
        }
    }
    Some(worst)
}

/// Multiset equality of complex scalars under a relative tolerance.
pub fn spectra_match(a: &[C64], b: &[C64], rel: f64) -> bool {
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    greedy_match(a, b, |x, y| (x - y).norm()).is_some_and(|d| d <= rel * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_tol(&identity(3), &tol()).unwrap(), 3);
        assert_eq!(rank_tol(&ComplexMatrix::zeros(2, 2), &tol()).unwrap(), 0);
        let m = from_real_rows(&[&[1.0, 0.0], &[0.0, 1e-15]]);
        assert_eq!(rank_tol(&m, &tol()).unwrap(), 1);
    }

    #[test]
    fn rank_rejects_non_finite() {
        let mut m = identity(2);
        m[(0, 1)] = real(f64::NAN);
        assert_eq!(rank_tol(&m, &tol()), Err(AdhmError::NonFinite("matrix")));
        assert!(kernel_basis(&m, &tol()).is_err());
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&ComplexMatrix::zeros(2, 2), &tol()).unwrap();
        assert_eq!(k.len(), 2);
        let gram = ComplexMatrix::from_fn(2, 2, |i, j| k[i].dotc(&k[j]));
        assert!(rel_distance(&gram, &identity(2)) < 1e-14);

        assert!(kernel_basis(&identity(3), &tol()).unwrap().is_empty());

        let ones = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let k = kernel_basis(&ones, &tol()).unwrap();
        assert_eq!(k.len(), 1);
        let v = &k[0];
        // proportional to (1,-1)/sqrt 2
        let phase = v[0] / v[0].norm();
        let w = v.map(|z| z / phase);
        let s = 0.5f64.sqrt();
        assert!((w[0] - real(s)).norm() < 1e-14);
        assert!((w[1] - real(-s)).norm() < 1e-14);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let row = ComplexMatrix::from_row_slice(1, 3, &[real(1.0), real(2.0), real(0.0)]);
        let k = kernel_basis(&row, &tol()).unwrap();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!((&row * v).norm() < 1e-14);
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let ev = eigenvalues(&diag(&[real(1.0), real(2.0)])).unwrap();
        assert!(spectra_match(&ev, &[real(1.0), real(2.0)], 1e-12));

        let nil = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let ev = eigenvalues(&nil).unwrap();
        assert!(spectra_match(&ev, &[real(0.0), real(0.0)], 1e-12));

        let m = from_real_rows(&[&[0.0, 1.0], &[-2.0, 3.0]]);
        let ev = eigenvalues(&m).unwrap();
        assert!(spectra_match(&ev, &[real(1.0), real(2.0)], 1e-12));
    }

    #[test]
    fn eigenvalues_reject_non_square() {
        assert!(matches!(
            eigenvalues(&ComplexMatrix::zeros(2, 3)),
            Err(AdhmError::Shape(_))
        ));
    }

    #[test]
    fn complex_spectrum() {
        // rotation by 90 degrees: eigenvalues +-i
        let m = from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let ev = eigenvalues(&m).unwrap();
        assert!(spectra_match(&ev, &[c64(0.0, 1.0), c64(0.0, -1.0)], 1e-12));
    }

    #[test]
    fn power_and_inverse() {
        let m = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let p = pow(&m, 5);
        assert!(rel_distance(&p, &from_real_rows(&[&[1.0, 5.0], &[0.0, 1.0]])) < 1e-15);
        let inv = inverse(&m, &tol(), "m").unwrap();
        assert!(rel_distance(&(&m * inv), &identity(2)) < 1e-15);
        assert_eq!(
            inverse(&ComplexMatrix::zeros(2, 2), &tol(), "z"),
            Err(AdhmError::Singular("z"))
        );
    }

    #[test]
    fn complement_is_orthonormal() {
        let v = ComplexVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.8), real(0.0)]);
        let q = orthogonal_complement(&v);
        assert_eq!(q.ncols(), 2);
        assert!((q.adjoint() * &v).norm() < 1e-14);
        assert!(rel_distance(&(q.adjoint() * &q), &identity(2)) < 1e-14);
    }
}
