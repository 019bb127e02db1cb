//! ADHM data `(b1, b2, e)` for the Hilbert scheme of points of the plane.
//!
//! Conditions: `[b1, b2] = 0` (T1) and co-stability (T2): no nonzero subspace
//! of `ker e` is invariant under both `b1` and `b2`. The gauge group `GL(c)`
//! acts by `b_i -> phi b_i phi^-1`, `e -> e phi^-1`.

use crate::error::{AdhmError, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, C64};
use crate::report::{Check, ValidationReport, Verdict};
use crate::sigma::angle_pair;
use crate::tolerance::ToleranceConfig;

pub const CHECK_T1: &str = "T1";
pub const CHECK_T2: &str = "T2";

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneADHM {
    pub c: usize,
    pub b1: ComplexMatrix,
    pub b2: ComplexMatrix,
    /// `1 × c` covector.
    pub e: ComplexMatrix,
}

impl PlaneADHM {
    pub fn new(b1: ComplexMatrix, b2: ComplexMatrix, e: ComplexMatrix) -> Result<Self> {
        let c = linalg::ensure_square(&b1, "b1")?;
        if b2.shape() != (c, c) {
            return Err(AdhmError::Shape(format!("b2 must be {c}x{c}")));
        }
        if e.shape() != (1, c) {
            return Err(AdhmError::Shape(format!("e must be 1x{c}")));
        }
        linalg::ensure_finite(&b1, "b1")?;
        linalg::ensure_finite(&b2, "b2")?;
        linalg::ensure_finite(&e, "e")?;
        Ok(Self { c, b1, b2, e })
    }

    pub fn scalar(b1: C64, b2: C64, e: C64) -> Self {
        Self {
            c: 1,
            b1: linalg::scalar_matrix(b1),
            b2: linalg::scalar_matrix(b2),
            e: linalg::scalar_matrix(e),
        }
    }

    /// Largest relative entrywise deviation from `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        linalg::rel_distance(&self.b1, &other.b1)
            .max(linalg::rel_distance(&self.b2, &other.b2))
            .max(linalg::rel_distance(&self.e, &other.e))
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        Self::new(self.b1.clone(), self.b2.clone(), self.e.clone()).map(|_| ())
    }
}

/// `‖[b1,b2]‖_F / (‖b1‖_F ‖b2‖_F)`; zero when either matrix vanishes.
pub fn commutator_residual(b1: &ComplexMatrix, b2: &ComplexMatrix) -> f64 {
    let scale = linalg::fro_norm(b1) * linalg::fro_norm(b2);
    if scale == 0.0 {
        return 0.0;
    }
    linalg::fro_norm(&linalg::commutator(b1, b2)) / scale
}

/// Dimension of the largest subspace of `ker e` invariant under `b1` and `b2`,
/// computed by the shrinking iteration `V <- {v in V : b1 v, b2 v in V}`.
pub fn max_invariant_in_kernel(d: &PlaneADHM, tol: &ToleranceConfig) -> usize {
    let c = d.c;
    let e_norm = linalg::fro_norm(&d.e);
    let mut basis: ComplexMatrix = if e_norm == 0.0 {
        linalg::identity(c)
    } else {
        columns(&linalg::kernel_abs(&d.e, tol.rank_rel_tol * e_norm), c)
    };
    let normalized: Vec<ComplexMatrix> = [&d.b1, &d.b2]
        .into_iter()
        .filter_map(|b| {
            let n = linalg::fro_norm(b);
            (n > 0.0).then(|| b / C64::new(n, 0.0))
        })
        .collect();
    loop {
        let dim = basis.ncols();
        if dim == 0 || normalized.is_empty() {
            return dim;
        }
        let proj = linalg::identity(c) - &basis * basis.adjoint();
        let mut stacked = ComplexMatrix::zeros(c * normalized.len(), dim);
        for (k, b) in normalized.iter().enumerate() {
            stacked
                .rows_mut(k * c, c)
                .copy_from(&(&proj * b * &basis));
        }
        let kernel = linalg::kernel_abs(&stacked, tol.rank_rel_tol);
        if kernel.len() == dim {
            return dim;
        }
        basis = &basis * columns(&kernel, dim);
    }
}

fn columns(vs: &[ComplexVector], rows: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, vs.len());
    for (j, v) in vs.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

pub fn validate_plane(d: &PlaneADHM, tol: &ToleranceConfig) -> Result<ValidationReport> {
    d.check_shapes()?;
    let mut report = ValidationReport::default();
    let r1 = commutator_residual(&d.b1, &d.b2);
    let t1 = r1 <= tol.eq_rel_tol;
    report.push(Check::new(CHECK_T1, Verdict::from_bool(t1)).with_residual(r1));
    if !t1 {
        report.push(
            Check::new(CHECK_T2, Verdict::Indeterminate)
                .with_detail("not evaluated: b1 and b2 do not commute"),
        );
        return Ok(report);
    }
    let dim = max_invariant_in_kernel(d, tol);
    let check = Check::new(CHECK_T2, Verdict::from_bool(dim == 0));
    report.push(if dim == 0 {
        check
    } else {
        check.with_detail(format!("invariant subspace of dimension {dim} inside ker e"))
    });
    Ok(report)
}

fn require_valid(d: &PlaneADHM, tol: &ToleranceConfig) -> Result<()> {
    let report = validate_plane(d, tol)?;
    if report.passed() {
        Ok(())
    } else {
        Err(AdhmError::Invalid(format!(
            "plane ADHM data fails validation: {:?}",
            report
                .checks
                .iter()
                .filter(|c| c.verdict != Verdict::Pass)
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>()
        )))
    }
}

/// `(phi b1 phi^-1, phi b2 phi^-1, e phi^-1)`.
pub fn act_gl(d: &PlaneADHM, phi: &ComplexMatrix, tol: &ToleranceConfig) -> Result<PlaneADHM> {
    if phi.shape() != (d.c, d.c) {
        return Err(AdhmError::Shape(format!("gauge must be {0}x{0}", d.c)));
    }
    let inv = linalg::inverse(phi, tol, "gauge matrix")?;
    Ok(PlaneADHM {
        c: d.c,
        b1: phi * &d.b1 * &inv,
        b2: phi * &d.b2 * &inv,
        e: &d.e * &inv,
    })
}

/// Diagonal data supported at `c` distinct points of the plane.
pub fn from_points(points: &[(C64, C64)], tol: &ToleranceConfig) -> Result<PlaneADHM> {
    if points.is_empty() {
        return Err(AdhmError::Domain("need at least one point".into()));
    }
    let scale = points
        .iter()
        .map(|(z, w)| z.norm().max(w.norm()))
        .fold(1.0, f64::max);
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            if (p.0 - q.0).norm().max((p.1 - q.1).norm()) <= tol.eq_rel_tol * scale {
                return Err(AdhmError::Domain(format!(
                    "duplicate point ({}, {}): non-reduced subschemes are not constructible here",
                    p.0, p.1
                )));
            }
        }
    }
    let zs: Vec<C64> = points.iter().map(|p| p.0).collect();
    let ws: Vec<C64> = points.iter().map(|p| p.1).collect();
    PlaneADHM::new(
        linalg::diag(&zs),
        linalg::diag(&ws),
        ComplexMatrix::from_element(1, points.len(), C64::new(1.0, 0.0)),
    )
}

/// Joint eigenvalue pairs `(beta, eps)` of the commuting pair `(b1, b2)`.
///
/// Works by deflation: find an eigenvalue of `b1`, restrict `b2` to that
/// eigenspace to get a common eigenvector, record its Rayleigh quotients, and
/// pass to the induced maps on the orthogonal complement.
pub fn joint_spectrum(d: &PlaneADHM, tol: &ToleranceConfig) -> Result<Vec<(C64, C64)>> {
    d.check_shapes()?;
    let r1 = commutator_residual(&d.b1, &d.b2);
    if r1 > tol.eq_rel_tol {
        return Err(AdhmError::Invalid(format!(
            "joint spectrum needs commuting matrices, [b1,b2] residual {r1:.3e}"
        )));
    }
    commuting_pair_spectrum(&d.b1, &d.b2, tol)
}

pub(crate) fn commuting_pair_spectrum(
    b1: &ComplexMatrix,
    b2: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<Vec<(C64, C64)>> {
    let mut x = b1.clone();
    let mut y = b2.clone();
    let mut out = Vec::with_capacity(b1.nrows());
    while x.nrows() > 0 {
        let k = x.nrows();
        if k == 1 {
            out.push((x[(0, 0)], y[(0, 0)]));
            break;
        }
        let beta = linalg::eigenvalues(&x)?[0];
        let shifted = &x - linalg::identity(k) * beta;
        let threshold = tol.rank_rel_tol * linalg::fro_norm(&x).max(f64::MIN_POSITIVE);
        let mut eig_space = linalg::kernel_abs(&shifted, threshold);
        if eig_space.is_empty() {
            eig_space.push(linalg::smallest_singular_pair(&shifted).1);
        }
        let basis = columns(&eig_space, k);
        let restricted = basis.adjoint() * &y * &basis;
        let v = if restricted.nrows() == 1 {
            basis.column(0).into_owned()
        } else {
            let eps = linalg::eigenvalues(&restricted)?[0];
            let r = restricted.nrows();
            let (_, u) = linalg::smallest_singular_pair(&(restricted - linalg::identity(r) * eps));
            &basis * u
        };
        let v = &v / C64::new(v.norm(), 0.0);
        let beta = v.dotc(&(&x * &v));
        let eps = v.dotc(&(&y * &v));
        out.push((beta, eps));
        let q = linalg::orthogonal_complement(&v);
        x = q.adjoint() * &x * &q;
        y = q.adjoint() * &y * &q;
    }
    Ok(out)
}

/// Multiset comparison of joint spectra under a relative tolerance.
pub fn pair_spectra_match(a: &[(C64, C64)], b: &[(C64, C64)], rel: f64) -> bool {
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|(x, y)| x.norm().max(y.norm()))
        .fold(1.0, f64::max);
    linalg::greedy_match(a, b, |p, q| (p.0 - q.0).norm().max((p.1 - q.1).norm()))
        .is_some_and(|dist| dist <= rel * scale)
}

/// The transition map from chart `m` to chart `l`:
/// `b1 -> (c - s b1)^-1 (s + c b1)`, `b2 -> (c - s b1)^n b2`, `e -> e`
/// with `(c, s)` the angle of `m - l`.
pub fn transition_plane(
    d: &PlaneADHM,
    m: i64,
    l: i64,
    n: usize,
    c_base: usize,
    tol: &ToleranceConfig,
) -> Result<PlaneADHM> {
    d.check_shapes()?;
    let ang = angle_pair(c_base, m - l)?;
    if m == l {
        return Ok(d.clone());
    }
    let (c, s) = (C64::new(ang.cos_val, 0.0), C64::new(ang.sin_val, 0.0));
    let id = linalg::identity(d.c);
    let factor = &id * c - &d.b1 * s;
    if linalg::inverse_condition(&factor) <= tol.rank_rel_tol {
        return Err(AdhmError::Domain(format!(
            "det(c_{{m-l}} 1 - s_{{m-l}} b1) vanishes for m={m}, l={l}: point is outside the overlap"
        )));
    }
    let lu = factor.clone().lu();
    let b1 = lu
        .solve(&(&id * s + &d.b1 * c))
        .ok_or(AdhmError::Singular("c_{m-l} 1 - s_{m-l} b1"))?;
    let b2 = linalg::pow(&factor, n) * &d.b2;
    Ok(PlaneADHM {
        c: d.c,
        b1,
        b2,
        e: d.e.clone(),
    })
}

/// Canonical representative of the `GL(c)` orbit, together with the gauge
/// `S` such that `act_gl(d, S)` is that representative.
///
/// The rows of `S` are the covectors `e b1^i b2^j` chosen greedily in graded
/// order (within a degree, higher powers of `b1` first); in the new basis
/// they become the standard dual basis, so `e -> (1, 0, ..., 0)`.
pub fn canonical_form(d: &PlaneADHM, tol: &ToleranceConfig) -> Result<(PlaneADHM, ComplexMatrix)> {
    require_valid(d, tol)?;
    let s = canonical_gauge(d, tol)?;
    let s_inv = linalg::inverse(&s, tol, "canonical gauge")?;
    let mut e = ComplexMatrix::zeros(1, d.c);
    e[(0, 0)] = C64::new(1.0, 0.0);
    let canon = PlaneADHM {
        c: d.c,
        b1: &s * &d.b1 * &s_inv,
        b2: &s * &d.b2 * &s_inv,
        e,
    };
    Ok((canon, s))
}

fn canonical_gauge(d: &PlaneADHM, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let c = d.c;
    let sel = tol.selection_tol();
    // e b1^i, i = 0..c-1
    let mut b1_pows: Vec<ComplexMatrix> = Vec::with_capacity(c);
    b1_pows.push(d.e.clone());
    for i in 1..c {
        let next = &b1_pows[i - 1] * &d.b1;
        b1_pows.push(next);
    }
    let mut chosen: Vec<ComplexMatrix> = Vec::with_capacity(c);
    let mut ortho: Vec<ComplexMatrix> = Vec::with_capacity(c);
    'degrees: for deg in 0..c {
        for i in (0..=deg).rev() {
            let j = deg - i;
            let cand = &b1_pows[i] * linalg::pow(&d.b2, j);
            let norm = linalg::fro_norm(&cand);
            if norm == 0.0 {
                continue;
            }
            let mut resid = cand.clone();
            for q in &ortho {
                let coeff = (q.conjugate() * resid.transpose())[(0, 0)];
                resid -= q * coeff;
            }
            // second pass for numerical orthogonality
            for q in &ortho {
                let coeff = (q.conjugate() * resid.transpose())[(0, 0)];
                resid -= q * coeff;
            }
            let rn = linalg::fro_norm(&resid);
            if rn > sel * norm {
                ortho.push(resid / C64::new(rn, 0.0));
                chosen.push(cand);
                if chosen.len() == c {
                    break 'degrees;
                }
            }
        }
    }
    if chosen.len() < c {
        return Err(AdhmError::Invalid(
            "covectors e b1^i b2^j do not span the dual space".into(),
        ));
    }
    let mut s = ComplexMatrix::zeros(c, c);
    for (k, row) in chosen.iter().enumerate() {
        s.set_row(k, &row.row(0));
    }
    Ok(s)
}

/// Equality of orbits, decided on canonical forms.
pub fn orbit_equal_plane(d1: &PlaneADHM, d2: &PlaneADHM, tol: &ToleranceConfig) -> Result<bool> {
    if d1.c != d2.c {
        return Err(AdhmError::Shape(format!(
            "cannot compare c={} with c={}",
            d1.c, d2.c
        )));
    }
    let (k1, _) = canonical_form(d1, tol)?;
    let (k2, _) = canonical_form(d2, tol)?;
    Ok(k1.distance(&k2) <= tol.eq_rel_tol)
}
