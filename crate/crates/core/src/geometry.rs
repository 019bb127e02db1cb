//! Determinant pencils, the Hilbert–Chow support map, and the `c = 1`
//! identification with `Tot(O(-n))`.

use crate::error::{AdhmError, Result};
use crate::forms::{self, BinaryForm, ProjPoint};
use crate::hirz::{self, HirzADHM};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::plane;
use crate::report::Verdict;
use crate::sigma::{angle_pair, sigma_matrix};
use crate::tolerance::ToleranceConfig;

/// Relative accuracy of the scalar relations defining `TotPoint` and `YTildePoint`.
pub const RELATION_TOL: f64 = 1e-12;

/// `det(nu1 A1 + nu2 A2)` in the basis `nu1^(c-p) nu2^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilForm {
    pub form: BinaryForm,
    /// Set when every coefficient vanishes at `eq_rel_tol` relative to
    /// `|A1|^c + |A2|^c`.
    pub is_zero: bool,
}

pub fn pencil_form(a1: &ComplexMatrix, a2: &ComplexMatrix, tol: &ToleranceConfig) -> Result<PencilForm> {
    let form = forms::pencil_determinant(a1, a2)?;
    let c = form.degree() as i32;
    let scale = linalg::fro_norm(a1).max(linalg::fro_norm(a2)).powi(c);
    let is_zero = form.max_coeff() <= tol.eq_rel_tol * scale;
    Ok(PencilForm { form, is_zero })
}

/// `g_c(A1, A2)`: the pencil form divided by its largest-modulus coefficient.
pub fn g_c(a1: &ComplexMatrix, a2: &ComplexMatrix, tol: &ToleranceConfig) -> Result<BinaryForm> {
    let p = pencil_form(a1, a2, tol)?;
    if p.is_zero {
        return Err(AdhmError::ZeroForm);
    }
    p.form.normalized()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportMultiset {
    /// Roots of `det(lam2 A1 + lam1 A2)`, with repetition.
    pub base: Vec<ProjPoint>,
    /// Chart index and joint spectrum of `(B_m, E_m)`.
    pub chart_pairs: Option<(usize, Vec<(C64, C64)>)>,
}

fn require_valid(d: &HirzADHM, tol: &ToleranceConfig) -> Result<Vec<usize>> {
    let v = hirz::validate(d, tol)?;
    match v.verdict() {
        Verdict::Pass => Ok(v.charts),
        _ => Err(AdhmError::Invalid("data fails (P1)-(P3)".into())),
    }
}

fn base_roots(d: &HirzADHM, tol: &ToleranceConfig) -> Result<Vec<ProjPoint>> {
    let form = forms::pencil_determinant(&d.a1, &d.a2)?.swapped();
    forms::binary_form_roots(&form, tol)
}

/// Base of the Hilbert–Chow image: the `c` roots of `det(lam2 A1 + lam1 A2)`.
pub fn base_support(d: &HirzADHM, tol: &ToleranceConfig) -> Result<SupportMultiset> {
    require_valid(d, tol)?;
    Ok(SupportMultiset {
        base: base_roots(d, tol)?,
        chart_pairs: None,
    })
}

/// Chart-`m` fibre coordinate of a base root:
/// `z = -(c_m lam1 + s_m lam2) / (-s_m lam1 + c_m lam2)`.
pub fn chart_coordinate(root: &ProjPoint, m: usize, c_base: usize) -> Result<C64> {
    let a = angle_pair(c_base, m as i64)?;
    let num = -(root.lam1 * a.cos_val + root.lam2 * a.sin_val);
    let den = -root.lam1 * a.sin_val + root.lam2 * a.cos_val;
    if den.norm() == 0.0 {
        return Err(AdhmError::Domain(format!("root lies on the excluded fibre of chart {m}")));
    }
    Ok(num / den)
}

/// Inverse of [`chart_coordinate`]: `[c_m z + s_m : s_m z - c_m]`.
pub fn base_point_of(z: C64, m: usize, c_base: usize) -> Result<ProjPoint> {
    let a = angle_pair(c_base, m as i64)?;
    ProjPoint::new(z * a.cos_val + a.sin_val, z * a.sin_val - a.cos_val)
}

fn require_chart(charts: &[usize], m: usize) -> Result<()> {
    if charts.contains(&m) {
        Ok(())
    } else {
        Err(AdhmError::Domain(format!("m={m} is not in the chart set {charts:?}")))
    }
}

/// Whether the base roots, read in chart `m`, are the eigenvalues of `B_m`.
pub fn spectrum_vs_pencil_check(d: &HirzADHM, m: usize, tol: &ToleranceConfig) -> Result<bool> {
    let charts = hirz::chart_set(d, tol)?;
    require_chart(&charts, m)?;
    let cc = hirz::to_chart(d, m, tol)?;
    let from_roots: Vec<C64> = base_roots(d, tol)?
        .iter()
        .map(|r| chart_coordinate(r, m, d.c))
        .collect::<Result<_>>()?;
    let spectrum = linalg::eigenvalues(&cc.bm)?;
    Ok(linalg::spectra_match(&from_roots, &spectrum, tol.root_cluster_tol))
}

/// Full support on chart `m`: the joint spectrum of `(B_m, E_m)` together
/// with the base points it lies over.
pub fn chart_support(d: &HirzADHM, m: usize, tol: &ToleranceConfig) -> Result<SupportMultiset> {
    let charts = require_valid(d, tol)?;
    require_chart(&charts, m)?;
    let cc = hirz::to_chart(d, m, tol)?;
    let pairs = plane::joint_spectrum(&cc.plane(), tol)?;
    let base = pairs
        .iter()
        .map(|(z, _)| base_point_of(*z, m, d.c))
        .collect::<Result<_>>()?;
    Ok(SupportMultiset {
        base,
        chart_pairs: Some((m, pairs)),
    })
}

/// Membership of `x ∈ P^c` in the open set `U_m = {sum_p sigma^c_{m;p,0} x_p != 0}`.
pub fn um_membership(x: &[C64], m: usize, c_base: usize, tol: &ToleranceConfig) -> Result<bool> {
    if x.len() != c_base + 1 {
        return Err(AdhmError::Shape(format!(
            "expected {} homogeneous coordinates, found {}",
            c_base + 1,
            x.len()
        )));
    }
    let scale = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(AdhmError::Domain("zero vector is not a point of P^c".into()));
    }
    if !scale.is_finite() {
        return Err(AdhmError::NonFinite("x"));
    }
    let sigma = sigma_matrix(c_base, m as i64, c_base)?;
    let value: C64 = x.iter().enumerate().map(|(p, v)| v * sigma.get(p, 0)).sum();
    Ok(value.norm() > tol.rank_rel_tol * scale)
}

/// Point of `Tot(O(-n))` as `(y1, y2, u1, u2)` with `u1 y1^n = u2 y2^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotPoint {
    pub y1: C64,
    pub y2: C64,
    pub u1: C64,
    pub u2: C64,
}

/// Point of the variety `x1 y1^(n-1) = x2 y2^(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YTildePoint {
    pub y1: C64,
    pub y2: C64,
    pub x1: C64,
    pub x2: C64,
}

fn relation_residual(lhs: C64, rhs: C64) -> f64 {
    let scale = lhs.norm().max(rhs.norm());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / scale
    }
}

fn check_base(y1: C64, y2: C64) -> Result<()> {
    if !(y1.is_finite() && y2.is_finite()) {
        return Err(AdhmError::NonFinite("y"));
    }
    if y1 == C64::new(0.0, 0.0) && y2 == C64::new(0.0, 0.0) {
        return Err(AdhmError::Domain("(y1, y2) = (0, 0)".into()));
    }
    Ok(())
}

impl TotPoint {
    pub fn relation_residual(&self, n: usize) -> f64 {
        relation_residual(self.u1 * self.y1.powu(n as u32), self.u2 * self.y2.powu(n as u32))
    }

    pub fn check(&self, n: usize) -> Result<()> {
        check_base(self.y1, self.y2)?;
        let r = self.relation_residual(n);
        if r > RELATION_TOL {
            return Err(AdhmError::Invalid(format!("u1 y1^n != u2 y2^n (residual {r:.3e})")));
        }
        Ok(())
    }

    /// Same point up to `(y1, y2) -> lambda (y1, y2)`.
    pub fn same_class(&self, other: &TotPoint, rel: f64) -> bool {
        let close = |a: C64, b: C64| (a - b).norm() <= rel * a.norm().max(b.norm()).max(1.0);
        let cross = (self.y1 * other.y2 - self.y2 * other.y1).norm();
        let ys = (self.y1.norm().max(self.y2.norm())) * (other.y1.norm().max(other.y2.norm()));
        cross <= rel * ys && close(self.u1, other.u1) && close(self.u2, other.u2)
    }
}

impl YTildePoint {
    pub fn relation_residual(&self, n: usize) -> f64 {
        let k = (n - 1) as u32;
        relation_residual(self.x1 * self.y1.powu(k), self.x2 * self.y2.powu(k))
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(AdhmError::Domain("n must be at least 1".into()));
        }
        check_base(self.y1, self.y2)?;
        let r = self.relation_residual(n);
        if r > RELATION_TOL {
            return Err(AdhmError::Invalid(format!(
                "x1 y1^(n-1) != x2 y2^(n-1) (residual {r:.3e})"
            )));
        }
        Ok(())
    }
}

/// `c = 1` data from a point of the variety, using the chart of the larger `|y_i|`.
pub fn ytilde_to_p1(p: &YTildePoint, n: usize) -> Result<HirzADHM> {
    let branch = if p.y1.norm() >= p.y2.norm() { 1 } else { 2 };
    ytilde_to_p1_via(p, n, branch)
}

/// `c = 1` data from a point of the variety on chart `branch` (`y_branch != 0`):
/// `C_q = (y2/y1)^(n-q) x2` for branch 1, `C_q = (y1/y2)^(q-1) x1` for branch 2.
pub fn ytilde_to_p1_via(p: &YTildePoint, n: usize, branch: u8) -> Result<HirzADHM> {
    p.check(n)?;
    let cs: Vec<C64> = match branch {
        1 if p.y1.norm() > 0.0 => {
            let r = p.y2 / p.y1;
            (1..=n).map(|q| r.powu((n - q) as u32) * p.x2).collect()
        }
        2 if p.y2.norm() > 0.0 => {
            let r = p.y1 / p.y2;
            (1..=n).map(|q| r.powu((q - 1) as u32) * p.x1).collect()
        }
        1 | 2 => {
            return Err(AdhmError::Domain(format!("y{branch} = 0: point is off chart {branch}")))
        }
        _ => return Err(AdhmError::Domain(format!("no chart {branch}; expected 1 or 2"))),
    };
    HirzADHM::new(
        linalg::scalar_matrix(p.y1),
        linalg::scalar_matrix(p.y2),
        cs.into_iter().map(linalg::scalar_matrix).collect(),
        linalg::scalar_matrix(C64::new(1.0, 0.0)),
    )
}

/// `c = 1` data to `Tot(O(-n))`: after gauging `e` to 1,
/// `y = (A1, A2)`, `u = (C1 A2, Cn A1)`.
pub fn p1_to_tot(d: &HirzADHM, tol: &ToleranceConfig) -> Result<TotPoint> {
    if d.c != 1 {
        return Err(AdhmError::Domain(format!("expected c = 1, found c = {}", d.c)));
    }
    require_valid(d, tol)?;
    let e = d.e[(0, 0)];
    Ok(TotPoint {
        y1: d.a1[(0, 0)] / e,
        y2: d.a2[(0, 0)] / e,
        u1: d.cs[0][(0, 0)] * d.a2[(0, 0)],
        u2: d.cs[d.n - 1][(0, 0)] * d.a1[(0, 0)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, diag, identity, real, scalar_matrix as sm};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn pp(a: f64, b: f64) -> ProjPoint {
        ProjPoint::new(real(a), real(b)).unwrap()
    }

    #[test]
    fn pencil_scalar_and_diagonal() {
        let f = pencil_form(&sm(real(2.0)), &sm(real(-5.0)), &tol()).unwrap();
        assert!((f.form.coeffs[0] - real(2.0)).norm() < 1e-15);
        assert!((f.form.coeffs[1] - real(-5.0)).norm() < 1e-15);
        assert!(!f.is_zero);
        let f = pencil_form(&diag(&[real(1.0), real(2.0)]), &identity(2), &tol()).unwrap();
        for (a, b) in f.form.coeffs.iter().zip([2.0, 3.0, 1.0]) {
            assert!((a - real(b)).norm() < 1e-14);
        }
        let z = ComplexMatrix::zeros(2, 2);
        assert!(pencil_form(&z, &z, &tol()).unwrap().is_zero);
        assert!(matches!(g_c(&z, &z, &tol()), Err(AdhmError::ZeroForm)));
    }

    #[test]
    fn g_c_normalized() {
        let g = g_c(&diag(&[real(1.0), real(2.0)]), &identity(2), &tol()).unwrap();
        assert!((g.coeffs[0] - real(2.0 / 3.0)).norm() < 1e-14);
        assert!((g.coeffs[1] - real(1.0)).norm() < 1e-14);
    }

    fn diagonal_point(n: usize) -> HirzADHM {
        let p = plane::from_points(&[(real(1.0), real(3.0)), (real(2.0), real(4.0))], &tol()).unwrap();
        hirz::from_chart(0, &p, &identity(2), n, &tol()).unwrap()
    }

    #[test]
    fn base_support_diagonal() {
        let s = base_support(&diagonal_point(1), &tol()).unwrap();
        let expected = [pp(-1.0, 1.0), pp(-2.0, 1.0)];
        assert!(forms::proj_multiset_distance(&s.base, &expected).unwrap() < 1e-12);
    }

    #[test]
    fn base_support_scalar() {
        let d = HirzADHM::new(sm(real(3.0)), sm(real(2.0)), vec![sm(real(1.0))], sm(real(1.0))).unwrap();
        let s = base_support(&d, &tol()).unwrap();
        assert!(s.base[0].distance(&pp(-1.5, 1.0)) < 1e-15);
    }

    #[test]
    fn spectrum_matches_pencil_on_all_charts() {
        let d = diagonal_point(2);
        for m in hirz::chart_set(&d, &tol()).unwrap() {
            assert!(spectrum_vs_pencil_check(&d, m, &tol()).unwrap());
        }
        assert!(spectrum_vs_pencil_check(&d, 7, &tol()).is_err());
    }

    #[test]
    fn chart_support_recovers_points() {
        let d = diagonal_point(3);
        let s = chart_support(&d, 0, &tol()).unwrap();
        let (m, pairs) = s.chart_pairs.unwrap();
        assert_eq!(m, 0);
        assert!(plane::pair_spectra_match(
            &pairs,
            &[(real(1.0), real(3.0)), (real(2.0), real(4.0))],
            1e-12
        ));
        let base = base_support(&d, &tol()).unwrap().base;
        assert!(forms::proj_multiset_distance(&s.base, &base).unwrap() < 1e-12);
    }

    #[test]
    fn chart_coordinate_round_trip() {
        for m in 0..=3 {
            let z = c64(0.3, -1.2);
            let p = base_point_of(z, m, 3).unwrap();
            assert!((chart_coordinate(&p, m, 3).unwrap() - z).norm() < 1e-14);
        }
    }

    #[test]
    fn um_examples() {
        let x = [real(1.0), real(0.0), real(0.0)];
        assert!(um_membership(&x, 0, 2, &tol()).unwrap());
        let y = [real(0.0), real(1.0), real(0.0)];
        assert!(!um_membership(&y, 0, 2, &tol()).unwrap());
        assert!(um_membership(&y, 1, 2, &tol()).unwrap());
        assert!(um_membership(&[real(0.0); 3], 0, 2, &tol()).is_err());
    }

    #[test]
    fn ytilde_examples() {
        let p = YTildePoint {
            y1: real(1.0),
            y2: real(2.0),
            x1: real(2.0),
            x2: real(1.0),
        };
        let d = ytilde_to_p1(&p, 2).unwrap();
        assert_eq!(d.cs[0][(0, 0)], real(2.0));
        assert_eq!(d.cs[1][(0, 0)], real(1.0));
        assert_eq!(hirz::validate(&d, &tol()).unwrap().verdict(), Verdict::Pass);
        let t = p1_to_tot(&d, &tol()).unwrap();
        assert_eq!((t.y1, t.y2, t.u1, t.u2), (real(1.0), real(2.0), real(4.0), real(1.0)));
        assert!(t.check(2).is_ok());

        let bad = YTildePoint { x2: real(3.0), ..p };
        assert!(ytilde_to_p1(&bad, 2).is_err());
    }

    #[test]
    fn ytilde_branches_agree_for_n1() {
        let p = YTildePoint {
            y1: real(2.0),
            y2: real(2.0),
            x1: real(5.0),
            x2: real(5.0),
        };
        let a = ytilde_to_p1(&p, 1).unwrap();
        let q = YTildePoint { y1: real(1.9), ..p };
        let b = ytilde_to_p1(&q, 1).unwrap();
        assert_eq!(a.cs[0][(0, 0)], real(5.0));
        assert_eq!(b.cs[0][(0, 0)], real(5.0));
    }

    #[test]
    fn tot_requires_c1() {
        assert!(matches!(p1_to_tot(&diagonal_point(1), &tol()), Err(AdhmError::Domain(_))));
    }

    #[test]
    fn tot_orbit_invariance() {
        let p = YTildePoint {
            y1: c64(1.0, 1.0),
            y2: real(0.5),
            x1: real(2.0),
            x2: c64(1.0, 1.0) * c64(1.0, 1.0) * 2.0 / 0.25,
        };
        let d = ytilde_to_p1(&p, 3).unwrap();
        let g = hirz::act_gl2(&d, &sm(c64(0.2, 3.0)), &sm(real(-4.0)), &tol()).unwrap();
        let (t1, t2) = (p1_to_tot(&d, &tol()).unwrap(), p1_to_tot(&g, &tol()).unwrap());
        assert!(t1.same_class(&t2, 1e-12));
        assert!(t2.relation_residual(3) < 1e-12);
    }
}
