//! ADHM data `(A1, A2; C_1..C_n; e)` for the Hilbert scheme of `c` points on
//! the total space of `O(-n)`, and the chart atlas on it.
//!
//! Chart `m` (for `m = 0..c`) is the open set where
//! `A_{2m} = s_m A1 + c_m A2` is invertible. On it the data are equivalent to
//! plane ADHM data `(B_m, E_m, e)` together with `A_{2m}`:
//!
//! ```text
//! A_{1m} = c_m A1 - s_m A2
//! B_m    = A_{2m}^-1 A_{1m}
//! D_m    = sum_q binom(n-1, q-1) c_m^(n-q) s_m^(q-1) C_q
//! E_m    = D_m A_{2m}
//! ```

use crate::error::{AdhmError, Result};
use crate::forms::{self, ProjPoint};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::plane::{self, PlaneADHM};
use crate::report::{Check, ValidationReport, Verdict};
use crate::sigma::{angle_pair, binomial, sigma_matrix, AnglePair};
use crate::tolerance::ToleranceConfig;

pub const CHECK_P1: &str = "P1";
pub const CHECK_P2: &str = "P2";
pub const CHECK_P3: &str = "P3";
pub const CHECK_P3_DIRECT: &str = "P3-direct";

#[derive(Debug, Clone, PartialEq)]
pub struct HirzADHM {
    pub n: usize,
    pub c: usize,
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    /// `C_1, ..., C_n`.
    pub cs: Vec<ComplexMatrix>,
    /// `1 × c` covector.
    pub e: ComplexMatrix,
}

impl HirzADHM {
    pub fn new(
        a1: ComplexMatrix,
        a2: ComplexMatrix,
        cs: Vec<ComplexMatrix>,
        e: ComplexMatrix,
    ) -> Result<Self> {
        let c = linalg::ensure_square(&a1, "A1")?;
        let n = cs.len();
        if n == 0 {
            return Err(AdhmError::Shape("need at least one C matrix (n >= 1)".into()));
        }
        if a2.shape() != (c, c) {
            return Err(AdhmError::Shape(format!("A2 must be {c}x{c}")));
        }
        for (q, m) in cs.iter().enumerate() {
            if m.shape() != (c, c) {
                return Err(AdhmError::Shape(format!("C_{} must be {c}x{c}", q + 1)));
            }
            linalg::ensure_finite(m, "C")?;
        }
        if e.shape() != (1, c) {
            return Err(AdhmError::Shape(format!("e must be 1x{c}")));
        }
        linalg::ensure_finite(&a1, "A1")?;
        linalg::ensure_finite(&a2, "A2")?;
        linalg::ensure_finite(&e, "e")?;
        Ok(Self { n, c, a1, a2, cs, e })
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        if self.cs.len() != self.n {
            return Err(AdhmError::Shape(format!(
                "expected {} C matrices, found {}",
                self.n,
                self.cs.len()
            )));
        }
        Self::new(self.a1.clone(), self.a2.clone(), self.cs.clone(), self.e.clone()).map(|_| ())
    }

    /// Largest relative entrywise deviation from `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.n != other.n || self.c != other.c {
            return f64::INFINITY;
        }
        self.cs
            .iter()
            .zip(&other.cs)
            .map(|(x, y)| linalg::rel_distance(x, y))
            .fold(
                linalg::rel_distance(&self.a1, &other.a1)
                    .max(linalg::rel_distance(&self.a2, &other.a2))
                    .max(linalg::rel_distance(&self.e, &other.e)),
                f64::max,
            )
    }

    fn angle(&self, m: i64) -> Result<AnglePair> {
        angle_pair(self.c, m)
    }

    /// `(A_{1m}, A_{2m})`.
    pub fn rotated_pair(&self, m: i64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let a = self.angle(m)?;
        let (c, s) = (C64::new(a.cos_val, 0.0), C64::new(a.sin_val, 0.0));
        Ok((&self.a1 * c - &self.a2 * s, &self.a1 * s + &self.a2 * c))
    }
}

/// Chart coordinates `(B_m, E_m, e; A_{2m})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartCoords {
    pub m: usize,
    pub n: usize,
    pub c: usize,
    pub bm: ComplexMatrix,
    pub em: ComplexMatrix,
    pub e: ComplexMatrix,
    pub a2m: ComplexMatrix,
}

impl ChartCoords {
    pub fn plane(&self) -> PlaneADHM {
        PlaneADHM {
            c: self.c,
            b1: self.bm.clone(),
            b2: self.em.clone(),
            e: self.e.clone(),
        }
    }

    /// `D_m = E_m A_{2m}^-1`.
    pub fn d_matrix(&self, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
        Ok(&self.em * linalg::inverse(&self.a2m, tol, "A_2m")?)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        if (self.m, self.n, self.c) != (other.m, other.n, other.c) {
            return f64::INFINITY;
        }
        linalg::rel_distance(&self.bm, &other.bm)
            .max(linalg::rel_distance(&self.em, &other.em))
            .max(linalg::rel_distance(&self.e, &other.e))
            .max(linalg::rel_distance(&self.a2m, &other.a2m))
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        if self.m > self.c {
            return Err(AdhmError::Domain(format!(
                "chart index {} outside 0..={}",
                self.m, self.c
            )));
        }
        if self.n == 0 {
            return Err(AdhmError::Shape("n must be at least 1".into()));
        }
        self.plane().check_shapes()?;
        if self.a2m.shape() != (self.c, self.c) {
            return Err(AdhmError::Shape(format!("A2m must be {0}x{0}", self.c)));
        }
        linalg::ensure_finite(&self.a2m, "A2m")
    }
}

fn rel_residual(residual: &ComplexMatrix, scale: f64) -> f64 {
    let r = linalg::fro_norm(residual);
    if r == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        r / scale
    }
}

/// Condition (P1), one check per equation.
pub fn validate_p1(d: &HirzADHM, tol: &ToleranceConfig) -> Result<ValidationReport> {
    d.check_shapes()?;
    let mut report = ValidationReport::default();
    let norm = linalg::fro_norm;
    let push = |report: &mut ValidationReport, name: String, r: f64| {
        report.push(Check::new(name, Verdict::from_bool(r <= tol.eq_rel_tol)).with_residual(r));
    };
    if d.n == 1 {
        let c1 = &d.cs[0];
        let res = &d.a1 * c1 * &d.a2 - &d.a2 * c1 * &d.a1;
        let r = rel_residual(&res, norm(&d.a1) * norm(c1) * norm(&d.a2));
        push(&mut report, format!("{CHECK_P1}: A1 C1 A2 = A2 C1 A1"), r);
        return Ok(report);
    }
    for q in 0..d.n - 1 {
        let (cq, cn) = (&d.cs[q], &d.cs[q + 1]);
        let left = &d.a1 * cq - &d.a2 * cn;
        let right = cq * &d.a1 - cn * &d.a2;
        let scale = (norm(&d.a1) * norm(cq)).max(norm(&d.a2) * norm(cn));
        push(
            &mut report,
            format!("{CHECK_P1}: A1 C{0} = A2 C{1}", q + 1, q + 2),
            rel_residual(&left, scale),
        );
        push(
            &mut report,
            format!("{CHECK_P1}: C{0} A1 = C{1} A2", q + 1, q + 2),
            rel_residual(&right, scale),
        );
    }
    Ok(report)
}

/// Result of the (P2) check: the verdict, the chart set and the conditioning
/// `sigma_min(A_{2m}) / max(|A1|, |A2|)` of every chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSetReport {
    pub verdict: Verdict,
    pub charts: Vec<usize>,
    pub conditioning: Vec<f64>,
}

/// Below this conditioning a chart matrix is certainly singular.
const SINGULAR_FLOOR: f64 = 256.0 * f64::EPSILON;

fn chart_conditioning(d: &HirzADHM, m: usize) -> Result<f64> {
    let (_, a2m) = d.rotated_pair(m as i64)?;
    let scale = linalg::singular_values(&d.a1)[0].max(linalg::singular_values(&d.a2)[0]);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let s = linalg::singular_values(&a2m);
    Ok(s[s.len() - 1] / scale)
}

/// Condition (P2). The pencil determinant is a binary form of degree `c`, so
/// it vanishes identically iff it vanishes at the `c + 1` distinct points
/// `[s_m : c_m]`; checking the charts is therefore exact.
pub fn validate_p2(d: &HirzADHM, tol: &ToleranceConfig) -> Result<ChartSetReport> {
    d.check_shapes()?;
    let conditioning: Vec<f64> = (0..=d.c)
        .map(|m| chart_conditioning(d, m))
        .collect::<Result<_>>()?;
    let charts: Vec<usize> = conditioning
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > tol.rank_rel_tol)
        .map(|(m, _)| m)
        .collect();
    let verdict = if !charts.is_empty() {
        Verdict::Pass
    } else if conditioning.iter().all(|&r| r <= SINGULAR_FLOOR) {
        Verdict::Fail
    } else {
        Verdict::Indeterminate
    };
    Ok(ChartSetReport {
        verdict,
        charts,
        conditioning,
    })
}

/// `{m : det A_{2m} != 0}`.
pub fn chart_set(d: &HirzADHM, tol: &ToleranceConfig) -> Result<Vec<usize>> {
    Ok(validate_p2(d, tol)?.charts)
}

/// Condition (P3), decided on the smallest chart: it holds iff the chart data
/// `(B_m, E_m, e)` are co-stable.
pub fn validate_p3(d: &HirzADHM, tol: &ToleranceConfig) -> Result<ValidationReport> {
    let charts = chart_set(d, tol)?;
    let m = *charts
        .first()
        .ok_or_else(|| AdhmError::Domain("empty chart set: (P2) fails".into()))?;
    let cc = to_chart(d, m, tol)?;
    let dim = plane::max_invariant_in_kernel(&cc.plane(), tol);
    let mut report = ValidationReport::default();
    let check = Check::new(CHECK_P3, Verdict::from_bool(dim == 0)).with_detail(format!("chart {m}"));
    report.push(check);
    Ok(report)
}

/// Independent check of (P3) at the roots of `det(lam2 A1 + lam1 A2)`.
///
/// At a root with one-dimensional kernel `v`, the three remaining equations
/// of (P3) are solvable iff `e v = 0`, `v` is an eigenvector of `C1 A2` and of
/// `Cn A1` (eigenvalues `a`, `b`), and `lam1^n a = (-1)^n lam2^n b`. Roots that
/// are multiple or have larger kernels are reported as indeterminate.
pub fn validate_p3_direct(d: &HirzADHM, tol: &ToleranceConfig) -> Result<ValidationReport> {
    d.check_shapes()?;
    let sel = tol.selection_tol();
    let form = forms::pencil_determinant(&d.a1, &d.a2)?.swapped();
    let roots = forms::binary_form_roots(&form, tol)?;
    let grouped = forms::with_multiplicity(&roots, tol.root_cluster_tol);
    let c1a2 = &d.cs[0] * &d.a2;
    let cna1 = &d.cs[d.n - 1] * &d.a1;
    let e_norm = linalg::fro_norm(&d.e);
    let mut failures = Vec::new();
    let mut indeterminate = 0usize;
    for (root, mult) in &grouped {
        if *mult > 1 {
            indeterminate += 1;
            continue;
        }
        let pencil = &d.a1 * root.lam2 + &d.a2 * root.lam1;
        let sv = linalg::singular_values(&pencil);
        let top = sv[0];
        let small = sv.iter().filter(|&&x| x <= sel * top).count();
        if top == 0.0 || small > 1 {
            indeterminate += 1;
            continue;
        }
        let (_, v) = linalg::smallest_singular_pair(&pencil);
        let ev = if e_norm == 0.0 {
            0.0
        } else {
            (&d.e * &v)[(0, 0)].norm() / e_norm
        };
        if ev > sel {
            continue;
        }
        let Some(a) = eigen_along(&c1a2, &v, sel) else {
            continue;
        };
        let Some(b) = eigen_along(&cna1, &v, sel) else {
            continue;
        };
        let sign = if d.n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let lhs = root.lam1.powu(d.n as u32) * a;
        let rhs = root.lam2.powu(d.n as u32) * b * sign;
        let scale = lhs.norm() + rhs.norm();
        if scale == 0.0 || (lhs - rhs).norm() <= sel * scale {
            failures.push(*root);
        }
    }
    let mut report = ValidationReport::default();
    let verdict = if !failures.is_empty() {
        Verdict::Fail
    } else if indeterminate > 0 {
        Verdict::Indeterminate
    } else {
        Verdict::Pass
    };
    let mut check = Check::new(CHECK_P3_DIRECT, verdict);
    if !failures.is_empty() {
        check = check.with_detail(format!("violated at {}", describe_roots(&failures)));
    } else if indeterminate > 0 {
        check = check.with_detail(format!(
            "{indeterminate} multiple or degenerate root(s); use the chart method"
        ));
    }
    report.push(check);
    Ok(report)
}

fn describe_roots(roots: &[ProjPoint]) -> String {
    roots
        .iter()
        .map(|r| format!("[{} : {}]", r.lam1, r.lam2))
        .collect::<Vec<_>>()
        .join(", ")
}

/// `Some(a)` when `M v = a v` up to relative tolerance `sel`.
fn eigen_along(m: &ComplexMatrix, v: &linalg::ComplexVector, sel: f64) -> Option<C64> {
    let mv = m * v;
    let a = v.dotc(&mv);
    let norm = linalg::fro_norm(m);
    let resid = (&mv - v * a).norm();
    (norm == 0.0 || resid <= sel * norm).then_some(a)
}

/// Full validation: (P1), (P2) and (P3). (P3) is only evaluated when the
/// first two pass.
#[derive(Debug, Clone, PartialEq)]
pub struct HirzValidation {
    pub report: ValidationReport,
    pub charts: Vec<usize>,
}

impl HirzValidation {
    pub fn verdict(&self) -> Verdict {
        self.report.verdict()
    }
}

pub fn validate(d: &HirzADHM, tol: &ToleranceConfig) -> Result<HirzValidation> {
    let mut report = validate_p1(d, tol)?;
    let p1_ok = report.passed();
    let p2 = validate_p2(d, tol)?;
    let mut p2_check = Check::new(CHECK_P2, p2.verdict);
    if p2.verdict != Verdict::Pass {
        p2_check = p2_check.with_detail("no chart matrix A_2m is invertible");
    }
    report.push(p2_check);
    if p1_ok && p2.verdict == Verdict::Pass {
        report.extend(validate_p3(d, tol)?);
    } else {
        report.push(
            Check::new(CHECK_P3, Verdict::Indeterminate)
                .with_detail("not evaluated: (P1) or (P2) fails"),
        );
    }
    Ok(HirzValidation {
        report,
        charts: p2.charts,
    })
}

fn require_valid(d: &HirzADHM, tol: &ToleranceConfig) -> Result<Vec<usize>> {
    let v = validate(d, tol)?;
    if v.verdict() == Verdict::Pass {
        Ok(v.charts)
    } else {
        Err(AdhmError::Invalid(format!(
            "data fails validation: {:?}",
            v.report
                .checks
                .iter()
                .filter(|c| c.verdict != Verdict::Pass)
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>()
        )))
    }
}

/// `C_j -> phi1 C_j phi2^-1`, `A_i -> phi2 A_i phi1^-1`, `e -> e phi1^-1`.
pub fn act_gl2(
    d: &HirzADHM,
    phi1: &ComplexMatrix,
    phi2: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<HirzADHM> {
    d.check_shapes()?;
    for phi in [phi1, phi2] {
        if phi.shape() != (d.c, d.c) {
            return Err(AdhmError::Shape(format!("gauge must be {0}x{0}", d.c)));
        }
    }
    let inv1 = linalg::inverse(phi1, tol, "phi1")?;
    let inv2 = linalg::inverse(phi2, tol, "phi2")?;
    Ok(HirzADHM {
        n: d.n,
        c: d.c,
        a1: phi2 * &d.a1 * &inv1,
        a2: phi2 * &d.a2 * &inv1,
        cs: d.cs.iter().map(|cj| phi1 * cj * &inv2).collect(),
        e: &d.e * &inv1,
    })
}

/// `D_m = sum_{q=1}^{n} binom(n-1, q-1) c_m^(n-q) s_m^(q-1) C_q`.
pub fn d_matrix(cs: &[ComplexMatrix], ang: &AnglePair) -> Result<ComplexMatrix> {
    let n = cs.len();
    let mut acc = ComplexMatrix::zeros(cs[0].nrows(), cs[0].ncols());
    for (idx, cq) in cs.iter().enumerate() {
        let q = idx + 1;
        let w = binomial((n - 1) as u64, (q - 1) as u64)? as f64
            * ang.cos_val.powi((n - q) as i32)
            * ang.sin_val.powi((q - 1) as i32);
        if w != 0.0 {
            acc += cq * C64::new(w, 0.0);
        }
    }
    Ok(acc)
}

/// The chart map on chart `m`.
pub fn to_chart(d: &HirzADHM, m: usize, tol: &ToleranceConfig) -> Result<ChartCoords> {
    d.check_shapes()?;
    if m > d.c {
        return Err(AdhmError::Domain(format!("chart index {m} outside 0..={}", d.c)));
    }
    if chart_conditioning(d, m)? <= tol.rank_rel_tol {
        return Err(AdhmError::Domain(format!(
            "m={m} is not in the chart set: A_2m is singular"
        )));
    }
    let ang = d.angle(m as i64)?;
    let (a1m, a2m) = d.rotated_pair(m as i64)?;
    let bm = a2m
        .clone()
        .lu()
        .solve(&a1m)
        .ok_or(AdhmError::Singular("A_2m"))?;
    let em = d_matrix(&d.cs, &ang)? * &a2m;
    Ok(ChartCoords {
        m,
        n: d.n,
        c: d.c,
        bm,
        em,
        e: d.e.clone(),
        a2m,
    })
}

/// `C_{p+1} = sum_q sigma^{n-1}_{m;p,q} B^q D` for `p = 0..n-1`.
pub fn reconstruct_c(
    b: &ComplexMatrix,
    d: &ComplexMatrix,
    m: i64,
    n: usize,
    c_base: usize,
) -> Result<Vec<ComplexMatrix>> {
    if n == 0 {
        return Err(AdhmError::Shape("n must be at least 1".into()));
    }
    let k = linalg::ensure_square(b, "B")?;
    if d.shape() != (k, k) {
        return Err(AdhmError::Shape(format!("D must be {k}x{k}")));
    }
    let sigma = sigma_matrix(n - 1, m, c_base)?;
    let mut powers_d = Vec::with_capacity(n);
    powers_d.push(d.clone());
    for q in 1..n {
        let next = b * &powers_d[q - 1];
        powers_d.push(next);
    }
    Ok((0..n)
        .map(|p| {
            let mut acc = ComplexMatrix::zeros(k, k);
            for (q, bqd) in powers_d.iter().enumerate() {
                let w = sigma.get(p, q);
                if w != 0.0 {
                    acc += bqd * C64::new(w, 0.0);
                }
            }
            acc
        })
        .collect())
}

/// Inverse of the chart map on chart `m`:
/// `A1 = A (c_m b1 + s_m)`, `A2 = A (c_m - s_m b1)`, `D = b2 A^-1`.
pub fn from_chart(
    m: usize,
    plane_data: &PlaneADHM,
    a: &ComplexMatrix,
    n: usize,
    tol: &ToleranceConfig,
) -> Result<HirzADHM> {
    let report = plane::validate_plane(plane_data, tol)?;
    if !report.passed() {
        return Err(AdhmError::Invalid("plane data fails (T1)/(T2)".into()));
    }
    from_chart_unchecked(m, plane_data, a, n, tol)
}

pub(crate) fn from_chart_unchecked(
    m: usize,
    plane_data: &PlaneADHM,
    a: &ComplexMatrix,
    n: usize,
    tol: &ToleranceConfig,
) -> Result<HirzADHM> {
    let c = plane_data.c;
    if m > c {
        return Err(AdhmError::Domain(format!("chart index {m} outside 0..={c}")));
    }
    if n == 0 {
        return Err(AdhmError::Shape("n must be at least 1".into()));
    }
    if a.shape() != (c, c) {
        return Err(AdhmError::Shape(format!("A must be {c}x{c}")));
    }
    let a_inv = linalg::inverse(a, tol, "A")?;
    let ang = angle_pair(c, m as i64)?;
    let (cm, sm) = (C64::new(ang.cos_val, 0.0), C64::new(ang.sin_val, 0.0));
    let id = linalg::identity(c);
    let a1 = a * (&plane_data.b1 * cm + &id * sm);
    let a2 = a * (&id * cm - &plane_data.b1 * sm);
    let dm = &plane_data.b2 * &a_inv;
    let cs = reconstruct_c(&plane_data.b1, &dm, m as i64, n, c)?;
    Ok(HirzADHM {
        n,
        c,
        a1,
        a2,
        cs,
        e: plane_data.e.clone(),
    })
}

/// Rebuilds global data from chart coordinates.
pub fn from_chart_coords(cc: &ChartCoords, tol: &ToleranceConfig) -> Result<HirzADHM> {
    cc.check_shapes()?;
    from_chart(cc.m, &cc.plane(), &cc.a2m, cc.n, tol)
}

/// Numerical rank of the linear system `A1 C_q - A2 C_{q+1} = 0`,
/// `q = 1..n-1`, in the `n c^2` unknown entries of the `C_q`.
pub fn syst_rank(a1: &ComplexMatrix, a2: &ComplexMatrix, n: usize, tol: &ToleranceConfig) -> Result<usize> {
    if n < 2 {
        return Err(AdhmError::Domain("the C-system needs n >= 2".into()));
    }
    let sys = system_matrix(a1, a2, n)?;
    Ok(linalg::rank_with(&sys, tol.rank_rel_tol))
}

/// The `(n-1)c^2 × n c^2` matrix of the C-system; unknown `(q, k, j)` is
/// entry `(k, j)` of `C_{q+1}` at column `q c^2 + k c + j`.
pub fn system_matrix(a1: &ComplexMatrix, a2: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    let c = linalg::ensure_square(a1, "A1")?;
    if a2.shape() != (c, c) {
        return Err(AdhmError::Shape(format!("A2 must be {c}x{c}")));
    }
    linalg::ensure_finite(a1, "A1")?;
    linalg::ensure_finite(a2, "A2")?;
    let cc = c * c;
    let mut sys = ComplexMatrix::zeros((n - 1) * cc, n * cc);
    for q in 0..n - 1 {
        for i in 0..c {
            for j in 0..c {
                let row = q * cc + i * c + j;
                for k in 0..c {
                    sys[(row, q * cc + k * c + j)] += a1[(i, k)];
                    sys[(row, (q + 1) * cc + k * c + j)] -= a2[(i, k)];
                }
            }
        }
    }
    Ok(sys)
}

/// The glueing map from chart `m` to chart `l`:
/// plane part by [`plane::transition_plane`], `A_{2l} = A_{2m} (c_{m-l} - s_{m-l} B_m)`.
pub fn transition_omega(cc: &ChartCoords, l: usize, tol: &ToleranceConfig) -> Result<ChartCoords> {
    transition_omega_with(cc, l, tol, plane::transition_plane)
}

pub(crate) type PlaneTransition =
    fn(&PlaneADHM, i64, i64, usize, usize, &ToleranceConfig) -> Result<PlaneADHM>;

pub(crate) fn transition_omega_with(
    cc: &ChartCoords,
    l: usize,
    tol: &ToleranceConfig,
    plane_transition: PlaneTransition,
) -> Result<ChartCoords> {
    cc.check_shapes()?;
    if l > cc.c {
        return Err(AdhmError::Domain(format!("chart index {l} outside 0..={}", cc.c)));
    }
    let (m, li) = (cc.m as i64, l as i64);
    let moved = plane_transition(&cc.plane(), m, li, cc.n, cc.c, tol)?;
    let ang = angle_pair(cc.c, m - li)?;
    let factor = linalg::identity(cc.c) * C64::new(ang.cos_val, 0.0)
        - &cc.bm * C64::new(ang.sin_val, 0.0);
    Ok(ChartCoords {
        m: l,
        n: cc.n,
        c: cc.c,
        bm: moved.b1,
        em: moved.b2,
        e: moved.e,
        a2m: &cc.a2m * factor,
    })
}

/// Canonical representative of a `GL(c) × GL(c)` orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Canonical {
    pub point: HirzADHM,
    pub chart: usize,
    /// Gauge `(phi1, phi2)` with `act_gl2(input, phi1, phi2) ≈ point`.
    pub phi1: ComplexMatrix,
    pub phi2: ComplexMatrix,
}

/// Picks the smallest chart, gauges `A_{2m}` to the identity and fixes the
/// residual diagonal `GL(c)` with the plane canonical form.
pub fn canonicalize(d: &HirzADHM, tol: &ToleranceConfig) -> Result<Canonical> {
    let charts = require_valid(d, tol)?;
    let m = charts[0];
    let cc = to_chart(d, m, tol)?;
    let (canon, s) = plane::canonical_form(&cc.plane(), tol)?;
    let point = from_chart_unchecked(m, &canon, &linalg::identity(d.c), d.n, tol)?;
    let phi2 = &s * linalg::inverse(&cc.a2m, tol, "A_2m")?;
    Ok(Canonical {
        point,
        chart: m,
        phi1: s,
        phi2,
    })
}

/// Equality of `GL(c) × GL(c)` orbits.
pub fn orbit_equal(d1: &HirzADHM, d2: &HirzADHM, tol: &ToleranceConfig) -> Result<bool> {
    if (d1.n, d1.c) != (d2.n, d2.c) {
        return Err(AdhmError::Shape(format!(
            "cannot compare (n, c) = ({}, {}) with ({}, {})",
            d1.n, d1.c, d2.n, d2.c
        )));
    }
    let k1 = canonicalize(d1, tol)?;
    let k2 = canonicalize(d2, tol)?;
    Ok(k1.chart == k2.chart && k1.point.distance(&k2.point) <= tol.eq_rel_tol)
}

/// Required ratio between the smallest kept and the largest discarded
/// singular value of the Jacobian.
pub const JACOBIAN_GAP: f64 = 1e3;

/// Jacobian of the (P1) residual map at `d`, over the ambient coordinates
/// `(A1, A2, C_1..C_n, e)` in that order (row-major entries).
pub fn p1_jacobian(d: &HirzADHM) -> Result<ComplexMatrix> {
    d.check_shapes()?;
    let (n, c) = (d.n, d.c);
    let cc = c * c;
    let ambient = (n + 2) * cc + c;
    let rows = if n == 1 { cc } else { 2 * (n - 1) * cc };
    let mut jac = ComplexMatrix::zeros(rows, ambient);
    let zero = ComplexMatrix::zeros(c, c);
    for col in 0..(n + 2) * cc {
        let block = col / cc;
        let (i, j) = ((col % cc) / c, col % c);
        let mut unit = zero.clone();
        unit[(i, j)] = C64::new(1.0, 0.0);
        let da1 = if block == 0 { &unit } else { &zero };
        let da2 = if block == 1 { &unit } else { &zero };
        let dc = |q: usize| if block == q + 2 { &unit } else { &zero };
        let mut blocks: Vec<ComplexMatrix> = Vec::new();
        if n == 1 {
            let c1 = &d.cs[0];
            let dc1 = dc(0);
            blocks.push(
                da1 * c1 * &d.a2 + &d.a1 * dc1 * &d.a2 + &d.a1 * c1 * da2
                    - da2 * c1 * &d.a1
                    - &d.a2 * dc1 * &d.a1
                    - &d.a2 * c1 * da1,
            );
        } else {
            for q in 0..n - 1 {
                let (cq, cn) = (&d.cs[q], &d.cs[q + 1]);
                let (dcq, dcn) = (dc(q), dc(q + 1));
                blocks.push(da1 * cq + &d.a1 * dcq - da2 * cn - &d.a2 * dcn);
                blocks.push(dcq * &d.a1 + cq * da1 - dcn * &d.a2 - cn * da2);
            }
        }
        for (b, m) in blocks.iter().enumerate() {
            for r in 0..c {
                for s in 0..c {
                    jac[(b * cc + r * c + s, col)] = m[(r, s)];
                }
            }
        }
    }
    Ok(jac)
}

/// Numerical nullity of the (P1) Jacobian: the local dimension of the data
/// variety at `d`. Refuses to answer without a clear singular-value gap.
pub fn jacobian_nullity(d: &HirzADHM, tol: &ToleranceConfig) -> Result<usize> {
    require_valid(d, tol)?;
    let jac = p1_jacobian(d)?;
    let ambient = jac.ncols();
    let sv = linalg::singular_values(&jac);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(ambient);
    }
    let rank = sv.iter().filter(|&&x| x > tol.rank_rel_tol * top).count();
    if let Some(&discarded) = sv.get(rank) {
        let kept = sv[rank - 1];
        if discarded > 0.0 && kept / discarded < JACOBIAN_GAP {
            return Err(AdhmError::Indeterminate(format!(
                "no singular-value gap: kept {kept:.3e}, discarded {discarded:.3e}"
            )));
        }
    }
    Ok(ambient - rank)
}
