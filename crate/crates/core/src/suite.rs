//! Seeded generators of valid data and a registry of named properties.
//!
//! Every property runs on freshly generated cases. A case is fully
//! determined by its seed and `(n, c)`, so any failure can be replayed with
//! [`replay`].

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{AdhmError, Result};
use crate::forms::{self, BinaryForm, ProjPoint};
use crate::geometry::{self, YTildePoint};
use crate::hirz::{self, ChartCoords, HirzADHM};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::plane::{self, PlaneADHM};
use crate::report::{ValidationReport, Verdict};
use crate::sigma::{angle_pair, binomial, sigma_matrix};
use crate::tolerance::ToleranceConfig;
use crate::wire;

/// Default condition-number cap for random gauges and overlap factors.
pub const DEFAULT_COND_CAP: f64 = 1e4;
/// Spread of the singular values of random gauges.
const GAUGE_SPREAD: f64 = 10.0;
const MAX_RETRIES: usize = 10;
/// Minimal spacing of random diagonal entries meant to be distinct.
const MIN_SPACING: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenConfig {
    pub seed: u64,
    pub n: usize,
    pub c: usize,
    pub cond_cap: f64,
    pub samples: usize,
}

impl GenConfig {
    pub fn new(seed: u64, n: usize, c: usize) -> Self {
        Self {
            seed,
            n,
            c,
            cond_cap: DEFAULT_COND_CAP,
            samples: 100,
        }
    }

    fn check(&self) -> Result<()> {
        if self.c == 0 || self.n == 0 {
            return Err(AdhmError::Domain("n and c must be at least 1".into()));
        }
        if self.cond_cap.is_nan() || self.cond_cap <= 1.0 {
            return Err(AdhmError::Domain("cond_cap must exceed 1".into()));
        }
        Ok(())
    }
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, k: usize) -> ComplexMatrix {
    random_matrix(rng, k, k).qr().q()
}

/// `U diag(s) V` with unitary `U`, `V` and `s` log-uniform in `[1, min(cap, 10)]`.
pub fn random_well_conditioned<R: Rng + ?Sized>(rng: &mut R, k: usize, cond_cap: f64) -> ComplexMatrix {
    let spread = cond_cap.min(GAUGE_SPREAD).ln();
    let u = random_unitary(rng, k);
    let v = random_unitary(rng, k);
    let s: Vec<C64> = (0..k)
        .map(|_| C64::new((rng.random::<f64>() * spread).exp(), 0.0))
        .collect();
    u * linalg::diag(&s) * v
}

fn distinct_values<R: Rng + ?Sized>(rng: &mut R, k: usize, forced: Option<C64>) -> Vec<C64> {
    let mut out: Vec<C64> = forced.into_iter().collect();
    while out.len() < k {
        let z = random_complex(rng);
        if out.iter().all(|w| (z - w).norm() >= MIN_SPACING) {
            out.push(z);
        }
    }
    out
}

/// `b_i = P D_i P^-1` with `D_1` having distinct entries (`forced` among them).
fn plane_candidate<R: Rng + ?Sized>(
    rng: &mut R,
    c: usize,
    cond_cap: f64,
    forced: Option<C64>,
    killed: Option<usize>,
) -> Result<PlaneADHM> {
    let p = random_well_conditioned(rng, c, cond_cap);
    let p_inv = p.clone().try_inverse().ok_or(AdhmError::Singular("P"))?;
    let d1 = linalg::diag(&distinct_values(rng, c, forced));
    let d2 = linalg::diag(&(0..c).map(|_| random_complex(rng)).collect::<Vec<_>>());
    let mut e0 = random_matrix(rng, 1, c);
    if let Some(i) = killed {
        e0[(0, i)] = C64::new(0.0, 0.0);
    }
    PlaneADHM::new(&p * d1 * &p_inv, &p * d2 * &p_inv, e0 * &p_inv)
}

fn plane_valid_with<R: Rng + ?Sized>(
    rng: &mut R,
    c: usize,
    cond_cap: f64,
    forced: Option<C64>,
    tol: &ToleranceConfig,
) -> Result<PlaneADHM> {
    for _ in 0..MAX_RETRIES {
        let d = plane_candidate(rng, c, cond_cap, forced, None)?;
        if plane::validate_plane(&d, tol)?.passed() {
            return Ok(d);
        }
    }
    Err(AdhmError::Generation(format!(
        "no valid plane data after {MAX_RETRIES} attempts"
    )))
}

/// Valid plane data with commuting, simultaneously diagonalizable `b1`, `b2`.
pub fn plane_valid<R: Rng + ?Sized>(rng: &mut R, c: usize, cond_cap: f64) -> Result<PlaneADHM> {
    plane_valid_with(rng, c, cond_cap, None, &ToleranceConfig::default())
}

/// Valid data built on a random chart; returns the point and that chart.
pub fn hirz_valid<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    c: usize,
    cond_cap: f64,
) -> Result<(HirzADHM, usize)> {
    let tol = ToleranceConfig::default();
    for _ in 0..MAX_RETRIES {
        let m = rng.random_range(0..=c);
        let p = plane_valid(rng, c, cond_cap)?;
        let a = random_well_conditioned(rng, c, cond_cap);
        let mut d = hirz::from_chart(m, &p, &a, n, &tol)?;
        if rng.random_bool(0.5) {
            let phi1 = random_well_conditioned(rng, c, cond_cap);
            let phi2 = random_well_conditioned(rng, c, cond_cap);
            d = hirz::act_gl2(&d, &phi1, &phi2, &tol)?;
        }
        if hirz::validate(&d, &tol)?.verdict() == Verdict::Pass {
            return Ok((d, m));
        }
    }
    Err(AdhmError::Generation(format!(
        "no valid data after {MAX_RETRIES} attempts"
    )))
}

pub fn gen_plane_valid(cfg: &GenConfig) -> Result<PlaneADHM> {
    cfg.check()?;
    plane_valid(&mut ChaCha8Rng::seed_from_u64(cfg.seed), cfg.c, cfg.cond_cap)
}

pub fn gen_hirz_valid(cfg: &GenConfig) -> Result<HirzADHM> {
    gen_hirz_valid_with_chart(cfg).map(|(d, _)| d)
}

pub fn gen_hirz_valid_with_chart(cfg: &GenConfig) -> Result<(HirzADHM, usize)> {
    cfg.check()?;
    hirz_valid(&mut ChaCha8Rng::seed_from_u64(cfg.seed), cfg.n, cfg.c, cfg.cond_cap)
}

pub type PlaneTransitionFn =
    fn(&PlaneADHM, i64, i64, usize, usize, &ToleranceConfig) -> Result<PlaneADHM>;
pub type P1ValidatorFn = fn(&HirzADHM, &ToleranceConfig) -> Result<ValidationReport>;

/// Operations under test; swapping one for a [`mutants`] variant must make
/// some property fail.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOps {
    pub transition_plane: PlaneTransitionFn,
    pub validate_p1: P1ValidatorFn,
}

impl Default for SuiteOps {
    fn default() -> Self {
        Self {
            transition_plane: plane::transition_plane,
            validate_p1: hirz::validate_p1,
        }
    }
}

/// Deliberately wrong variants of the operations in [`SuiteOps`].
pub mod mutants {
    use super::*;

    fn factor(b1: &ComplexMatrix, m: i64, c_base: usize) -> Result<ComplexMatrix> {
        let a = angle_pair(c_base, m)?;
        Ok(linalg::identity(b1.nrows()) * C64::new(a.cos_val, 0.0) - b1 * C64::new(a.sin_val, 0.0))
    }

    /// `b2 -> (c - s b1)^-n b2`.
    pub fn transition_negated_exponent(
        d: &PlaneADHM,
        m: i64,
        l: i64,
        n: usize,
        c_base: usize,
        tol: &ToleranceConfig,
    ) -> Result<PlaneADHM> {
        let mut out = plane::transition_plane(d, m, l, n, c_base, tol)?;
        let inv = linalg::inverse(&factor(&d.b1, m - l, c_base)?, tol, "factor")?;
        out.b2 = linalg::pow(&inv, n) * &d.b2;
        Ok(out)
    }

    /// `b2 -> (c_{l-m} - s_{l-m} b1)^n b2`.
    pub fn transition_flipped_angle(
        d: &PlaneADHM,
        m: i64,
        l: i64,
        n: usize,
        c_base: usize,
        tol: &ToleranceConfig,
    ) -> Result<PlaneADHM> {
        let mut out = plane::transition_plane(d, m, l, n, c_base, tol)?;
        out.b2 = linalg::pow(&factor(&d.b1, l - m, c_base)?, n) * &d.b2;
        Ok(out)
    }

    /// Checks only `A1 C_q = A2 C_{q+1}`.
    pub fn validate_p1_first_family_only(
        d: &HirzADHM,
        tol: &ToleranceConfig,
    ) -> Result<ValidationReport> {
        let mut r = hirz::validate_p1(d, tol)?;
        if d.n > 1 {
            r.checks.retain(|c| c.name.contains(": A1 C"));
        }
        Ok(r)
    }
}

pub enum Outcome {
    Pass,
    Skip(String),
    Indeterminate(String),
    Fail { message: String, data: Value },
}

fn fail(message: impl Into<String>, data: Value) -> Result<Outcome> {
    Ok(Outcome::Fail {
        message: message.into(),
        data,
    })
}

fn check(ok: bool, message: impl FnOnce() -> String, data: impl FnOnce() -> Value) -> Result<Outcome> {
    if ok {
        Ok(Outcome::Pass)
    } else {
        fail(message(), data())
    }
}

/// One generated case.
pub struct Case<'a> {
    pub rng: ChaCha8Rng,
    pub n: usize,
    pub c: usize,
    pub cond_cap: f64,
    pub tol: &'a ToleranceConfig,
    pub ops: &'a SuiteOps,
}

impl Case<'_> {
    fn plane(&mut self) -> Result<PlaneADHM> {
        plane_valid_with(&mut self.rng, self.c, self.cond_cap, None, self.tol)
    }

    fn hirz(&mut self) -> Result<(HirzADHM, usize)> {
        hirz_valid(&mut self.rng, self.n, self.c, self.cond_cap)
    }

    fn gauge(&mut self) -> ComplexMatrix {
        random_well_conditioned(&mut self.rng, self.c, self.cond_cap)
    }

    fn chart(&mut self) -> usize {
        self.rng.random_range(0..=self.c)
    }

    fn other_chart(&mut self, m: usize) -> usize {
        let l = self.rng.random_range(0..self.c);
        if l >= m {
            l + 1
        } else {
            l
        }
    }

    fn points(&mut self) -> Vec<(C64, C64)> {
        let zs = distinct_values(&mut self.rng, self.c, None);
        zs.into_iter().map(|z| (z, random_complex(&mut self.rng))).collect()
    }

    /// Whether `c_{m-l} - s_{m-l} b1` is within the conditioning cap.
    fn overlap_ok(&self, b1: &ComplexMatrix, m: usize, l: usize) -> Result<bool> {
        let a = angle_pair(self.c, m as i64 - l as i64)?;
        let f = linalg::identity(b1.nrows()) * C64::new(a.cos_val, 0.0) - b1 * C64::new(a.sin_val, 0.0);
        Ok(linalg::condition_number(&f) <= self.cond_cap)
    }
}

pub type PropertyFn = fn(&mut Case) -> Result<Outcome>;

pub struct Property {
    pub name: &'static str,
    pub description: &'static str,
    pub n_min: usize,
    pub n_cap: Option<usize>,
    pub c_cap: Option<usize>,
    pub run: PropertyFn,
}

const fn prop(name: &'static str, description: &'static str, run: PropertyFn) -> Property {
    Property {
        name,
        description,
        n_min: 1,
        n_cap: None,
        c_cap: None,
        run,
    }
}

const fn capped(mut p: Property, n_min: usize, n_cap: Option<usize>, c_cap: Option<usize>) -> Property {
    p.n_min = n_min;
    p.n_cap = n_cap;
    p.c_cap = c_cap;
    p
}

static PROPERTIES: &[Property] = &[
    prop("linalg.eigen_similarity", "eigenvalues are similarity invariant", linalg_eigen_similarity),
    prop("linalg.rank_nullity", "rank plus kernel dimension equals column count", linalg_rank_nullity),
    prop("forms.factored_roots", "roots of a product of linear forms are its factors", forms_factored_roots),
    prop("sigma.group_law", "sigma_m sigma_l = sigma_{m+l} and sigma_0 = 1", sigma_group_law),
    prop("sigma.extreme_rows", "first and last rows are binomial expansions", sigma_extreme_rows),
    prop("sigma.rotation", "sigma^1_m is the plane rotation", sigma_rotation),
    prop("plane.cocycle_identity", "transition m -> m is the identity", plane_cocycle_identity),
    prop("plane.cocycle_inverse", "transition l -> m inverts m -> l", plane_cocycle_inverse),
    prop("plane.cocycle_composition", "l -> k after m -> l equals m -> k", plane_cocycle_composition),
    prop("plane.transition_validity", "transitions preserve (T1) and (T2)", plane_transition_validity),
    prop("plane.spectrum_gauge_invariance", "joint spectrum is GL(c) invariant", plane_spectrum_gauge),
    prop("plane.points_round_trip", "from_points of the joint spectrum is the same orbit", plane_points_round_trip),
    prop("plane.canonical_form", "canonical form is witnessed and idempotent", plane_canonical_form),
    prop("hirz.gauge_invariance", "verdicts and chart set are gauge invariant", hirz_gauge_invariance),
    prop("hirz.chart_round_trip", "to_chart and from_chart are mutually inverse", hirz_chart_round_trip),
    prop("hirz.chart_commutator", "[B_m, E_m] = 0 on every chart", hirz_chart_commutator),
    capped(
        prop("hirz.p1_soundness", "(P1) acceptance forces commuting chart data", hirz_p1_soundness),
        2,
        None,
        None,
    ),
    prop("hirz.reconstruct_c", "reconstructed C satisfy (P1) and recover D", hirz_reconstruct_c),
    prop("hirz.p3_oracles_agree", "chart and direct (P3) checks agree", hirz_p3_oracles_agree),
    capped(
        prop("hirz.syst_rank", "C-system has rank (n-1)c^2 exactly on (P2) pencils", hirz_syst_rank),
        2,
        None,
        None,
    ),
    prop("hirz.zeta_equivariance", "chart map intertwines the gauge actions", hirz_zeta_equivariance),
    prop("hirz.glueing_triangle", "chart l equals the glueing map applied to chart m", hirz_glueing_triangle),
    capped(
        prop("hirz.jacobian_dimension", "(P1) Jacobian nullity is 2c^2 + 2c", hirz_jacobian_dimension),
        1,
        Some(3),
        Some(3),
    ),
    prop("hirz.canonical_orbit", "canonicalize is witnessed, idempotent and orbit invariant", hirz_canonical_orbit),
    prop("hirz.orbit_separation", "distinct supports give distinct orbits", hirz_orbit_separation),
    prop("geometry.pencil_equivariance", "pencil form scales by det(phi2)/det(phi1)", geometry_pencil_equivariance),
    prop("geometry.base_support_gauge", "base support is gauge invariant", geometry_base_support_gauge),
    prop("geometry.spectrum_vs_pencil", "pencil roots read in chart m are the eigenvalues of B_m", geometry_spectrum_vs_pencil),
    capped(
        prop("geometry.points_support", "supports of from_points data are the points", geometry_points_support),
        1,
        None,
        Some(5),
    ),
    prop("geometry.cross_chart_support", "transitions move support pairs by the fibre map", geometry_cross_chart),
    prop("geometry.um_cover", "the sets U_m cover P^c", geometry_um_cover),
    prop("geometry.chart_cover", "every valid point lies in some chart", geometry_chart_cover),
    capped(
        prop("geometry.c1_ytilde", "c = 1 data from the variety are valid and branch independent", geometry_c1_ytilde),
        1,
        Some(4),
        None,
    ),
    capped(
        prop("geometry.c1_tot", "c = 1 map to Tot satisfies the relation and is orbit invariant", geometry_c1_tot),
        1,
        Some(4),
        None,
    ),
];

pub fn properties() -> &'static [Property] {
    PROPERTIES
}

pub fn property(name: &str) -> Option<&'static Property> {
    PROPERTIES.iter().find(|p| p.name == name)
}

fn linalg_eigen_similarity(case: &mut Case) -> Result<Outcome> {
    let m = random_matrix(&mut case.rng, case.c, case.c);
    let p = case.gauge();
    let conj = &p * &m * linalg::inverse(&p, case.tol, "P")?;
    let (a, b) = (linalg::eigenvalues(&m)?, linalg::eigenvalues(&conj)?);
    check(
        linalg::spectra_match(&a, &b, case.tol.eq_rel_tol),
        || "spectra differ after similarity".into(),
        || json!({"M": wire::matrix_value(&m), "P": wire::matrix_value(&p)}),
    )
}

fn linalg_rank_nullity(case: &mut Case) -> Result<Outcome> {
    let cols = case.c + case.rng.random_range(0..=2);
    let r = case.rng.random_range(0..=case.c.min(cols));
    let m = random_matrix(&mut case.rng, case.c, r) * random_matrix(&mut case.rng, r, cols);
    let rank = linalg::rank_tol(&m, case.tol)?;
    let kernel = linalg::kernel_basis(&m, case.tol)?.len();
    check(
        rank == r && rank + kernel == cols,
        || format!("rank {rank}, kernel {kernel}, built rank {r}, cols {cols}"),
        || json!({"M": wire::matrix_value(&m)}),
    )
}

fn forms_factored_roots(case: &mut Case) -> Result<Outcome> {
    let degree = case.rng.random_range(1..=8usize);
    let mut roots = Vec::with_capacity(degree);
    while roots.len() < degree {
        let p = match case.rng.random_range(0..10) {
            0 => ProjPoint::infinity(),
            1 => ProjPoint::zero(),
            _ => ProjPoint::new(random_complex(&mut case.rng), C64::new(1.0, 0.0))?,
        };
        if roots.iter().all(|q: &ProjPoint| q.distance(&p) > 0.05) {
            roots.push(p);
        }
    }
    let form = roots
        .iter()
        .map(BinaryForm::linear_through)
        .reduce(|a, b| a.mul(&b))
        .expect("degree >= 1");
    let found = forms::binary_form_roots(&form, case.tol)?;
    let dist = forms::proj_multiset_distance(&found, &roots).unwrap_or(f64::INFINITY);
    check(
        dist <= 1e-6,
        || format!("root distance {dist:.3e}"),
        || json!({"coeffs": form.coeffs.iter().map(|z| wire::complex_value(*z)).collect::<Vec<_>>()}),
    )
}

fn inf_norm(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn sigma_group_law(case: &mut Case) -> Result<Outcome> {
    let h = case.rng.random_range(0..=8usize);
    let cb = case.rng.random_range(1..=8usize);
    let r = cb as i64;
    let (m, l) = (case.rng.random_range(-r..=r), case.rng.random_range(-r..=r));
    let prod = sigma_matrix(h, m, cb)?.entries * sigma_matrix(h, l, cb)?.entries;
    let err = inf_norm(&(prod - sigma_matrix(h, m + l, cb)?.entries));
    let id_err = inf_norm(&(sigma_matrix(h, 0, cb)?.entries - nalgebra::DMatrix::<f64>::identity(h + 1, h + 1)));
    check(
        err <= 1e-10 && id_err == 0.0,
        || format!("group law error {err:.3e}, identity error {id_err:.3e}"),
        || json!({"h": h, "m": m, "l": l, "c_base": cb}),
    )
}

fn sigma_extreme_rows(case: &mut Case) -> Result<Outcome> {
    let h = case.rng.random_range(0..=8usize);
    let cb = case.rng.random_range(1..=8usize);
    let r = cb as i64;
    let m = case.rng.random_range(-r..=r);
    let sg = sigma_matrix(h, m, cb)?;
    let a = angle_pair(cb, m)?;
    let (c, s) = (a.cos_val, a.sin_val);
    let mut err: f64 = 0.0;
    for k in 0..=h {
        let b = binomial(h as u64, k as u64)? as f64;
        let first = b * c.powi((h - k) as i32) * (-s).powi(k as i32);
        let last = b * s.powi((h - k) as i32) * c.powi(k as i32);
        err = err.max((sg.get(0, k) - first).abs()).max((sg.get(h, k) - last).abs());
    }
    check(
        err <= 1e-12,
        || format!("extreme row error {err:.3e}"),
        || json!({"h": h, "m": m, "c_base": cb}),
    )
}

fn sigma_rotation(case: &mut Case) -> Result<Outcome> {
    let cb = case.rng.random_range(1..=8usize);
    let r = cb as i64;
    let m = case.rng.random_range(-r..=r);
    let a = angle_pair(cb, m)?;
    let rot = nalgebra::DMatrix::from_row_slice(2, 2, &[a.cos_val, -a.sin_val, a.sin_val, a.cos_val]);
    let err = inf_norm(&(sigma_matrix(1, m, cb)?.entries - rot));
    check(
        err <= 1e-15,
        || format!("rotation error {err:.3e}"),
        || json!({"m": m, "c_base": cb}),
    )
}

/// Relative accuracy demanded of transition identities.
pub const TRANSITION_TOL: f64 = 1e-8;
/// Relative accuracy demanded of chart isomorphism identities.
pub const CHART_TOL: f64 = 1e-9;

fn plane_cocycle_identity(case: &mut Case) -> Result<Outcome> {
    let d = case.plane()?;
    let m = case.chart() as i64;
    let t = (case.ops.transition_plane)(&d, m, m, case.n, case.c, case.tol)?;
    check(
        t == d,
        || format!("transition {m} -> {m} moved the point by {:.3e}", t.distance(&d)),
        || json!({"point": wire::plane_value(&d), "m": m, "n": case.n}),
    )
}

fn plane_cocycle_inverse(case: &mut Case) -> Result<Outcome> {
    let d = case.plane()?;
    let m = case.chart();
    let l = case.other_chart(m);
    if !case.overlap_ok(&d.b1, m, l)? {
        return Ok(Outcome::Skip("outside the conditioned overlap".into()));
    }
    let t = case.ops.transition_plane;
    let there = t(&d, m as i64, l as i64, case.n, case.c, case.tol)?;
    let back = t(&there, l as i64, m as i64, case.n, case.c, case.tol)?;
    let dist = back.distance(&d);
    check(
        dist <= TRANSITION_TOL,
        || format!("round trip {m} -> {l} -> {m} off by {dist:.3e}"),
        || json!({"point": wire::plane_value(&d), "m": m, "l": l, "n": case.n}),
    )
}

fn plane_cocycle_composition(case: &mut Case) -> Result<Outcome> {
    let d = case.plane()?;
    let (m, l, k) = (case.chart(), case.chart(), case.chart());
    let t = case.ops.transition_plane;
    if !case.overlap_ok(&d.b1, m, l)? || !case.overlap_ok(&d.b1, m, k)? {
        return Ok(Outcome::Skip("outside the conditioned overlap".into()));
    }
    let mid = t(&d, m as i64, l as i64, case.n, case.c, case.tol)?;
    if !case.overlap_ok(&mid.b1, l, k)? {
        return Ok(Outcome::Skip("outside the conditioned overlap".into()));
    }
    let two = t(&mid, l as i64, k as i64, case.n, case.c, case.tol)?;
    let one = t(&d, m as i64, k as i64, case.n, case.c, case.tol)?;
    let dist = two.distance(&one);
    check(
        dist <= TRANSITION_TOL,
        || format!("composition {m} -> {l} -> {k} off by {dist:.3e}"),
        || json!({"point": wire::plane_value(&d), "m": m, "l": l, "k": k, "n": case.n}),
    )
}

fn plane_transition_validity(case: &mut Case) -> Result<Outcome> {
    let d = case.plane()?;
    let m = case.chart();
    let l = case.other_chart(m);
    if !case.overlap_ok(&d.b1, m, l)? {
        return Ok(Outcome::Skip("outside the conditioned overlap".into()));
    }
    let t = (case.ops.transition_plane)(&d, m as i64, l as i64, case.n, case.c, case.tol)?;
    let report = plane::validate_plane(&t, case.tol)?;
    check(
        report.passed(),
        || format!("transition {m} -> {l} broke validity: {:?}", report.checks),
        || json!({"point": wire::plane_value(&d), "m": m, "l": l, "n": case.n}),
    )
}

fn plane_spectrum_gauge(case: &mut Case) -> Result<Outcome> {
    let d = case.plane()?;
    let phi = case.gauge();
    let g = plane::act_gl(&d, &phi, case.tol)?;
    let (a, b) = (plane::joint_spectrum(&d, case.tol)?, plane::joint_spectrum(&g, case.tol)?);
    check(
        plane::pair_spectra_match(&a, &b, case.tol.eq_rel_tol),
        || "joint spectrum changed under the gauge action".into(),
        || json!({"point": wire::plane_value(&d), "phi": wire::matrix_value(&phi)}),
    )
}

fn plane_points_round_trip(case: &mut Case) -> Result<Outcome> {
    let d = case.plane()?;
    let pts = plane::from_points(&plane::joint_spectrum(&d, case.tol)?, case.tol)?;
    check(
        plane::orbit_equal_plane(&pts, &d, case.tol)?,
        || "from_points(joint_spectrum(d)) is not in the orbit of d".into(),
        || json!({"point": wire::plane_value(&d)}),
    )
}

fn plane_canonical_form(case: &mut Case) -> Result<Outcome> {
    let d = case.plane()?;
    let (k, s) = plane::canonical_form(&d, case.tol)?;
    let witness = plane::act_gl(&d, &s, case.tol)?.distance(&k);
    let again = plane::canonical_form(&k, case.tol)?.0.distance(&k);
    check(
        witness <= case.tol.eq_rel_tol && again <= case.tol.eq_rel_tol,
        || format!("witness error {witness:.3e}, idempotence error {again:.3e}"),
        || json!({"point": wire::plane_value(&d)}),
    )
}

/// Point of the chosen validity class: valid, valid but missing one chart,
/// or failing (P3).
fn hirz_variety(case: &mut Case) -> Result<(HirzADHM, &'static str)> {
    match case.rng.random_range(0..3) {
        0 => Ok((case.hirz()?.0, "valid")),
        1 => {
            let m = case.chart();
            let l = case.other_chart(m);
            let a = angle_pair(case.c, m as i64 - l as i64)?;
            let forced = C64::new(a.cos_val / a.sin_val, 0.0);
            let p = plane_valid_with(&mut case.rng, case.c, case.cond_cap, Some(forced), case.tol)?;
            let g = case.gauge();
            Ok((hirz::from_chart(m, &p, &g, case.n, case.tol)?, "off-chart"))
        }
        _ => {
            let m = case.chart();
            let killed = case.rng.random_range(0..case.c);
            let p = plane_candidate(&mut case.rng, case.c, case.cond_cap, None, Some(killed))?;
            let g = case.gauge();
            Ok((hirz::from_chart_unchecked(m, &p, &g, case.n, case.tol)?, "p3-failing"))
        }
    }
}

fn hirz_gauge_invariance(case: &mut Case) -> Result<Outcome> {
    let (d, class) = hirz_variety(case)?;
    let (phi1, phi2) = (case.gauge(), case.gauge());
    let g = hirz::act_gl2(&d, &phi1, &phi2, case.tol)?;
    let (v0, v1) = (hirz::validate(&d, case.tol)?, hirz::validate(&g, case.tol)?);
    let expected = match class {
        "valid" | "off-chart" => Verdict::Pass,
        _ => Verdict::Fail,
    };
    let verdicts = |v: &hirz::HirzValidation| v.report.checks.iter().map(|c| c.verdict).collect::<Vec<_>>();
    let missing_ok = class != "off-chart" || v0.charts.len() == case.c;
    check(
        v0.charts == v1.charts && verdicts(&v0) == verdicts(&v1) && v0.verdict() == expected && missing_ok,
        || {
            format!(
                "{class} point: charts {:?} vs {:?}, verdicts {:?} vs {:?}",
                v0.charts,
                v1.charts,
                verdicts(&v0),
                verdicts(&v1)
            )
        },
        || json!({"point": wire::hirz_value(&d), "phi1": wire::matrix_value(&phi1), "phi2": wire::matrix_value(&phi2)}),
    )
}

fn hirz_chart_round_trip(case: &mut Case) -> Result<Outcome> {
    let (d, _) = case.hirz()?;
    let mut worst: f64 = 0.0;
    for m in hirz::chart_set(&d, case.tol)? {
        let back = hirz::from_chart_coords(&hirz::to_chart(&d, m, case.tol)?, case.tol)?;
        worst = worst.max(back.distance(&d));
    }
    let m = case.chart();
    let p = case.plane()?;
    let a = case.gauge();
    let cc = hirz::to_chart(&hirz::from_chart(m, &p, &a, case.n, case.tol)?, m, case.tol)?;
    worst = worst.max(cc.plane().distance(&p)).max(linalg::rel_distance(&cc.a2m, &a));
    check(
        worst <= CHART_TOL,
        || format!("round trip error {worst:.3e}"),
        || json!({"point": wire::hirz_value(&d), "plane": wire::plane_value(&p), "A": wire::matrix_value(&a), "m": m}),
    )
}

fn hirz_chart_commutator(case: &mut Case) -> Result<Outcome> {
    let (d, _) = case.hirz()?;
    let mut worst: f64 = 0.0;
    for m in hirz::chart_set(&d, case.tol)? {
        let cc = hirz::to_chart(&d, m, case.tol)?;
        worst = worst.max(plane::commutator_residual(&cc.bm, &cc.em));
    }
    check(
        worst <= CHART_TOL,
        || format!("[B, E] residual {worst:.3e}"),
        || json!({"point": wire::hirz_value(&d)}),
    )
}

fn hirz_p1_soundness(case: &mut Case) -> Result<Outcome> {
    let (valid, _) = case.hirz()?;
    if !(case.ops.validate_p1)(&valid, case.tol)?.passed() {
        return fail("(P1) rejects valid data", json!({"point": wire::hirz_value(&valid)}));
    }
    // C from an arbitrary D: the first family holds, the second needs [B, D A] = 0.
    let m = case.chart();
    let b = random_matrix(&mut case.rng, case.c, case.c);
    let dm = random_matrix(&mut case.rng, case.c, case.c);
    let a = case.gauge();
    let ang = angle_pair(case.c, m as i64)?;
    let (cm, sm) = (C64::new(ang.cos_val, 0.0), C64::new(ang.sin_val, 0.0));
    let id = linalg::identity(case.c);
    let d = HirzADHM::new(
        &a * (&b * cm + &id * sm),
        &a * (&id * cm - &b * sm),
        hirz::reconstruct_c(&b, &dm, m as i64, case.n, case.c)?,
        random_matrix(&mut case.rng, 1, case.c),
    )?;
    if !(case.ops.validate_p1)(&d, case.tol)?.passed() {
        return Ok(Outcome::Pass);
    }
    let cc = hirz::to_chart(&d, m, case.tol)?;
    let r = plane::commutator_residual(&cc.bm, &cc.em);
    check(
        r <= CHART_TOL,
        || format!("(P1) accepted data whose chart {m} has [B, E] residual {r:.3e}"),
        || json!({"point": wire::hirz_value(&d), "m": m}),
    )
}

fn hirz_reconstruct_c(case: &mut Case) -> Result<Outcome> {
    let p = case.plane()?;
    let a = case.gauge();
    let m = case.chart();
    let dm = &p.b2 * linalg::inverse(&a, case.tol, "A")?;
    let cs = hirz::reconstruct_c(&p.b1, &dm, m as i64, case.n, case.c)?;
    let recovered = hirz::d_matrix(&cs, &angle_pair(case.c, m as i64)?)?;
    let ang = angle_pair(case.c, m as i64)?;
    let (cm, sm) = (C64::new(ang.cos_val, 0.0), C64::new(ang.sin_val, 0.0));
    let id = linalg::identity(case.c);
    let d = HirzADHM::new(
        &a * (&p.b1 * cm + &id * sm),
        &a * (&id * cm - &p.b1 * sm),
        cs,
        p.e.clone(),
    )?;
    let p1 = hirz::validate_p1(&d, case.tol)?;
    let err = linalg::rel_distance(&recovered, &dm);
    check(
        p1.passed() && err <= CHART_TOL,
        || format!("(P1) {:?}, D recovery error {err:.3e}", p1.verdict()),
        || json!({"plane": wire::plane_value(&p), "A": wire::matrix_value(&a), "m": m, "n": case.n}),
    )
}

fn hirz_p3_oracles_agree(case: &mut Case) -> Result<Outcome> {
    let valid = case.rng.random_bool(0.5);
    let d = if valid {
        case.hirz()?.0
    } else {
        let m = case.chart();
        let killed = case.rng.random_range(0..case.c);
        let p = plane_candidate(&mut case.rng, case.c, case.cond_cap, None, Some(killed))?;
        let a = case.gauge();
        hirz::from_chart_unchecked(m, &p, &a, case.n, case.tol)?
    };
    let chart = hirz::validate_p3(&d, case.tol)?.verdict();
    let direct = hirz::validate_p3_direct(&d, case.tol)?.verdict();
    let expected = if valid { Verdict::Pass } else { Verdict::Fail };
    let data = || json!({"point": wire::hirz_value(&d)});
    if chart != expected {
        return fail(format!("chart route gives {chart:?} on a {expected:?} point"), data());
    }
    match direct {
        Verdict::Indeterminate => Ok(Outcome::Indeterminate("direct check indeterminate".into())),
        v if v == chart => Ok(Outcome::Pass),
        v => fail(format!("chart route {chart:?}, direct {v:?}"), data()),
    }
}

fn hirz_syst_rank(case: &mut Case) -> Result<Outcome> {
    let (n, c) = (case.n, case.c);
    let expected = (n - 1) * c * c;
    let (d, _) = case.hirz()?;
    let generic = hirz::syst_rank(&d.a1, &d.a2, n, case.tol)?;
    let mut a1 = random_matrix(&mut case.rng, c, c);
    let mut a2 = random_matrix(&mut case.rng, c, c);
    a1.row_mut(c - 1).fill(C64::new(0.0, 0.0));
    a2.row_mut(c - 1).fill(C64::new(0.0, 0.0));
    let degenerate = hirz::syst_rank(&a1, &a2, n, case.tol)?;
    let sys = hirz::system_matrix(&d.a1, &d.a2, n)?;
    let x = linalg::ComplexVector::from_iterator(
        n * c * c,
        d.cs.iter().flat_map(|m| (0..c).flat_map(move |i| (0..c).map(move |j| m[(i, j)]))),
    );
    let resid = (&sys * &x).norm() / (linalg::fro_norm(&sys) * x.norm()).max(f64::MIN_POSITIVE);
    check(
        generic == expected && degenerate < expected && resid <= CHART_TOL,
        || format!("rank {generic} (expected {expected}), degenerate rank {degenerate}, residual {resid:.3e}"),
        || json!({"point": wire::hirz_value(&d)}),
    )
}

fn hirz_zeta_equivariance(case: &mut Case) -> Result<Outcome> {
    let (d, m) = case.hirz()?;
    let (phi1, phi2) = (case.gauge(), case.gauge());
    let g = hirz::act_gl2(&d, &phi1, &phi2, case.tol)?;
    let cc = hirz::to_chart(&d, m, case.tol)?;
    let inv1 = linalg::inverse(&phi1, case.tol, "phi1")?;
    let expected = ChartCoords {
        bm: &phi1 * &cc.bm * &inv1,
        em: &phi1 * &cc.em * &inv1,
        e: &cc.e * &inv1,
        a2m: &phi2 * &cc.a2m * &inv1,
        ..cc.clone()
    };
    let dist = hirz::to_chart(&g, m, case.tol)?.distance(&expected);
    check(
        dist <= CHART_TOL,
        || format!("equivariance error {dist:.3e} on chart {m}"),
        || json!({"point": wire::hirz_value(&d), "phi1": wire::matrix_value(&phi1), "phi2": wire::matrix_value(&phi2), "m": m}),
    )
}

fn hirz_glueing_triangle(case: &mut Case) -> Result<Outcome> {
    let (d, m) = case.hirz()?;
    let l = case.other_chart(m);
    if !hirz::chart_set(&d, case.tol)?.contains(&l) {
        return Ok(Outcome::Skip(format!("chart {l} not in the chart set")));
    }
    let cm = hirz::to_chart(&d, m, case.tol)?;
    if !case.overlap_ok(&cm.bm, m, l)? {
        return Ok(Outcome::Skip("outside the conditioned overlap".into()));
    }
    let glued = hirz::transition_omega_with(&cm, l, case.tol, case.ops.transition_plane)?;
    let dist = glued.distance(&hirz::to_chart(&d, l, case.tol)?);
    check(
        dist <= TRANSITION_TOL,
        || format!("glueing {m} -> {l} off by {dist:.3e}"),
        || json!({"point": wire::hirz_value(&d), "m": m, "l": l}),
    )
}

fn hirz_jacobian_dimension(case: &mut Case) -> Result<Outcome> {
    let (d, _) = case.hirz()?;
    let expected = 2 * case.c * case.c + 2 * case.c;
    match hirz::jacobian_nullity(&d, case.tol) {
        Ok(k) => check(
            k == expected,
            || format!("nullity {k}, expected {expected}"),
            || json!({"point": wire::hirz_value(&d)}),
        ),
        Err(AdhmError::Indeterminate(why)) => fail(why, json!({"point": wire::hirz_value(&d)})),
        Err(e) => Err(e),
    }
}

fn hirz_canonical_orbit(case: &mut Case) -> Result<Outcome> {
    let (d, _) = case.hirz()?;
    let k = hirz::canonicalize(&d, case.tol)?;
    let witness = hirz::act_gl2(&d, &k.phi1, &k.phi2, case.tol)?.distance(&k.point);
    let again = hirz::canonicalize(&k.point, case.tol)?.point.distance(&k.point);
    let (phi1, phi2) = (case.gauge(), case.gauge());
    let g = hirz::act_gl2(&d, &phi1, &phi2, case.tol)?;
    let reflexive = hirz::orbit_equal(&d, &d, case.tol)?;
    let invariant = hirz::orbit_equal(&d, &g, case.tol)?;
    let eq = case.tol.eq_rel_tol;
    check(
        witness <= eq && again <= eq && reflexive && invariant,
        || format!("witness {witness:.3e}, idempotence {again:.3e}, reflexive {reflexive}, gauge invariant {invariant}"),
        || json!({"point": wire::hirz_value(&d), "phi1": wire::matrix_value(&phi1), "phi2": wire::matrix_value(&phi2)}),
    )
}

fn hirz_orbit_separation(case: &mut Case) -> Result<Outcome> {
    let (d1, _) = case.hirz()?;
    let (d2, _) = case.hirz()?;
    let s1 = geometry::base_support(&d1, case.tol)?.base;
    let s2 = geometry::base_support(&d2, case.tol)?.base;
    if forms::proj_multiset_distance(&s1, &s2).unwrap_or(f64::INFINITY) <= 1e-6 {
        return Ok(Outcome::Skip("supports coincide".into()));
    }
    check(
        !hirz::orbit_equal(&d1, &d2, case.tol)?,
        || "points with distinct supports reported orbit-equal".into(),
        || json!({"first": wire::hirz_value(&d1), "second": wire::hirz_value(&d2)}),
    )
}

fn geometry_pencil_equivariance(case: &mut Case) -> Result<Outcome> {
    let a1 = random_matrix(&mut case.rng, case.c, case.c);
    let a2 = random_matrix(&mut case.rng, case.c, case.c);
    let (phi1, phi2) = (case.gauge(), case.gauge());
    let inv1 = linalg::inverse(&phi1, case.tol, "phi1")?;
    let f = geometry::pencil_form(&a1, &a2, case.tol)?.form;
    let g = geometry::pencil_form(&(&phi2 * &a1 * &inv1), &(&phi2 * &a2 * &inv1), case.tol)?.form;
    let factor = linalg::determinant(&phi2)? / linalg::determinant(&phi1)?;
    let err = f
        .coeffs
        .iter()
        .zip(&g.coeffs)
        .map(|(x, y)| (x * factor - y).norm())
        .fold(0.0, f64::max);
    let scale = g.max_coeff().max(f.max_coeff() * factor.norm());
    check(
        err <= CHART_TOL * scale,
        || format!("equivariance error {err:.3e} at scale {scale:.3e}"),
        || json!({"A1": wire::matrix_value(&a1), "A2": wire::matrix_value(&a2)}),
    )
}

fn geometry_base_support_gauge(case: &mut Case) -> Result<Outcome> {
    let (d, _) = case.hirz()?;
    let (phi1, phi2) = (case.gauge(), case.gauge());
    let g = hirz::act_gl2(&d, &phi1, &phi2, case.tol)?;
    let (s0, s1) = (
        geometry::base_support(&d, case.tol)?.base,
        geometry::base_support(&g, case.tol)?.base,
    );
    let dist = forms::proj_multiset_distance(&s0, &s1).unwrap_or(f64::INFINITY);
    check(
        dist <= case.tol.root_cluster_tol,
        || format!("base support moved by {dist:.3e}"),
        || json!({"point": wire::hirz_value(&d), "phi1": wire::matrix_value(&phi1), "phi2": wire::matrix_value(&phi2)}),
    )
}

fn geometry_spectrum_vs_pencil(case: &mut Case) -> Result<Outcome> {
    let (d, _) = case.hirz()?;
    for m in hirz::chart_set(&d, case.tol)? {
        if !geometry::spectrum_vs_pencil_check(&d, m, case.tol)? {
            return fail(format!("chart {m}"), json!({"point": wire::hirz_value(&d), "m": m}));
        }
    }
    Ok(Outcome::Pass)
}

/// Accuracy of supports recovered from constructed data.
pub const SUPPORT_TOL: f64 = 1e-7;

fn geometry_points_support(case: &mut Case) -> Result<Outcome> {
    let pts = case.points();
    let m = case.chart();
    let a = case.gauge();
    let d = hirz::from_chart(m, &plane::from_points(&pts, case.tol)?, &a, case.n, case.tol)?;
    let expected: Vec<ProjPoint> = pts
        .iter()
        .map(|(z, _)| geometry::base_point_of(*z, m, case.c))
        .collect::<Result<_>>()?;
    let base = geometry::base_support(&d, case.tol)?.base;
    let dist = forms::proj_multiset_distance(&base, &expected).unwrap_or(f64::INFINITY);
    let pairs = geometry::chart_support(&d, m, case.tol)?
        .chart_pairs
        .map(|(_, p)| p)
        .unwrap_or_default();
    let pairs_ok = plane::pair_spectra_match(&pairs, &pts, SUPPORT_TOL);
    check(
        dist <= SUPPORT_TOL && pairs_ok,
        || format!("base error {dist:.3e}, pairs match {pairs_ok}"),
        || json!({"point": wire::hirz_value(&d), "m": m}),
    )
}

fn geometry_cross_chart(case: &mut Case) -> Result<Outcome> {
    let pts = case.points();
    let p = plane::from_points(&pts, case.tol)?;
    let m = case.chart();
    let l = case.other_chart(m);
    if !case.overlap_ok(&p.b1, m, l)? {
        return Ok(Outcome::Skip("outside the conditioned overlap".into()));
    }
    let ang = angle_pair(case.c, m as i64 - l as i64)?;
    let (c, s) = (ang.cos_val, ang.sin_val);
    let moved: Vec<(C64, C64)> = pts
        .iter()
        .map(|(z, w)| ((z * c + s) / (c - z * s), (c - z * s).powu(case.n as u32) * w))
        .collect();
    let t = (case.ops.transition_plane)(&p, m as i64, l as i64, case.n, case.c, case.tol)?;
    let from_transition = plane::joint_spectrum(&t, case.tol)?;
    let a = case.gauge();
    let d = hirz::from_chart(m, &p, &a, case.n, case.tol)?;
    let from_chart = geometry::chart_support(&d, l, case.tol)?
        .chart_pairs
        .map(|(_, p)| p)
        .unwrap_or_default();
    let ok = plane::pair_spectra_match(&from_transition, &moved, TRANSITION_TOL)
        && plane::pair_spectra_match(&from_chart, &moved, TRANSITION_TOL);
    check(
        ok,
        || format!("support pairs on chart {l} do not follow the fibre map from chart {m}"),
        || json!({"plane": wire::plane_value(&p), "m": m, "l": l, "n": case.n}),
    )
}

fn geometry_um_cover(case: &mut Case) -> Result<Outcome> {
    let x: Vec<C64> = (0..=case.c).map(|_| random_complex(&mut case.rng)).collect();
    for m in 0..=case.c {
        if geometry::um_membership(&x, m, case.c, case.tol)? {
            return Ok(Outcome::Pass);
        }
    }
    fail(
        "point lies in no U_m",
        json!({"x": x.iter().map(|z| wire::complex_value(*z)).collect::<Vec<_>>()}),
    )
}

fn geometry_chart_cover(case: &mut Case) -> Result<Outcome> {
    let (d, m) = case.hirz()?;
    let charts = hirz::chart_set(&d, case.tol)?;
    check(
        charts.contains(&m),
        || format!("generating chart {m} missing from {charts:?}"),
        || json!({"point": wire::hirz_value(&d)}),
    )
}

fn random_ytilde(case: &mut Case) -> YTildePoint {
    let n = case.n as u32;
    let zero = C64::new(0.0, 0.0);
    let (y1, y2) = match case.rng.random_range(0..10) {
        0 => (zero, random_complex(&mut case.rng)),
        1 => (random_complex(&mut case.rng), zero),
        _ => (random_complex(&mut case.rng), random_complex(&mut case.rng)),
    };
    let x = random_complex(&mut case.rng);
    let (x1, x2) = if n == 1 {
        (x, x)
    } else if y2 == zero {
        (zero, x)
    } else {
        (x, x * (y1 / y2).powu(n - 1))
    };
    YTildePoint { y1, y2, x1, x2 }
}

fn geometry_c1_ytilde(case: &mut Case) -> Result<Outcome> {
    let p = random_ytilde(case);
    let d = geometry::ytilde_to_p1(&p, case.n)?;
    let v = hirz::validate(&d, case.tol)?;
    let data = || json!({"point": wire::ytilde_value(&p), "n": case.n});
    if v.verdict() != Verdict::Pass {
        return fail(format!("output fails validation: {:?}", v.report.checks), data());
    }
    if p.y1.norm() > 0.0 && p.y2.norm() > 0.0 {
        let a = geometry::ytilde_to_p1_via(&p, case.n, 1)?;
        let b = geometry::ytilde_to_p1_via(&p, case.n, 2)?;
        let dist = a.distance(&b);
        if dist > 1e-12 {
            return fail(format!("branches differ by {dist:.3e}"), data());
        }
    }
    Ok(Outcome::Pass)
}

fn geometry_c1_tot(case: &mut Case) -> Result<Outcome> {
    let p = random_ytilde(case);
    let d = geometry::ytilde_to_p1(&p, case.n)?;
    let t = geometry::p1_to_tot(&d, case.tol)?;
    let data = || json!({"point": wire::ytilde_value(&p), "n": case.n});
    let r = t.relation_residual(case.n);
    let expected = [p.y1, p.y2, p.x1 * p.y2, p.x2 * p.y1];
    let got = [t.y1, t.y2, t.u1, t.u2];
    let scale = expected.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let composite = expected.iter().zip(&got).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
    let mut unit = || {
        let z = random_complex(&mut case.rng);
        linalg::scalar_matrix(z / z.norm() * (case.rng.random::<f64>() * 4.0 - 2.0).exp())
    };
    let (phi1, phi2) = (unit(), unit());
    let g = hirz::act_gl2(&d, &phi1, &phi2, case.tol)?;
    let same = geometry::p1_to_tot(&g, case.tol)?.same_class(&t, 1e-12);
    let orbit = hirz::orbit_equal(&d, &g, case.tol)?;
    if r <= geometry::RELATION_TOL && composite <= 1e-12 && same && orbit {
        Ok(Outcome::Pass)
    } else {
        fail(
            format!("relation {r:.3e}, composite error {composite:.3e}, class kept {same}, orbit equal {orbit}"),
            data(),
        )
    }
}

/// Ranges and sampling for [`run_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub c_min: usize,
    pub c_max: usize,
    /// Cases per property.
    pub samples: usize,
    pub cond_cap: f64,
    /// Substring filter on property names.
    pub filter: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_min: 1,
            n_max: 3,
            c_min: 1,
            c_max: 6,
            samples: 100,
            cond_cap: DEFAULT_COND_CAP,
            filter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub case: usize,
    pub seed: u64,
    pub n: usize,
    pub c: usize,
    pub message: String,
    pub data: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub cases: usize,
    pub passed: usize,
    pub skipped: usize,
    pub indeterminate: usize,
    pub failures: Vec<Failure>,
}

impl PropertyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub properties: Vec<PropertyReport>,
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyReport::ok)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.property == name)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn name_hash(name: &str) -> u64 {
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of case `k` of property `name` in a suite seeded with `seed`.
pub fn case_seed(seed: u64, name: &str, k: usize) -> u64 {
    splitmix(seed ^ name_hash(name) ^ splitmix(k as u64))
}

fn draw(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

fn ranges(p: &Property, cfg: &SuiteConfig) -> Option<((usize, usize), (usize, usize))> {
    let n = (cfg.n_min.max(p.n_min).max(1), p.n_cap.map_or(cfg.n_max, |k| k.min(cfg.n_max)));
    let c = (cfg.c_min.max(1), p.c_cap.map_or(cfg.c_max, |k| k.min(cfg.c_max)));
    (n.0 <= n.1 && c.0 <= c.1).then_some((n, c))
}

/// Runs one case of a property. Errors and panics count as failures.
pub fn replay(
    p: &Property,
    seed: u64,
    n: usize,
    c: usize,
    cond_cap: f64,
    tol: &ToleranceConfig,
    ops: &SuiteOps,
) -> Outcome {
    let mut case = Case {
        rng: ChaCha8Rng::seed_from_u64(seed),
        n,
        c,
        cond_cap,
        tol,
        ops,
    };
    match catch_unwind(AssertUnwindSafe(|| (p.run)(&mut case))) {
        Ok(Ok(outcome)) => outcome,
        Ok(Err(e)) => Outcome::Fail {
            message: format!("error: {e}"),
            data: Value::Null,
        },
        Err(panic) => Outcome::Fail {
            message: format!(
                "panic: {}",
                panic
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| panic.downcast_ref::<&str>().copied())
                    .unwrap_or("unknown")
            ),
            data: Value::Null,
        },
    }
}

fn run_property(p: &Property, cfg: &SuiteConfig, tol: &ToleranceConfig, ops: &SuiteOps) -> PropertyReport {
    let mut report = PropertyReport {
        property: p.name.to_string(),
        cases: 0,
        passed: 0,
        skipped: 0,
        indeterminate: 0,
        failures: Vec::new(),
    };
    let Some(((n_lo, n_hi), (c_lo, c_hi))) = ranges(p, cfg) else {
        return report;
    };
    for k in 0..cfg.samples {
        let seed = case_seed(cfg.seed, p.name, k);
        let mut shape = ChaCha8Rng::seed_from_u64(splitmix(seed));
        let n = draw(&mut shape, n_lo, n_hi);
        let c = draw(&mut shape, c_lo, c_hi);
        report.cases += 1;
        match replay(p, seed, n, c, cfg.cond_cap, tol, ops) {
            Outcome::Pass => report.passed += 1,
            Outcome::Skip(_) => report.skipped += 1,
            Outcome::Indeterminate(_) => report.indeterminate += 1,
            Outcome::Fail { message, data } => report.failures.push(Failure {
                case: k,
                seed,
                n,
                c,
                message,
                data,
            }),
        }
    }
    report
}

/// Runs every registered property matching the filter, one thread per property.
pub fn run_suite(cfg: &SuiteConfig, tol: &ToleranceConfig, ops: &SuiteOps) -> SuiteReport {
    let selected: Vec<&Property> = PROPERTIES
        .iter()
        .filter(|p| cfg.filter.as_deref().is_none_or(|f| p.name.contains(f)))
        .collect();
    let mut warnings = Vec::new();
    if selected.is_empty() {
        warnings.push("no property matches the filter".to_string());
    }
    if cfg.samples == 0 {
        warnings.push("zero samples: every property passes vacuously".to_string());
    }
    for p in &selected {
        if ranges(p, cfg).is_none() {
            warnings.push(format!("{}: empty (n, c) range, passes vacuously", p.name));
        }
    }
    let properties = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|p| scope.spawn(move || run_property(p, cfg, tol, ops)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("property runner"))
            .collect()
    });
    SuiteReport { properties, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn generators_are_deterministic_and_valid() {
        let cfg = GenConfig::new(42, 1, 3);
        let a = gen_plane_valid(&cfg).unwrap();
        assert_eq!(a, gen_plane_valid(&cfg).unwrap());
        assert!(plane::validate_plane(&a, &tol()).unwrap().passed());

        let cfg = GenConfig::new(7, 2, 3);
        let (d, m) = gen_hirz_valid_with_chart(&cfg).unwrap();
        assert_eq!(d, gen_hirz_valid(&cfg).unwrap());
        let p1 = hirz::validate_p1(&d, &tol()).unwrap();
        assert!(p1.checks.iter().all(|c| c.residual.unwrap() < 1e-10));
        assert!(hirz::chart_set(&d, &tol()).unwrap().contains(&m));
    }

    #[test]
    fn scalar_generation() {
        let p = gen_plane_valid(&GenConfig::new(3, 1, 1)).unwrap();
        assert!(p.e[(0, 0)].norm() > 0.0);
    }

    #[test]
    fn bad_config_rejected() {
        let mut cfg = GenConfig::new(0, 1, 1);
        cfg.cond_cap = 1.0;
        assert!(gen_plane_valid(&cfg).is_err());
        assert!(gen_hirz_valid(&GenConfig::new(0, 0, 1)).is_err());
    }

    #[test]
    fn well_conditioned_gauges() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=6 {
            let g = random_well_conditioned(&mut rng, k, DEFAULT_COND_CAP);
            assert!(linalg::condition_number(&g) <= GAUGE_SPREAD * (1.0 + 1e-9));
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = PROPERTIES.iter().map(|p| p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), PROPERTIES.len());
    }

    #[test]
    fn empty_ranges_pass_vacuously() {
        let cfg = SuiteConfig {
            samples: 0,
            filter: Some("sigma".into()),
            ..SuiteConfig::default()
        };
        let r = run_suite(&cfg, &tol(), &SuiteOps::default());
        assert!(r.passed());
        assert!(!r.warnings.is_empty());
        assert!(r.properties.iter().all(|p| p.cases == 0));
    }

    #[test]
    fn small_suite_passes() {
        let cfg = SuiteConfig {
            samples: 4,
            n_max: 2,
            c_max: 3,
            ..SuiteConfig::default()
        };
        let r = run_suite(&cfg, &tol(), &SuiteOps::default());
        let bad: Vec<_> = r.properties.iter().filter(|p| !p.ok()).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn failures_replay() {
        let ops = SuiteOps {
            transition_plane: mutants::transition_flipped_angle,
            ..SuiteOps::default()
        };
        let cfg = SuiteConfig {
            samples: 10,
            c_min: 2,
            c_max: 3,
            filter: Some("hirz.glueing_triangle".into()),
            ..SuiteConfig::default()
        };
        let r = run_suite(&cfg, &tol(), &ops);
        let f = &r.properties[0].failures[0];
        let p = property("hirz.glueing_triangle").unwrap();
        let again = replay(p, f.seed, f.n, f.c, cfg.cond_cap, &tol(), &ops);
        assert!(matches!(again, Outcome::Fail { message, .. } if message == f.message));
    }
}
