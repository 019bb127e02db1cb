//! Binary forms and points of the projective line.

use serde::{Deserialize, Serialize};

use crate::error::{AdhmError, Result};
use crate::linalg::{self, C64, ComplexMatrix};
use crate::tolerance::ToleranceConfig;

/// A point `[lam1 : lam2]` of P^1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjPoint {
    pub lam1: C64,
    pub lam2: C64,
}

impl ProjPoint {
    /// Normalizes so that the coordinate of larger modulus becomes exactly 1
    /// (ties divide by `lam2`).
    pub fn new(lam1: C64, lam2: C64) -> Result<Self> {
        if !(lam1.re.is_finite() && lam1.im.is_finite() && lam2.re.is_finite() && lam2.im.is_finite()) {
            return Err(AdhmError::NonFinite("projective point"));
        }
        if lam1.norm() == 0.0 && lam2.norm() == 0.0 {
            return Err(AdhmError::Domain("[0 : 0] is not a point of P^1".into()));
        }
        Ok(Self::normalize(lam1, lam2))
    }

    fn normalize(lam1: C64, lam2: C64) -> Self {
        if lam1.norm() > lam2.norm() {
            Self {
                lam1: C64::new(1.0, 0.0),
                lam2: lam2 / lam1,
            }
        } else {
            Self {
                lam1: lam1 / lam2,
                lam2: C64::new(1.0, 0.0),
            }
        }
    }

    pub fn normalized(&self) -> Self {
        Self::normalize(self.lam1, self.lam2)
    }

    pub fn infinity() -> Self {
        Self {
            lam1: C64::new(1.0, 0.0),
            lam2: C64::new(0.0, 0.0),
        }
    }

    pub fn zero() -> Self {
        Self {
            lam1: C64::new(0.0, 0.0),
            lam2: C64::new(1.0, 0.0),
        }
    }

    /// Chordal distance `|a1 b2 - a2 b1| / (|a| |b|)`, in `[0, 1]`.
    pub fn distance(&self, other: &Self) -> f64 {
        let na = (self.lam1.norm_sqr() + self.lam2.norm_sqr()).sqrt();
        let nb = (other.lam1.norm_sqr() + other.lam2.norm_sqr()).sqrt();
        (self.lam1 * other.lam2 - self.lam2 * other.lam1).norm() / (na * nb)
    }

    pub fn swapped(&self) -> Self {
        Self::normalize(self.lam2, self.lam1)
    }
}

/// `sum_p coeffs[p] * nu1^(degree-p) * nu2^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryForm {
    pub coeffs: Vec<C64>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(AdhmError::Shape("binary form needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(AdhmError::NonFinite("binary form"));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, nu1: C64, nu2: C64) -> C64 {
        let d = self.degree();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(p, a)| a * nu1.powu((d - p) as u32) * nu2.powu(p as u32))
            .sum()
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when every coefficient is at or below `rel` times `reference`.
    pub fn vanishes(&self, rel: f64, reference: f64) -> bool {
        self.max_coeff() <= rel * reference
    }

    /// Divides by the coefficient of largest modulus (first one on ties).
    pub fn normalized(&self) -> Result<Self> {
        let (idx, top) = self
            .coeffs
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        if top == 0.0 {
            return Err(AdhmError::ZeroForm);
        }
        let pivot = self.coeffs[idx];
        Ok(Self {
            coeffs: self.coeffs.iter().map(|z| z / pivot).collect(),
        })
    }

    /// Product of two forms.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// The linear form `lam2 * nu1 - lam1 * nu2`, vanishing exactly at `[lam1 : lam2]`.
    pub fn linear_through(p: &ProjPoint) -> Self {
        Self {
            coeffs: vec![p.lam2, -p.lam1],
        }
    }

    /// Swaps the roles of the two variables.
    pub fn swapped(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().rev().copied().collect(),
        }
    }
}

/// Coefficients of `det(nu1 A1 + nu2 A2)` in the basis `nu1^(c-p) nu2^p`.
///
/// The determinant is sampled at `nu = (1, t_k)` for the `c + 1` roots of unity
/// `t_k` and the interpolation system is solved by the inverse discrete
/// Fourier transform.
pub fn pencil_determinant(a1: &ComplexMatrix, a2: &ComplexMatrix) -> Result<BinaryForm> {
    let c = linalg::ensure_square(a1, "A1")?;
    if a2.shape() != (c, c) {
        return Err(AdhmError::Shape(format!("A2 must be {c}x{c}")));
    }
    linalg::ensure_finite(a1, "A1")?;
    linalg::ensure_finite(a2, "A2")?;
    let samples = c + 1;
    let nodes: Vec<C64> = (0..samples)
        .map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / samples as f64))
        .collect();
    let values: Vec<C64> = nodes
        .iter()
        .map(|t| linalg::determinant(&(a1 + a2 * *t)))
        .collect::<Result<_>>()?;
    let coeffs = (0..samples)
        .map(|p| {
            nodes
                .iter()
                .zip(&values)
                .map(|(t, v)| v * t.powi(-(p as i32)))
                .sum::<C64>()
                / samples as f64
        })
        .collect();
    BinaryForm::new(coeffs)
}

/// Roots of a monic-izable polynomial `sum_k poly[k] x^k` (`poly.last()` nonzero)
/// from the eigenvalues of its companion matrix.
fn companion_roots(poly: &[C64]) -> Result<Vec<C64>> {
    let d = poly.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = poly[d];
    if d == 1 {
        return Ok(vec![-poly[0] / lead]);
    }
    let mut comp = ComplexMatrix::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        comp[(i, d - 1)] = -poly[i] / lead;
    }
    linalg::eigenvalues(&comp)
}

/// Coefficients whose modulus is below this fraction of the largest one are
/// read as exact zeros when counting roots at `[1:0]` and `[0:1]`.
const COEFF_NOISE: f64 = 64.0 * f64::EPSILON;

/// All `degree` roots in P^1, with multiplicity, clustered under
/// `root_cluster_tol`.
pub fn binary_form_roots(f: &BinaryForm, tol: &ToleranceConfig) -> Result<Vec<ProjPoint>> {
    let top = f.max_coeff();
    if top == 0.0 {
        return Err(AdhmError::ZeroForm);
    }
    let c = f.degree();
    let zero = |z: &C64| z.norm() <= COEFF_NOISE * top;
    let lead_zeros = f.coeffs.iter().take_while(|z| zero(z)).count();
    let trail_zeros = f.coeffs.iter().rev().take_while(|z| zero(z)).count();

    let mut roots = Vec::with_capacity(c);
    roots.extend(std::iter::repeat_n(ProjPoint::infinity(), lead_zeros));
    roots.extend(std::iter::repeat_n(ProjPoint::zero(), trail_zeros));

    let mid = &f.coeffs[lead_zeros..=c - trail_zeros];
    if mid.len() > 1 {
        let first = mid[0];
        let last = mid[mid.len() - 1];
        if first.norm() >= last.norm() {
            // nu2 = 1: polynomial in s = nu1 with leading coefficient `first`
            let poly: Vec<C64> = mid.iter().rev().copied().collect();
            for s in companion_roots(&poly)? {
                roots.push(ProjPoint::new(s, C64::new(1.0, 0.0))?);
            }
        } else {
            // nu1 = 1: polynomial in t = nu2 with leading coefficient `last`
            for t in companion_roots(mid)? {
                roots.push(ProjPoint::new(C64::new(1.0, 0.0), t)?);
            }
        }
    }
    Ok(cluster_roots(roots, tol.root_cluster_tol))
}

/// Single-linkage clustering; each cluster is replaced by its centroid taken
/// in a common affine chart.
fn cluster_roots(roots: Vec<ProjPoint>, radius: f64) -> Vec<ProjPoint> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if roots[i].distance(&roots[j]) < radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for i in 0..n {
        let root = find(&mut label, i);
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let members: Vec<ProjPoint> = (0..n)
            .filter(|&j| find(&mut label, j) == root)
            .map(|j| roots[j])
            .collect();
        let lead = members[0];
        let use_first = lead.lam1.norm() >= lead.lam2.norm();
        let k = members.len() as f64;
        let centroid = if use_first {
            let t: C64 = members.iter().map(|p| p.lam2 / p.lam1).sum::<C64>() / k;
            ProjPoint::normalize(C64::new(1.0, 0.0), t)
        } else {
            let s: C64 = members.iter().map(|p| p.lam1 / p.lam2).sum::<C64>() / k;
            ProjPoint::normalize(s, C64::new(1.0, 0.0))
        };
        out.extend(std::iter::repeat_n(centroid, members.len()));
    }
    out
}

/// Greedy multiset comparison under the chordal metric; returns the worst
/// matched distance.
pub fn proj_multiset_distance(a: &[ProjPoint], b: &[ProjPoint]) -> Option<f64> {
    linalg::greedy_match(a, b, |x, y| x.distance(y))
}

/// Groups a root multiset into `(point, multiplicity)` entries.
pub fn with_multiplicity(roots: &[ProjPoint], radius: f64) -> Vec<(ProjPoint, usize)> {
    let mut out: Vec<(ProjPoint, usize)> = Vec::new();
    for r in roots {
        match out.iter_mut().find(|(p, _)| p.distance(r) < radius) {
            Some(entry) => entry.1 += 1,
            None => out.push((*r, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, real};
    use proptest::prelude::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn form(re: &[f64]) -> BinaryForm {
        BinaryForm::new(re.iter().map(|&x| real(x)).collect()).unwrap()
    }

    fn pp(a: C64, b: C64) -> ProjPoint {
        ProjPoint::new(a, b).unwrap()
    }

    #[test]
    fn normalization_is_idempotent() {
        let p = pp(c64(3.0, 1.0), c64(-1.0, 2.0));
        assert_eq!(p.normalized(), p);
        let q = pp(real(-1.0), real(1.0));
        assert_eq!(q.lam1, real(-1.0));
        assert_eq!(q.lam2, real(1.0));
        assert!(ProjPoint::new(real(0.0), real(0.0)).is_err());
    }

    #[test]
    fn product_of_coordinates() {
        // nu1 * nu2
        let roots = binary_form_roots(&form(&[0.0, 1.0, 0.0]), &tol()).unwrap();
        let expected = [ProjPoint::zero(), ProjPoint::infinity()];
        assert!(proj_multiset_distance(&roots, &expected).unwrap() < 1e-14);
    }

    #[test]
    fn double_root() {
        // (nu1 + nu2)^2
        let roots = binary_form_roots(&form(&[1.0, 2.0, 1.0]), &tol()).unwrap();
        assert_eq!(roots.len(), 2);
        let expected = pp(real(-1.0), real(1.0));
        for r in &roots {
            assert!(r.distance(&expected) < 1e-7);
        }
        assert_eq!(with_multiplicity(&roots, 1e-6).len(), 1);
        assert_eq!(roots[0], roots[1]);
    }

    #[test]
    fn sum_of_squares() {
        // nu1^2 + nu2^2 = (nu1 - i nu2)(nu1 + i nu2)
        let roots = binary_form_roots(&form(&[1.0, 0.0, 1.0]), &tol()).unwrap();
        let expected = [pp(c64(0.0, 1.0), real(1.0)), pp(c64(0.0, -1.0), real(1.0))];
        assert!(proj_multiset_distance(&roots, &expected).unwrap() < 1e-12);
    }

    #[test]
    fn pencil_of_diagonal_pair() {
        // det(nu1 diag(1,2) + nu2 I) = 2 nu1^2 + 3 nu1 nu2 + nu2^2
        let f = pencil_determinant(&linalg::diag(&[real(1.0), real(2.0)]), &linalg::identity(2)).unwrap();
        let expected = [2.0, 3.0, 1.0];
        for (a, b) in f.coeffs.iter().zip(expected) {
            assert!((a - real(b)).norm() < 1e-14);
        }
        let f = pencil_determinant(&linalg::scalar_matrix(c64(2.0, 1.0)), &linalg::scalar_matrix(real(-3.0))).unwrap();
        assert!((f.coeffs[0] - c64(2.0, 1.0)).norm() < 1e-15);
        assert!((f.coeffs[1] - real(-3.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_form_rejected() {
        assert_eq!(
            binary_form_roots(&form(&[0.0, 0.0]), &tol()),
            Err(AdhmError::ZeroForm)
        );
    }

    #[test]
    fn roots_at_infinity_from_leading_zeros() {
        // nu2^2 (nu1 - 2 nu2): coefficients of nu1^3, nu1^2 nu2 vanish
        let f = form(&[0.0, 0.0, 1.0, -2.0]);
        let roots = binary_form_roots(&f, &tol()).unwrap();
        let expected = [
            ProjPoint::infinity(),
            ProjPoint::infinity(),
            pp(real(2.0), real(1.0)),
        ];
        assert!(proj_multiset_distance(&roots, &expected).unwrap() < 1e-14);
    }

    fn point_strategy() -> impl Strategy<Value = ProjPoint> {
        (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, 0usize..10).prop_map(
            |(a, b, c, d, special)| match special {
                0 => ProjPoint::infinity(),
                1 => ProjPoint::zero(),
                _ => ProjPoint::new(c64(a, b), c64(1.0 + c.abs(), d)).unwrap(),
            },
        )
    }

    proptest! {
        #[test]
        fn factored_forms_recover_their_roots(points in prop::collection::vec(point_strategy(), 1..=8)) {
            let f = points
                .iter()
                .map(BinaryForm::linear_through)
                .reduce(|a, b| a.mul(&b))
                .unwrap();
            let roots = binary_form_roots(&f, &tol()).unwrap();
            prop_assert_eq!(roots.len(), points.len());
            // Random roots may coincide within the cluster radius; a cluster
            // of k nearby roots can move each member by about radius^(1/k).
            let d = proj_multiset_distance(&roots, &points).unwrap();
            prop_assert!(d < 1e-5, "distance {}", d);
        }

        #[test]
        fn normalization_idempotent(p in point_strategy()) {
            prop_assert_eq!(p.normalized(), p);
        }
    }
}
