//! JSON encoding of the domain types.
//!
//! Complex numbers are `[re, im]` (a bare number is read as a real scalar),
//! matrices are arrays of rows, and covectors `e` are flat arrays. Every
//! document carries a `kind` tag; on input the tag is optional but must match
//! when present.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{AdhmError, Result};
use crate::geometry::{TotPoint, YTildePoint};
use crate::hirz::{ChartCoords, HirzADHM};
use crate::linalg::{ComplexMatrix, C64};
use crate::plane::PlaneADHM;

pub const KIND_PLANE: &str = "plane_adhm";
pub const KIND_HIRZ: &str = "hirz_adhm";
pub const KIND_CHART: &str = "chart_coords";
pub const KIND_TOT: &str = "tot_point";
pub const KIND_YTILDE: &str = "ytilde_point";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireComplex {
    Pair([f64; 2]),
    Real(f64),
}

impl From<C64> for WireComplex {
    fn from(z: C64) -> Self {
        WireComplex::Pair([z.re, z.im])
    }
}

impl From<WireComplex> for C64 {
    fn from(w: WireComplex) -> Self {
        match w {
            WireComplex::Pair([re, im]) => C64::new(re, im),
            WireComplex::Real(re) => C64::new(re, 0.0),
        }
    }
}

pub type WireMatrix = Vec<Vec<WireComplex>>;

/// Covector: flat, or a single row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireCovector {
    Flat(Vec<WireComplex>),
    Nested(WireMatrix),
}

pub fn matrix_to_wire(m: &ComplexMatrix) -> WireMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

pub fn matrix_from_wire(w: &WireMatrix, what: &str) -> Result<ComplexMatrix> {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(AdhmError::Parse(format!("{what}: empty matrix")));
    }
    if let Some(i) = w.iter().position(|r| r.len() != cols) {
        return Err(AdhmError::Parse(format!(
            "{what}: row {i} has {} entries, expected {cols}",
            w[i].len()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| w[i][j].into()))
}

fn covector_to_wire(e: &ComplexMatrix) -> WireCovector {
    WireCovector::Flat((0..e.ncols()).map(|j| e[(0, j)].into()).collect())
}

fn covector_from_wire(w: &WireCovector) -> Result<ComplexMatrix> {
    match w {
        WireCovector::Flat(v) => {
            if v.is_empty() {
                return Err(AdhmError::Parse("e: empty covector".into()));
            }
            Ok(ComplexMatrix::from_fn(1, v.len(), |_, j| v[j].into()))
        }
        WireCovector::Nested(m) => {
            let e = matrix_from_wire(m, "e")?;
            if e.nrows() != 1 {
                return Err(AdhmError::Parse("e: expected a single row".into()));
            }
            Ok(e)
        }
    }
}

fn check_count(what: &str, declared: usize, actual: usize) -> Result<()> {
    if declared != actual {
        return Err(AdhmError::Shape(format!(
            "{what} declared as {declared} but the data have {actual}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub c: usize,
    pub b1: WireMatrix,
    pub b2: WireMatrix,
    pub e: WireCovector,
}

impl PlaneWire {
    pub fn from_domain(d: &PlaneADHM) -> Self {
        Self {
            kind: Some(KIND_PLANE.into()),
            c: d.c,
            b1: matrix_to_wire(&d.b1),
            b2: matrix_to_wire(&d.b2),
            e: covector_to_wire(&d.e),
        }
    }

    pub fn to_domain(&self) -> Result<PlaneADHM> {
        check_kind(&self.kind, KIND_PLANE)?;
        let d = PlaneADHM::new(
            matrix_from_wire(&self.b1, "b1")?,
            matrix_from_wire(&self.b2, "b2")?,
            covector_from_wire(&self.e)?,
        )?;
        check_count("c", self.c, d.c)?;
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HirzWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub n: usize,
    pub c: usize,
    #[serde(rename = "A1")]
    pub a1: WireMatrix,
    #[serde(rename = "A2")]
    pub a2: WireMatrix,
    #[serde(rename = "C")]
    pub cs: Vec<WireMatrix>,
    pub e: WireCovector,
}

impl HirzWire {
    pub fn from_domain(d: &HirzADHM) -> Self {
        Self {
            kind: Some(KIND_HIRZ.into()),
            n: d.n,
            c: d.c,
            a1: matrix_to_wire(&d.a1),
            a2: matrix_to_wire(&d.a2),
            cs: d.cs.iter().map(matrix_to_wire).collect(),
            e: covector_to_wire(&d.e),
        }
    }

    pub fn to_domain(&self) -> Result<HirzADHM> {
        check_kind(&self.kind, KIND_HIRZ)?;
        check_count("n (length of C)", self.n, self.cs.len())?;
        let cs = self
            .cs
            .iter()
            .enumerate()
            .map(|(q, m)| matrix_from_wire(m, &format!("C[{q}]")))
            .collect::<Result<_>>()?;
        let d = HirzADHM::new(
            matrix_from_wire(&self.a1, "A1")?,
            matrix_from_wire(&self.a2, "A2")?,
            cs,
            covector_from_wire(&self.e)?,
        )?;
        check_count("c", self.c, d.c)?;
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub m: usize,
    pub n: usize,
    pub c: usize,
    #[serde(rename = "B")]
    pub b: WireMatrix,
    #[serde(rename = "E")]
    pub e_mat: WireMatrix,
    pub e: WireCovector,
    #[serde(rename = "A2m")]
    pub a2m: WireMatrix,
}

impl ChartWire {
    pub fn from_domain(cc: &ChartCoords) -> Self {
        Self {
            kind: Some(KIND_CHART.into()),
            m: cc.m,
            n: cc.n,
            c: cc.c,
            b: matrix_to_wire(&cc.bm),
            e_mat: matrix_to_wire(&cc.em),
            e: covector_to_wire(&cc.e),
            a2m: matrix_to_wire(&cc.a2m),
        }
    }

    pub fn to_domain(&self) -> Result<ChartCoords> {
        check_kind(&self.kind, KIND_CHART)?;
        let cc = ChartCoords {
            m: self.m,
            n: self.n,
            c: self.c,
            bm: matrix_from_wire(&self.b, "B")?,
            em: matrix_from_wire(&self.e_mat, "E")?,
            e: covector_from_wire(&self.e)?,
            a2m: matrix_from_wire(&self.a2m, "A2m")?,
        };
        check_count("c", self.c, cc.bm.nrows())?;
        cc.check_shapes()?;
        Ok(cc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TotWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub y1: WireComplex,
    pub y2: WireComplex,
    pub u1: WireComplex,
    pub u2: WireComplex,
}

impl TotWire {
    pub fn from_domain(t: &TotPoint, n: usize) -> Self {
        Self {
            kind: Some(KIND_TOT.into()),
            n: Some(n),
            y1: t.y1.into(),
            y2: t.y2.into(),
            u1: t.u1.into(),
            u2: t.u2.into(),
        }
    }

    pub fn to_domain(&self) -> Result<TotPoint> {
        check_kind(&self.kind, KIND_TOT)?;
        Ok(TotPoint {
            y1: self.y1.into(),
            y2: self.y2.into(),
            u1: self.u1.into(),
            u2: self.u2.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YTildeWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub y1: WireComplex,
    pub y2: WireComplex,
    pub x1: WireComplex,
    pub x2: WireComplex,
}

impl YTildeWire {
    pub fn from_domain(p: &YTildePoint) -> Self {
        Self {
            kind: Some(KIND_YTILDE.into()),
            y1: p.y1.into(),
            y2: p.y2.into(),
            x1: p.x1.into(),
            x2: p.x2.into(),
        }
    }

    pub fn to_domain(&self) -> Result<YTildePoint> {
        check_kind(&self.kind, KIND_YTILDE)?;
        Ok(YTildePoint {
            y1: self.y1.into(),
            y2: self.y2.into(),
            x1: self.x1.into(),
            x2: self.x2.into(),
        })
    }
}

fn check_kind(found: &Option<String>, expected: &str) -> Result<()> {
    match found {
        Some(k) if k != expected => Err(AdhmError::Parse(format!(
            "kind \"{k}\" where \"{expected}\" was expected"
        ))),
        _ => Ok(()),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| AdhmError::Parse(e.to_string()))
}

pub fn parse_plane(text: &str) -> Result<PlaneADHM> {
    parse::<PlaneWire>(text)?.to_domain()
}

pub fn parse_hirz(text: &str) -> Result<HirzADHM> {
    parse::<HirzWire>(text)?.to_domain()
}

pub fn parse_chart(text: &str) -> Result<ChartCoords> {
    parse::<ChartWire>(text)?.to_domain()
}

pub fn parse_tot(text: &str) -> Result<TotPoint> {
    parse::<TotWire>(text)?.to_domain()
}

pub fn parse_ytilde(text: &str) -> Result<YTildePoint> {
    parse::<YTildeWire>(text)?.to_domain()
}

pub fn plane_value(d: &PlaneADHM) -> Value {
    serde_json::to_value(PlaneWire::from_domain(d)).expect("plane encodes")
}

pub fn hirz_value(d: &HirzADHM) -> Value {
    serde_json::to_value(HirzWire::from_domain(d)).expect("hirz encodes")
}

pub fn chart_value(cc: &ChartCoords) -> Value {
    serde_json::to_value(ChartWire::from_domain(cc)).expect("chart encodes")
}

pub fn tot_value(t: &TotPoint, n: usize) -> Value {
    serde_json::to_value(TotWire::from_domain(t, n)).expect("tot encodes")
}

pub fn ytilde_value(p: &YTildePoint) -> Value {
    serde_json::to_value(YTildeWire::from_domain(p)).expect("ytilde encodes")
}

pub fn complex_value(z: C64) -> Value {
    serde_json::json!([z.re, z.im])
}

pub fn matrix_value(m: &ComplexMatrix) -> Value {
    serde_json::to_value(matrix_to_wire(m)).expect("matrix encodes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, from_real_rows, real, scalar_matrix as sm};

    #[test]
    fn plane_round_trip_is_exact() {
        let d = PlaneADHM::new(
            from_real_rows(&[&[0.1, 1.0 / 3.0], &[0.0, 2.0]]),
            from_real_rows(&[&[1e-300, 0.0], &[0.0, 7.0]]),
            ComplexMatrix::from_fn(1, 2, |_, j| c64(std::f64::consts::PI, j as f64)),
        )
        .unwrap();
        let text = serde_json::to_string(&plane_value(&d)).unwrap();
        assert_eq!(parse_plane(&text).unwrap(), d);
    }

    #[test]
    fn hirz_round_trip_and_kind() {
        let d = HirzADHM::new(sm(real(2.0)), sm(real(1.0)), vec![sm(real(3.0)), sm(real(6.0))], sm(c64(1.0, -1.0)))
            .unwrap();
        let v = hirz_value(&d);
        assert_eq!(v["kind"], KIND_HIRZ);
        assert_eq!(parse_hirz(&v.to_string()).unwrap(), d);
        assert!(matches!(parse_plane(&v.to_string()), Err(AdhmError::Parse(_))));
    }

    #[test]
    fn bare_numbers_and_nested_covector() {
        let text = r#"{"c":1,"b1":[[2]],"b2":[[[5,0]]],"e":[[7]]}"#;
        assert_eq!(
            parse_plane(text).unwrap(),
            PlaneADHM::scalar(real(2.0), real(5.0), real(7.0))
        );
    }

    #[test]
    fn mismatched_c_list_rejected() {
        let text = r#"{"n":3,"c":1,"A1":[[1]],"A2":[[1]],"C":[[[1]],[[1]]],"e":[1]}"#;
        assert!(matches!(parse_hirz(text), Err(AdhmError::Shape(_))));
    }

    #[test]
    fn ragged_and_unknown_rejected() {
        assert!(parse_plane(r#"{"c":2,"b1":[[1,2],[3]],"b2":[[1,0],[0,1]],"e":[1,1]}"#).is_err());
        assert!(parse_plane(r#"{"c":1,"b1":[[1]],"b2":[[1]],"e":[1],"extra":0}"#).is_err());
        assert!(parse_plane("not json").is_err());
    }

    #[test]
    fn scalar_points_round_trip() {
        let t = TotPoint { y1: real(1.0), y2: real(2.0), u1: real(4.0), u2: real(1.0) };
        assert_eq!(parse_tot(&tot_value(&t, 2).to_string()).unwrap(), t);
        let y = YTildePoint { y1: real(1.0), y2: real(2.0), x1: real(2.0), x2: real(1.0) };
        assert_eq!(parse_ytilde(&ytilde_value(&y).to_string()).unwrap(), y);
    }
}
