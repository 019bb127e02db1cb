use std::fmt;
use std::io::Read;

use adhmkit::wire;
use adhmkit::{AdhmError, ChartCoords, ComplexMatrix, HirzADHM, PlaneADHM, YTildePoint};
use serde_json::{json, Value};

/// Machine-readable failure, printed as `{error, path, detail}`.
#[derive(Debug)]
pub struct Failure {
    pub error: &'static str,
    pub path: Option<String>,
    pub detail: String,
}

impl Failure {
    pub fn new(error: &'static str, path: Option<&str>, detail: impl fmt::Display) -> Self {
        Self {
            error,
            path: path.map(str::to_string),
            detail: detail.to_string(),
        }
    }

    pub fn usage(detail: impl fmt::Display) -> Self {
        Self::new("usage", None, detail)
    }

    pub fn from_lib(path: Option<&str>, e: AdhmError) -> Self {
        let error = match e {
            AdhmError::Parse(_) => "parse",
            AdhmError::Shape(_) | AdhmError::NonFinite(_) => "schema",
            AdhmError::Tolerance(_) => "tolerance",
            AdhmError::Indeterminate(_) => "indeterminate",
            AdhmError::Invalid(_) => "invalid",
            _ => "domain",
        };
        Self::new(error, path, e)
    }

    pub fn to_json(&self) -> Value {
        json!({"error": self.error, "path": self.path, "detail": self.detail})
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub trait Context<T> {
    fn at(self, path: &str) -> CliResult<T>;
}

impl<T> Context<T> for Result<T, AdhmError> {
    fn at(self, path: &str) -> CliResult<T> {
        self.map_err(|e| Failure::from_lib(Some(path), e))
    }
}

pub fn read_text(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::new("io", Some(path), e))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::new("io", Some(path), e))
}

/// A parsed input document.
pub enum Doc {
    Plane(PlaneADHM),
    Hirz(HirzADHM),
    Chart(ChartCoords),
    YTilde(YTildePoint),
}

impl Doc {
    pub fn kind(&self) -> &'static str {
        match self {
            Doc::Plane(_) => wire::KIND_PLANE,
            Doc::Hirz(_) => wire::KIND_HIRZ,
            Doc::Chart(_) => wire::KIND_CHART,
            Doc::YTilde(_) => wire::KIND_YTILDE,
        }
    }
}

fn infer_kind(v: &Value) -> Option<&str> {
    if let Some(k) = v.get("kind").and_then(Value::as_str) {
        return Some(k);
    }
    let has = |key: &str| v.get(key).is_some();
    if has("A2m") {
        Some(wire::KIND_CHART)
    } else if has("A1") {
        Some(wire::KIND_HIRZ)
    } else if has("b1") {
        Some(wire::KIND_PLANE)
    } else if has("u1") {
        Some(wire::KIND_TOT)
    } else if has("x1") {
        Some(wire::KIND_YTILDE)
    } else {
        None
    }
}

pub fn read_doc(path: &str) -> CliResult<Doc> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::new("parse", Some(path), e))?;
    let kind = infer_kind(&value)
        .ok_or_else(|| Failure::new("parse", Some(path), "cannot determine the document kind"))?
        .to_string();
    let doc = match kind.as_str() {
        wire::KIND_PLANE => wire::parse_plane(&text).map(Doc::Plane),
        wire::KIND_HIRZ => wire::parse_hirz(&text).map(Doc::Hirz),
        wire::KIND_CHART => wire::parse_chart(&text).map(Doc::Chart),
        wire::KIND_YTILDE => wire::parse_ytilde(&text).map(Doc::YTilde),
        wire::KIND_TOT => {
            return Err(Failure::new("parse", Some(path), "no command reads tot_point input"))
        }
        other => return Err(Failure::new("parse", Some(path), format!("unknown kind \"{other}\""))),
    };
    doc.at(path)
}

fn wrong_kind(path: &str, doc: &Doc, expected: &str) -> Failure {
    Failure::new(
        "parse",
        Some(path),
        format!("expected {expected}, found {}", doc.kind()),
    )
}

pub fn read_hirz(path: &str) -> CliResult<HirzADHM> {
    match read_doc(path)? {
        Doc::Hirz(d) => Ok(d),
        other => Err(wrong_kind(path, &other, wire::KIND_HIRZ)),
    }
}

pub fn read_plane(path: &str) -> CliResult<PlaneADHM> {
    match read_doc(path)? {
        Doc::Plane(d) => Ok(d),
        other => Err(wrong_kind(path, &other, wire::KIND_PLANE)),
    }
}

pub fn read_ytilde(path: &str) -> CliResult<YTildePoint> {
    match read_doc(path)? {
        Doc::YTilde(p) => Ok(p),
        other => Err(wrong_kind(path, &other, wire::KIND_YTILDE)),
    }
}

/// A bare matrix file: an array of rows.
pub fn read_matrix(path: &str) -> CliResult<ComplexMatrix> {
    let text = read_text(path)?;
    let w: wire::WireMatrix = serde_json::from_str(&text).map_err(|e| Failure::new("parse", Some(path), e))?;
    wire::matrix_from_wire(&w, "matrix").at(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_inferred_from_keys() {
        let v: Value = serde_json::from_str(r#"{"c":1,"b1":[[1]],"b2":[[1]],"e":[1]}"#).unwrap();
        assert_eq!(infer_kind(&v), Some(wire::KIND_PLANE));
        let v: Value = serde_json::from_str(r#"{"A1":[[1]],"A2m":[[1]]}"#).unwrap();
        assert_eq!(infer_kind(&v), Some(wire::KIND_CHART));
        let v: Value = serde_json::from_str(r#"{"kind":"tot_point","A1":0}"#).unwrap();
        assert_eq!(infer_kind(&v), Some(wire::KIND_TOT));
        assert_eq!(infer_kind(&json!({"z": 1})), None);
    }

    #[test]
    fn library_errors_map_to_categories() {
        let f = Failure::from_lib(Some("x.json"), AdhmError::Shape("bad".into()));
        assert_eq!(f.error, "schema");
        assert_eq!(f.to_json()["path"], "x.json");
        assert_eq!(Failure::from_lib(None, AdhmError::Singular("A")).error, "domain");
        assert_eq!(Failure::usage("no").to_json()["path"], Value::Null);
    }

    #[test]
    fn missing_file_is_io_error() {
        let e = read_doc("/nonexistent/adhmkit.json").err().unwrap();
        assert_eq!(e.error, "io");
    }
}
