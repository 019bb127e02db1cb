mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use adhmkit::hirz;
use adhmkit::suite::{self, SuiteConfig, SuiteOps};
use adhmkit::{geometry, linalg, plane, wire};
use adhmkit::{AdhmError, ToleranceConfig, Verdict};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use input::{CliResult, Context, Doc, Failure};

#[derive(Parser)]
#[command(name = "adhmkit", version, about = "ADHM data for Hilbert schemes of points on Tot(O(-n))")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct TolArgs {
    /// Set all three tolerances.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long = "tol.rank", global = true)]
    tol_rank: Option<f64>,
    /// Relative tolerance for matrix identities.
    #[arg(long = "tol.eq", global = true)]
    tol_eq: Option<f64>,
    /// Clustering radius for projective roots.
    #[arg(long = "tol.root", global = true)]
    tol_root: Option<f64>,
}

impl TolArgs {
    /// Defaults, then `ADHMKIT_TOL`, then `--tol`, then the per-field flags.
    fn resolve(&self) -> Result<ToleranceConfig, AdhmError> {
        let mut t = ToleranceConfig::from_env()?;
        if let Some(v) = self.tol {
            t = ToleranceConfig::uniform(v)?;
        }
        if let Some(v) = self.tol_rank {
            t.rank_rel_tol = v;
        }
        if let Some(v) = self.tol_eq {
            t.eq_rel_tol = v;
        }
        if let Some(v) = self.tol_root {
            t.root_cluster_tol = v;
        }
        t.validate()?;
        Ok(t)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check (P1), (P2), (P3) of Hirzebruch ADHM data.
    Validate {
        file: String,
        /// Also run the direct (P3) check at the pencil roots.
        #[arg(long)]
        direct: bool,
    },
    /// Check (T1), (T2) of plane ADHM data.
    ValidatePlane { file: String },
    /// Charts m with A_2m invertible.
    ChartSet { file: String },
    /// Chart coordinates on chart m.
    ToChart {
        file: String,
        #[arg(long)]
        m: usize,
    },
    /// Global data from chart coordinates, or from plane data with --m, --n and optional --a.
    FromChart {
        file: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Matrix file for A_2m (identity when omitted).
        #[arg(long)]
        a: Option<String>,
    },
    /// Chart change m -> l of plane data, or glueing of chart coordinates to chart l.
    Transition(TransitionArgs),
    /// Chart change m -> l of plane data.
    TransitionPlane(TransitionArgs),
    /// Canonical orbit representative of plane or Hirzebruch data.
    Canonical { file: String },
    /// Whether two points lie in one gauge orbit.
    OrbitEqual { first: String, second: String },
    /// Base support, or chart support with --m.
    Support {
        file: String,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Normalized pencil form g_c and the base roots.
    HilbertChow { file: String },
    /// The matrix sigma^h_m.
    Sigma {
        #[arg(long)]
        h: usize,
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        #[arg(long)]
        cbase: usize,
    },
    /// Rank of the linear system A1 C_q = A2 C_{q+1}.
    SystRank {
        file: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Nullity of the (P1) Jacobian.
    JacobianDim { file: String },
    /// c = 1 data to a point of Tot(O(-n)).
    C1ToTot { file: String },
    /// c = 1 data from a point of the variety x1 y1^(n-1) = x2 y2^(n-1).
    C1FromYtilde {
        file: String,
        #[arg(long)]
        n: usize,
    },
    /// Run the property suite.
    PropertyRun {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-n", default_value_t = 3)]
        max_n: usize,
        #[arg(long = "max-c", default_value_t = 6)]
        max_c: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        filter: Option<String>,
    },
    /// Random valid data.
    Generate {
        #[arg(long, value_parser = ["plane", "hirz"])]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        c: usize,
    },
}

#[derive(Args)]
struct TransitionArgs {
    file: String,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    l: usize,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    cbase: Option<usize>,
}

/// JSON result and exit code.
struct Output {
    value: Value,
    code: u8,
}

impl Output {
    fn ok(value: Value) -> Self {
        Self { value, code: 0 }
    }

    fn verdict(value: Value, v: Verdict) -> Self {
        Self {
            value,
            code: v.exit_code() as u8,
        }
    }

    fn truth(value: Value, t: bool) -> Self {
        Self {
            value,
            code: if t { 0 } else { 1 },
        }
    }
}

fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| Failure::usage(format!("--{flag} is required for this input")))
}

fn validation_json(v: &hirz::HirzValidation) -> Value {
    json!({
        "kind": "validation",
        "verdict": v.verdict(),
        "charts": v.charts,
        "checks": v.report.checks,
    })
}

fn transition(args: &TransitionArgs, tol: &ToleranceConfig, plane_only: bool) -> CliResult<Output> {
    let path = args.file.as_str();
    match input::read_doc(path)? {
        Doc::Plane(d) => {
            let m = required(args.m, "m")?;
            let n = required(args.n, "n")?;
            let cbase = required(args.cbase, "cbase")?;
            let t = plane::transition_plane(&d, m as i64, args.l as i64, n, cbase, tol).at(path)?;
            Ok(Output::ok(wire::plane_value(&t)))
        }
        Doc::Chart(cc) if !plane_only => {
            if args.m.is_some_and(|m| m != cc.m) {
                return Err(Failure::usage(format!("--m disagrees with the chart index {} in the file", cc.m)));
            }
            let t = hirz::transition_omega(&cc, args.l, tol).at(path)?;
            Ok(Output::ok(wire::chart_value(&t)))
        }
        other => Err(Failure::new(
            "parse",
            Some(path),
            format!("cannot apply a transition to {}", other.kind()),
        )),
    }
}

fn run(cmd: &Cmd, tol: &ToleranceConfig) -> CliResult<Output> {
    match cmd {
        Cmd::Validate { file, direct } => {
            let d = input::read_hirz(file)?;
            let v = hirz::validate(&d, tol).at(file)?;
            let mut out = validation_json(&v);
            if *direct {
                out["p3_direct"] = json!(hirz::validate_p3_direct(&d, tol).at(file)?.checks);
            }
            Ok(Output::verdict(out, v.verdict()))
        }
        Cmd::ValidatePlane { file } => {
            let d = input::read_plane(file)?;
            let r = plane::validate_plane(&d, tol).at(file)?;
            Ok(Output::verdict(
                json!({"kind": "validation", "verdict": r.verdict(), "checks": r.checks}),
                r.verdict(),
            ))
        }
        Cmd::ChartSet { file } => {
            let d = input::read_hirz(file)?;
            let r = hirz::validate_p2(&d, tol).at(file)?;
            Ok(Output::verdict(
                json!({"charts": r.charts, "conditioning": r.conditioning, "verdict": r.verdict}),
                r.verdict,
            ))
        }
        Cmd::ToChart { file, m } => {
            let d = input::read_hirz(file)?;
            Ok(Output::ok(wire::chart_value(&hirz::to_chart(&d, *m, tol).at(file)?)))
        }
        Cmd::FromChart { file, m, n, a } => {
            let d = match input::read_doc(file)? {
                Doc::Chart(cc) => hirz::from_chart_coords(&cc, tol).at(file)?,
                Doc::Plane(p) => {
                    let a = match a {
                        Some(path) => input::read_matrix(path)?,
                        None => linalg::identity(p.c),
                    };
                    hirz::from_chart(required(*m, "m")?, &p, &a, required(*n, "n")?, tol).at(file)?
                }
                other => {
                    return Err(Failure::new(
                        "parse",
                        Some(file),
                        format!("expected chart_coords or plane_adhm, found {}", other.kind()),
                    ))
                }
            };
            Ok(Output::ok(wire::hirz_value(&d)))
        }
        Cmd::Transition(args) => transition(args, tol, false),
        Cmd::TransitionPlane(args) => transition(args, tol, true),
        Cmd::Canonical { file } => match input::read_doc(file)? {
            Doc::Hirz(d) => {
                let k = hirz::canonicalize(&d, tol).at(file)?;
                Ok(Output::ok(json!({
                    "point": wire::hirz_value(&k.point),
                    "chart": k.chart,
                    "phi1": wire::matrix_value(&k.phi1),
                    "phi2": wire::matrix_value(&k.phi2),
                })))
            }
            Doc::Plane(d) => {
                let (k, s) = plane::canonical_form(&d, tol).at(file)?;
                Ok(Output::ok(json!({"point": wire::plane_value(&k), "gauge": wire::matrix_value(&s)})))
            }
            other => Err(Failure::new(
                "parse",
                Some(file),
                format!("no canonical form for {}", other.kind()),
            )),
        },
        Cmd::OrbitEqual { first, second } => {
            let equal = match (input::read_doc(first)?, input::read_doc(second)?) {
                (Doc::Hirz(a), Doc::Hirz(b)) => hirz::orbit_equal(&a, &b, tol).at(first)?,
                (Doc::Plane(a), Doc::Plane(b)) => plane::orbit_equal_plane(&a, &b, tol).at(first)?,
                (a, b) => {
                    return Err(Failure::usage(format!(
                        "cannot compare {} with {}",
                        a.kind(),
                        b.kind()
                    )))
                }
            };
            Ok(Output::truth(json!({"equal": equal}), equal))
        }
        Cmd::Support { file, m } => {
            let d = input::read_hirz(file)?;
            let s = match m {
                Some(m) => geometry::chart_support(&d, *m, tol),
                None => geometry::base_support(&d, tol),
            }
            .at(file)?;
            let mut out = json!({"base": s.base});
            if let Some((m, pairs)) = s.chart_pairs {
                out["chart"] = json!(m);
                out["pairs"] = pairs
                    .iter()
                    .map(|(z, w)| json!([wire::complex_value(*z), wire::complex_value(*w)]))
                    .collect();
            }
            Ok(Output::ok(out))
        }
        Cmd::HilbertChow { file } => {
            let d = input::read_hirz(file)?;
            let g = geometry::g_c(&d.a1, &d.a2, tol).at(file)?;
            let base = geometry::base_support(&d, tol).at(file)?.base;
            Ok(Output::ok(json!({"g_c": g.coeffs, "base": base})))
        }
        Cmd::Sigma { h, m, cbase } => {
            let s = adhmkit::sigma_matrix(*h, *m, *cbase).map_err(|e| Failure::from_lib(None, e))?;
            let a = adhmkit::angle_pair(*cbase, *m).map_err(|e| Failure::from_lib(None, e))?;
            Ok(Output::ok(json!({
                "h": h, "m": m, "c_base": cbase,
                "cos": a.cos_val, "sin": a.sin_val,
                "rows": s.rows(),
            })))
        }
        Cmd::SystRank { file, n } => {
            let d = input::read_hirz(file)?;
            let n = n.unwrap_or(d.n);
            let rank = hirz::syst_rank(&d.a1, &d.a2, n, tol).at(file)?;
            let expected = (n - 1) * d.c * d.c;
            Ok(Output::truth(
                json!({"rank": rank, "expected": expected, "n": n, "c": d.c}),
                rank == expected,
            ))
        }
        Cmd::JacobianDim { file } => {
            let d = input::read_hirz(file)?;
            let expected = 2 * d.c * d.c + 2 * d.c;
            let ambient = (d.n + 2) * d.c * d.c + d.c;
            match hirz::jacobian_nullity(&d, tol) {
                Ok(k) => Ok(Output::truth(
                    json!({"nullity": k, "expected": expected, "ambient": ambient, "quotient_dim": k as i64 - 2 * (d.c * d.c) as i64}),
                    k == expected,
                )),
                Err(AdhmError::Indeterminate(why)) => Ok(Output::verdict(
                    json!({"verdict": Verdict::Indeterminate, "detail": why, "expected": expected}),
                    Verdict::Indeterminate,
                )),
                Err(e) => Err(Failure::from_lib(Some(file), e)),
            }
        }
        Cmd::C1ToTot { file } => {
            let d = input::read_hirz(file)?;
            let t = geometry::p1_to_tot(&d, tol).at(file)?;
            Ok(Output::ok(wire::tot_value(&t, d.n)))
        }
        Cmd::C1FromYtilde { file, n } => {
            let p = input::read_ytilde(file)?;
            Ok(Output::ok(wire::hirz_value(&geometry::ytilde_to_p1(&p, *n).at(file)?)))
        }
        Cmd::PropertyRun {
            seed,
            max_n,
            max_c,
            samples,
            filter,
        } => {
            let cfg = SuiteConfig {
                seed: *seed,
                n_max: *max_n,
                c_max: *max_c,
                samples: *samples,
                filter: filter.clone(),
                ..SuiteConfig::default()
            };
            let report = suite::run_suite(&cfg, tol, &SuiteOps::default());
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let code = report.exit_code() as u8;
            let value = serde_json::to_value(&report).map_err(|e| Failure::new("internal", None, e))?;
            Ok(Output { value, code })
        }
        Cmd::Generate { kind, seed, n, c } => {
            let cfg = suite::GenConfig::new(*seed, *n, *c);
            let value = if kind == "plane" {
                wire::plane_value(&suite::gen_plane_valid(&cfg).map_err(|e| Failure::from_lib(None, e))?)
            } else {
                wire::hirz_value(&suite::gen_hirz_valid(&cfg).map_err(|e| Failure::from_lib(None, e))?)
            };
            Ok(Output::ok(value))
        }
    }
}

fn emit(value: &Value, out: Option<&PathBuf>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::new("internal", None, e))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| Failure::new("io", Some(&path.display().to_string()), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::new("io", None, e)),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::usage(e.to_string().trim_end());
            eprintln!("{}", f.to_json());
            return ExitCode::from(2);
        }
    };
    let result = cli
        .tol
        .resolve()
        .map_err(|e| Failure::from_lib(None, e))
        .and_then(|tol| run(&cli.cmd, &tol))
        .and_then(|out| emit(&out.value, cli.out.as_ref()).map(|_| out.code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("adhmkit").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = parse(&["validate", "x.json", "--tol.eq", "1e-6", "--out", "o.json"]);
        assert_eq!(cli.tol.tol_eq, Some(1e-6));
        assert_eq!(cli.out, Some(PathBuf::from("o.json")));
    }

    #[test]
    fn per_field_flags_override_uniform() {
        let args = TolArgs { tol: Some(1e-7), tol_rank: None, tol_eq: Some(1e-5), tol_root: None };
        let mut t = ToleranceConfig::uniform(1e-7).unwrap();
        t.eq_rel_tol = 1e-5;
        if std::env::var_os(adhmkit::tolerance::TOL_ENV_VAR).is_none() {
            assert_eq!(args.resolve().unwrap(), t);
        }
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        let args = TolArgs { tol: None, tol_rank: Some(0.0), tol_eq: None, tol_root: None };
        assert!(matches!(args.resolve(), Err(AdhmError::Tolerance(_))));
    }

    #[test]
    fn missing_flag_is_usage_error() {
        assert_eq!(required::<usize>(None, "m").unwrap_err().error, "usage");
    }
}
