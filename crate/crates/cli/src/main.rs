use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use weyl_frobenius::coordmap::CoordMap;
use weyl_frobenius::document::{latex_document, StructureDocument};
use weyl_frobenius::fixtures;
use weyl_frobenius::frobenius::{b_to_c, build_structure, CheckReport, FrobeniusStructure};
use weyl_frobenius::rootdata::{Family, RootSystemSpec};
use weyl_frobenius::verify::{parse_checks, CheckKind, Verifier};

const FAILED: u8 = 1;
const INVALID: u8 = 2;
/// Residual lines kept per check in printed reports.
const MAX_RESIDUALS: usize = 20;

#[derive(Parser)]
#[command(name = "weyl-frobenius", version, about = "Frobenius structures on orbit spaces of extended affine Weyl groups of type B and C")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the structure and write it as JSON or LaTeX.
    Construct(ConstructArgs),
    /// Run verification suites on a spec or on an exported document.
    Verify(VerifyArgs),
    /// Compare a constructed structure with a built-in worked example.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    B,
    C,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Latex,
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long, value_enum, ignore_case = true)]
    family: Option<FamilyArg>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    vertex: Option<usize>,
    #[arg(long, default_value_t = 3)]
    oracle_max_rank: usize,
}

impl SpecArgs {
    fn spec(&self) -> Result<RootSystemSpec, String> {
        let (Some(f), Some(l), Some(k)) = (self.family, self.rank, self.vertex) else {
            return Err("--family, --rank and --vertex are required".into());
        };
        let fam = match f {
            FamilyArg::B => Family::B,
            FamilyArg::C => Family::C,
        };
        RootSystemSpec::new(fam, l, k).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Comma-separated subset of pencil, eta-form, det, wdvv, euler, intersection, duality, oracle.
    #[arg(long)]
    checks: Option<String>,
    /// An exported JSON document; its spec replaces --family/--rank/--vertex.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    fixture: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Invalid invocation or input (exit 2), or a failed step (exit 1).
enum Failure {
    Invalid(String),
    Failed(String),
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Failed(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_json(r: &CheckReport) -> Value {
    let shown: Vec<&String> = r.residuals.iter().take(MAX_RESIDUALS).collect();
    json!({
        "name": r.name,
        "passed": r.passed,
        "residual_count": r.residuals.len(),
        "residuals": shown,
    })
}

fn build(spec: &RootSystemSpec, oracle_max_rank: usize) -> Result<(FrobeniusStructure, Option<CoordMap>), Failure> {
    let r = match spec.family() {
        Family::C => build_structure(spec).map(|s| (s, None)),
        Family::B => b_to_c(spec, oracle_max_rank).map(|(s, m)| (s, Some(m))),
    };
    r.map_err(|e| Failure::Failed(format!("{spec}: {e}")))
}

fn construct(a: &ConstructArgs) -> Result<(), Failure> {
    let spec = a.spec.spec().map_err(Failure::Invalid)?;
    let (st, bmap) = build(&spec, a.spec.oracle_max_rank)?;
    let text = match a.format {
        Format::Latex => latex_document(&spec, &st),
        Format::Json => {
            let mut v = Verifier::with_structure(spec, a.spec.oracle_max_rank, st.clone());
            let report = v.run_all(&[CheckKind::Wdvv, CheckKind::Euler, CheckKind::Intersection, CheckKind::Duality]);
            let doc = StructureDocument::from_structure(&spec, &st, bmap.as_ref(), &report)
                .map_err(|e| Failure::Failed(e.to_string()))?;
            if !doc.all_passed() {
                emit(&a.out, &doc.to_json())?;
                return Err(Failure::Failed("the constructed structure failed its checks".into()));
            }
            doc.to_json()
        }
    };
    emit(&a.out, &text)
}

fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let kinds = match &a.checks {
        Some(list) => parse_checks(list).map_err(|e| Failure::Invalid(e.to_string()))?,
        None => CheckKind::ALL.to_vec(),
    };
    let mut reports = Vec::new();
    let spec = match &a.input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("reading {}: {e}", path.display())))?;
            let doc = StructureDocument::from_json(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            let dec = doc.decode().map_err(|e| Failure::Invalid(e.to_string()))?;
            let spec = dec.spec;
            let (st, _) = build(&spec, a.spec.oracle_max_rank)?;
            let mut diffs = Vec::new();
            if dec.potential.to_string() != st.potential.f.to_string() {
                diffs.push(format!("stored F = {}", dec.potential));
                diffs.push(format!("built F = {}", st.potential.f));
            }
            if dec.eta != st.eta {
                diffs.push("stored η differs".into());
            }
            reports.push(CheckReport::new("document", diffs));
            if kinds.contains(&CheckKind::Wdvv) {
                let mut r = dec.verify_wdvv();
                r.name = "document-wdvv".into();
                reports.push(r);
            }
            let mut v = Verifier::with_structure(spec, a.spec.oracle_max_rank, st);
            reports.extend(v.run_all(&kinds));
            spec
        }
        None => {
            let spec = a.spec.spec().map_err(Failure::Invalid)?;
            reports.extend(Verifier::new(spec, a.spec.oracle_max_rank).run_all(&kinds));
            spec
        }
    };
    let passed = reports.iter().all(|r| r.passed);
    let out = json!({
        "spec": spec.to_string(),
        "passed": passed,
        "checks": reports.iter().map(report_json).collect::<Vec<_>>(),
    });
    emit(&a.out, &format!("{}\n", serde_json::to_string_pretty(&out).expect("report serializes")))?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
        Err(Failure::Failed(format!("failed: {}", failed.join(", "))))
    }
}

fn compare(a: &CompareArgs) -> Result<(), Failure> {
    let fx = fixtures::fixture(&a.fixture).map_err(|e| Failure::Invalid(e.to_string()))?;
    let r = fixtures::compare(fx).map_err(|e| Failure::Failed(e.to_string()))?;
    let out = json!({
        "fixture": r.fixture,
        "matched": r.matched,
        "sign_flipped": r.sign_flipped,
        "expected_terms": r.expected_terms,
        "computed_terms": r.computed_terms,
        "sections": r.sections.iter().map(|s| json!({"name": s.name, "diffs": s.diffs})).collect::<Vec<_>>(),
    });
    emit(&a.out, &format!("{}\n", serde_json::to_string_pretty(&out).expect("report serializes")))?;
    if r.matched {
        Ok(())
    } else {
        Err(Failure::Failed(format!("{} does not match", r.fixture)))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(INVALID) } else { ExitCode::SUCCESS };
        }
    };
    let r = match &cli.cmd {
        Cmd::Construct(a) => construct(a),
        Cmd::Verify(a) => verify(a),
        Cmd::Compare(a) => compare(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(INVALID)
        }
        Err(Failure::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(FAILED)
        }
    }
}
