//! `gelfand`: validate, transform and generate finite commutative
//! C*-categories, spaceoids and bimodules.
//!
//! Exit codes: 0 pass, 1 I/O or parse error, 2 validation failure,
//! 3 degenerate functor.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gelfand_core::cstarcat::{check_bimodule, check_non_degenerate, check_star_functor, validate_category};
use gelfand_core::duality::{
    bimodule_spectrum, check_naturality_e, check_naturality_g, NaturalityReport, NATURALITY_TOL,
};
use gelfand_core::functors::{gamma_on_morphism, sections_category, sigma_on_morphism, FunctorError, Spectrum};
use gelfand_core::harness::gen::{
    gen_category, gen_functor, gen_morphism, gen_spaceoid, GenParams, PhaseMode, Scramble,
};
use gelfand_core::harness::json::{
    self, category_to_json, doc_kind, functor_to_json, morphism_to_json, spaceoid_to_json, BimoduleDoc, CategoryDoc,
    DocKind, FunctorDoc, MorphismDoc, SpaceoidDoc,
};
use gelfand_core::harness::sweep::{a_side_of, t_side_of, ASide, TSide};
use gelfand_core::harness::HarnessError;
use gelfand_core::par::Exec;
use gelfand_core::spaceoid::{check_morphism, validate_spaceoid};
use gelfand_core::{FiniteCStarCategory, FiniteSpaceoid, HilbertBimodule, SpaceoidMorphism, StarFunctor, Tolerance};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "gelfand", version, about = "Finite Gel'fand duality for commutative C*-categories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input document (category, spaceoid, bimodule, functor or morphism).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Absolute and relative tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Generator seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check the axioms of the input document.
    Validate,
    /// Spectral spaceoid and Gel'fand transforms of a category, or Σ of a functor.
    Spectrum,
    /// Section category of a spaceoid, or Γ of a spaceoid morphism.
    Sections,
    /// Gel'fand and evaluation round trips.
    Roundtrip {
        /// Use generated instances instead of --input.
        #[arg(long)]
        gen: bool,
        #[command(flatten)]
        params: GenArgs,
    },
    /// Naturality squares for a functor or spaceoid morphism.
    Naturality {
        #[arg(long)]
        gen: bool,
        #[command(flatten)]
        params: GenArgs,
    },
    /// Partial bijection and supports of a Hilbert bimodule.
    Link,
    /// Generate seeded instances.
    Gen {
        #[arg(long, value_enum, default_value_t = What::Category)]
        what: What,
        /// Write `<what>.json` files here (plus `oracle.json` for categories).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: GenArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Category,
    Spaceoid,
    Morphism,
    Functor,
    All,
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long)]
    n_objects: Option<usize>,
    #[arg(long)]
    max_base: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, value_enum)]
    phases: Option<PhaseArg>,
    #[arg(long, value_enum)]
    scramble: Option<ScrambleArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhaseArg {
    Trivial,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScrambleArg {
    None,
    Unitary,
    Invertible,
}

impl GenArgs {
    fn params(&self, seed: Option<u64>) -> GenParams {
        let d = GenParams::with_seed(seed.unwrap_or(0));
        GenParams {
            n_objects: self.n_objects.unwrap_or(d.n_objects),
            max_base: self.max_base.unwrap_or(d.max_base),
            edge_density: self.density.unwrap_or(d.edge_density),
            phase_mode: match self.phases {
                Some(PhaseArg::Trivial) => PhaseMode::Trivial,
                Some(PhaseArg::Random) => PhaseMode::Random,
                None => d.phase_mode,
            },
            scramble: match self.scramble {
                Some(ScrambleArg::None) => Scramble::None,
                Some(ScrambleArg::Unitary) => Scramble::Unitary,
                Some(ScrambleArg::Invertible) => Scramble::Invertible,
                None => d.scramble,
            },
            ..d
        }
    }
}

// ---------------------------------------------------------------------------
// outcomes

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Pass,
    Invalid,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Invalid => 2,
        }
    }

    fn of(passed: bool) -> Self {
        if passed {
            Status::Pass
        } else {
            Status::Invalid
        }
    }
}

struct Report {
    status: Status,
    json: Value,
    text: String,
}

/// Errors that end a command before it produces a report.
#[derive(Debug)]
enum Failure {
    Io(String),
    Harness(HarnessError),
    Usage(String),
    Invalid(String),
    Degenerate(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) | Failure::Usage(_) => 1,
            Failure::Harness(HarnessError::Syntax { .. } | HarnessError::Schema { .. } | HarnessError::Params(_)) => 1,
            Failure::Harness(HarnessError::Functor(FunctorError::DegenerateFunctor(_))) | Failure::Degenerate(_) => 3,
            Failure::Harness(_) | Failure::Invalid(_) => 2,
        }
    }

    fn json(&self) -> Value {
        match self {
            Failure::Harness(HarnessError::Syntax { line, column, message }) => {
                json!({"status": "error", "kind": "syntax", "line": line, "column": column, "message": message})
            }
            Failure::Harness(HarnessError::Schema { path, message }) => {
                json!({"status": "error", "kind": "schema", "path": path, "message": message})
            }
            other => json!({"status": "error", "kind": other.kind(), "message": other.to_string()}),
        }
    }

    fn kind(&self) -> &'static str {
        match self.code() {
            1 => "io",
            3 => "degenerate",
            _ => "invalid",
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(m) | Failure::Usage(m) | Failure::Invalid(m) | Failure::Degenerate(m) => f.write_str(m),
            Failure::Harness(e) => write!(f, "{e}"),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Harness(e)
    }
}

impl From<FunctorError> for Failure {
    fn from(e: FunctorError) -> Self {
        match e {
            FunctorError::DegenerateFunctor(m) => Failure::Degenerate(format!("degenerate functor: {m}")),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// input

enum Doc {
    Category(FiniteCStarCategory),
    Spaceoid(FiniteSpaceoid),
    Bimodule(Box<HilbertBimodule>),
    Functor(StarFunctor),
    Morphism(SpaceoidMorphism),
}

fn load(path: Option<&Path>) -> Result<Doc, Failure> {
    let path = path.ok_or_else(|| Failure::Usage("--input FILE is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = json::parse(&text)?;
    Ok(match doc_kind(&value)? {
        DocKind::Category => Doc::Category(json::from_value::<CategoryDoc>(value)?.to_category()?),
        DocKind::Spaceoid => Doc::Spaceoid(json::from_value::<SpaceoidDoc>(value)?.to_spaceoid()?),
        DocKind::Bimodule => Doc::Bimodule(Box::new(json::from_value::<BimoduleDoc>(value)?.to_bimodule()?)),
        DocKind::Functor => Doc::Functor(json::from_value::<FunctorDoc>(value)?.to_functor()?),
        DocKind::Morphism => Doc::Morphism(json::from_value::<MorphismDoc>(value)?.to_morphism()?),
    })
}

fn wrong_kind(command: &str, expected: &str) -> Failure {
    Failure::Usage(format!("{command} expects {expected}"))
}

// ---------------------------------------------------------------------------
// commands

fn validate(doc: Doc, tol: Tolerance) -> Result<Report, Failure> {
    let (report, extra) = match &doc {
        Doc::Category(c) => (validate_category(c, tol), Value::Null),
        Doc::Spaceoid(s) => (validate_spaceoid(s, tol), Value::Null),
        Doc::Bimodule(m) => (check_bimodule(m, tol), Value::Null),
        Doc::Morphism(m) => (check_morphism(m, tol), Value::Null),
        Doc::Functor(f) => {
            // informational: the gate only matters where Σ is applied
            let nd = check_non_degenerate(f, tol).map(|n| n.non_degenerate).ok();
            (check_star_functor(f, tol), json!({ "non_degenerate": nd }))
        }
    };
    let mut text = report.summary();
    if let Some(nd) = extra.get("non_degenerate") {
        text.push_str(&format!("non-degenerate: {nd}\n"));
    }
    let mut js = serde_json::to_value(&report).expect("reports serialize");
    js["valid"] = json!(report.is_valid());
    if !extra.is_null() {
        js["non_degenerate"] = extra["non_degenerate"].clone();
    }
    Ok(Report { status: Status::of(report.is_valid()), json: js, text })
}

fn require_valid_category(c: &FiniteCStarCategory, tol: Tolerance) -> Result<(), Failure> {
    let r = validate_category(c, tol);
    if r.is_valid() {
        Ok(())
    } else {
        Err(Failure::Invalid(r.summary()))
    }
}

fn key(objects: &[String], a: usize, b: usize) -> String {
    format!("{}|{}", objects[a], objects[b])
}

fn spectrum(doc: Doc, tol: Tolerance) -> Result<Report, Failure> {
    match doc {
        Doc::Category(c) => {
            require_valid_category(&c, tol)?;
            let spec = Spectrum::new_with(Arc::new(c), tol, Exec::Sequential)?;
            let s = &*spec.spaceoid;
            let objs = s.objects();
            let n = s.n();
            let mut text = format!("spectrum over objects {}\n", objs.join(", "));
            for (a, name) in objs.iter().enumerate() {
                text.push_str(&format!("  X_{name} = {{{}}}\n", s.base(a).join(", ")));
            }
            let mut hom_sizes = serde_json::Map::new();
            let mut gelfand = serde_json::Map::new();
            for a in 0..n {
                for b in 0..n {
                    let k = key(objs, a, b);
                    hom_sizes.insert(k.clone(), json!(s.hom_size(a, b)));
                    let t = spec.gelfand.transform(a, b);
                    let rows: Vec<Value> = (0..t.rows())
                        .map(|r| json!(json::complex_list(&(0..t.cols()).map(|c| t[(r, c)]).collect::<Vec<_>>())))
                        .collect();
                    gelfand.insert(k, Value::Array(rows));
                    if a != b {
                        let ids: Vec<&str> = s.points(a, b).iter().map(|p| p.id.as_str()).collect();
                        text.push_str(&format!("  |X_{}{}| = {}  {}\n", objs[a], objs[b], ids.len(), ids.join(" ")));
                    }
                }
            }
            let js = json!({"spaceoid": spaceoid_to_json(s), "hom_sizes": hom_sizes, "gelfand": gelfand});
            Ok(Report { status: Status::Pass, json: js, text })
        }
        Doc::Functor(f) => {
            let m = sigma_on_morphism(&f, tol)?;
            let text = format!(
                "Σ of the functor: {} → {} spaceoid morphism\n",
                describe_spaceoid(&m.source),
                describe_spaceoid(&m.target)
            );
            Ok(Report { status: Status::Pass, json: morphism_to_json(&m), text })
        }
        _ => Err(wrong_kind("spectrum", "a category or a functor")),
    }
}

fn describe_spaceoid(s: &FiniteSpaceoid) -> String {
    let points: usize = s.all_arrows().len();
    format!("{} objects/{} arrows", s.n(), points)
}

fn sections(doc: Doc, tol: Tolerance) -> Result<Report, Failure> {
    match doc {
        Doc::Spaceoid(s) => {
            let c = sections_category(&s, tol)?;
            let objs = c.objects();
            let n = c.n();
            let mut text = format!("section category over objects {}\n", objs.join(", "));
            for a in 0..n {
                for b in 0..n {
                    text.push_str(&format!("  dim C_{}{} = {}\n", objs[a], objs[b], c.dim(a, b)));
                }
            }
            Ok(Report { status: Status::Pass, json: category_to_json(&c), text })
        }
        Doc::Morphism(m) => {
            let f = gamma_on_morphism(&m, tol)?;
            Ok(Report {
                status: Status::Pass,
                json: functor_to_json(&f),
                text: "Γ of the morphism: *-functor\n".into(),
            })
        }
        _ => Err(wrong_kind("sections", "a spaceoid or a spaceoid morphism")),
    }
}

fn a_side_text(r: &ASide) -> String {
    let corners = r.corners.as_ref().map(|c| c.max_dimension.to_string()).unwrap_or_else(|| "-".into());
    let mut t = format!(
        "Gel'fand transform: {} (bijective {}, isometry deviation {:.2e}, inverse deviation {:.2e}, max corner dim {})\n",
        pass_word(r.passed),
        r.bijective,
        r.isometry_deviation,
        r.inverse_deviation,
        corners
    );
    if let Some(e) = &r.error {
        t.push_str(&format!("  error: {e}\n"));
    }
    t
}

fn t_side_text(r: &TSide) -> String {
    let mut t = format!(
        "evaluation transform: {} (invertible {}, S ≅ Σ(Γ(S)) {}, morphism deviation {:.2e})\n",
        pass_word(r.passed),
        r.invertible,
        r.isomorphic,
        r.morphism_deviation
    );
    if let Some(e) = &r.error {
        t.push_str(&format!("  error: {e}\n"));
    }
    t
}

fn pass_word(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn roundtrip(doc: Option<Doc>, params: &GenParams, tol: Tolerance) -> Result<Report, Failure> {
    let (a, t) = match doc {
        None => {
            let (c, _) = gen_category(params)?;
            let s = gen_spaceoid(params)?;
            (Some(a_side_of(c, tol, Exec::Sequential)), Some(t_side_of(s, tol, Exec::Sequential)))
        }
        Some(Doc::Category(c)) => {
            require_valid_category(&c, tol)?;
            (Some(a_side_of(c, tol, Exec::Sequential)), None)
        }
        Some(Doc::Spaceoid(s)) => {
            let r = validate_spaceoid(&s, tol);
            if !r.is_valid() {
                return Err(Failure::Invalid(r.summary()));
            }
            (None, Some(t_side_of(s, tol, Exec::Sequential)))
        }
        Some(_) => return Err(wrong_kind("roundtrip", "a category or a spaceoid")),
    };
    let passed = a.as_ref().is_none_or(|r| r.passed && r.isometry_deviation <= NATURALITY_TOL)
        && t.as_ref().is_none_or(|r| r.passed && r.morphism_deviation <= NATURALITY_TOL);
    let text = a.as_ref().map(a_side_text).unwrap_or_default() + &t.as_ref().map(t_side_text).unwrap_or_default();
    let js = json!({"passed": passed, "gelfand": a, "evaluation": t});
    Ok(Report { status: Status::of(passed), json: js, text })
}

fn naturality_text(what: &str, r: &NaturalityReport) -> String {
    let mut t = format!(
        "{what}: {} (square deviation {:.2e}, points match {})\n",
        pass_word(r.passed),
        r.square_identity,
        r.points_match
    );
    for (w, d) in &r.witnesses {
        t.push_str(&format!("  {w}: {d:.2e}\n"));
    }
    t
}

fn naturality(doc: Option<Doc>, params: &GenParams, tol: Tolerance) -> Result<Report, Failure> {
    let (g, e) = match doc {
        None => {
            let f = gen_functor(params)?;
            let m = gen_morphism(params)?;
            (Some(check_naturality_g(&f, tol)?), Some(check_naturality_e(&m, tol)?))
        }
        Some(Doc::Functor(f)) => (Some(check_naturality_g(&f, tol)?), None),
        Some(Doc::Morphism(m)) => (None, Some(check_naturality_e(&m, tol)?)),
        Some(_) => return Err(wrong_kind("naturality", "a functor or a spaceoid morphism")),
    };
    let passed = g.as_ref().is_none_or(|r| r.passed) && e.as_ref().is_none_or(|r| r.passed);
    let text = g.as_ref().map(|r| naturality_text("naturality of 𝔊", r)).unwrap_or_default()
        + &e.as_ref().map(|r| naturality_text("naturality of 𝔈", r)).unwrap_or_default();
    let js = json!({"passed": passed, "gelfand": g, "evaluation": e});
    Ok(Report { status: Status::of(passed), json: js, text })
}

fn link(doc: Doc, tol: Tolerance) -> Result<Report, Failure> {
    let Doc::Bimodule(mb) = doc else { return Err(wrong_kind("link", "a bimodule")) };
    let bs = bimodule_spectrum(&mb, tol)?;
    let passed = bs.bijective && bs.inner_product_deviation <= NATURALITY_TOL;
    let names = |pts: &[String], idx: &[usize]| idx.iter().map(|&i| pts[i].clone()).collect::<Vec<_>>().join(", ");
    let pairs: Vec<String> = bs.pair_labels.iter().map(|(l, r)| format!("({l}, {r})")).collect();
    let text = format!(
        "partial bijection ({}): {}\nleft support: {{{}}}{}\nright support: {{{}}}{}\nbijective {}, inner-product deviation {:.2e}\n",
        pairs.len(),
        pairs.join(" "),
        names(&bs.left_points, &bs.left_support),
        if bs.left_full { " (full)" } else { "" },
        names(&bs.right_points, &bs.right_support),
        if bs.right_full { " (full)" } else { "" },
        bs.bijective,
        bs.inner_product_deviation
    );
    let mut js = serde_json::to_value(&bs).expect("bimodule spectra serialize");
    js["passed"] = json!(passed);
    js["left_support_labels"] = json!(bs.left_support.iter().map(|&i| &bs.left_points[i]).collect::<Vec<_>>());
    js["right_support_labels"] = json!(bs.right_support.iter().map(|&i| &bs.right_points[i]).collect::<Vec<_>>());
    Ok(Report { status: Status::of(passed), json: js, text })
}

fn generate(what: What, out: Option<&Path>, params: &GenParams) -> Result<Report, Failure> {
    params.validate()?;
    let mut docs: Vec<(&str, Value)> = Vec::new();
    if matches!(what, What::Category | What::All) {
        let (c, oracle) = gen_category(params)?;
        docs.push(("category", category_to_json(&c)));
        docs.push(("oracle", spaceoid_to_json(&oracle)));
    }
    if matches!(what, What::Spaceoid | What::All) {
        docs.push(("spaceoid", spaceoid_to_json(&gen_spaceoid(params)?)));
    }
    if matches!(what, What::Morphism | What::All) {
        docs.push(("morphism", morphism_to_json(&gen_morphism(params)?)));
    }
    if matches!(what, What::Functor | What::All) {
        docs.push(("functor", functor_to_json(&gen_functor(params)?)));
    }
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
            let mut text = String::new();
            let mut files = Vec::new();
            for (name, v) in &docs {
                let path = dir.join(format!("{name}.json"));
                let body = serde_json::to_string_pretty(v).expect("values serialize") + "\n";
                fs::write(&path, body).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
                text.push_str(&format!("wrote {}\n", path.display()));
                files.push(path.display().to_string());
            }
            Ok(Report { status: Status::Pass, json: json!({ "files": files }), text })
        }
        None => {
            // a single document prints as itself; several print as a map
            let js = if docs.len() == 1 || what == What::Category {
                docs.swap_remove(0).1
            } else {
                Value::Object(docs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
            };
            let text = serde_json::to_string_pretty(&js).expect("values serialize") + "\n";
            Ok(Report { status: Status::Pass, json: js, text })
        }
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    let tol = Tolerance { abs_eps: cli.tol, rel_eps: cli.tol };
    let input = cli.input.as_deref();
    match &cli.command {
        Command::Validate => validate(load(input)?, tol),
        Command::Spectrum => spectrum(load(input)?, tol),
        Command::Sections => sections(load(input)?, tol),
        Command::Roundtrip { gen, params } => {
            let doc = if *gen { None } else { Some(load(input)?) };
            roundtrip(doc, &params.params(cli.seed), tol)
        }
        Command::Naturality { gen, params } => {
            let doc = if *gen { None } else { Some(load(input)?) };
            naturality(doc, &params.params(cli.seed), tol)
        }
        Command::Link => link(load(input)?, tol),
        Command::Gen { what, out, params } => generate(*what, out.as_deref(), &params.params(cli.seed)),
    }
}

fn main() -> ExitCode {
    // one worker thread per invocation; must precede any rayon use
    std::env::set_var("RAYON_NUM_THREADS", "1");
    // clap's own usage exit code (2) would read as a validation failure
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(report) => {
            match cli.format {
                Format::Json => {
                    let mut js = report.json;
                    // generated documents are emitted verbatim so they re-ingest
                    if let (Value::Object(map), false) = (&mut js, matches!(cli.command, Command::Gen { .. })) {
                        map.insert("status".into(), json!(format!("{:?}", report.status).to_lowercase()));
                    }
                    println!("{}", serde_json::to_string_pretty(&js).expect("values serialize"));
                }
                Format::Text => print!("{}", report.text),
            }
            ExitCode::from(report.status.code())
        }
        Err(f) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&f.json()).expect("values serialize")),
                Format::Text => eprintln!("error: {f}"),
            }
            ExitCode::from(f.code())
        }
    }
}
