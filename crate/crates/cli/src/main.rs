mod cache;

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_complex::Complex;
use serde::Serialize;
use serde_json::{json, Value};

use gu3::cayley::{build_cayley, extremal_sparse, ramanujan_check, spectrum_dense, ExtremalOptions, RamanujanMode};
use gu3::covering::covering_stats;
use gu3::finite_field::{closure, det_class_test, predict_group, reduce_gates, Field, FinGroup, FinMat, GroupKind};
use gu3::formulas::sphere_stats;
use gu3::gates::{alternating_words_distinct, gate_set, p_prime, sigma, spheres, tau, GateSet};
use gu3::navigation::{evaluate_word, Navigator};
use gu3::similitude::{GMat, SimilitudeMatrix};
use gu3::{Error, Variant};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "gu3", version, about = "Golden gates for PU(3): generators, spectra, navigation, covering")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate a generator set.
    Gen(GenArgs),
    /// Sphere sizes and Ramanujan bounds of the spherical operators.
    Sizes(SizesArgs),
    /// Identify the finite group generated modulo q.
    Identify(IdentifyArgs),
    /// Spectrum of the Cayley graph modulo q.
    Spectrum(SpectrumArgs),
    /// Compile a lattice element into a generator word.
    Navigate(NavigateArgs),
    /// Nearest-word covering statistics in PU(3).
    Cover(CoverArgs),
    /// Checks on the super golden gates.
    Supergates(SuperArgs),
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value = "full")]
    variant: Variant,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug, Serialize)]
struct SizesArgs {
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value_t = 3)]
    lmax: u32,
    #[arg(long, default_value = "full")]
    variant: Variant,
    /// Also count the spheres by breadth-first search and compare.
    #[arg(long)]
    bfs: bool,
    #[arg(long, default_value_t = 2_000_000)]
    cap: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct IdentifyArgs {
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value_t = 3)]
    q: u64,
    /// Largest group to enumerate for the order check.
    #[arg(long, default_value_t = 1_000_000)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Dense,
    Extremal,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value_t = 3)]
    q: u64,
    #[arg(long, default_value = "split")]
    variant: Variant,
    #[arg(long, value_enum, default_value = "dense")]
    mode: Mode,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Extremal values per end (extremal mode).
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 3000)]
    max_iter: usize,
    #[arg(long, default_value_t = 2_000_000)]
    cap: usize,
    /// Write the Cayley graph as an edge list "u v gen_index".
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Write the vertex keys (matrix entries over the field) as JSON.
    #[arg(long)]
    vertices: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct NavigateArgs {
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value = "split")]
    variant: Variant,
    /// Matrix JSON; read from stdin when absent.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CoverArgs {
    #[arg(long, default_value_t = 3)]
    p: u64,
    #[arg(long, default_value = "full")]
    variant: Variant,
    #[arg(long, default_value_t = 2)]
    lmax: u32,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2_000_000)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SuperArgs {
    /// Maximal syllable length of the alternating words.
    #[arg(long, default_value_t = 10)]
    syllables: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status classes.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Cap(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Cap(_) => 3,
            Failure::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Cap(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } | Error::TooLarge { .. } => Failure::Cap(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn document(command: &str, config: &impl Serialize, body: Value) -> Value {
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
    });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

fn emit(doc: &Value, out: Option<&Path>) -> Outcome {
    let text = serde_json::to_string_pretty(doc).expect("serializable") + "\n";
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_gates(p: u64, variant: Variant) -> Result<GateSet<i64>, Failure> {
    let lifts: Vec<SimilitudeMatrix<i64>> = cache::memo(&format!("gates-{variant}-{p}"), || {
        let g = gate_set::<i64>(p, variant)?;
        Ok::<_, Error>(g.lifts.iter().map(|l| SimilitudeMatrix::new(g.p, l.clone())).collect())
    })?;
    let set_p = if variant == Variant::Super { 2 } else { p };
    Ok(GateSet::from_lifts(set_p, variant, lifts.into_iter().map(|m| m.rows).collect()))
}

fn load_group(p: u64, variant: Variant, q: u64, gens: &[FinMat], field: &Field, cap: usize) -> Result<FinGroup, Failure> {
    let elements: Vec<FinMat> = cache::memo(&format!("closure-{variant}-{p}-{q}"), || {
        closure(gens, field, cap).map(|g| g.elements)
    })?;
    if elements.len() > cap {
        return Err(Error::CapExceeded { cap }.into());
    }
    Ok(FinGroup::from_elements(elements))
}

fn cmd_gen(a: &GenArgs) -> Outcome {
    let gates = load_gates(a.p, a.variant)?;
    let matrices: Vec<SimilitudeMatrix<i64>> = gates.lifts.iter().map(|l| SimilitudeMatrix::new(gates.p, l.clone())).collect();
    let manifest = json!({
        "p": gates.p,
        "p_prime": (a.variant != Variant::Super).then(|| p_prime(a.p)),
        "variant": a.variant,
        "count": gates.len(),
        "symmetric": gates.is_symmetric(),
    });
    emit(&document("gen", a, json!({ "manifest": manifest, "matrices": matrices })), a.out.as_deref())
}

fn cmd_sizes(a: &SizesArgs) -> Outcome {
    let mut rows = Vec::new();
    let counts = if a.bfs {
        let gates = load_gates(a.p, a.variant)?;
        Some(spheres(&gates.elements, a.lmax as usize, a.cap)?.iter().map(|s| s.len()).collect::<Vec<_>>())
    } else {
        None
    };
    let mut mismatches = Vec::new();
    for l in 1..=a.lmax {
        let s = sphere_stats(a.p, l, a.variant)?;
        let bfs = counts.as_ref().map(|c| c[l as usize]);
        if let Some(n) = bfs {
            if n.to_string() != s.lambda_triv {
                mismatches.push(l);
            }
        }
        rows.push(json!({
            "l": l,
            "lambda_triv": s.lambda_triv,
            "lambda_ram": s.lambda_ram,
            "lambda_ram_f64": s.lambda_ram_f64,
            "bfs_count": bfs,
        }));
    }
    match a.format {
        Format::Json => emit(&document("sizes", a, json!({ "rows": rows, "consistent": mismatches.is_empty() })), a.out.as_deref())?,
        Format::Table => {
            let mut text = format!("{:>3}  {:>24}  {:>24}  {:>12}\n", "l", "lambda_triv", "lambda_ram", "bfs");
            for r in &rows {
                text += &format!(
                    "{:>3}  {:>24}  {:>24}  {:>12}\n",
                    r["l"].as_u64().unwrap(),
                    r["lambda_triv"].as_str().unwrap(),
                    r["lambda_ram"].as_str().unwrap(),
                    r["bfs_count"].as_u64().map(|n| n.to_string()).unwrap_or_else(|| "-".into())
                );
            }
            match &a.out {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("BFS sphere sizes differ from the closed form at l = {mismatches:?}")))
    }
}

fn cmd_identify(a: &IdentifyArgs) -> Outcome {
    if a.p == a.q {
        return Err(Failure::Validation("q must differ from p".into()));
    }
    let prediction = predict_group(a.p, a.q)?;
    let field = Field::for_prime(a.q)?;
    let gates = load_gates(a.p, Variant::Full)?;
    let gens = reduce_gates(&gates.lifts, &field);
    let det_cubes = det_class_test(&gens, &field);
    let simple = matches!(prediction.kind, GroupKind::PSL3 | GroupKind::PSU3);
    let order = if prediction.order <= a.cap as u128 {
        Some(load_group(a.p, Variant::Full, a.q, &gens, &field, a.cap)?.len())
    } else {
        None
    };
    let order_ok = order.is_none_or(|n| n as u128 == prediction.order);
    let doc = document(
        "identify",
        a,
        json!({
            "label": prediction.label,
            "kind": format!("{:?}", prediction.kind),
            "tripartite": prediction.tripartite,
            "cubic_symbol": prediction.symbol,
            "predicted_order": prediction.order.to_string(),
            "det_in_cubes": det_cubes,
            "det_class_agrees": det_cubes == simple,
            "bfs_order": order,
        }),
    );
    emit(&doc, a.out.as_deref())?;
    if det_cubes != simple || !order_ok {
        return Err(Failure::Verification("group identification is inconsistent".into()));
    }
    Ok(())
}

fn cmd_spectrum(a: &SpectrumArgs) -> Outcome {
    if a.variant == Variant::Super {
        return Err(Failure::Validation("spectra are defined for the S_p variants only".into()));
    }
    if a.p == a.q {
        return Err(Failure::Validation("q must differ from p".into()));
    }
    let prediction = predict_group(a.p, a.q)?;
    let field = Field::for_prime(a.q)?;
    let gates = load_gates(a.p, a.variant)?;
    let gens = reduce_gates(&gates.lifts, &field);
    let group = load_group(a.p, a.variant, a.q, &gens, &field, a.cap)?;
    let graph = build_cayley(&group, &gens, &field)?;
    if let Some(path) = &a.edges {
        graph.write_edge_list(BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = &a.vertices {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "q": a.q,
            "quadratic": field.is_quadratic(),
            "vertices": graph.vertices,
        });
        std::fs::write(path, serde_json::to_string(&doc).expect("serializable"))?;
    }
    let mode = match a.variant {
        Variant::Split => RamanujanMode::Split,
        _ if a.p % 4 == 3 => RamanujanMode::Inert,
        _ => RamanujanMode::Symmetric,
    };
    let tripartite = prediction.tripartite && mode == RamanujanMode::Split;
    let (report, extremal) = match a.mode {
        Mode::Dense => {
            let eigs = spectrum_dense::<f64>(&graph)?;
            let mut r = ramanujan_check(&eigs, a.p, graph.degree(), mode, tripartite, a.tol);
            r.eigenvalues = eigs.iter().map(|z| [z.re, z.im]).collect();
            (r, None)
        }
        Mode::Extremal => {
            if !graph.is_symmetric() {
                return Err(Failure::Validation("extremal mode needs a symmetric generator set".into()));
            }
            let opts = ExtremalOptions { k: a.k, max_iter: a.max_iter, tol: a.tol, seed: a.seed, deflate_constant: true };
            let ext = extremal_sparse(&graph, &opts)?;
            let values: Vec<Complex<f64>> =
                ext.largest.iter().chain(&ext.smallest).map(|r| Complex::new(r.value, 0.0)).collect();
            let r = ramanujan_check(&values, a.p, graph.degree(), mode, tripartite, a.tol);
            (r, Some(ext))
        }
    };
    let mut report = report;
    report.vertices = graph.len();
    let converged = extremal.as_ref().is_none_or(|e| e.converged);
    let doc = document(
        "spectrum",
        a,
        json!({
            "group": prediction.label,
            "tripartite": prediction.tripartite,
            "report": report,
            "extremal": extremal,
        }),
    );
    emit(&doc, a.out.as_deref())?;
    if !converged {
        return Err(Failure::Verification("Lanczos did not converge".into()));
    }
    if !report.pass {
        return Err(Failure::Verification(format!("{} eigenvalues violate the Ramanujan bound", report.failures.len())));
    }
    Ok(())
}

fn cmd_navigate(a: &NavigateArgs) -> Outcome {
    let mut text = String::new();
    match &a.input {
        Some(path) => text = std::fs::read_to_string(path)?,
        None => {
            std::io::stdin().read_to_string(&mut text)?;
        }
    }
    let input: SimilitudeMatrix<BigInt> =
        serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("bad matrix JSON: {e}")))?;
    if input.p != a.p {
        return Err(Failure::Validation(format!("input is over p = {}, expected {}", input.p, a.p)));
    }
    let gates = load_gates(a.p, a.variant)?.convert::<BigInt>();
    let nav = Navigator::new(gates)?;
    let (word, stats) = nav.navigate(&input.rows)?;
    let eval = evaluate_word(&word, nav.gates())?;
    let verified = gu3::similitude::projective_equal(eval.matrix(), &input.rows);
    let check = SimilitudeMatrix::new(a.p, eval.into_matrix());
    let doc = document(
        "navigate",
        a,
        json!({
            "word": word,
            "length": word.len(),
            "check": check,
            "verified": verified,
            "row_rule_steps": stats.unique_matches,
            "scan_steps": stats.fallbacks,
        }),
    );
    emit(&doc, a.out.as_deref())?;
    if !verified {
        return Err(Failure::Verification("evaluated word differs from the input".into()));
    }
    Ok(())
}

fn cmd_cover(a: &CoverArgs) -> Outcome {
    let report = covering_stats(a.p, a.variant, a.lmax, a.samples, a.seed, a.cap)?;
    emit(&document("cover", a, json!({ "report": report })), a.out.as_deref())
}

fn cmd_supergates(a: &SuperArgs) -> Outcome {
    let (s, t) = (sigma::<BigInt>(), tau::<BigInt>());
    let cube = |m: &GMat<BigInt>| m.mul(m).mul(m).is_scalar();
    let (sigma_ok, tau_ok) = (cube(&s), cube(&t));
    let (words, distinct) = alternating_words_distinct::<BigInt>(a.syllables);
    let gates = load_gates(2, Variant::Super)?;
    let matrices: Vec<SimilitudeMatrix<i64>> = gates.lifts.iter().map(|l| SimilitudeMatrix::new(2, l.clone())).collect();
    let doc = document(
        "supergates",
        a,
        json!({
            "sigma": SimilitudeMatrix::new(2, s),
            "tau": SimilitudeMatrix::new(2, t),
            "generators": matrices,
            "sigma_cubed_scalar": sigma_ok,
            "tau_cubed_scalar": tau_ok,
            "alternating_words": words,
            "all_distinct": distinct,
        }),
    );
    emit(&doc, a.out.as_deref())?;
    if sigma_ok && tau_ok && distinct {
        Ok(())
    } else {
        Err(Failure::Verification("super gate checks failed".into()))
    }
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(e.to_string()))?;
    }
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Sizes(a) => cmd_sizes(a),
        Command::Identify(a) => cmd_identify(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Navigate(a) => cmd_navigate(a),
        Command::Cover(a) => cmd_cover(a),
        Command::Supergates(a) => cmd_supergates(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
