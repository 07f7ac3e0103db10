//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure or a failed verification, 2 invalid
//! input, 3 work budget or limit exhausted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{self, CutKind, VERSION};
use crate::cutpoints::{self, DecompositionMethod};
use crate::error::{Error, Result};
use crate::mallows::MallowsParams;
use crate::matching;
use crate::perm::IntInterval;
use crate::prefs::{parse_prefs_json, PreferenceStructure, Role};

const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Parser, Debug)]
#[command(name = "stable-mallows", version, about = "Stable matchings under Mallows preferences")]
pub struct Cli {
    /// Worker threads; never changes any output byte.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Draw one Mallows permutation of [1, n].
    SamplePerm(SampleArgs),
    /// Draw a preference structure on [1, n].
    SamplePrefs(SampleArgs),
    /// Run deferred acceptance.
    GaleShapley(GaleShapleyArgs),
    /// List every stable matching.
    Enumerate(EnumerateArgs),
    /// Print the number of stable matchings.
    Count(CountArgs),
    /// Report the certified and exact cut positions.
    Cutpoints(CutpointsArgs),
    /// Split into blocks and count each one.
    Decompose(DecomposeArgs),
    /// Estimate the growth rate of the number of stable matchings.
    EstimateGamma(EstimateGammaArgs),
    /// Estimate the density of cutpoints.
    EstimateRho(EstimateRhoArgs),
    /// Evaluate a closed-form lower bound.
    Bounds(BoundsArgs),
    /// Compare inversion tails with their geometric bounds.
    VerifyTails(VerifyArgs),
    /// Compare the sampler with the exact law.
    VerifyLaw(VerifyLawArgs),
    /// Offset discrepancy of restrictions as the window shrinks.
    VerifyDecay(VerifyDecayArgs),
    /// Write the two-matching gadget structure.
    Gadget(GadgetArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Side {
    Men,
    Women,
}

#[derive(Args, Debug, Serialize)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write here instead of stdout. CSV files get a `.meta.json` sidecar.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct Source {
    /// Preference file as written by `sample-prefs` or `gadget`.
    #[arg(long, conflicts_with_all = ["q", "n"])]
    prefs: Option<PathBuf>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[arg(long)]
    q: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct GaleShapleyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "men")]
    proposing: Side,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EnumerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1_000_000)]
    limit: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct CountArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: Source,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Count block by block instead of on the whole window.
    #[arg(long)]
    method: Option<DecompositionMethod>,
}

#[derive(Args, Debug, Serialize)]
struct CutpointsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: Source,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct DecomposeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: Source,
    #[arg(long, default_value = "auto")]
    method: DecompositionMethod,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct EstimateGammaArgs {
    #[arg(long)]
    q: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "auto")]
    method: DecompositionMethod,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct EstimateRhoArgs {
    #[arg(long)]
    q: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "exact")]
    kind: CutKind,
    /// Cut positions excluded at each window edge [default: n / 10].
    #[arg(long)]
    margin: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
#[group(id = "which", required = true, multiple = false, args = ["rho", "gadget", "res"])]
struct BoundsArgs {
    /// Certified-cut probability; best over N <= --n-max unless --N is given.
    #[arg(long)]
    rho: bool,
    /// Probability of a planted gadget between certified cuts.
    #[arg(long)]
    gadget: bool,
    /// Probability of a prescribed pattern with both outer parts fixed.
    #[arg(long)]
    res: bool,
    #[arg(long)]
    q: f64,
    #[arg(long = "N")]
    big_n: Option<u64>,
    #[arg(long, default_value_t = 5000)]
    n_max: u64,
    #[arg(long, default_value_t = 50)]
    m: u64,
    #[arg(long, default_value_t = 0)]
    inv: u64,
    #[arg(long, default_value_t = 1)]
    size: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct VerifyLawArgs {
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct VerifyDecayArgs {
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 60)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,5,10,15,20")]
    margins: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct GadgetArgs {
    #[arg(long, default_value_t = 50)]
    m: i64,
    /// Use the domain [1, 2m+1] instead of [-m, m].
    #[arg(long)]
    shifted: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// What a command produced, before it is written anywhere.
enum Document {
    /// A JSON object; `version` and `config` keys are added.
    Object(Value),
    /// A bare JSON value or CSV text; metadata goes to a sidecar file.
    Raw(String),
    /// Plain text with no metadata, such as a count.
    Plain(String),
}

struct Outcome {
    doc: Document,
    /// Human summary for stderr.
    summary: Option<String>,
    /// False when a verification did not pass.
    ok: bool,
}

impl Outcome {
    fn new(doc: Document) -> Self {
        Outcome { doc, summary: None, ok: true }
    }

    fn summary(mut self, s: impl Into<String>) -> Self {
        self.summary = Some(s.into());
        self
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::LimitExceeded { .. } | Error::AllTrialsFailed { .. } => 3,
        Error::Io(_) | Error::Overflow => 1,
        _ => 2,
    }
}

/// Parse `args` (program name first) and run, writing to the given streams.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::BadParameter("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Io(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli.command))),
        None => execute(&cli.command),
    };
    match result.and_then(|o| deliver(&cli.command, o, stdout, stderr)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Run with the process arguments and standard streams.
pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn config(cmd: &Command) -> Value {
    serde_json::to_value(cmd).expect("arguments serialize")
}

fn out_path(cmd: &Command) -> Option<&Path> {
    let p = match cmd {
        Command::SamplePerm(a) | Command::SamplePrefs(a) => &a.output.out,
        Command::GaleShapley(a) => &a.out,
        Command::Enumerate(a) => &a.output.out,
        Command::Count(_) => &None,
        Command::Cutpoints(a) => &a.output.out,
        Command::Decompose(a) => &a.output.out,
        Command::EstimateGamma(a) => &a.output.out,
        Command::EstimateRho(a) => &a.output.out,
        Command::Bounds(a) => &a.output.out,
        Command::VerifyTails(a) => &a.output.out,
        Command::VerifyLaw(a) => &a.output.out,
        Command::VerifyDecay(a) => &a.output.out,
        Command::Gadget(a) => &a.out,
    };
    p.as_deref()
}

fn terminated(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn deliver(cmd: &Command, o: Outcome, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool> {
    let meta = json!({ "version": VERSION, "config": config(cmd) });
    let (body, sidecar) = match o.doc {
        Document::Object(mut v) => {
            if let Value::Object(map) = &mut v {
                map.insert("version".into(), meta["version"].clone());
                map.insert("config".into(), meta["config"].clone());
            }
            (serde_json::to_string(&v).expect("serializable") + "\n", false)
        }
        Document::Raw(s) => (terminated(s), true),
        Document::Plain(s) => (terminated(s), false),
    };
    match out_path(cmd) {
        Some(path) => {
            fs::write(path, &body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            if sidecar {
                let mut meta_path = path.as_os_str().to_owned();
                meta_path.push(".meta.json");
                let text = serde_json::to_string(&meta).expect("serializable") + "\n";
                fs::write(&meta_path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            writeln!(stderr, "wrote {}", path.display())?;
        }
        None => stdout.write_all(body.as_bytes())?,
    }
    if let Some(s) = o.summary {
        writeln!(stderr, "{s}")?;
    }
    if !o.ok {
        writeln!(stderr, "verification failed")?;
    }
    Ok(o.ok)
}

fn params(q: f64) -> Result<MallowsParams> {
    MallowsParams::new(q)
}

fn load(src: &Source) -> Result<PreferenceStructure> {
    if let Some(path) = &src.prefs {
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{shown}: {e}")))?;
        return Ok(parse_prefs_json(&shown, &text)?.0);
    }
    match (src.q, src.n) {
        (Some(q), Some(n)) => PreferenceStructure::sample(&params(q)?, IntInterval::one_to(n)?, src.seed),
        _ => Err(Error::BadParameter("give either --prefs FILE or both --q and --n".into())),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn csv_line<I: IntoIterator<Item = String>>(cells: I) -> String {
    let mut s = cells.into_iter().collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::SamplePerm(a) => {
            let domain = IntInterval::one_to(a.n)?;
            let p = params(a.q)?;
            let mut rng = crate::rng::RngStream::for_person(a.seed, crate::rng::StreamRole::Permutation, 0, 0);
            let pi = p.sample(domain, &mut rng)?;
            Ok(Outcome::new(match a.output.format {
                Format::Json => Document::Object(json!({
                    "domain": domain,
                    "values": pi.values(),
                    "inversions": pi.inversion_number(),
                })),
                Format::Csv => {
                    let mut s = String::from("position,value\n");
                    for (i, v) in domain.iter().zip(pi.values()) {
                        s.push_str(&format!("{i},{v}\n"));
                    }
                    Document::Raw(s)
                }
            }))
        }
        Command::SamplePrefs(a) => {
            let p = PreferenceStructure::sample(&params(a.q)?, IntInterval::one_to(a.n)?, a.seed)?;
            Ok(Outcome::new(match a.output.format {
                Format::Json => Document::Object(to_value(&p.to_document(Some(a.q), Some(a.seed)))),
                Format::Csv => Document::Raw(p.to_csv()),
            }))
        }
        Command::GaleShapley(a) => {
            let p = load(&a.source)?;
            let role = match a.proposing {
                Side::Men => Role::Man,
                Side::Women => Role::Woman,
            };
            let m = matching::gale_shapley(&p, role);
            Ok(Outcome::new(Document::Object(to_value(&m))))
        }
        Command::Enumerate(a) => {
            let p = load(&a.source)?;
            let all = matching::enumerate_stable(&p, a.limit, a.budget)?;
            let summary = format!("stable matchings: {}", all.len());
            let doc = match a.output.format {
                Format::Json => Document::Raw(serde_json::to_string(&all).expect("serializable")),
                Format::Csv => {
                    let mut s = csv_line(p.domain().iter().map(|w| format!("partner_of_woman_{w}")));
                    for m in &all {
                        s.push_str(&csv_line(m.partners().iter().map(i64::to_string)));
                    }
                    Document::Raw(s)
                }
            };
            Ok(Outcome::new(doc).summary(summary))
        }
        Command::Count(a) => {
            let p = load(&a.source)?;
            let c = match a.method {
                Some(m) => cutpoints::count_stable_factored(&p, m, a.budget)?,
                None => matching::count_stable(&p, a.budget)?,
            };
            Ok(Outcome::new(Document::Plain(c.to_string())))
        }
        Command::Cutpoints(a) => {
            let p = load(&a.source)?;
            let dom = p.domain();
            let displacement = cutpoints::displacement_cuts(&p);
            let certified = cutpoints::certified_cuts(&p);
            let exact = cutpoints::exact_cuts(&p);
            let summary = format!(
                "{} displacement, {} certified, {} exact of {} interior cuts",
                displacement.len(),
                certified.len(),
                exact.len(),
                dom.len() - 1
            );
            let doc = match a.output.format {
                Format::Json => Document::Object(json!({
                    "domain": dom,
                    "displacement": displacement,
                    "certified": certified,
                    "exact": exact,
                })),
                Format::Csv => {
                    let mut s = String::from("cut,displacement,certified,exact\n");
                    for c in dom.lo()..dom.hi() {
                        let has = |v: &[cutpoints::CutPosition]| v.binary_search(&cutpoints::CutPosition(c)).is_ok();
                        s.push_str(&format!("{c},{},{},{}\n", has(&displacement), has(&certified), has(&exact)));
                    }
                    Document::Raw(s)
                }
            };
            Ok(Outcome::new(doc).summary(summary))
        }
        Command::Decompose(a) => {
            let p = load(&a.source)?;
            let d = cutpoints::decompose(&p, a.method, a.budget)?;
            let summary = format!("{} blocks, largest {}, total {}", d.blocks.len(), d.max_block(), d.total());
            let doc = match a.output.format {
                Format::Json => Document::Object(d.to_json()),
                Format::Csv => {
                    let mut s = String::from("block_lo,block_hi,count,log_count\n");
                    for (b, c) in d.blocks.iter().zip(&d.per_block_count) {
                        s.push_str(&format!("{},{},{},{}\n", b.lo(), b.hi(), c, c.log_value()));
                    }
                    Document::Raw(s)
                }
            };
            Ok(Outcome::new(doc).summary(summary))
        }
        Command::EstimateGamma(a) => {
            let r = analysis::estimate_gamma(&params(a.q)?, a.n, a.trials, a.seed, a.method, a.budget)?;
            let (lo, hi) = r.confidence_interval();
            let summary = format!(
                "gamma_hat = {:.6} (std err {:.6}, 95% CI [{lo:.6}, {hi:.6}]), {} failed trials",
                r.gamma_hat, r.std_err, r.failures
            );
            let doc = match a.output.format {
                Format::Json => Document::Object(r.to_json()),
                Format::Csv => Document::Raw(r.to_csv()),
            };
            Ok(Outcome::new(doc).summary(summary))
        }
        Command::EstimateRho(a) => {
            let p = params(a.q)?;
            let r = analysis::estimate_cut_density(&p, a.n, a.trials, a.seed, a.kind, a.margin)?;
            let summary = format!("density_hat = {:.6} (std err {:.6})", r.density_hat, r.std_err);
            let doc = match a.output.format {
                Format::Json => {
                    let mut v = r.to_json();
                    v["lower_bound"] = match analysis::rho_lower_bound_best(&p, 5000) {
                        Ok((n, b)) => json!({ "N": n, "bound": b.to_json() }),
                        Err(_) => Value::Null,
                    };
                    Document::Object(v)
                }
                Format::Csv => Document::Raw(r.to_csv()),
            };
            Ok(Outcome::new(doc).summary(summary))
        }
        Command::Bounds(a) => bounds(a),
        Command::VerifyTails(a) => {
            let r = analysis::verify_offset_tail(&params(a.q)?, a.n, a.samples, a.seed)?;
            let failing: Vec<String> = r.failing().map(|row| format!("{:?} at {}", row.stat, row.k)).collect();
            let summary = if failing.is_empty() { "all tails within bounds".to_string() } else { format!("outside bounds: {}", failing.join(", ")) };
            let doc = match a.output.format {
                Format::Json => Document::Object(r.to_json()),
                Format::Csv => {
                    let mut s = String::from("stat,k,hits,empirical,bound,sigma,pass\n");
                    for row in &r.rows {
                        let stat = to_value(&row.stat);
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            stat.as_str().unwrap_or_default(),
                            row.k,
                            row.hits,
                            row.empirical,
                            row.bound,
                            row.sigma,
                            row.pass
                        ));
                    }
                    Document::Raw(s)
                }
            };
            Ok(Outcome { doc, summary: Some(summary), ok: r.pass })
        }
        Command::VerifyLaw(a) => {
            let r = analysis::verify_law(&params(a.q)?, a.n, a.samples, a.seed, a.tolerance)?;
            let summary = format!("total variation {:.5}; Lehmer marginals {:?}", r.tv_permutation, r.tv_lehmer);
            let doc = match a.output.format {
                Format::Json => Document::Object(r.to_json()),
                Format::Csv => {
                    let mut s = String::from("statistic,position,tv\n");
                    s.push_str(&format!("permutation,,{}\n", r.tv_permutation));
                    for (k, tv) in r.tv_lehmer.iter().enumerate() {
                        s.push_str(&format!("lehmer,{},{tv}\n", k + 1));
                    }
                    Document::Raw(s)
                }
            };
            Ok(Outcome { doc, summary: Some(summary), ok: r.pass })
        }
        Command::VerifyDecay(a) => {
            let r = analysis::verify_restriction_offset_decay(&params(a.q)?, a.n, &a.margins, a.samples, a.seed)?;
            let seq: Vec<String> = r.rows.iter().map(|row| format!("{}:{:.5}", row.margin, row.probability)).collect();
            let doc = match a.output.format {
                Format::Json => Document::Object(r.to_json()),
                Format::Csv => {
                    let mut s = String::from("margin,window_lo,window_hi,distance,hits,probability,sigma\n");
                    for row in &r.rows {
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            row.margin,
                            row.window.lo(),
                            row.window.hi(),
                            row.distance,
                            row.hits,
                            row.probability,
                            row.sigma
                        ));
                    }
                    Document::Raw(s)
                }
            };
            Ok(Outcome { doc, summary: Some(format!("margin:probability {}", seq.join(" "))), ok: r.pass })
        }
        Command::Gadget(a) => {
            let p = if a.shifted { PreferenceStructure::gadget_shifted(a.m)? } else { PreferenceStructure::gadget(a.m)? };
            Ok(Outcome::new(Document::Object(to_value(&p.to_document(None, None)))))
        }
    }
}

fn bounds(a: &BoundsArgs) -> Result<Outcome> {
    let p = params(a.q)?;
    let (kind, n_used, b) = if a.rho {
        match a.big_n {
            Some(n) => ("rho", Some(n), analysis::rho_lower_bound(&p, n)?),
            None => {
                let (n, b) = analysis::rho_lower_bound_best(&p, a.n_max)?;
                ("rho", Some(n), b)
            }
        }
    } else if a.gadget {
        let n = a.big_n.ok_or_else(|| Error::BadParameter("--gadget needs --N".into()))?;
        ("gadget", Some(n), analysis::gadget_event_lower_bound(&p, n, a.m)?)
    } else {
        ("res", None, analysis::res_lower_bound(&p, a.inv, a.size)?)
    };
    let summary = if b.finite {
        format!("{kind} bound = {:.6} (log {:.6})", b.value(), b.log_value)
    } else {
        format!("{kind} bound is vacuous")
    };
    let doc = match a.output.format {
        Format::Json => {
            let mut v = b.to_json();
            v["kind"] = json!(kind);
            v["N"] = json!(n_used);
            Document::Object(v)
        }
        Format::Csv => {
            let log = if b.finite { b.log_value.to_string() } else { String::new() };
            let n = n_used.map(|n| n.to_string()).unwrap_or_default();
            Document::Raw(format!("kind,q,N,log_value,value\n{kind},{},{n},{log},{}\n", a.q, b.value()))
        }
    };
    Ok(Outcome::new(doc).summary(summary))
}
