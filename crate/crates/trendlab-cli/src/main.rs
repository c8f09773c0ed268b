//! `trendlab`: generate → trends → ratios → detect → purge → report, plus
//! `verify`. Every stage reads and writes plain files; failures print one JSON
//! error record on stderr and exit nonzero.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use trendlab::corpus::LoadError;
use trendlab::pipeline::{self, AnalysisOptions, PipelineError, Study, TrendView};
use trendlab::report;
use trendlab::spam::{identify_suspects, remove_spam, DetectionMethod, SpamError, SuspectSet};
use trendlab::stats::StatsError;
use trendlab::synth::{apply_moderation, generate, ConfigError, GenConfig, ModerationPolicy};
use trendlab::verify::{verify_corpus, VerifyError};
use trendlab::Corpus;

#[derive(Parser)]
#[command(name = "trendlab", version, about = "Trend inflation lab")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file: generator fields plus frames, alpha, method, n_bootstrap.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Growth-ratio frames, e.g. `10:2,8:3`.
    #[arg(long, global = true)]
    frames: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// `oracle` or `threshold:<theta>`.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Bootstrap replicates per goodness-of-fit test.
    #[arg(long, global = true)]
    bootstrap: Option<usize>,
    #[arg(long, global = true, default_value = "trendlab-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a moderated synthetic corpus: <out>/corpus.txt.
    Generate,
    /// Hourly trending lists, lifelines and duration statistics.
    Trends { corpus: PathBuf },
    /// Growth-ratio log-normal fits per frame and class.
    Ratios { corpus: PathBuf },
    /// Suspected spammers: <out>/suspects.json.
    Detect { corpus: PathBuf },
    /// Remove suspects and their retweet cascades: <out>/cleaned.txt.
    Purge {
        corpus: PathBuf,
        #[arg(long)]
        suspects: PathBuf,
    },
    /// Full detect-and-clean study as a report bundle. Without a corpus, one
    /// is generated from the config.
    Report { corpus: Option<PathBuf> },
    /// Brute-force oracle checks. Without a corpus, a small one is generated.
    Verify { corpus: Option<PathBuf> },
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
    extra: Value,
}

impl Failure {
    fn new(kind: &'static str, message: impl ToString) -> Self {
        Failure {
            kind,
            message: message.to_string(),
            extra: Value::Null,
        }
    }

    fn config(message: impl ToString) -> Self {
        Self::new("ConfigError", message)
    }

    fn file(path: &Path, message: impl std::fmt::Display) -> Self {
        let mut f = Self::new("FileError", format!("{}: {message}", path.display()));
        f.extra = json!({ "path": path });
        f
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            "ConfigError" => 2,
            "FileError" => 3,
            "IntegrityError" => 4,
            _ => 5,
        }
    }

    fn record(&self) -> Value {
        let mut v = json!({ "error": self.kind, "message": self.message });
        if let Value::Object(extra) = &self.extra {
            v.as_object_mut().unwrap().extend(extra.clone());
        }
        v
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::config(e)
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        Failure::config(e)
    }
}

impl From<SpamError> for Failure {
    fn from(e: SpamError) -> Self {
        match e {
            SpamError::Integrity(e) => Failure::new("IntegrityError", e),
            e => Failure::config(e),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Stats(e) => e.into(),
            PipelineError::Spam(e) => e.into(),
        }
    }
}

struct Settings {
    gen: GenConfig,
    opts: AnalysisOptions,
    method: DetectionMethod,
}

const RUN_KEYS: [&str; 4] = ["frames", "alpha", "method", "n_bootstrap"];

fn parse_frames(s: &str) -> Result<Vec<(usize, usize)>, Failure> {
    s.split(',')
        .map(|f| {
            let (i, j) = f.trim().split_once(':').ok_or_else(|| Failure::config(format!("frame `{f}` is not i:j")))?;
            let n = |x: &str| x.trim().parse::<usize>().map_err(|_| Failure::config(format!("frame `{f}` is not i:j")));
            Ok((n(i)?, n(j)?))
        })
        .collect()
}

fn settings(a: &RunArgs) -> Result<Settings, Failure> {
    let mut opts = AnalysisOptions::default();
    let mut method = DetectionMethod::DeletionOracle;
    let mut gen = GenConfig::default();
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::file(path, e))?;
        let mut table: toml::Table = text.parse().map_err(|e| Failure::config(format!("config file: {e}")))?;
        let bad_type = |k: &str| Failure::config(format!("config key `{k}` has the wrong type"));
        for key in RUN_KEYS {
            let Some(v) = table.remove(key) else { continue };
            match key {
                "frames" => opts.frames = parse_frames(v.as_str().ok_or_else(|| bad_type(key))?)?,
                "alpha" => opts.alpha = v.as_float().or(v.as_integer().map(|i| i as f64)).ok_or_else(|| bad_type(key))?,
                "method" => method = v.as_str().ok_or_else(|| bad_type(key))?.parse().map_err(Failure::config)?,
                _ => {
                    let n = v.as_integer().filter(|&n| n >= 0).ok_or_else(|| bad_type(key))?;
                    opts.n_bootstrap = n as usize;
                }
            }
        }
        gen = GenConfig::from_kv_str(&toml::to_string(&table).map_err(Failure::config)?)?;
    }
    if let Some(seed) = a.seed {
        gen.seed = seed;
    }
    if let Some(f) = &a.frames {
        opts.frames = parse_frames(f)?;
    }
    if let Some(alpha) = a.alpha {
        opts.alpha = alpha;
    }
    if let Some(m) = &a.method {
        method = m.parse().map_err(Failure::config)?;
    }
    if let Some(b) = a.bootstrap {
        opts.n_bootstrap = b;
    }
    pipeline::validate_frames(&opts.frames)?;
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Failure::config(format!("alpha must lie in (0, 1), got {}", opts.alpha)));
    }
    if opts.n_bootstrap == 0 {
        return Err(Failure::config("n_bootstrap must be positive"));
    }
    opts.seed = gen.seed;
    Ok(Settings {
        gen,
        opts,
        method,
    })
}

fn load(path: &Path) -> Result<Corpus, Failure> {
    Corpus::load(path).map_err(|e| match e {
        LoadError::Integrity(e) => {
            let mut f = Failure::new("IntegrityError", format!("{}: {e}", path.display()));
            f.extra = json!({ "path": path });
            f
        }
        LoadError::Parse { line, message } => {
            let mut f = Failure::file(path, format!("line {line}: {message}"));
            f.extra["line"] = json!(line);
            f
        }
        LoadError::Io(e) => Failure::file(path, e),
    })
}

fn out_dir(out: &Path) -> Result<&Path, Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::file(out, e))?;
    Ok(out)
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::file(path, e))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("outputs serialize") + "\n"
}

fn generate_corpus(gen: &GenConfig) -> Result<Corpus, Failure> {
    let corpus = generate(gen)?;
    Ok(apply_moderation(&corpus, &ModerationPolicy::default(), gen.seed))
}

fn run(cli: Cli) -> Result<Value, Failure> {
    let s = settings(&cli.run)?;
    let out = cli.run.out.as_path();
    match cli.cmd {
        Cmd::Generate => {
            let corpus = generate_corpus(&s.gen)?;
            let dir = out_dir(out)?;
            let path = dir.join("corpus.txt");
            corpus.save(&path).map_err(|e| Failure::file(&path, e))?;
            write(&dir.join("config.toml"), s.gen.to_kv_string())?;
            Ok(json!({ "command": "generate", "corpus": path, "summary": corpus.summary() }))
        }
        Cmd::Trends { corpus } => {
            let corpus = load(&corpus)?;
            let view = TrendView::new(&corpus);
            let stats = pipeline::trend_stats(&view, &s.opts);
            let files = report::trend_files(&view, &stats);
            report::write_files(out_dir(out)?, &files).map_err(|e| Failure::file(out, e))?;
            Ok(json!({
                "command": "trends",
                "n_trending_keywords": view.lifelines.len(),
                "mean_trending_hours": stats.mean_duration_hours,
                "files": files.iter().map(|f| &f.path).collect::<Vec<_>>(),
            }))
        }
        Cmd::Ratios { corpus } => {
            let corpus = load(&corpus)?;
            let view = TrendView::new(&corpus);
            let fits = pipeline::ratio_fits(&view.timelines(&corpus), &s.opts)?;
            let files = report::ratio_files(&fits, None);
            report::write_files(out_dir(out)?, &files).map_err(|e| Failure::file(out, e))?;
            let accepted: Vec<Value> = fits
                .iter()
                .map(|r| json!({ "class": r.class.as_str(), "frame": r.frame, "n": r.n, "accepted": r.accepted() }))
                .collect();
            Ok(json!({ "command": "ratios", "fits": accepted }))
        }
        Cmd::Detect { corpus } => {
            let corpus = load(&corpus)?;
            let suspects = identify_suspects(&corpus, s.method)?;
            let path = out_dir(out)?.join("suspects.json");
            write(&path, to_json(&suspects))?;
            Ok(json!({ "command": "detect", "method": report::method_label(s.method), "n_suspects": suspects.len(), "suspects": path }))
        }
        Cmd::Purge { corpus, suspects } => {
            let corpus = load(&corpus)?;
            let text = fs::read_to_string(&suspects).map_err(|e| Failure::file(&suspects, e))?;
            let set: SuspectSet = serde_json::from_str(&text).map_err(|e| Failure::file(&suspects, e))?;
            let (cleaned, removal) = remove_spam(&corpus, &set)?;
            let dir = out_dir(out)?;
            let path = dir.join("cleaned.txt");
            cleaned.save(&path).map_err(|e| Failure::file(&path, e))?;
            write(&dir.join("removal.json"), to_json(&removal))?;
            Ok(json!({ "command": "purge", "cleaned": path, "removal": removal }))
        }
        Cmd::Report { corpus } => {
            let (corpus, config) = match corpus {
                Some(p) => (load(&p)?, None),
                None => (generate_corpus(&s.gen)?, Some(&s.gen)),
            };
            let study = Study::run(&corpus, s.method, &s.opts)?;
            let manifest =
                report::write_bundle(out_dir(out)?, &study, &s.opts, s.method, config).map_err(|e| Failure::file(out, e))?;
            Ok(json!({
                "command": "report",
                "out": out,
                "files": manifest.files.len(),
                "headline": study.headline(),
            }))
        }
        Cmd::Verify { corpus } => {
            let corpus = match corpus {
                Some(p) => load(&p)?,
                None if cli.run.config.is_some() => generate(&s.gen)?,
                None => generate(&GenConfig::small(s.gen.seed))?,
            };
            let report = verify_corpus(&corpus).map_err(|e| match e {
                VerifyError::TooLarge { .. } => Failure::config(e),
            })?;
            if let Some(bad) = report.first_failure() {
                let mut f = Failure::new(
                    "VerifyFailed",
                    format!("{} mismatching records; first in check `{}`", report.mismatches(), bad.check),
                );
                f.extra = json!({ "check": bad.check, "first_mismatch": bad.first_mismatch, "report": report });
                return Err(f);
            }
            Ok(json!({ "command": "verify", "passed": true, "report": report }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::config(e.render().to_string().trim());
            eprintln!("{}", f.record());
            return ExitCode::from(f.exit_code());
        }
    };
    match run(cli) {
        Ok(v) => {
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(f.exit_code())
        }
    }
}
