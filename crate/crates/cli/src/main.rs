use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use rotlab::engine::Corruption;
use rotlab::extract::{check_choice_extraction, check_sender_extraction};
use rotlab::prob::{fmt_prob, parse_prob, Prob};
use rotlab::protolib::{list_protocols, lookup, ProtocolSpec};
use rotlab::report::{emit_report, series_from, text_summary, ExtractReport, Report};
use rotlab::ucharness::{game_sweep, GameMode};
use rotlab::verifier::{family_for, FamilyMode, StandaloneReport, VerifyOptions};

const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Parser)]
#[command(name = "rotlab", version, about = "Exact analysis of random OT protocols over noisy primitives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stand-alone correctness and privacy checks.
    Verify(Opts),
    /// Run the sender and choice extractors over every honest trace.
    ExtractDemo(Opts),
    /// Real-versus-ideal distinguishing game.
    UcGame(Opts),
    /// Run the configured analyses (default: all) and emit report files.
    Report(Opts),
    /// List registered protocols.
    ListProtocols,
}

/// Options shared by every analysis. Flags override values from `--config`.
#[derive(Args, Deserialize, Default, Clone, Debug)]
#[serde(deny_unknown_fields, default)]
struct Opts {
    /// Protocol, e.g. `erasure_rot:n=6,k=2`.
    protocol: Option<String>,
    /// Analysis kind for `report`: standalone, extract, uc-game or all.
    #[arg(long)]
    analysis: Option<String>,
    /// Pass threshold on every stand-alone ε.
    #[arg(long)]
    eps: Option<String>,
    /// Determination threshold for the extractors.
    #[arg(long)]
    theta: Option<String>,
    /// Adversary family: exhaustive or curated.
    #[arg(long)]
    family: Option<String>,
    /// exact or sampling.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Corruption case for the game: none, alice_only, bob_only, both or all.
    #[arg(long)]
    case: Option<String>,
    /// Restrict the game to one adversary by name.
    #[arg(long)]
    adversary: Option<String>,
    /// Pass threshold on the game advantage.
    #[arg(long)]
    max_advantage: Option<String>,
    /// Enumeration budget in weighted atoms.
    #[arg(long)]
    budget: Option<u64>,
    /// Parameter sweep, e.g. `k=1,2,3`.
    #[arg(long)]
    sweep: Option<String>,
    /// Output directory for report.json, summary.txt and series.tsv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any of the above keys.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl Opts {
    fn merged(self) -> Result<Opts, String> {
        let Some(path) = &self.config else { return Ok(self) };
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let file: Opts = serde_json::from_str(&text).map_err(|e| format!("malformed config {}: {e}", path.display()))?;
        Ok(Opts {
            protocol: self.protocol.or(file.protocol),
            analysis: self.analysis.or(file.analysis),
            eps: self.eps.or(file.eps),
            theta: self.theta.or(file.theta),
            family: self.family.or(file.family),
            mode: self.mode.or(file.mode),
            seed: self.seed.or(file.seed),
            samples: self.samples.or(file.samples),
            case: self.case.or(file.case),
            adversary: self.adversary.or(file.adversary),
            max_advantage: self.max_advantage.or(file.max_advantage),
            budget: self.budget.or(file.budget),
            sweep: self.sweep.or(file.sweep),
            out: self.out.or(file.out),
            config: None,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Analysis {
    Standalone,
    Extract,
    Game,
    All,
}

/// Validated run configuration.
struct RunConfig {
    protocols: Vec<String>,
    analysis: Analysis,
    eps: Prob,
    theta: Prob,
    family: FamilyMode,
    mode: GameMode,
    cases: Vec<Corruption>,
    adversary: Option<String>,
    max_advantage: Prob,
    budget: u64,
    out: Option<PathBuf>,
    echo: BTreeMap<String, String>,
}

fn prob_arg(name: &str, v: Option<&str>, default: &str) -> Result<Prob, String> {
    let s = v.unwrap_or(default);
    parse_prob(s).map_err(|e| format!("--{name} {s}: {e}"))
}

/// Expands `name:params` with a sweep `key=v1,v2,...`.
fn sweep_labels(protocol: &str, sweep: Option<&str>) -> Result<Vec<String>, String> {
    let Some(sweep) = sweep else { return Ok(vec![protocol.to_string()]) };
    let (key, values) = sweep.split_once('=').ok_or_else(|| format!("--sweep `{sweep}` is not key=v1,v2,..."))?;
    let (name, rest) = protocol.split_once(':').unwrap_or((protocol, ""));
    let mut params: BTreeMap<String, String> = BTreeMap::new();
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("`{kv}` is not key=value"))?;
        params.insert(k.to_string(), v.to_string());
    }
    let defaults = list_protocols();
    if let Some((_, d, _)) = defaults.iter().find(|(n, _, _)| *n == name) {
        for kv in d.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv.split_once('=').unwrap();
            params.entry(k.to_string()).or_insert_with(|| v.to_string());
        }
    }
    Ok(values
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|v| {
            params.insert(key.to_string(), v.to_string());
            let joined: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{name}:{}", joined.join(","))
        })
        .collect())
}

impl RunConfig {
    fn from_opts(opts: Opts, fixed: Option<Analysis>) -> Result<Self, String> {
        let protocol = opts.protocol.clone().ok_or("missing protocol (positional or in --config)")?;
        let analysis = match fixed {
            Some(a) => a,
            None => match opts.analysis.as_deref().unwrap_or("all") {
                "standalone" => Analysis::Standalone,
                "extract" => Analysis::Extract,
                "uc-game" => Analysis::Game,
                "all" => Analysis::All,
                other => return Err(format!("unknown analysis `{other}`")),
            },
        };
        let family = match opts.family.as_deref().unwrap_or("exhaustive") {
            "exhaustive" => FamilyMode::Exhaustive,
            "curated" => FamilyMode::Curated,
            other => return Err(format!("unknown family `{other}`")),
        };
        let mode = match (opts.mode.as_deref().unwrap_or("exact"), opts.seed, opts.samples) {
            ("exact", None, None) => GameMode::Exact,
            ("exact", _, _) => return Err("exact mode forbids --seed and --samples".into()),
            ("sampling", Some(seed), Some(samples)) if samples > 0 => GameMode::Sampling { seed, samples },
            ("sampling", _, _) => return Err("sampling mode requires --seed and a positive --samples".into()),
            (other, _, _) => return Err(format!("unknown mode `{other}`")),
        };
        let cases = match opts.case.as_deref().unwrap_or("all") {
            "all" => Corruption::ALL.to_vec(),
            s => vec![Corruption::parse(s).ok_or_else(|| format!("unknown case `{s}`"))?],
        };
        let mut echo = BTreeMap::new();
        for (k, v) in [
            ("protocol", opts.protocol.clone()),
            ("analysis", opts.analysis.clone()),
            ("eps", opts.eps.clone()),
            ("theta", opts.theta.clone()),
            ("family", opts.family.clone()),
            ("mode", opts.mode.clone()),
            ("seed", opts.seed.map(|s| s.to_string())),
            ("samples", opts.samples.map(|s| s.to_string())),
            ("case", opts.case.clone()),
            ("adversary", opts.adversary.clone()),
            ("max_advantage", opts.max_advantage.clone()),
            ("budget", opts.budget.map(|s| s.to_string())),
            ("sweep", opts.sweep.clone()),
        ] {
            if let Some(v) = v {
                echo.insert(k.to_string(), v);
            }
        }
        Ok(RunConfig {
            protocols: sweep_labels(&protocol, opts.sweep.as_deref())?,
            analysis,
            eps: prob_arg("eps", opts.eps.as_deref(), "0")?,
            theta: prob_arg("theta", opts.theta.as_deref(), "1")?,
            family,
            mode,
            cases,
            adversary: opts.adversary,
            max_advantage: prob_arg("max-advantage", opts.max_advantage.as_deref(), "0")?,
            budget: opts.budget.unwrap_or(DEFAULT_BUDGET),
            out: opts.out,
            echo,
        })
    }

    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            threshold: self.theta.clone(),
            bound: self.budget,
            mode: self.family,
            ..VerifyOptions::default()
        }
    }
}

/// Runs the analyses; returns the report and whether every check passed.
fn run(cfg: &RunConfig) -> Result<(Report, bool), String> {
    let mut report = Report {
        config: cfg.echo.clone(),
        ..Report::default()
    };
    let mut pass = true;
    let opts = cfg.verify_options();
    for label in &cfg.protocols {
        let proto: ProtocolSpec = lookup(label).map_err(|e| e.to_string())?;
        if matches!(cfg.analysis, Analysis::Standalone | Analysis::All) {
            let r = StandaloneReport::build(&proto, &opts).map_err(|e| e.to_string())?;
            pass &= r.passes(&cfg.eps);
            report.standalone.push(r);
        }
        if matches!(cfg.analysis, Analysis::Extract | Analysis::All) {
            let sender = check_sender_extraction(&proto, &cfg.theta, cfg.budget).map_err(|e| e.to_string())?;
            let choice = check_choice_extraction(&proto, &cfg.theta, cfg.budget).map_err(|e| e.to_string())?;
            pass &= sender.eps <= cfg.eps && choice.eps <= cfg.eps;
            report.extract.push(ExtractReport {
                protocol: proto.label(),
                theta: cfg.theta.clone(),
                sender,
                choice,
            });
        }
        if matches!(cfg.analysis, Analysis::Game | Analysis::All) {
            for &case in &cfg.cases {
                let (mut family, _) = family_for(&proto, case, &opts);
                if case == Corruption::None || case == Corruption::Both {
                    family = proto.curated(case);
                }
                if let Some(name) = &cfg.adversary {
                    family.retain(|a| &a.name == name);
                }
                let games = game_sweep(&proto, case, &family, cfg.mode, &cfg.theta, cfg.budget).map_err(|e| e.to_string())?;
                for g in &games {
                    let slack: f64 = g.radius.as_deref().map(|r| r.parse().unwrap()).unwrap_or(0.0);
                    let adv = rotlab::prob::to_f64(&g.advantage);
                    let max = rotlab::prob::to_f64(&cfg.max_advantage);
                    pass &= g.advantage <= cfg.max_advantage || adv <= max + slack;
                }
                report.games.extend(games);
            }
        }
    }
    if cfg.adversary.is_some() && report.games.is_empty() && cfg.analysis == Analysis::Game {
        return Err(format!("no adversary named `{}`", cfg.adversary.as_deref().unwrap()));
    }
    report.series = series_from(&report.standalone, &report.extract, &report.games);
    Ok((report, pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (opts, fixed) = match cli.command {
        Command::ListProtocols => {
            for (name, params, about) in list_protocols() {
                let label = if params.is_empty() { name.to_string() } else { format!("{name}:{params}") };
                println!("{label:<24} {about}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Verify(o) => (o, Some(Analysis::Standalone)),
        Command::ExtractDemo(o) => (o, Some(Analysis::Extract)),
        Command::UcGame(o) => (o, Some(Analysis::Game)),
        Command::Report(o) => (o, None),
    };
    let cfg = match opts.merged().and_then(|o| RunConfig::from_opts(o, fixed)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (report, pass) = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut stdout = std::io::stdout().lock();
    let _ = write!(stdout, "{}", text_summary(&report));
    if let Some(dir) = &cfg.out {
        if let Err(e) = emit_report(&report, dir) {
            eprintln!("error: cannot write reports to {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    if pass {
        let _ = writeln!(stdout, "PASS (eps0 {}, max advantage {})", fmt_prob(&cfg.eps), fmt_prob(&cfg.max_advantage));
        ExitCode::SUCCESS
    } else {
        let _ = writeln!(stdout, "FAIL (eps0 {}, max advantage {})", fmt_prob(&cfg.eps), fmt_prob(&cfg.max_advantage));
        ExitCode::from(1)
    }
}
