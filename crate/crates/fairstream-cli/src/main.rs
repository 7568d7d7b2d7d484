use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fairstream::acceptance::{run_all, run_criterion};
use fairstream::adversaries::{ef1_adversary_two_agents, known_instance_hard, mms_adversary};
use fairstream::generate::{generate, Generator, ProfileMix};
use fairstream::harness::{
    reports_csv, run, trace_csv, AlgorithmKind, Granularity, HarnessError, RunConfig,
};
use fairstream::io::{read_instance, write_instance};
use fairstream::metrics::FairRatio;
use fairstream::model::Instance;
use fairstream::reduction::threshold_proxy;

#[derive(Parser)]
#[command(
    name = "fairstream",
    version,
    about = "Online fair allocation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an algorithm and write the trace and fairness report.
    Run(RunArgs),
    /// Write a generated instance as JSON lines.
    Generate(GenArgs),
    /// Build a worst-case stream against an algorithm.
    Adversary(AdversaryArgs),
    /// Round an interval instance to its two-value proxy.
    Reduce(ReduceArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    #[value(name = "random-2value", alias = "random")]
    Random2Value,
    Staircase,
    #[value(alias = "prop51")]
    LowThenHigh,
    IntervalRandom,
}

#[derive(Args)]
struct GenParams {
    /// Generator kind.
    #[arg(long = "gen", value_enum)]
    kind: Option<GenKind>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Chance that a good is high for an agent (random-2value).
    #[arg(long, default_value_t = 0.5)]
    p_high: f64,
    /// Shared alpha; random-2value draws mixed profiles when omitted.
    #[arg(long)]
    alpha: Option<f64>,
    /// Shared beta for random-2value.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Upper end of alpha_i for interval-random.
    #[arg(long, default_value_t = 25.0)]
    alpha_max: f64,
}

impl GenParams {
    fn generator(&self, kind: GenKind) -> Generator {
        let (n, m) = (self.n, self.m);
        match kind {
            GenKind::Random2Value => Generator::Random2Value {
                n,
                m,
                p_high: self.p_high,
                profiles: match self.alpha {
                    Some(alpha) => ProfileMix::Fixed {
                        alpha,
                        beta: self.beta,
                    },
                    None => ProfileMix::Mixed,
                },
            },
            GenKind::Staircase => Generator::Staircase {
                n,
                alpha: self.alpha.unwrap_or((2 * n * n + 2 * n) as f64),
            },
            GenKind::LowThenHigh => Generator::LowThenHigh {
                n,
                alpha: self.alpha.unwrap_or(n as f64 + 1.0),
            },
            GenKind::IntervalRandom => Generator::IntervalRandom {
                n,
                m,
                alpha_max: self.alpha_max,
            },
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// deferred-priority, naive-matching, priority-matching, round-robin, or greedy-welfare.
    #[arg(long)]
    alg: AlgorithmKind,
    /// Instance file (JSON lines). Use --gen instead to generate one.
    #[arg(long, conflicts_with = "kind")]
    instance: Option<PathBuf>,
    #[command(flatten)]
    gen: GenParams,
    /// Replace the instance's foresight. Generated instances default to the
    /// algorithm's minimum.
    #[arg(long)]
    foresight: Option<usize>,
    /// every, rounds (t a multiple of n), or final.
    #[arg(long, default_value = "every")]
    granularity: Granularity,
    /// Report CSV path; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Check the algorithm's guarantees at every step; exit 2 on failure.
    #[arg(long)]
    assert_guarantees: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    gen: GenParams,
    #[arg(long, default_value_t = 0)]
    foresight: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryKind {
    /// Two agents, EF1 ratio forced to 1/2.
    Ef1,
    /// n agents, MMS ratio forced to 1/(2n-1).
    Mms,
    /// The fixed instance no algorithm handles beyond 1/n MMS.
    KnownHard,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    kind: AdversaryKind,
    #[arg(long)]
    alg: AlgorithmKind,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Alpha for known-hard; defaults to n.
    #[arg(long)]
    alpha: Option<f64>,
    /// Trace JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the built stream as an instance file.
    #[arg(long)]
    instance_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Threshold sidecar path; defaults to the output path with
    /// `.thresholds.json` appended.
    #[arg(long)]
    thresholds: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only these criteria (1 to 11).
    #[arg(long = "criterion")]
    criteria: Vec<u8>,
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, anyhow::Error> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_instance(&text).with_context(|| format!("{}", path.display()))
}

fn cmd_run(a: &RunArgs) -> Result<u8> {
    let mut inst = match (&a.instance, a.gen.kind) {
        (Some(p), _) => load_instance(p)?,
        (None, Some(kind)) => {
            let f = a.alg.build().required_foresight(a.gen.n);
            generate(&a.gen.generator(kind), a.gen.seed, f)?
        }
        (None, None) => bail!("give --instance or --gen"),
    };
    if let Some(f) = a.foresight {
        inst.foresight = f;
    }
    let cfg = RunConfig {
        algorithm: a.alg,
        granularity: a.granularity,
        audit: a.assert_guarantees,
    };
    let out = run(&inst, &cfg)?;
    if let Some(p) = &a.trace {
        write_out(Some(p), &trace_csv(&out.trace))?;
    }
    write_out(a.report.as_deref(), &reports_csv(&out.reports))?;

    let mut worst: [Option<FairRatio>; 5] = [None; 5];
    for r in &out.reports {
        let vals = [
            Some(r.ef),
            Some(r.ef1),
            Some(r.ef2),
            Some(r.prop),
            r.mms_ratio,
        ];
        for (w, v) in worst.iter_mut().zip(vals) {
            if let Some(v) = v {
                *w = Some(w.map_or(v, |x| x.min(v)));
            }
        }
    }
    let shown: Vec<String> = ["ef", "ef1", "ef2", "prop", "mms"]
        .iter()
        .zip(worst)
        .map(|(k, w)| format!("{k} {}", w.map_or("NA".into(), |x| x.to_string())))
        .collect();
    eprintln!(
        "{} on {} goods, {} agents; min ratios: {}",
        a.alg.name(),
        inst.m(),
        inst.n(),
        shown.join(", ")
    );
    if let Some(first) = out.violations.first() {
        for v in &out.violations {
            eprintln!("violation: {v}");
        }
        let e = HarnessError::Guarantee {
            count: out.violations.len(),
            first: first.clone(),
        };
        eprintln!("error: {e}");
        return Ok(e.exit_code());
    }
    Ok(0)
}

fn cmd_generate(a: &GenArgs) -> Result<u8> {
    let kind = a.gen.kind.context("give --gen")?;
    let inst = generate(&a.gen.generator(kind), a.gen.seed, a.foresight)?;
    write_out(a.out.as_deref(), &write_instance(&inst))?;
    Ok(0)
}

fn cmd_adversary(a: &AdversaryArgs) -> Result<u8> {
    let mut alg = a.alg.build();
    let (json, inst) = match a.kind {
        AdversaryKind::Ef1 => {
            let tr = ef1_adversary_two_agents(alg.as_mut())?;
            (tr.to_json(), tr.instance)
        }
        AdversaryKind::Mms => {
            let tr = mms_adversary(alg.as_mut(), a.n)?;
            (tr.to_json(), tr.instance)
        }
        AdversaryKind::KnownHard => {
            let alpha = a.alpha.unwrap_or(a.n as f64);
            let f = alg.required_foresight(a.n).max(a.n - 1);
            let inst = known_instance_hard(a.n, alpha, f)?;
            let out = run(
                &inst,
                &RunConfig {
                    algorithm: a.alg,
                    granularity: Granularity::Every,
                    audit: false,
                },
            )?;
            let worst = out
                .reports
                .iter()
                .filter_map(|r| r.mms_ratio.map(|x| (r, x)))
                .reduce(|a, b| if b.1.cmp_ratio(&a.1).is_lt() { b } else { a });
            let json = json!({
                "algorithm": a.alg.name(),
                "n": a.n,
                "alpha": alpha,
                "choices": out.trace.choices().iter().map(|c| c + 1).collect::<Vec<_>>(),
                "witness": worst.map(|(r, x)| json!({
                    "t": r.t,
                    "agent": r.agent + 1,
                    "metric": "mms",
                    "ratio": x.value(),
                    "bound": 1.0 / a.n as f64,
                })),
            });
            (json, inst)
        }
    };
    write_out(
        a.out.as_deref(),
        &format!("{}\n", serde_json::to_string_pretty(&json)?),
    )?;
    if let Some(p) = &a.instance_out {
        write_out(Some(p), &write_instance(&inst))?;
    }
    Ok(0)
}

fn cmd_reduce(a: &ReduceArgs) -> Result<u8> {
    let inst = load_instance(&a.input)?;
    let proxy = threshold_proxy(&inst)?;
    write_out(Some(&a.out), &write_instance(&proxy.proxy))?;
    let side = a.thresholds.clone().unwrap_or_else(|| {
        let mut s = a.out.clone().into_os_string();
        s.push(".thresholds.json");
        s.into()
    });
    let t = &proxy.thresholds;
    let max_alpha = t.alpha.iter().copied().fold(0.0, f64::max);
    let a_star = t.threshold.iter().copied().fold(0.0, f64::max);
    let body = json!({
        "alpha": t.alpha,
        "threshold": t.threshold,
        "max_alpha": max_alpha,
        "a_star": a_star,
        "round_robin_factor": 1.0 / max_alpha,
        "reduction_factor": 1.0 / a_star,
    });
    write_out(
        Some(&side),
        &format!("{}\n", serde_json::to_string_pretty(&body)?),
    )?;
    eprintln!(
        "proxy written; ratios lose at most a factor {a_star} (round-robin alone guarantees 1/{max_alpha})"
    );
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8> {
    let outcomes = if a.criteria.is_empty() {
        run_all(|o| println!("{o}"))
    } else {
        let mut v = Vec::new();
        for &id in &a.criteria {
            let o = run_criterion(id).with_context(|| format!("no criterion {id}"))?;
            println!("{o}");
            v.push(o);
        }
        v
    };
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    Ok(if failed == 0 { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Adversary(a) => cmd_adversary(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<HarnessError>()
                .map_or(1, HarnessError::exit_code);
            ExitCode::from(code)
        }
    }
}
