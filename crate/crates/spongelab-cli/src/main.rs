//! Command-line front end: sponge evaluation, Monte Carlo experiments,
//! the indifferentiability harness, compressed-oracle checks, and
//! deterministic replay of any report.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use report::{parse_report, CsvReport, JsonReport, VERSION};

use spongelab::exp::{
    bad_database_experiment, birthday_collision_attack, collision_in_db_experiment,
    perm_tail_bound_experiment, preimage_in_db_experiment, zero_search_experiment, ExpConfig,
};
use spongelab::params::Params;
use spongelab::perm::PermTable;
use spongelab::rng::Rng64;
use spongelab::sim::{
    builtin_strategies, estimate_advantage_with_pi, estimate_world_with_pi, sample_good_perm,
    Strategy, WorldKind,
};
use spongelab::sponge::{self, BitStr, Message};
use spongelab_qco::capacity::{transition_capacity, transition_capacity_dense, verify_classical_bound};
use spongelab_qco::checks::identity_report;
use spongelab_qco::efficient::{compact_vs_dense_defect, CompactState};
use spongelab_qco::fundlemma::{fundamental_lemma_check, random_xy_circuit};
use spongelab_qco::ops::{apply_co, apply_unitary_axy};
use spongelab_qco::predicates::{PredicateLocalFamily, PredicateSet};
use spongelab_qco::{AmpVector, Dims};

#[derive(Parser)]
#[command(name = "spongelab", version, about = "desk-scale sponge laboratory")]
struct Cli {
    /// Worker threads for Monte Carlo fan-out (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sponge evaluation and permutation fixtures.
    Sponge {
        #[command(subcommand)]
        cmd: SpongeCmd,
    },
    /// Monte Carlo experiments; CSV reports.
    Exp {
        #[command(subcommand)]
        cmd: ExpCmd,
    },
    /// Indifferentiability harness; JSON reports.
    Indiff {
        #[command(subcommand)]
        cmd: IndiffCmd,
    },
    /// Compressed-oracle checks; JSON reports.
    Qco {
        #[command(subcommand)]
        cmd: QcoCmd,
    },
    /// Re-run a report from its embedded config and verify the payload
    /// bytes are identical.
    Replay { report: PathBuf },
}

#[derive(Subcommand)]
enum SpongeCmd {
    /// Evaluate the sponge on a message through an explicit permutation.
    Eval(EvalArgs),
    /// Sample (or construct) a permutation file.
    GenPerm {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit the identity permutation instead of sampling.
        #[arg(long)]
        identity: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    r: u32,
    #[arg(long)]
    c: u32,
    /// Permutation file (JSON {n, forward}).
    #[arg(long)]
    perm: PathBuf,
    /// Message as a binary block string (length a multiple of r),
    /// absorbed as-is.
    #[arg(long, conflicts_with_all = ["hex", "msg_file"])]
    msg: Option<String>,
    /// Raw hex input, padded to valid blocks before absorbing.
    #[arg(long, conflicts_with = "msg_file")]
    hex: Option<String>,
    /// Message file in the wire form {"r": .., "blocks": [..]},
    /// absorbed as-is.
    #[arg(long)]
    msg_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    squeeze: usize,
    /// Use the rate-replacing variant.
    #[arg(long)]
    msponge: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExpCmd {
    /// Two recorded paths reaching the same output.
    Collision(ExpArgs),
    /// A recorded path reaching a per-trial random target.
    Preimage(ExpArgs),
    /// The k/k' databases going bad.
    Bad(ExpArgs),
    /// Capacity birthday attack (q counts permutation queries).
    Birthday(ExpArgs),
    /// Double-sided zero search by classical probing (requires r = c).
    Zero(ExpArgs),
    /// Permutation prefix tail bound.
    Tails {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        c: u32,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long)]
    r: u32,
    #[arg(long)]
    c: u32,
    #[arg(long)]
    q: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check the counting bounds on every visited database state.
    #[arg(long)]
    check_invariants: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum IndiffCmd {
    Run {
        #[arg(long, value_enum, default_value_t = WorldArg::Both)]
        world: WorldArg,
        /// Strategy name or "all" for the built-in family.
        #[arg(long, default_value = "all")]
        adversary: String,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        c: u32,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WorldArg {
    Real,
    Ideal,
    Both,
}

#[derive(Subcommand)]
enum QcoCmd {
    /// Compression/query operator identities.
    IdentityCheck(QcoArgs),
    /// Transition capacity of a named predicate pair, both routes.
    Capacity {
        #[command(flatten)]
        dims: QcoArgs,
        /// Target predicate: "collision" or "preimage0".
        #[arg(long, default_value = "collision")]
        target: String,
        /// Database size budget t for the local-property bound.
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// Fundamental-lemma inequality on random circuits.
    Fundlemma {
        #[command(flatten)]
        dims: QcoArgs,
        #[arg(long, default_value_t = 50)]
        circuits: u64,
        #[arg(long, default_value_t = 2)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Padded-list query operator vs the dense compressed query.
    Algorithm1 {
        #[command(flatten)]
        dims: QcoArgs,
        #[arg(long, default_value_t = 5)]
        circuits: u64,
        #[arg(long, default_value_t = 3)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct QcoArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Output {
    Json(Value),
    Csv { header: String, rows: Vec<String> },
}

impl Output {
    fn payload_text(&self) -> String {
        match self {
            Output::Json(v) => serde_json::to_string_pretty(v).unwrap(),
            Output::Csv { header, rows } => {
                let mut s = String::new();
                s.push_str(header);
                s.push('\n');
                for r in rows {
                    s.push_str(r);
                    s.push('\n');
                }
                s
            }
        }
    }

    fn render(&self, config: &Value) -> String {
        match self {
            Output::Json(v) => JsonReport {
                config: config.clone(),
                payload: v.clone(),
            }
            .render(),
            Output::Csv { header, rows } => CsvReport {
                config: config.clone(),
                header: header.clone(),
                rows: rows.clone(),
            }
            .render(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Resource-cap problems get their own exit code.
            let msg = format!("{e:#}");
            if msg.contains("cap exceeded") || msg.contains("exceeds cap") {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Sponge { cmd } => match cmd {
            SpongeCmd::Eval(args) => {
                let config = eval_config(&args)?;
                let output = execute(&config)?;
                if let Output::Json(v) = &output {
                    println!("{}", v["outputs_bits"].as_str().unwrap_or_default());
                }
                if let Some(path) = &args.out {
                    std::fs::write(path, output.render(&config))?;
                }
                Ok(ExitCode::SUCCESS)
            }
            SpongeCmd::GenPerm {
                n,
                seed,
                identity,
                out,
            } => {
                let pi = if identity {
                    PermTable::identity(n)
                } else {
                    PermTable::sample_uniform(n, &mut Rng64::new(seed))
                };
                std::fs::write(&out, serde_json::to_string(&pi.to_json())?)?;
                println!("wrote permutation on {n} bits to {}", out.display());
                Ok(ExitCode::SUCCESS)
            }
        },
        Cmd::Exp { cmd } => {
            let (config, out) = exp_config(&cmd)?;
            write_or_print(&config, out.as_deref())
        }
        Cmd::Indiff { cmd } => {
            let IndiffCmd::Run {
                world,
                adversary,
                r,
                c,
                q,
                trials,
                seed,
                out,
            } = cmd;
            let world = match world {
                WorldArg::Real => "real",
                WorldArg::Ideal => "ideal",
                WorldArg::Both => "both",
            };
            let config = json!({
                "cmd": "indiff-run",
                "world": world,
                "adversary": adversary,
                "r": r, "c": c, "q": q, "trials": trials, "seed": seed,
            });
            write_or_print(&config, out.as_deref())
        }
        Cmd::Qco { cmd } => {
            let (config, out) = qco_config(&cmd);
            write_or_print(&config, out.as_deref())
        }
        Cmd::Replay { report } => replay(&report),
    }
}

fn write_or_print(config: &Value, out: Option<&Path>) -> Result<ExitCode> {
    let output = execute(config)?;
    let rendered = output.render(config);
    match out {
        Some(path) => {
            std::fs::write(path, &rendered)?;
            println!("wrote {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn eval_config(args: &EvalArgs) -> Result<Value> {
    let perm_text =
        std::fs::read_to_string(&args.perm).context("reading permutation file")?;
    let digest = fnv1a(perm_text.as_bytes());
    Ok(json!({
        "cmd": "sponge-eval",
        "r": args.r, "c": args.c,
        "perm": args.perm.display().to_string(),
        "perm_digest": format!("{digest:016x}"),
        "msg": args.msg,
        "hex": args.hex,
        "msg_file": args.msg_file.as_ref().map(|p| p.display().to_string()),
        "squeeze": args.squeeze,
        "msponge": args.msponge,
    }))
}

fn exp_config(cmd: &ExpCmd) -> Result<(Value, Option<PathBuf>)> {
    let (kind, a) = match cmd {
        ExpCmd::Collision(a) => ("collision", a),
        ExpCmd::Preimage(a) => ("preimage", a),
        ExpCmd::Bad(a) => ("bad", a),
        ExpCmd::Birthday(a) => ("birthday", a),
        ExpCmd::Zero(a) => ("zero", a),
        ExpCmd::Tails {
            n,
            r,
            c,
            samples,
            seed,
            out,
        } => {
            return Ok((
                json!({
                    "cmd": "exp-tails",
                    "n": n, "r": r, "c": c, "samples": samples, "seed": seed,
                }),
                out.clone(),
            ));
        }
    };
    Ok((
        json!({
            "cmd": "exp",
            "kind": kind,
            "r": a.r, "c": a.c, "q": a.q, "trials": a.trials, "seed": a.seed,
            "check_invariants": a.check_invariants,
        }),
        a.out.clone(),
    ))
}

fn qco_config(cmd: &QcoCmd) -> (Value, Option<PathBuf>) {
    match cmd {
        QcoCmd::IdentityCheck(a) => (
            json!({"cmd": "qco-identity", "m": a.m, "n": a.n}),
            a.out.clone(),
        ),
        QcoCmd::Capacity { dims, target, t } => (
            json!({"cmd": "qco-capacity", "m": dims.m, "n": dims.n, "target": target, "t": t}),
            dims.out.clone(),
        ),
        QcoCmd::Fundlemma {
            dims,
            circuits,
            queries,
            seed,
            out,
        } => (
            json!({
                "cmd": "qco-fundlemma",
                "m": dims.m, "n": dims.n,
                "circuits": circuits, "queries": queries, "seed": seed,
            }),
            out.clone().or(dims.out.clone()),
        ),
        QcoCmd::Algorithm1 {
            dims,
            circuits,
            queries,
            seed,
            out,
        } => (
            json!({
                "cmd": "qco-algorithm1",
                "m": dims.m, "n": dims.n,
                "circuits": circuits, "queries": queries, "seed": seed,
            }),
            out.clone().or(dims.out.clone()),
        ),
    }
}

/// Execute a canonical config, producing the report payload. Replay goes
/// through exactly this function.
fn execute(config: &Value) -> Result<Output> {
    match config["cmd"].as_str().unwrap_or_default() {
        "sponge-eval" => execute_sponge_eval(config),
        "exp" => execute_exp(config),
        "exp-tails" => execute_exp_tails(config),
        "indiff-run" => execute_indiff(config),
        "qco-identity" => execute_qco_identity(config),
        "qco-capacity" => execute_qco_capacity(config),
        "qco-fundlemma" => execute_qco_fundlemma(config),
        "qco-algorithm1" => execute_qco_algorithm1(config),
        other => bail!("unknown command in config echo: {other:?}"),
    }
}

fn get_u64(config: &Value, key: &str) -> Result<u64> {
    config[key]
        .as_u64()
        .with_context(|| format!("config missing {key}"))
}

fn execute_sponge_eval(config: &Value) -> Result<Output> {
    let r = get_u64(config, "r")? as u32;
    let c = get_u64(config, "c")? as u32;
    let params = Params::new(r, c).map_err(|e| anyhow!(e))?;
    let perm_path = config["perm"].as_str().context("config missing perm")?;
    let perm_text = std::fs::read_to_string(perm_path).context("reading permutation file")?;
    let digest = format!("{:016x}", fnv1a(perm_text.as_bytes()));
    if let Some(expect) = config["perm_digest"].as_str() {
        if expect != digest {
            bail!("permutation file changed since the report was written");
        }
    }
    let pi = PermTable::from_json(&serde_json::from_str(&perm_text)?).map_err(|e| anyhow!(e))?;
    let squeeze = get_u64(config, "squeeze")? as usize;

    let (message, padded) = if let Some(bits) = config["msg"].as_str() {
        let b = BitStr::parse(bits).map_err(|e| anyhow!(e))?;
        (b.to_blocks(r).map_err(|e| anyhow!(e))?, false)
    } else if let Some(hex) = config["hex"].as_str() {
        let raw = BitStr::from_hex(hex).map_err(|e| anyhow!(e))?;
        (sponge::pad(&raw, r), true)
    } else if let Some(path) = config["msg_file"].as_str() {
        let wire: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).context("reading message file")?)?;
        let (m, declared_r) = Message::from_json(&wire).map_err(|e| anyhow!(e))?;
        if declared_r != r {
            bail!("message file declares r={declared_r}, run uses r={r}");
        }
        (m, false)
    } else {
        bail!("one of --msg, --hex or --msg-file is required");
    };

    let outputs = if config["msponge"].as_bool().unwrap_or(false) {
        sponge::msponge(&pi, params, &message, squeeze, true)
    } else {
        sponge::sponge(&pi, params, &message, squeeze, true)
    }
    .map_err(|e| anyhow!(e))?;

    let mut bits = BitStr::new();
    for &b in &outputs {
        bits.push_block(b, r);
    }
    Ok(Output::Json(json!({
        "blocks": message.blocks,
        "padded": padded,
        "outputs": outputs,
        "outputs_bits": bits.to_string(),
    })))
}

fn parse_exp_config(config: &Value) -> Result<ExpConfig> {
    let params = Params::new(get_u64(config, "r")? as u32, get_u64(config, "c")? as u32)
        .map_err(|e| anyhow!(e))?;
    let mut cfg = ExpConfig::new(
        params,
        get_u64(config, "q")? as usize,
        get_u64(config, "trials")?,
        get_u64(config, "seed")?,
    );
    cfg.check_invariants = config["check_invariants"].as_bool().unwrap_or(false);
    Ok(cfg)
}

fn execute_exp(config: &Value) -> Result<Output> {
    let cfg = parse_exp_config(config)?;
    let kind = config["kind"].as_str().unwrap_or_default();
    let row_prefix = format!("{},{},{},{},{}", kind, cfg.r, cfg.c, cfg.q, cfg.trials);
    let header = "kind,r,c,q,trials,estimate,ci_lo,ci_hi,events,violations,extra".to_string();
    let (est, extra) = match kind {
        "collision" => (collision_in_db_experiment(&cfg).map_err(|e| anyhow!(e))?, String::new()),
        "preimage" => (preimage_in_db_experiment(&cfg).map_err(|e| anyhow!(e))?, String::new()),
        "bad" => (bad_database_experiment(&cfg).map_err(|e| anyhow!(e))?, String::new()),
        "birthday" => (birthday_collision_attack(&cfg).map_err(|e| anyhow!(e))?, String::new()),
        "zero" => {
            let rep = zero_search_experiment(&cfg).map_err(|e| anyhow!(e))?;
            (
                rep.success,
                format!("mean_pairs={:.6e};mean_pairs_ci={:.6e}", rep.mean_pairs, rep.mean_pairs_ci),
            )
        }
        other => bail!("unknown experiment kind {other:?}"),
    };
    let row = format!(
        "{row_prefix},{:.6e},{:.6e},{:.6e},{},{},{extra}",
        est.estimate, est.ci_lo, est.ci_hi, est.events, est.violations
    );
    Ok(Output::Csv {
        header,
        rows: vec![row],
    })
}

fn execute_exp_tails(config: &Value) -> Result<Output> {
    let rep = perm_tail_bound_experiment(
        get_u64(config, "n")? as u32,
        get_u64(config, "r")? as u32,
        get_u64(config, "c")? as u32,
        get_u64(config, "samples")?,
        get_u64(config, "seed")?,
    )
    .map_err(|e| anyhow!(e))?;
    let header = "n,r,c,samples,threshold,violations,violation_frequency,mean_intersection,mean_ci,identity_flagged".to_string();
    let row = format!(
        "{},{},{},{},{:.6e},{},{:.6e},{:.6e},{:.6e},{}",
        rep.n,
        rep.r,
        rep.c,
        rep.samples,
        rep.threshold,
        rep.violations,
        rep.violation_frequency,
        rep.mean_intersection,
        rep.mean_intersection_ci,
        rep.identity_flagged
    );
    Ok(Output::Csv {
        header,
        rows: vec![row],
    })
}

fn find_strategies(name: &str) -> Result<Vec<Box<dyn Strategy>>> {
    let all = builtin_strategies();
    if name == "all" {
        return Ok(all);
    }
    let found: Vec<Box<dyn Strategy>> = all.into_iter().filter(|s| s.name() == name).collect();
    if found.is_empty() {
        bail!(
            "unknown adversary {name:?}; built-ins: {}",
            builtin_strategies()
                .iter()
                .map(|s| s.name())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    Ok(found)
}

fn execute_indiff(config: &Value) -> Result<Output> {
    let params = Params::new(get_u64(config, "r")? as u32, get_u64(config, "c")? as u32)
        .map_err(|e| anyhow!(e))?;
    let q = get_u64(config, "q")? as usize;
    let trials = get_u64(config, "trials")?;
    let seed = get_u64(config, "seed")?;
    let world = config["world"].as_str().unwrap_or("both");
    let strategies = find_strategies(config["adversary"].as_str().unwrap_or("all"))?;
    let pi = sample_good_perm(params, seed);

    let mut per_strategy = Vec::new();
    let mut family_advantage = 0.0f64;
    let mut family_ci = 0.0f64;
    for s in &strategies {
        let entry = match world {
            "both" => {
                let est = estimate_advantage_with_pi(s.as_ref(), params, &pi, q, trials, seed)
                    .map_err(|e| anyhow!(e))?;
                if est.advantage > family_advantage {
                    family_advantage = est.advantage;
                    family_ci = est.ci_half_width;
                }
                json!({
                    "strategy": s.name(),
                    "p_real": est.p_real,
                    "p_ideal": est.p_ideal,
                    "advantage": est.advantage,
                    "ci_half_width": est.ci_half_width,
                    "real_ci": [est.real_ci.0, est.real_ci.1],
                    "ideal_ci": [est.ideal_ci.0, est.ideal_ci.1],
                })
            }
            "real" | "ideal" => {
                let kind = if world == "real" {
                    WorldKind::Real
                } else {
                    WorldKind::Ideal
                };
                let (events, p, ci) =
                    estimate_world_with_pi(kind, s.as_ref(), params, &pi, q, trials, seed)
                        .map_err(|e| anyhow!(e))?;
                json!({
                    "strategy": s.name(),
                    "world": world,
                    "events": events,
                    "p": p,
                    "ci": [ci.0, ci.1],
                })
            }
            other => bail!("unknown world {other:?}"),
        };
        per_strategy.push(entry);
    }
    let mut payload = json!({
        "r": params.r(), "c": params.c(), "q": q, "trials": trials, "seed": seed,
        "strategies": per_strategy,
    });
    if world == "both" {
        payload["advantage"] = json!(family_advantage);
        payload["ci_half_width"] = json!(family_ci);
    }
    Ok(Output::Json(payload))
}

fn parse_dims(config: &Value) -> Result<Dims> {
    Dims::new(
        get_u64(config, "m")? as usize,
        get_u64(config, "n")? as usize,
    )
    .map_err(|e| anyhow!(e))
}

fn execute_qco_identity(config: &Value) -> Result<Output> {
    let dims = parse_dims(config)?;
    let report = identity_report(dims, 1e-10);
    Ok(Output::Json(serde_json::to_value(&report)?))
}

fn execute_qco_capacity(config: &Value) -> Result<Output> {
    let dims = parse_dims(config)?;
    let t = get_u64(config, "t")? as usize;
    let target = config["target"].as_str().unwrap_or("collision");
    let base = match target {
        "collision" => PredicateSet::collision(dims),
        "preimage0" => PredicateSet::preimage(dims, 0),
        other => bail!("unknown target predicate {other:?}"),
    };
    let q = base.restrict_max_entries(t + 1);
    let not_p = base.complement();
    let family = PredicateLocalFamily::new(base.clone(), t);
    let check = verify_classical_bound(dims, &family, &not_p, &q).map_err(|e| anyhow!(e))?;
    let block = transition_capacity(dims, &not_p, &q);
    let dense = transition_capacity_dense(dims, &not_p, &q).ok();
    Ok(Output::Json(json!({
        "m": dims.m(), "n": dims.n(), "target": target, "t": t,
        "capacity": block,
        "capacity_dense_route": dense,
        "distance": check.distance,
        "bound": check.bound,
        "pass": check.pass,
    })))
}

fn execute_qco_fundlemma(config: &Value) -> Result<Output> {
    let dims = parse_dims(config)?;
    let circuits = get_u64(config, "circuits")?;
    let queries = get_u64(config, "queries")? as usize;
    let seed = get_u64(config, "seed")?;
    let mut rng = Rng64::new(seed);
    let mut failures = 0u64;
    let mut min_slack = f64::INFINITY;
    for _ in 0..circuits {
        let circuit = random_xy_circuit(dims, queries, &mut rng);
        let out = fundamental_lemma_check(dims, &circuit, |_, _| true);
        min_slack = min_slack.min(out.slack);
        if !out.pass {
            failures += 1;
        }
    }
    Ok(Output::Json(json!({
        "m": dims.m(), "n": dims.n(),
        "circuits": circuits, "queries": queries, "seed": seed,
        "failures": failures,
        "min_slack": min_slack,
        "pass": failures == 0,
    })))
}

fn execute_qco_algorithm1(config: &Value) -> Result<Output> {
    let dims = parse_dims(config)?;
    let circuits = get_u64(config, "circuits")?;
    let queries = get_u64(config, "queries")? as usize;
    let seed = get_u64(config, "seed")?;
    let mut rng = Rng64::new(seed);
    let mut max_defect = 0.0f64;
    for _ in 0..circuits {
        let circuit = random_xy_circuit(dims, queries, &mut rng);
        let mut dense = AmpVector::initial(dims);
        let mut compact = CompactState::initial(dims);
        for (i, u) in circuit.iter().enumerate() {
            if i > 0 {
                dense = apply_co(&dense);
                compact = compact.query_op();
            }
            dense = apply_unitary_axy(&dense, u);
            compact = compact.apply_unitary_xy(u);
        }
        max_defect = max_defect.max(compact_vs_dense_defect(&compact, &dense));
    }
    Ok(Output::Json(json!({
        "m": dims.m(), "n": dims.n(),
        "circuits": circuits, "queries": queries, "seed": seed,
        "max_defect": max_defect,
        "pass": max_defect <= 1e-10,
    })))
}

fn replay(path: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(path).context("reading report")?;
    let stored = parse_report(&text)?;
    if stored.version != VERSION {
        eprintln!(
            "refusing replay: report version {} does not match binary version {VERSION}",
            stored.version
        );
        return Ok(ExitCode::from(4));
    }
    let output = execute(&stored.config)?;
    let regenerated = output.payload_text();
    if regenerated == stored.payload_text {
        println!("replay ok: payload is byte-identical");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("replay mismatch: regenerated payload differs from the stored one");
        Ok(ExitCode::FAILURE)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}
