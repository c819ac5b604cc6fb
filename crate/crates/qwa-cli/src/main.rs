//! Command-line front end: corpus generation, single anneals, field sweeps,
//! benchmark tables and oracle runs, with reproducible seeds and
//! machine-readable outputs.
//!
//! Every output file embeds a manifest record with the fully resolved
//! parameters; re-running the same manifest reproduces the result records
//! bit-exactly, except for fields named `wall_*`.
//!
//! Exit codes: 0 success, 2 usage error (from the argument parser), 1
//! runtime failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use qwa::baselines::{brute_force, sample_local_minima, sta};
use qwa::format::{parse_instance, serialize_instance};
use qwa::observables::{gamma_sweep, ChiOptions, SweepOptions};
use qwa::qwa::{anneal, read_checkpoint, Annealer, BreakSite, RunResult};
use qwa::{
    AnnealParams64, Geometry, Instance64, SpinConfiguration, StaParams64, TruncationPolicy64,
};

#[derive(Parser)]
#[command(name = "qwa", version, about = "Spin-glass ground states by annealing a matrix product state")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instance files for a geometry and a seed range.
    Gen(GenArgs),
    /// Anneal one instance and report the readout configuration.
    Anneal(AnnealArgs),
    /// Run a corpus at one or more tolerances and tabulate success rates.
    Bench(BenchArgs),
    /// Sweep the transverse field and record per-point observables.
    Sweep(SweepArgs),
    /// Run a reference method on an instance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    geometry: GeometryCmd,
    /// First seed; file k uses seed + k.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    count: u64,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum GeometryCmd {
    /// Open chain of L sites.
    Chain { length: usize },
    /// Rectangular ladder, L rungs by W legs.
    Ladder { length: usize, width: usize },
    /// Random K-regular graph on N vertices.
    Rr { n: usize, degree: usize },
}

impl GeometryCmd {
    fn geometry(self) -> Geometry {
        match self {
            GeometryCmd::Chain { length } => Geometry::Chain { length },
            GeometryCmd::Ladder { length, width } => Geometry::Ladder { length, width },
            GeometryCmd::Rr { n, degree } => Geometry::RandomRegular { n, degree },
        }
    }

    fn stem(self) -> String {
        match self {
            GeometryCmd::Chain { length } => format!("chain-{length}"),
            GeometryCmd::Ladder { length, width } => format!("ladder-{length}x{width}"),
            GeometryCmd::Rr { n, degree } => format!("rr-{n}-{degree}"),
        }
    }
}

#[derive(Args, Clone)]
struct AnnealFlags {
    /// Discarded-weight tolerance per bond cut.
    #[arg(long, default_value_t = 1e-8)]
    eta: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma0: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma_min: f64,
    #[arg(long, default_value_t = 0.5)]
    dgamma_cap: f64,
    #[arg(long, default_value_t = 0.1)]
    dgamma_coeff: f64,
    #[arg(long, default_value_t = 1e-6)]
    h_break: f64,
    /// Site for the symmetry-breaking field; defaults to a seeded draw.
    #[arg(long)]
    break_site: Option<usize>,
    #[arg(long, default_value_t = 512)]
    m_max: usize,
    #[arg(long, default_value_t = 2)]
    m_min: usize,
    /// DMRG sweep budget per field step.
    #[arg(long, default_value_t = 4)]
    sweeps: usize,
    /// Sweep budget for the first step at gamma0.
    #[arg(long, default_value_t = 8)]
    first_sweeps: usize,
}

impl AnnealFlags {
    fn params(&self) -> AnnealParams64 {
        let mut params = AnnealParams64::default();
        params.policy = TruncationPolicy64 {
            eta: self.eta,
            m_max: self.m_max,
            m_min: self.m_min,
        };
        params.gamma0 = self.gamma0;
        params.gamma_min = self.gamma_min;
        params.dgamma_cap = self.dgamma_cap;
        params.dgamma_coeff = self.dgamma_coeff;
        params.h_break = self.h_break;
        params.max_sweeps = self.sweeps;
        params.first_step_sweeps = self.first_sweeps;
        if let Some(site) = self.break_site {
            params.break_site = BreakSite::Fixed(site);
        }
        params
    }

    fn manifest(&self) -> Value {
        json!({
            "eta": self.eta, "gamma0": self.gamma0, "gamma_min": self.gamma_min,
            "dgamma_cap": self.dgamma_cap, "dgamma_coeff": self.dgamma_coeff,
            "h_break": self.h_break, "break_site": self.break_site,
            "m_max": self.m_max, "m_min": self.m_min,
            "sweeps": self.sweeps, "first_sweeps": self.first_sweeps,
        })
    }
}

#[derive(Args, Clone)]
struct StaFlags {
    #[arg(long, default_value_t = 0.1)]
    sta_beta0: f64,
    #[arg(long, default_value_t = 1e6)]
    sta_beta_max: f64,
    /// Multiplicative factor for the inverse temperature.
    #[arg(long, default_value_t = 1.0 + 1e-5)]
    sta_r: f64,
    /// Attempted flips per temperature.
    #[arg(long, default_value_t = 10_000)]
    sta_steps: usize,
    #[arg(long, default_value_t = 1)]
    sta_seed: u64,
    /// Independent runs; the best energy is reported.
    #[arg(long, default_value_t = 1)]
    sta_runs: u64,
}

impl StaFlags {
    fn params(&self) -> StaParams64 {
        StaParams64 {
            beta0: self.sta_beta0,
            beta_max: self.sta_beta_max,
            r: self.sta_r,
            steps_per_beta: self.sta_steps,
            seed: self.sta_seed,
        }
    }

    fn best_of(&self, inst: &Instance64) -> (f64, SpinConfiguration) {
        let base = self.params();
        (0..self.sta_runs.max(1))
            .map(|k| sta(inst, &base.with_seed(self.sta_seed.wrapping_add(k))))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .expect("at least one run")
    }

    fn manifest(&self) -> Value {
        json!({
            "beta0": self.sta_beta0, "beta_max": self.sta_beta_max, "r": self.sta_r,
            "steps_per_beta": self.sta_steps, "seed": self.sta_seed, "runs": self.sta_runs,
        })
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    None,
    Exact,
    Sta,
}

#[derive(Args)]
struct AnnealArgs {
    instance: PathBuf,
    #[command(flatten)]
    flags: AnnealFlags,
    #[arg(long, value_enum, default_value_t = OracleKind::None)]
    oracle: OracleKind,
    #[command(flatten)]
    sta: StaFlags,
    /// Result record destination (stdout when omitted).
    #[arg(long)]
    json_out: Option<PathBuf>,
    /// Per-step trace records, one JSON line each.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Write a resumable checkpoint after every field step.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Resume from a checkpoint written by --checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    corpus_dir: PathBuf,
    /// Comma-separated tolerances, e.g. `1e-8,1e-3`.
    #[arg(long, value_delimiter = ',', default_value = "1e-8")]
    etas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = OracleKind::Sta)]
    oracle: OracleKind,
    #[command(flatten)]
    flags: AnnealFlags,
    #[command(flatten)]
    sta: StaFlags,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parallel anneals across instances.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct SweepArgs {
    instance: PathBuf,
    /// Explicit comma-separated decreasing grid; overrides the range flags.
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 3.0)]
    gamma_from: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma_to: f64,
    #[arg(long, default_value_t = 15)]
    points: usize,
    /// Compute the gap to the first excited state per point.
    #[arg(long)]
    gap: bool,
    /// Compute the spin-glass susceptibility per point.
    #[arg(long)]
    chi: bool,
    #[arg(long, default_value_t = 1e-6)]
    probe_h: f64,
    /// Probe-site subsample for systems above 40 sites.
    #[arg(long, default_value_t = 20)]
    chi_probes: usize,
    #[arg(long, default_value_t = 1e-8)]
    eta: f64,
    /// File of configurations (one +- string per line) whose amplitudes are
    /// tracked through the sweep.
    #[arg(long)]
    track_configs: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[command(subcommand)]
    method: OracleMethod,
}

#[derive(Subcommand)]
enum OracleMethod {
    /// Exhaustive enumeration (up to 24 sites).
    Exact {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulated thermal annealing with the multiplicative schedule.
    Sta {
        #[command(flatten)]
        sta: StaFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Under-annealed runs quenched to local minima.
    Minima {
        /// Independent non-robust runs.
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 0.1)]
        beta0: f64,
        #[arg(long, default_value_t = 100.0)]
        beta_max: f64,
        #[arg(long, default_value_t = 1.05)]
        r: f64,
        #[arg(long, default_value_t = 40)]
        steps_per_beta: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Anneal(args) => cmd_anneal(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn manifest(command: &str, params: Value) -> Value {
    json!({
        "record": "manifest",
        "tool": "qwa",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "params": params,
    })
}

/// Writes lines either to a file or stdout.
struct Sink {
    file: Option<fs::File>,
}

impl Sink {
    fn new(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => Some(
                fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ),
            None => None,
        };
        Ok(Sink { file })
    }

    fn line(&mut self, text: &str) -> Result<()> {
        match &mut self.file {
            Some(f) => writeln!(f, "{text}")?,
            None => println!("{text}"),
        }
        Ok(())
    }
}

fn load_instance(path: &Path) -> Result<Instance64> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_instance(&text)?)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    for k in 0..args.count {
        let seed = args.seed + k;
        let inst = Instance64::generate(args.geometry.geometry(), seed)?;
        let path = args.out_dir.join(format!("{}-seed{}.qwi", args.geometry.stem(), seed));
        fs::write(&path, serialize_instance(&inst))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn result_record(result: &RunResult<f64>, wall_s: f64) -> Value {
    json!({
        "record": "result",
        "config": result.config_text,
        "classical_energy": result.classical_energy,
        "break_site": result.break_site,
        "ambiguous_sites": result.ambiguous_sites,
        "steps": result.trace.records().len(),
        "m_peak": result.trace.records().iter().map(|r| r.m_max).max().unwrap_or(1),
        "eigensolver_work": result.cost.eigensolver_work.to_string(),
        "eigensolver_calls": result.cost.eigensolver_calls,
        "sweeps_total": result.cost.sweeps,
        "max_op_bond": result.max_op_bond,
        "oracle_energy": result.oracle_energy,
        "success": result.success,
        "wall_s": wall_s,
    })
}

fn cmd_anneal(args: AnnealArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let params = args.flags.params();
    let manifest = manifest(
        "anneal",
        json!({
            "instance": args.instance.display().to_string(),
            "anneal": args.flags.manifest(),
            "oracle": match args.oracle { OracleKind::None => "none", OracleKind::Exact => "exact", OracleKind::Sta => "sta" },
            "sta": args.sta.manifest(),
        }),
    );

    let started = Instant::now();
    let result = if let Some(resume_path) = &args.resume {
        let text = fs::File::open(resume_path)
            .map(std::io::BufReader::new)
            .with_context(|| format!("opening {}", resume_path.display()))?;
        let (gamma, s_prev, mps) = read_checkpoint(text)?;
        let annealer = Annealer::resume(&inst, params, gamma, s_prev, mps)?;
        run_annealer(annealer, args.checkpoint.as_deref())?
    } else {
        let annealer = Annealer::new(&inst, params)?;
        run_annealer(annealer, args.checkpoint.as_deref())?
    };
    let wall_s = started.elapsed().as_secs_f64();

    let result = match args.oracle {
        OracleKind::None => result,
        OracleKind::Exact => {
            let (best, _) = brute_force(&inst)?;
            result.with_oracle(best)
        }
        OracleKind::Sta => {
            let (best, _) = args.sta.best_of(&inst);
            result.with_oracle(best)
        }
    };

    if let Some(trace_path) = &args.trace_out {
        let mut sink = Sink::new(Some(trace_path))?;
        sink.line(&manifest.to_string())?;
        for record in result.trace.records() {
            let mut line = serde_json::to_value(record)?;
            line["record"] = "step".into();
            sink.line(&line.to_string())?;
        }
    }
    let mut sink = Sink::new(args.json_out.as_deref())?;
    sink.line(&manifest.to_string())?;
    sink.line(&result_record(&result, wall_s).to_string())?;
    Ok(())
}

fn run_annealer(mut annealer: Annealer<'_, f64>, checkpoint: Option<&Path>) -> Result<RunResult<f64>> {
    while !annealer.is_done() {
        annealer.step()?;
        if let Some(path) = checkpoint {
            let tmp = path.with_extension("tmp");
            let mut f = fs::File::create(&tmp)?;
            annealer.write_checkpoint(&mut f)?;
            drop(f);
            fs::rename(&tmp, path)?;
        }
    }
    Ok(annealer.finish()?)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.corpus_dir)
        .with_context(|| format!("reading {}", args.corpus_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qwi"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .qwi instances under {}", args.corpus_dir.display());
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .context("building the worker pool")?;

    struct Row {
        geometry: String,
        eta: f64,
        path: String,
        success: Option<bool>,
        work: u128,
        sweeps: u64,
        wall_s: f64,
        error: Option<String>,
    }

    let mut tasks: Vec<(PathBuf, f64)> = Vec::new();
    for path in &paths {
        for &eta in &args.etas {
            tasks.push((path.clone(), eta));
        }
    }

    let rows: Vec<Row> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(path, eta)| {
                let run = || -> Result<Row> {
                    let inst = load_instance(path)?;
                    let mut params = args.flags.params();
                    params.policy.eta = *eta;
                    let started = Instant::now();
                    let result = anneal(&inst, params)?;
                    let wall_s = started.elapsed().as_secs_f64();
                    let result = match args.oracle {
                        OracleKind::None => result,
                        OracleKind::Exact => {
                            let (best, _) = brute_force(&inst)?;
                            result.with_oracle(best)
                        }
                        OracleKind::Sta => {
                            let (best, _) = args.sta.best_of(&inst);
                            result.with_oracle(best)
                        }
                    };
                    Ok(Row {
                        geometry: inst.geometry().label().replace(' ', "-"),
                        eta: *eta,
                        path: path.display().to_string(),
                        success: result.success,
                        work: result.cost.eigensolver_work,
                        sweeps: result.cost.sweeps,
                        wall_s,
                        error: None,
                    })
                };
                run().unwrap_or_else(|e| Row {
                    geometry: "?".into(),
                    eta: *eta,
                    path: path.display().to_string(),
                    success: None,
                    work: 0,
                    sweeps: 0,
                    wall_s: 0.0,
                    error: Some(format!("{e:#}")),
                })
            })
            .collect()
    });

    let manifest = manifest(
        "bench",
        json!({
            "corpus_dir": args.corpus_dir.display().to_string(),
            "etas": args.etas,
            "oracle": match args.oracle { OracleKind::None => "none", OracleKind::Exact => "exact", OracleKind::Sta => "sta" },
            "anneal": args.flags.manifest(),
            "sta": args.sta.manifest(),
            "jobs": args.jobs,
            "instances": paths.len(),
        }),
    );

    let mut sink = Sink::new(args.out.as_deref())?;
    sink.line(&format!("# manifest: {manifest}"))?;
    sink.line("# work = sum over eigensolver calls of m_left*m_right*iterations; wall_s is hardware-bound")?;
    sink.line("geometry,eta,n,n_failed,success_pct,work_mean,work_sd,sweeps_mean,wall_mean_s,wall_sd_s")?;

    // aggregate per (geometry, eta), in first-seen order
    let mut groups: Vec<(String, f64)> = Vec::new();
    for row in &rows {
        let key = (row.geometry.clone(), row.eta);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    for (geometry, eta) in groups {
        let members: Vec<&Row> = rows
            .iter()
            .filter(|r| r.geometry == geometry && r.eta == eta)
            .collect();
        let ok: Vec<&&Row> = members.iter().filter(|r| r.error.is_none()).collect();
        let n_failed = members.len() - ok.len();
        let successes = ok.iter().filter(|r| r.success == Some(true)).count();
        let with_oracle = ok.iter().filter(|r| r.success.is_some()).count();
        let success_pct = if with_oracle > 0 {
            100.0 * successes as f64 / with_oracle as f64
        } else {
            f64::NAN
        };
        let (work_mean, work_sd) = mean_sd(ok.iter().map(|r| r.work as f64));
        let (wall_mean, wall_sd) = mean_sd(ok.iter().map(|r| r.wall_s));
        let (sweeps_mean, _) = mean_sd(ok.iter().map(|r| r.sweeps as f64));
        sink.line(&format!(
            "{geometry},{eta:e},{},{n_failed},{success_pct:.1},{work_mean:.1},{work_sd:.1},{sweeps_mean:.2},{wall_mean:.3},{wall_sd:.3}",
            members.len(),
        ))?;
    }
    for row in rows.iter().filter(|r| r.error.is_some()) {
        sink.line(&format!(
            "# failed: {} eta={:e}: {}",
            row.path,
            row.eta,
            row.error.as_deref().unwrap_or("")
        ))?;
    }
    Ok(())
}

fn mean_sd(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.collect();
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        / (values.len().max(2) - 1) as f64;
    (mean, var.sqrt())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let gammas: Vec<f64> = match &args.gammas {
        Some(list) => list.clone(),
        None => {
            if args.points < 2 || args.gamma_from <= args.gamma_to {
                bail!("need points >= 2 and gamma_from > gamma_to");
            }
            let step = (args.gamma_from - args.gamma_to) / (args.points - 1) as f64;
            (0..args.points)
                .map(|k| args.gamma_from - step * k as f64)
                .collect()
        }
    };
    let mut opts = SweepOptions::<f64> {
        compute_gap: args.gap,
        policy: TruncationPolicy64 {
            eta: args.eta,
            ..Default::default()
        },
        ..Default::default()
    };
    if args.chi {
        opts.chi = Some(ChiOptions {
            probe_h: args.probe_h,
            subsample: args.chi_probes,
            policy: opts.policy,
            ..Default::default()
        });
    }
    if let Some(path) = &args.track_configs {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let cfg: SpinConfiguration = line
                .parse()
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            opts.track.push(cfg);
        }
    }

    let manifest = manifest(
        "sweep",
        json!({
            "instance": args.instance.display().to_string(),
            "gammas": gammas,
            "gap": args.gap,
            "chi": args.chi,
            "probe_h": args.probe_h,
            "chi_probes": args.chi_probes,
            "eta": args.eta,
            "tracked": opts.track.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        }),
    );
    let points = gamma_sweep(&inst, &gammas, &opts)?;
    let mut sink = Sink::new(args.out.as_deref())?;
    sink.line(&manifest.to_string())?;
    for point in &points {
        let mut line = serde_json::to_value(point)?;
        line["record"] = "sweep-point".into();
        sink.line(&line.to_string())?;
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    match args.method {
        OracleMethod::Exact { out } => {
            let (energy, minimizers) = brute_force(&inst)?;
            let manifest = manifest(
                "oracle",
                json!({ "instance": args.instance.display().to_string(), "method": "exact" }),
            );
            let mut sink = Sink::new(out.as_deref())?;
            sink.line(&manifest.to_string())?;
            sink.line(
                &json!({
                    "record": "oracle",
                    "method": "exact",
                    "energy": energy,
                    "n_minimizers": minimizers.len(),
                    "minimizers": minimizers.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                })
                .to_string(),
            )?;
        }
        OracleMethod::Sta { sta: flags, out } => {
            let manifest = manifest(
                "oracle",
                json!({
                    "instance": args.instance.display().to_string(),
                    "method": "sta",
                    "sta": flags.manifest(),
                }),
            );
            let started = Instant::now();
            let (energy, config) = flags.best_of(&inst);
            let mut sink = Sink::new(out.as_deref())?;
            sink.line(&manifest.to_string())?;
            sink.line(
                &json!({
                    "record": "oracle",
                    "method": "sta",
                    "energy": energy,
                    "config": config.to_string(),
                    "wall_s": started.elapsed().as_secs_f64(),
                })
                .to_string(),
            )?;
        }
        OracleMethod::Minima {
            runs,
            beta0,
            beta_max,
            r,
            steps_per_beta,
            seed,
            out,
        } => {
            let weak = StaParams64 {
                beta0,
                beta_max,
                r,
                steps_per_beta,
                seed,
            };
            let manifest = manifest(
                "oracle",
                json!({
                    "instance": args.instance.display().to_string(),
                    "method": "minima",
                    "runs": runs,
                    "weak": { "beta0": beta0, "beta_max": beta_max, "r": r,
                              "steps_per_beta": steps_per_beta, "seed": seed },
                }),
            );
            let minima = sample_local_minima(&inst, &weak, runs);
            let mut sink = Sink::new(out.as_deref())?;
            sink.line(&manifest.to_string())?;
            for (energy, config) in &minima {
                sink.line(
                    &json!({
                        "record": "local-minimum",
                        "energy": energy,
                        "config": config.to_string(),
                    })
                    .to_string(),
                )?;
            }
        }
    }
    Ok(())
}

