use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use greedy_rb::algorithms::{run_eim, run_nga, run_oga, GreedyConfig};
use greedy_rb::distsolver::OpNormOptions;
use greedy_rb::experiments::{
    self, build_training_set, construct, counterexample_growth, norm_table, write_report, ExperimentConfig,
    ExperimentReport, NormTableSpec,
};
use greedy_rb::families::{self, Family};
use greedy_rb::{snapshot_io, Error, SpaceSpec};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "greedy-rb", version, about = "Greedy reduced-basis experiments in lp spaces")]
struct Cli {
    /// Worker threads (also GREEDY_RB_THREADS); 0 uses every core.
    #[arg(long, global = true, env = "GREEDY_RB_THREADS")]
    threads: Option<usize>,
    /// Zero CPU-time and quality columns so outputs are byte-stable.
    #[arg(long, global = true)]
    no_timing: bool,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    /// Largest basis size M.
    #[arg(long)]
    m: Option<usize>,
    /// Exponent p (a number or `inf`).
    #[arg(long)]
    p: Option<SpaceSpec>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check NGA = OGA at p = 2 or NGA = EIM at p = ∞.
    Equiv {
        #[arg(long, default_value = "2")]
        p: SpaceSpec,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 15)]
        m: usize,
    },
    /// Measure max_m ‖R_m‖ on the basis built by a config's experiment.
    Normtable {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Show the geometric growth of natural greedy remainders in ℓ1.
    Counterexample {
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        /// Threshold M(α) to force.
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long)]
        size: Option<usize>,
    },
    /// Write the training set of a config to a file.
    Gen {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_enum, default_value_t = GenFormat::Csv)]
        format: GenFormat,
        /// Destination file.
        #[arg(long = "file", short = 'o')]
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFormat {
    Csv,
    Binary,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn load_config(path: &Path, o: &Overrides) -> greedy_rb::Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Config(vec![greedy_rb::error::ConfigIssue {
            path: String::new(),
            message: format!("cannot read {}: {e}", path.display()),
        }])
    })?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(m) = o.m {
        cfg.m = m;
    }
    if let Some(p) = o.p {
        cfg.space = p;
    }
    if let Some(out) = &o.out {
        cfg.output.dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> greedy_rb::Result<ExitCode> {
    match &cli.command {
        Command::Run { config, overrides } => {
            let cfg = load_config(config, overrides)?;
            let mut report = experiments::run_experiment(&cfg)?;
            if cli.no_timing {
                report.strip_timing();
            }
            let files = write_report(&report, &cfg.output.dir, &cfg.output.formats)?;
            print_rows(&report);
            if cli.verbose {
                for run in &report.runs {
                    for note in &run.notes {
                        eprintln!("{}: {note}", run.algorithm);
                    }
                    if run.capped_solves > 0 {
                        eprintln!("{}: {} capped evaluation solves", run.algorithm, run.capped_solves);
                    }
                }
                for f in files {
                    eprintln!("wrote {}", f.display());
                }
            }
            for run in &report.runs {
                if let Some(f) = &run.failure {
                    eprintln!("{} failed: {f}", run.algorithm);
                }
            }
            Ok(if report.failed() {
                ExitCode::from(EXIT_NUMERIC)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Equiv { p, seed, m } => equiv(*p, *seed, *m),
        Command::Normtable {
            config,
            overrides,
            restarts,
            samples,
        } => {
            let cfg = load_config(config, overrides)?;
            let spec = cfg.opnorm.clone().unwrap_or(NormTableSpec {
                algorithm: cfg.algorithms[0],
                dims: [5, 10, 15, 20, 25, 30].into_iter().filter(|&n| n <= cfg.m).collect(),
                restarts: 64,
                samples: 10_000,
            });
            let (mut ts, _) = build_training_set(&cfg)?;
            let (basis, _) = construct(spec.algorithm, &mut ts, &cfg.greedy_config())?;
            let dims: Vec<usize> = spec.dims.iter().copied().filter(|&n| n <= basis.len()).collect();
            let opts = OpNormOptions {
                restarts: restarts.unwrap_or(spec.restarts),
                samples: samples.unwrap_or(spec.samples),
                seed: cfg.seed,
            };
            let rows = norm_table(&basis, &dims, &opts)?;
            println!("{:>4} {:>18} {:>18}", "n", "measured_max_norm", "theoretical_bound");
            for r in &rows {
                println!("{:>4} {:>18.6} {:>18.4}", r.n, r.measured_max_norm, r.theoretical_bound);
            }
            if overrides.out.is_some() {
                fs::create_dir_all(&cfg.output.dir)?;
                let report = ExperimentReport {
                    rows: Vec::new(),
                    runs: Vec::new(),
                    norm_rows: Some(rows),
                    metadata: experiments::Metadata {
                        version: env!("CARGO_PKG_VERSION").to_string(),
                        seed: cfg.seed,
                        n_h: ts.n_h(),
                        n_tr: ts.n_tr(),
                        error_scale: 1.0,
                        timing: false,
                        config: cfg.clone(),
                    },
                };
                let body = experiments::normtable_csv(&report).expect("rows present");
                fs::write(cfg.output.dir.join("normtable.csv"), body)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Counterexample { eps, m, size } => {
            let (ce, rows) = counterexample_growth(*eps, *m, *size)?;
            println!(
                "eps = {eps}, alpha = {:.10e}, predicted threshold M(alpha) = {}",
                ce.alpha,
                ce.threshold.map_or("none".to_string(), |t| t.to_string())
            );
            println!("{:>3} {:>18} {:>18}", "m", "measured_ratio", "(2(1-eps))^m");
            let mut ok = true;
            for r in &rows {
                ok &= (r.measured / r.predicted - 1.0).abs() <= 1e-9;
                println!("{:>3} {:>18.10} {:>18.10}", r.m, r.measured, r.predicted);
            }
            println!("{}", if ok { "PASS" } else { "FAIL" });
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NUMERIC)
            })
        }
        Command::Gen {
            config,
            overrides,
            format,
            file,
        } => {
            let cfg = load_config(config, overrides)?;
            let (ts, _) = build_training_set(&cfg)?;
            match format {
                GenFormat::Csv => snapshot_io::write_csv(&ts, file)?,
                GenFormat::Binary => snapshot_io::write_binary(&ts, file)?,
            }
            if cli.verbose {
                eprintln!("wrote {} x {} snapshots to {}", ts.n_h(), ts.n_tr(), file.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_rows(report: &ExperimentReport) {
    println!(
        "{:<5} {:>3} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "alg", "m", "error_avg", "error_max", "cputime_s", "quality_avg", "quality_min"
    );
    for r in &report.rows {
        println!(
            "{:<5} {:>3} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            r.algorithm.name(),
            r.m,
            r.error_avg,
            r.error_max,
            r.cputime_s,
            r.quality_avg,
            r.quality_min
        );
    }
}

fn equiv(p: SpaceSpec, seed: u64, m: usize) -> greedy_rb::Result<ExitCode> {
    let cfg = GreedyConfig {
        max_iterations: m,
        ..Default::default()
    };
    let pass = if p.is_hilbert() {
        let ts = families::gen_random_set(seed, 200, 20, 100, p)?;
        let (a, _) = run_nga(&ts, &cfg)?;
        let (b, _) = run_oga(&ts, &cfg)?;
        let mismatch = index_mismatch(&a.selected, &b.selected);
        println!("p = 2: NGA vs OGA on {} x {} random snapshots", ts.n_h(), ts.n_tr());
        println!("nga selected: {:?}", a.selected);
        println!("oga selected: {:?}", b.selected);
        println!("max index mismatch {mismatch}");
        mismatch == 0
    } else if p == SpaceSpec::linf() {
        let grid = Family::OneD.grid_with(&[2000], &[100]);
        let ts = families::sample_family(Family::OneD, &grid, p)?;
        let (a, _) = run_nga(&ts, &cfg)?;
        let (b, _) = run_eim(&ts, &cfg)?;
        let mismatch = index_mismatch(&a.selected, &b.selected);
        let points_equal = a.points == b.points;
        let dev = a
            .vectors()
            .iter()
            .zip(b.vectors())
            .map(|(x, y)| {
                let plus = x.iter().zip(y).fold(0.0f64, |d, (u, v)| d.max((u - v).abs()));
                let minus = x.iter().zip(y).fold(0.0f64, |d, (u, v)| d.max((u + v).abs()));
                plus.min(minus)
            })
            .fold(0.0f64, f64::max);
        println!("p = inf: NGA vs EIM on the 1d family ({} x {})", ts.n_h(), ts.n_tr());
        println!("nga selected: {:?}", a.selected);
        println!("eim selected: {:?}", b.selected);
        println!("max index mismatch {mismatch}");
        println!("interpolation points equal: {points_equal}");
        println!("max basis deviation up to sign: {dev:.3e}");
        mismatch == 0 && points_equal && dev <= 1e-9
    } else {
        return Err(Error::Unsupported(format!(
            "equiv checks p = 2 or p = inf, got p = {p}"
        )));
    };
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERIC)
    })
}

/// Number of positions at which two selections differ (length difference
/// included).
fn index_mismatch(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}
