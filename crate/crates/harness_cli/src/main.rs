use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conv_spectral::{ConvArchitecture, Filter, Pooling};
use harness_cli::dump::{dump_spectrum, kappa_csv, pooling_tables, write_file};
use harness_cli::svg::curve_svg;
use harness_cli::{default_level, run_learning_curve, run_suite, shrinkage_comparison, ExperimentConfig, HarnessError, Size, Suite, TargetSpec};
use inner_kernel::{gegenbauer_coeffs, ActivationKind, KernelDescriptor};

#[derive(Parser)]
#[command(name = "cklab", version, about = "Convolutional kernels on the hypercube: spectra, learning curves, verification")]
struct Cli {
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PoolingArg {
    None,
    Average,
    Global,
    Weighted,
    NonOverlapping,
    Fc,
    FcGp,
}

#[derive(Args, Clone, Debug)]
struct ArchArgs {
    #[arg(long, default_value_t = 30)]
    d: usize,
    #[arg(long, default_value_t = 10)]
    q: usize,
    #[arg(long, value_enum, default_value = "average")]
    pooling: PoolingArg,
    #[arg(long, default_value_t = 5)]
    omega: usize,
    #[arg(long, default_value_t = 1)]
    delta: usize,
    /// Width of the Gaussian filter for weighted pooling.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// `experiment`, `poly:c0,c1,...`, `ntk:relu|identity|tanh` or `ntk:poly:c0,c1,...`.
    #[arg(long, default_value = "experiment")]
    kernel: String,
}

#[derive(Subcommand)]
enum Command {
    /// Eigen-decomposition of one kernel as JSON lines, with pooling weights.
    Spectrum(ArchArgs),
    /// Average-pooling frequency weights for one or more widths.
    Kappa {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        omega: Vec<usize>,
    },
    /// Pooling-plus-downsampling matrices and their block-circulant eigenpairs.
    PoolingMatrix {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        omega: usize,
        #[arg(long, default_value_t = 1)]
        delta: usize,
        /// Diameter; all of `1..=q` when omitted.
        #[arg(long)]
        r: Option<usize>,
    },
    /// Learning curves of the configured experiment.
    Curve {
        /// Run a shipped preset instead of `--config`.
        #[arg(long)]
        preset: Option<String>,
        /// Also write SVG plots.
        #[arg(long)]
        svg: bool,
    },
    /// Shrinkage-operator risk prediction, optionally against fitted models.
    ShrinkPredict {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        /// Level of the effective ridge; derived from `n` when omitted.
        #[arg(long)]
        s: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// `lf_chain:L`, `hf_chain:L` or `random_local:Q:DEGREE:SEED`.
        #[arg(long, default_value = "lf_chain:3")]
        target: String,
        #[arg(long, default_value = "experiment")]
        kernel: String,
        /// Seeds of the empirical comparison.
        #[arg(long, default_value_t = 5)]
        seeds: usize,
    },
    /// Run verification suites; exits with 2 when a check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[arg(long, value_enum, default_value = "small")]
        size: Size,
    },
    /// Print or write a shipped experiment configuration.
    Preset {
        name: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn parse_kernel(s: &str) -> Result<KernelDescriptor, HarnessError> {
    let bad = || HarnessError::Config(format!("unknown kernel '{s}'"));
    if s == "experiment" {
        return Ok(KernelDescriptor::experiment());
    }
    if let Some(rest) = s.strip_prefix("poly:") {
        let coeffs = rest.split(',').map(|c| c.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>, _>>()?;
        return Ok(KernelDescriptor::poly(&coeffs));
    }
    if let Some(rest) = s.strip_prefix("ntk:") {
        let (activation, params) = match rest {
            "relu" => (ActivationKind::Relu, vec![]),
            "identity" => (ActivationKind::Identity, vec![]),
            "tanh" => (ActivationKind::Tanh, vec![]),
            _ => match rest.strip_prefix("poly:") {
                Some(c) => (ActivationKind::Poly, c.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?),
                None => return Err(bad()),
            },
        };
        return Ok(KernelDescriptor::Ntk { activation, params });
    }
    Err(bad())
}

fn parse_target(s: &str) -> Result<TargetSpec, HarnessError> {
    let bad = || HarnessError::Config(format!("unknown target '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| parts.get(i).and_then(|p| p.parse::<u64>().ok()).ok_or_else(bad);
    match parts[0] {
        "lf_chain" => Ok(TargetSpec::LfChain { l: num(1)? as usize }),
        "hf_chain" => Ok(TargetSpec::HfChain { l: num(1)? as usize }),
        "random_local" => Ok(TargetSpec::RandomLocal { q: num(1)? as usize, degree: num(2)? as usize, seed: num(3)? }),
        _ => Err(bad()),
    }
}

fn build_arch(a: &ArchArgs) -> Result<ConvArchitecture, HarnessError> {
    let pooling = match a.pooling {
        PoolingArg::Fc => return Ok(ConvArchitecture::fc(a.d)),
        PoolingArg::FcGp => return Ok(ConvArchitecture::fc_gp(a.d)),
        PoolingArg::None => Pooling::None,
        PoolingArg::Average => Pooling::Average { omega: a.omega },
        PoolingArg::Global => Pooling::Global,
        PoolingArg::Weighted => Pooling::Weighted { filter: Filter::Gaussian { sigma: a.sigma } },
        PoolingArg::NonOverlapping => Pooling::NonOverlapping { omega: a.omega },
    };
    Ok(ConvArchitecture::new(a.d, a.q, pooling, a.delta)?)
}

fn load_config(cli: &Cli, preset: Option<&str>) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match (preset, &cli.config) {
        (Some(name), _) => ExperimentConfig::preset(name).ok_or_else(|| HarnessError::Config(format!("unknown preset '{name}'")))?,
        (None, Some(path)) => ExperimentConfig::load(path)?,
        (None, None) => return Err(HarnessError::Config("curve needs --config PATH or --preset NAME".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, fallback: Option<&Path>) -> PathBuf {
    cli.out.clone().or_else(|| fallback.map(Path::to_path_buf)).unwrap_or_else(|| PathBuf::from("."))
}

fn emit(cli: &Cli, name: &str, body: &str) -> Result<(), HarnessError> {
    match &cli.out {
        Some(dir) => {
            let path = dir.join(name);
            write_file(&path, body)?;
            println!("{}", path.display());
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(body.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(HarnessError::io("<stdout>", e)),
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    if let Some(n) = cli.threads {
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| HarnessError::Config(e.to_string()))?;
        #[cfg(not(feature = "parallel"))]
        log::warn!("--threads {n} ignored: built without the parallel feature");
    }
    match &cli.command {
        Command::Spectrum(a) => {
            let arch = build_arch(a)?;
            let kernel = gegenbauer_coeffs(&parse_kernel(&a.kernel)?, arch.q)?;
            for p in dump_spectrum(&arch, &kernel, &out_dir(cli, None))? {
                println!("{}", p.display());
            }
        }
        Command::Kappa { d, omega } => emit(cli, "kappa.csv", &kappa_csv(*d, omega)?)?,
        Command::PoolingMatrix { d, q, omega, delta, r } => {
            let arch = ConvArchitecture::ck_ap_ds(*d, *q, *omega, *delta)?;
            let rs: Vec<usize> = match r {
                Some(r) => vec![*r],
                None => (1..=*q).collect(),
            };
            for r in rs {
                let (mat, eig) = pooling_tables(&arch, r)?;
                emit(cli, &format!("pooling_r{r}.csv"), &mat)?;
                emit(cli, &format!("pooling_eig_r{r}.csv"), &eig)?;
            }
        }
        Command::Curve { preset, svg } => {
            let cfg = load_config(cli, preset.as_deref())?;
            let dir = out_dir(cli, cfg.output.as_deref());
            let table = run_learning_curve(&cfg)?;
            let mut points = Vec::new();
            table.write_points_csv(&mut points)?;
            write_file(&dir.join("curve.csv"), &String::from_utf8(points).expect("csv is utf-8"))?;
            let mut cells = Vec::new();
            krr_lab::write_risk_csv(&table.cells, &mut cells)?;
            write_file(&dir.join("risks.csv"), &String::from_utf8(cells).expect("csv is utf-8"))?;
            write_file(&dir.join("config.toml"), &cfg.to_toml())?;
            if *svg {
                for t in &cfg.targets {
                    let name = t.to_string();
                    let series: Vec<(String, Vec<_>)> =
                        cfg.architectures.iter().map(|k| (k.name().to_string(), table.series(k.name(), &name))).collect();
                    let file = format!("curve_{}.svg", name.replace(['(', ')', ',', '='], "_"));
                    write_file(&dir.join(file), &curve_svg(&format!("{} on {name}", cfg.name), &series))?;
                }
            }
            for k in &cfg.architectures {
                for t in &cfg.targets {
                    let name = t.to_string();
                    let thr = table.threshold(k.name(), &name, 0.1).map_or("-".to_string(), |n| n.to_string());
                    println!("{:<9} {:<12} n(risk<0.1) = {thr}", k.name(), name);
                }
            }
            println!("{}", dir.display());
        }
        Command::ShrinkPredict { d, q, n, s, lambda, target, kernel, seeds } => {
            let s = s.unwrap_or_else(|| default_level(*d, *q, *n));
            let cmp = shrinkage_comparison(*d, *q, *n, s, *lambda, &parse_kernel(kernel)?, &parse_target(target)?, *seeds, cli.seed.unwrap_or(0))?;
            emit(cli, "shrink.json", &(serde_json::to_string_pretty(&cmp).expect("serializes") + "\n"))?;
        }
        Command::Verify { suite, size } => {
            let suites: Vec<Suite> = suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
            let mut lines = String::new();
            let mut failed = Vec::new();
            for s in suites {
                let report = run_suite(s, *size)?;
                if !report.ok() {
                    failed.push(report.suite);
                }
                eprintln!("{:<13} {:>4} passed {:>3} failed {:>7.2}s", report.suite, report.passed, report.failed, report.seconds);
                lines.push_str(&serde_json::to_string(&report).expect("serializes"));
                lines.push('\n');
            }
            emit(cli, "verify.jsonl", &lines)?;
            if !failed.is_empty() {
                return Err(HarnessError::Verification(failed.join(", ")));
            }
        }
        Command::Preset { name, json } => match name {
            None => println!("{}", ExperimentConfig::PRESETS.join("\n")),
            Some(name) => {
                let cfg = ExperimentConfig::preset(name).ok_or_else(|| HarnessError::Config(format!("unknown preset '{name}'")))?;
                if *json {
                    emit(cli, &format!("{name}.json"), &(serde_json::to_string_pretty(&cfg).expect("serializes") + "\n"))?;
                } else {
                    emit(cli, &format!("{name}.toml"), &cfg.to_toml())?;
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
