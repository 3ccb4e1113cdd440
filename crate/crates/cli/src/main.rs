use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use igbs::classify::{stratified_split, Classifier};
use igbs::io::{
    classify_bands, config_from_report, export_map, export_synth, load_cube, load_gt,
    load_synth_spec, raw_path_for, CompareOutcome, Dataset, RunConfig,
};
use igbs::{Error, Method, Result};

#[derive(Parser)]
#[command(
    name = "igbs",
    version,
    about = "Mutual-information band selection for hyperspectral cubes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the bands each method selects.
    Select(RunArgs),
    /// Train and evaluate a classifier on an explicit band list.
    Classify {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated band indices.
        #[arg(long, value_delimiter = ',', required = true)]
        bands: Vec<usize>,
    },
    /// Select, classify and evaluate every method; write reports, maps and
    /// the comparison table to `out`.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Re-run the config embedded in an earlier report.
        #[arg(long, conflicts_with = "config")]
        from_report: Option<PathBuf>,
    },
    /// Write a synthetic cube, header and ground truth.
    Synth {
        /// TOML file with rows, cols, bands, classes, informative_bands,
        /// noise_sigma, class_separation and seed.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// File stem for the written files.
        #[arg(long, default_value = "synth")]
        name: String,
    },
    /// Render a ground-truth grid as a PPM class map.
    Render {
        #[arg(long)]
        gt: PathBuf,
        /// Cube header supplying the grid dimensions.
        #[arg(long, required_unless_present_all = ["rows", "cols"])]
        cube: Option<PathBuf>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// One flag per `RunConfig` field. Flags override values from `--config`.
#[derive(Args)]
struct RunArgs {
    /// TOML run config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    cube: Option<PathBuf>,
    #[arg(long)]
    raw: Option<PathBuf>,
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    classifier: Option<Classifier>,
    #[arg(long)]
    svm_c: Option<f64>,
    #[arg(long)]
    svm_gamma: Option<f64>,
    #[arg(long)]
    svm_tol: Option<f64>,
    #[arg(long)]
    svm_max_iter: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    class_names: Option<Vec<String>>,
}

impl RunArgs {
    fn resolve(self, base: Option<RunConfig>) -> Result<RunConfig> {
        let mut c = match (base, &self.config) {
            (Some(c), _) => c,
            (None, Some(path)) => RunConfig::load(path)?,
            (None, None) => {
                let cube = self
                    .cube
                    .clone()
                    .ok_or_else(|| Error::Config("--cube is required".into()))?;
                let gt = self
                    .gt
                    .clone()
                    .ok_or_else(|| Error::Config("--gt is required".into()))?;
                RunConfig::new(cube, gt)
            }
        };
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = self.$field { c.$field = v; })*};
        }
        set!(
            cube,
            gt,
            methods,
            k,
            levels,
            beta,
            threshold,
            lambda,
            classifier,
            svm_c,
            svm_tol,
            svm_max_iter,
            train_fraction,
            seed,
            out,
            class_names
        );
        if self.raw.is_some() {
            c.raw = self.raw;
        }
        if self.svm_gamma.is_some() {
            c.svm_gamma = self.svm_gamma;
        }
        c.validate()?;
        Ok(c)
    }
}

fn select(config: &RunConfig) -> Result<()> {
    let dataset = Dataset::load(config)?;
    for &method in &config.methods {
        let r = dataset.select(method, config)?;
        let bands: Vec<String> = r.selected.iter().map(ToString::to_string).collect();
        println!("{method}\t{}", bands.join(","));
    }
    Ok(())
}

fn classify(config: &RunConfig, bands: &[usize]) -> Result<()> {
    let dataset = Dataset::load(config)?;
    let split = stratified_split(&dataset.gt, config.train_fraction, config.seed)?;
    let c = classify_bands(&dataset, &split, bands, config)?;
    let e = &c.eval;
    for (i, &class) in e.confusion.classes().iter().enumerate() {
        let acc = e.per_class[i].map_or_else(|| "n/a".into(), |a| format!("{:.2}", 100.0 * a));
        println!("{}\t{acc}", config.class_name(class));
    }
    println!("Kappa(%)\t{:.2}", 100.0 * e.kappa);
    println!("OA(%)\t{:.2}", 100.0 * e.overall_accuracy);
    Ok(())
}

fn compare(config: &RunConfig) -> Result<CompareOutcome> {
    let outcome = igbs::io::run_compare(config)?;
    outcome.write(&config.out)?;
    print!("{}", outcome.table());
    Ok(outcome)
}

fn render(
    gt: &Path,
    cube: Option<&Path>,
    rows: Option<usize>,
    cols: Option<usize>,
    out: &Path,
) -> Result<()> {
    let (rows, cols) = match (rows, cols, cube) {
        (Some(r), Some(c), _) => (r, c),
        (_, _, Some(h)) => {
            let cube = load_cube(h, &raw_path_for(h))?;
            (cube.rows(), cube.cols())
        }
        _ => {
            return Err(Error::Config(
                "need --cube or both --rows and --cols".into(),
            ))
        }
    };
    let gt = load_gt(gt, rows, cols)?;
    export_map(gt.labels(), rows, cols, out)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Select(args) => select(&args.resolve(None)?)?,
        Command::Classify { run, bands } => classify(&run.resolve(None)?, &bands)?,
        Command::Compare { run, from_report } => {
            let base = match from_report {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)
                        .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                    Some(config_from_report(&text)?)
                }
                None => None,
            };
            if compare(&run.resolve(base)?)?.any_failed() {
                return Ok(ExitCode::from(4));
            }
        }
        Command::Synth { spec, out, name } => {
            let spec = load_synth_spec(&spec)?;
            let oracle = export_synth(&spec, &out, &name)?;
            let bands: Vec<String> = oracle
                .informative_bands
                .iter()
                .map(ToString::to_string)
                .collect();
            println!("informative_bands\t{}", bands.join(","));
        }
        Command::Render {
            gt,
            cube,
            rows,
            cols,
            out,
        } => render(&gt, cube.as_deref(), rows, cols, &out)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
