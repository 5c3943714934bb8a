use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cdma_sig::criteria::{
    evaluate, write_records, CriterionKind, CriterionSpec, EvaluationRecord, FULL_BER_BITS,
    REPORT_SAMPLES,
};
use cdma_sig::enlarge::{EnlargementPlan, Generator, TensorDecoder};
use cdma_sig::experiment::{
    default_ebn0_grid, run_experiment, Budget, ExperimentConfig, ExperimentKind,
};
use cdma_sig::io::{parse_received_vectors, write_atomic};
use cdma_sig::optimize::{make_cost, run_ga, run_pso, Algorithm, GaConfig, PsoConfig};
use cdma_sig::system::NoiseLevel;
use cdma_sig::{registry, Alphabet, SignatureMatrix};
use clap::{Args, Parser, Subcommand};

/// Relative output paths are resolved against this directory when set.
const OUT_DIR_VAR: &str = "CDMA_SIG_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "cdma-sig",
    version,
    about = "Signature matrix design for overloaded CDMA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a matrix that optimizes a criterion.
    Optimize(OptimizeArgs),
    /// Evaluate criteria of a matrix over an Eb/N0 grid.
    Evaluate(EvaluateArgs),
    /// Enlarge a matrix with a Kronecker generator.
    Enlarge(EnlargeArgs),
    /// Decode received vectors of an enlarged matrix block by block.
    Decode(DecodeArgs),
    /// Run an experiment sweep.
    Experiment(ExperimentArgs),
    /// List the built-in matrices.
    RegistryList(RegistryArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MatrixSource {
    /// Matrix JSON file.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Built-in matrix id (see registry-list).
    #[arg(long)]
    id: Option<String>,
}

impl MatrixSource {
    fn load(&self) -> Result<(String, SignatureMatrix)> {
        match (&self.matrix, &self.id) {
            (Some(path), _) => {
                let a = SignatureMatrix::read(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Ok((name, a))
            }
            (None, Some(id)) => {
                let entry = registry::get(id)?;
                Ok((entry.id.to_string(), entry.matrix))
            }
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    criterion: CriterionKind,
    /// Eb/N0 in dB.
    #[arg(long, allow_negative_numbers = true)]
    ebn0: f64,
    #[arg(long, default_value = "ga")]
    algo: Algorithm,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "real")]
    alphabet: Alphabet,
    /// Monte-Carlo samples (capacity) or bits (BER) per cost evaluation.
    #[arg(long)]
    samples: Option<usize>,
    /// Use the full search budgets.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    iterations: Option<usize>,
    /// Output matrix file; the trace goes next to it as `.trace.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    source: MatrixSource,
    /// Criteria, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    criterion: Vec<CriterionKind>,
    /// Eb/N0 grid in dB, comma separated; 0 to 12 when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    ebn0: Vec<f64>,
    /// Monte-Carlo samples (capacity) or bits (BER).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct EnlargeArgs {
    #[command(flatten)]
    source: MatrixSource,
    /// Generator order; the normalized Hadamard generator is used.
    #[arg(long, required_unless_present = "generator")]
    k: Option<usize>,
    /// Custom generator entries, row-major and comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "k"
    )]
    generator: Vec<f64>,
    /// Enlarged matrix file.
    #[arg(long)]
    out: PathBuf,
    /// Also write the plan (base, generator) for `decode`.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct DecodeArgs {
    /// Plan file written by `enlarge --plan`.
    #[arg(long, required_unless_present_any = ["matrix", "id"])]
    plan: Option<PathBuf>,
    /// Base matrix file, with `--k`.
    #[arg(long, conflicts_with_all = ["plan", "id"], requires = "k")]
    matrix: Option<PathBuf>,
    /// Built-in base matrix id, with `--k`.
    #[arg(long, conflicts_with = "plan", requires = "k")]
    id: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Received vectors: one comma-separated vector per line, or one value
    /// per line for a single vector.
    #[arg(long)]
    received: PathBuf,
    /// Output file for the decoded bits; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment configuration.
    #[arg(long, required_unless_present = "experiment")]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "config", requires_all = ["dims", "seeds"])]
    experiment: Option<ExperimentKind>,
    /// Dimensions as `MxN`, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_dims)]
    dims: Vec<(usize, usize)>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    ebn0: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long, value_delimiter = ',')]
    criterion: Vec<CriterionKind>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    full: bool,
    /// Results CSV; a `.summary.json` is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct RegistryArgs {
    /// Print the matrix JSON of one entry instead of the listing.
    #[arg(long)]
    show: Option<String>,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected MxN, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
    Ok((parse(m)?, parse(n)?))
}

fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8], force: bool) -> Result<()> {
    match out {
        Some(path) => {
            let path = output_path(path);
            write_atomic(&path, bytes, force).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(bytes).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn search_samples(kind: CriterionKind, samples: Option<usize>, full: bool) -> usize {
    let budget = if full {
        Budget::full()
    } else {
        Budget::default()
    };
    samples.unwrap_or(match kind {
        CriterionKind::Ber => budget.search_ber_bits,
        _ => budget.search_samples,
    })
}

fn optimize(args: OptimizeArgs) -> Result<()> {
    let spec = CriterionSpec::new(
        args.criterion,
        NoiseLevel::EbN0Db(args.ebn0),
        search_samples(args.criterion, args.samples, args.full),
        args.seed,
    );
    spec.validate()?;
    let out = output_path(&args.out.clone().unwrap_or_else(|| {
        PathBuf::from(format!(
            "{}_{}x{}_{}_seed{}.json",
            args.criterion, args.m, args.n, args.algo, args.seed
        ))
    }));
    let trace_path = out.with_extension("trace.csv");
    if !args.force {
        if let Some(p) = [&out, &trace_path].into_iter().find(|p| p.exists()) {
            return Err(cdma_sig::Error::Io(std::io::Error::new(
                std::io::ErrorKind::AlreadyExists,
                format!("{} already exists", p.display()),
            ))
            .into());
        }
    }
    let cost = make_cost(spec);
    let trace = match args.algo {
        Algorithm::Ga => {
            let mut cfg = GaConfig {
                alphabet: args.alphabet,
                seed: args.seed,
                ..GaConfig::default()
            };
            if let Some(it) = args.iterations {
                cfg.max_iterations = it;
            }
            run_ga(args.m, args.n, &cost, &cfg)?
        }
        Algorithm::Pso => {
            if args.alphabet == Alphabet::Binary {
                bail!("binary matrices are searched with --algo ga");
            }
            let mut cfg = PsoConfig {
                seed: args.seed,
                ..PsoConfig::default()
            };
            if let Some(it) = args.iterations {
                cfg.max_iterations = it;
            }
            run_pso(args.m, args.n, &cost, &cfg)?
        }
    };
    let mut trace_csv = Vec::new();
    trace.write_csv(&mut trace_csv)?;
    trace.final_matrix.write(&out, args.force)?;
    write_atomic(&trace_path, &trace_csv, args.force)?;
    eprintln!(
        "best cost {} after {} evaluations; wrote {} and {}",
        trace.final_cost,
        trace.evaluations,
        out.display(),
        trace_path.display()
    );
    Ok(())
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<()> {
    let (name, a) = args.source.load()?;
    let grid = if args.ebn0.is_empty() {
        default_ebn0_grid()
    } else {
        args.ebn0
    };
    let mut records = Vec::new();
    for &kind in &args.criterion {
        let samples = args.samples.unwrap_or(match kind {
            CriterionKind::Ber if args.full => FULL_BER_BITS,
            CriterionKind::Ber => Budget::default().search_ber_bits,
            _ => REPORT_SAMPLES,
        });
        for &db in &grid {
            let spec = CriterionSpec::new(kind, NoiseLevel::EbN0Db(db), samples, args.seed);
            let value = evaluate(&a, &spec).with_context(|| format!("{kind} at {db} dB"))?;
            records.push(EvaluationRecord::new(name.clone(), &spec, &value));
        }
    }
    let mut csv = Vec::new();
    write_records(&mut csv, &records)?;
    emit(args.out.as_deref(), &csv, args.force)
}

fn enlarge_cmd(args: EnlargeArgs) -> Result<()> {
    let (_, a) = args.source.load()?;
    let generator = match args.k {
        Some(k) => Generator::hadamard(k)?,
        None => {
            let k = (args.generator.len() as f64).sqrt().round() as usize;
            Generator::from_rows(k, &args.generator)?
        }
    };
    let plan = EnlargementPlan::new(a, generator)?;
    let out = output_path(&args.out);
    plan.enlarged().write(&out, args.force)?;
    if let Some(path) = &args.plan {
        let mut text = plan.to_json();
        text.push('\n');
        write_atomic(output_path(path), text.as_bytes(), args.force)?;
    }
    let b = plan.enlarged();
    eprintln!("wrote {}x{} matrix to {}", b.m(), b.n(), out.display());
    Ok(())
}

fn decode_cmd(args: DecodeArgs) -> Result<()> {
    let plan = match (&args.plan, &args.matrix, &args.id) {
        (Some(path), _, _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            EnlargementPlan::from_json(&text)?
        }
        (None, matrix, id) => {
            let source = MatrixSource {
                matrix: matrix.clone(),
                id: id.clone(),
            };
            let (_, a) = source.load()?;
            let k = args.k.expect("clap requires k");
            EnlargementPlan::new(a, Generator::hadamard(k)?)?
        }
    };
    let text = std::fs::read_to_string(&args.received)
        .with_context(|| format!("reading {}", args.received.display()))?;
    let decoder = TensorDecoder::new(&plan)?;
    let mut lines = String::new();
    for (i, y) in parse_received_vectors(&text)?.iter().enumerate() {
        let x = decoder
            .decode(y)
            .with_context(|| format!("received vector {}", i + 1))?;
        let bits: Vec<String> = x.bits().iter().map(|b| b.to_string()).collect();
        lines.push_str(&bits.join(","));
        lines.push('\n');
    }
    emit(args.out.as_deref(), lines.as_bytes(), args.force)
}

fn experiment_cmd(args: ExperimentArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => {
            let kind = args.experiment.expect("clap requires experiment");
            ExperimentConfig::new(
                kind,
                args.dims.clone(),
                default_ebn0_grid(),
                args.seeds.clone(),
            )
        }
    };
    if !args.ebn0.is_empty() {
        cfg.ebn0_grid_db = args.ebn0;
    }
    if let Some(algo) = args.algo {
        cfg.algo = algo;
    }
    if !args.criterion.is_empty() {
        cfg.criteria = Some(args.criterion);
    }
    if args.jobs.is_some() {
        cfg.jobs = args.jobs;
    }
    if args.full {
        cfg.budget = Budget::full();
    }
    let out = args
        .out
        .or_else(|| cfg.output_path.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.experiment)));
    let out = output_path(&out);
    let results = run_experiment(&cfg)?;
    let summary = results.write(&out, args.force)?;
    eprintln!(
        "{} rows ({} failed); wrote {} and {}",
        results.summary.rows,
        results.summary.failed,
        out.display(),
        summary.display()
    );
    Ok(())
}

fn registry_cmd(args: RegistryArgs) -> Result<()> {
    if let Some(id) = args.show {
        let text = registry::get(&id)?.matrix.to_json() + "\n";
        return emit(None, text.as_bytes(), false);
    }
    let row = |cols: [String; 7]| {
        format!(
            "{:<12} {:<6} {:<10} {:<5} {:>5} {:>5} {}\n",
            cols[0], cols[1], cols[2], cols[3], cols[4], cols[5], cols[6]
        )
    };
    let mut text = row([
        "id",
        "table",
        "criterion",
        "algo",
        "ebn0",
        "dims",
        "alphabet",
    ]
    .map(String::from));
    for e in registry::all() {
        let p = &e.provenance;
        text += &row([
            e.id.to_string(),
            p.table.to_string(),
            p.criterion.to_string(),
            p.optimizer.to_string(),
            p.design_ebn0_db.to_string(),
            format!("{}x{}", e.matrix.m(), e.matrix.n()),
            e.matrix.alphabet().to_string(),
        ]);
    }
    emit(None, text.as_bytes(), false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Enlarge(a) => enlarge_cmd(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
        Command::RegistryList(a) => registry_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| {
                matches!(c.downcast_ref(), Some(cdma_sig::Error::Io(io)) if io.kind() == std::io::ErrorKind::AlreadyExists)
            }) {
                eprintln!("hint: pass --force to replace existing outputs");
            }
            ExitCode::FAILURE
        }
    }
}
