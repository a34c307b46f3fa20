use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use randsurf::experiment::for_each_chunk;
use randsurf::report::{
    fmt_f64, histogram_csv, moments_json, plan_json, sample_csv, sample_json, SAMPLE_CSV_HEADER,
};
use randsurf::rng::DEFAULT_SEED;
use randsurf::stats::{finite_size_targets, MomentTally};
use randsurf::verify::{find, run_criterion, CRITERIA};
use randsurf::{exact_joint, stirling_first, ExperimentPlan, ModelKind, ModelParams};

#[derive(Parser)]
#[command(
    name = "randsurf",
    version,
    about = "Random surfaces from polygon gluings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream one record per sampled surface.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
    /// Histograms of (B, genus), marginals and moment report.
    Dist {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Exact joint law by enumeration of all matchings and placements.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria and print one JSON verdict per line.
    Verify {
        /// Run a single criterion by id.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Unsigned Stirling numbers of the first kind for order m.
    Stirling {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Sides per polygon (T and T′ only).
    #[arg(long, default_value_t = 3)]
    t: usize,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker count, or `auto` for all cores.
    #[arg(long, default_value = "auto", value_parser = parse_threads)]
    threads: Threads,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy)]
struct Threads(Option<usize>);

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_threads(s: &str) -> Result<Threads, String> {
    if s == "auto" {
        return Ok(Threads(None));
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err("expected a positive integer or `auto`".into()),
        Ok(n) => Ok(Threads(Some(n))),
    }
}

enum Failure {
    Validation(String),
    Runtime(String),
    Verification,
}

impl Failure {
    fn io(e: io::Error) -> Self {
        Failure::Runtime(format!("write failed: {e}"))
    }
}

fn open(out: &Option<PathBuf>) -> Result<Box<dyn Write + Send>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            Failure::Runtime(format!("cannot open {}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        ModelParams::new(self.model, self.n, self.m, self.t)
            .map_err(|e| Failure::Validation(e.to_string()))
    }
}

impl RunArgs {
    fn plan(&self, params: ModelParams) -> Result<ExperimentPlan, Failure> {
        ExperimentPlan::new(params, self.samples, self.seed)
            .map_err(|e| Failure::Validation(e.to_string()))
    }
}

fn run_error(e: randsurf::experiment::RunError) -> Failure {
    Failure::Runtime(e.to_string())
}

fn cmd_sample(model: &ModelArgs, run: &RunArgs, format: Format) -> Result<(), Failure> {
    let params = model.params()?;
    if run.samples == 0 {
        return Err(Failure::Validation("--samples must be positive".into()));
    }
    let mut out = open(&run.out)?;
    if let Ok(plan) = ExperimentPlan::new(params, run.samples, run.seed) {
        eprintln!("{}", plan_json(&plan));
    }
    if let Format::Csv = format {
        writeln!(out, "{SAMPLE_CSV_HEADER}").map_err(Failure::io)?;
    }
    let seed = run.seed;
    for_each_chunk(params, seed, run.samples, run.threads.0, |start, chunk| {
        let mut text = String::new();
        for (k, s) in chunk.iter().enumerate() {
            let index = (start + k) as u64;
            text.push_str(&match format {
                Format::Jsonl => sample_json(&params, seed, index, s),
                Format::Csv => sample_csv(&params, seed, index, s),
            });
            text.push('\n');
        }
        out.write_all(text.as_bytes())?;
        out.flush()
    })
    .map_err(run_error)?
    .map_err(Failure::io)
}

fn cmd_dist(model: &ModelArgs, run: &RunArgs) -> Result<(), Failure> {
    let params = model.params()?;
    let plan = run.plan(params)?;
    let mut out = open(&run.out)?;
    let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut tally = MomentTally::default();
    for_each_chunk::<_, ()>(params, run.seed, run.samples, run.threads.0, |_, chunk| {
        for s in chunk {
            *joint.entry((s.b, s.genus)).or_default() += 1;
            tally.push(s.b as i64, s.genus as i64);
        }
        Ok(())
    })
    .map_err(run_error)?
    .ok();

    let mut b_counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut g_counts: BTreeMap<usize, u64> = BTreeMap::new();
    for (&(b, g), &c) in &joint {
        *b_counts.entry(b).or_default() += c;
        *g_counts.entry(g).or_default() += c;
    }
    let mut text = format!("# plan\n{}\n# joint\nB,genus,count\n", plan_json(&plan));
    for ((b, g), c) in &joint {
        text.push_str(&format!("{b},{g},{c}\n"));
    }
    text.push_str("# B\n");
    text.push_str(&histogram_csv("value", &b_counts));
    text.push_str("# genus\n");
    text.push_str(&histogram_csv("value", &g_counts));
    if let Ok(norm) = plan.normalization() {
        text.push_str("# b_hat\nvalue,count\n");
        for (&b, c) in &b_counts {
            let x = norm.apply(b as f64, 0.0).b_hat;
            text.push_str(&format!("{},{c}\n", fmt_f64(x)));
        }
        text.push_str("# g_hat\nvalue,count\n");
        for (&g, c) in &g_counts {
            let y = norm.apply(0.0, g as f64).g_hat;
            text.push_str(&format!("{},{c}\n", fmt_f64(y)));
        }
    }
    let report = tally
        .report()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let targets = finite_size_targets(&plan).ok();
    text.push_str("# moments\n");
    text.push_str(&moments_json(&report, targets.as_ref()));
    text.push('\n');
    out.write_all(text.as_bytes()).map_err(Failure::io)?;
    out.flush().map_err(Failure::io)
}

fn cmd_oracle(model: &ModelArgs, out: &Option<PathBuf>) -> Result<(), Failure> {
    let params = model.params()?;
    let exact = exact_joint(&params).map_err(|e| Failure::Validation(e.to_string()))?;
    let mut out = open(out)?;
    out.write_all(exact.to_csv().as_bytes())
        .map_err(Failure::io)?;
    out.flush().map_err(Failure::io)
}

fn cmd_verify(only: &Option<String>, out: &Option<PathBuf>) -> Result<(), Failure> {
    let selected: Vec<_> = match only {
        Some(id) => vec![find(id).ok_or_else(|| {
            let ids: Vec<_> = CRITERIA.iter().map(|c| c.id).collect();
            Failure::Validation(format!(
                "unknown criterion `{id}`; known: {}",
                ids.join(", ")
            ))
        })?],
        None => CRITERIA.iter().collect(),
    };
    let mut out = open(out)?;
    let mut all_passed = true;
    for criterion in selected {
        let verdict = run_criterion(criterion);
        eprintln!("{}", verdict.line());
        all_passed &= verdict.passed;
        writeln!(out, "{}", verdict.to_json()).map_err(Failure::io)?;
        out.flush().map_err(Failure::io)?;
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_stirling(m: usize, out: &Option<PathBuf>) -> Result<(), Failure> {
    let row = stirling_first(m).map_err(|e| Failure::Validation(e.to_string()))?;
    let law = row.cycle_law();
    let mut text = String::from("B,stirling,probability\n");
    for b in 1..=m {
        text.push_str(&format!("{b},{},{}\n", row.get(b), fmt_f64(law[&b])));
    }
    let mut out = open(out)?;
    out.write_all(text.as_bytes()).map_err(Failure::io)?;
    out.flush().map_err(Failure::io)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Sample { model, run, format } => cmd_sample(model, run, *format),
        Command::Dist { model, run } => cmd_dist(model, run),
        Command::Oracle { model, out } => cmd_oracle(model, out),
        Command::Verify { only, out } => cmd_verify(only, out),
        Command::Stirling { m, out } => cmd_stirling(*m, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(3),
    }
}
