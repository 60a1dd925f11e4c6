use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use planar_workbench::output::{
    pressure_csv, render_classify, render_equilibrium, render_example1, render_multicone, render_pressure,
    state_bands_csv, write_json, write_text,
};
use planar_workbench::{
    load_config, run_classify, run_equilibrium, run_example1, run_multicone, run_pressure, success_code, JobConfig,
    WorkbenchError,
};

/// Domination, pressure and equilibrium-state analysis for tuples of 2×2
/// matrices.
#[derive(Parser)]
#[command(name = "planar-workbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    job: JobArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the equilibrium states of the norm potential.
    Classify,
    /// Bracket the pressure by word enumeration.
    Pressure,
    /// Construct the equilibrium states and their ratio bands.
    Equilibrium,
    /// Search for strongly invariant and invariant unstable multicones.
    Multicone,
    /// Classify the three built-in example tuples and check their classes.
    Example1,
}

#[derive(Args)]
struct JobArgs {
    /// JSON job file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Enumeration depth.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Depth of reported cylinder measures.
    #[arg(long, global = true)]
    cylinder_depth: Option<usize>,
    /// Exponent of the norm potential.
    #[arg(long, global = true, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Seed for sampled shadowing words.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report as JSON.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Write the pressure table or ratio bands as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

impl JobArgs {
    fn apply(&self, cfg: &mut JobConfig) -> Result<(), WorkbenchError> {
        if let Some(d) = self.depth {
            cfg.depths.enum_depth = d;
        }
        if let Some(k) = self.cylinder_depth {
            cfg.depths.cylinder_depth = k;
        }
        if let Some(s) = self.s {
            cfg.s = s;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if self.json.is_some() {
            cfg.output.json.clone_from(&self.json);
        }
        if self.csv.is_some() {
            cfg.output.csv.clone_from(&self.csv);
        }
        cfg.validate()
    }

    fn load(&self) -> Result<JobConfig, WorkbenchError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| WorkbenchError::Parse("--config PATH is required".into()))?;
        let mut cfg = load_config(path)?;
        self.apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<u8, WorkbenchError> {
    if let Command::Example1 = cli.command {
        return example1(&cli.job);
    }
    let cfg = cli.job.load()?;
    let (text, inconclusive) = match cli.command {
        Command::Classify => {
            let r = run_classify(&cfg)?;
            write_outputs(&cfg, &r, Some(state_bands_csv(&r.equilibrium)?))?;
            (render_classify(&r), r.inconclusive())
        }
        Command::Pressure => {
            let r = run_pressure(&cfg)?;
            write_outputs(&cfg, &r, Some(pressure_csv(&r.bounds)?))?;
            (render_pressure(&r), false)
        }
        Command::Equilibrium => {
            let r = run_equilibrium(&cfg)?;
            write_outputs(&cfg, &r, Some(state_bands_csv(&r.states)?))?;
            (render_equilibrium(&r), r.inconclusive())
        }
        Command::Multicone => {
            let r = run_multicone(&cfg)?;
            write_outputs(&cfg, &r, None)?;
            (render_multicone(&r), r.inconclusive())
        }
        Command::Example1 => unreachable!(),
    };
    print!("{text}");
    Ok(success_code(inconclusive))
}

/// Writes the JSON report and, when requested, the CSV table.
fn write_outputs<T: serde::Serialize>(cfg: &JobConfig, report: &T, csv: Option<String>) -> Result<(), WorkbenchError> {
    if let Some(p) = &cfg.output.json {
        write_json(p, report)?;
    }
    match (&cfg.output.csv, csv) {
        (Some(p), Some(table)) => write_text(p, &table),
        (Some(_), None) => Err(WorkbenchError::Parse("this command has no table to write as CSV".into())),
        (None, _) => Ok(()),
    }
}

fn example1(args: &JobArgs) -> Result<u8, WorkbenchError> {
    let template = match &args.config {
        Some(_) => args.load()?,
        None => {
            let mut c = JobConfig::new(&[[1.0, 0.0, 0.0, 1.0]], 1.0)?;
            args.apply(&mut c)?;
            c
        }
    };
    if template.output.csv.is_some() {
        return Err(WorkbenchError::Parse("example1 has no table to write as CSV".into()));
    }
    let report = run_example1(template.s, template.depths, template.budgets, template.seed)?;
    print!("{}", render_example1(&report));
    if let Some(p) = &template.output.json {
        write_json(p, &report)?;
    }
    if !report.all_match() {
        return Err(WorkbenchError::Mismatch(
            report
                .cases
                .iter()
                .filter(|c| !c.matches)
                .map(|c| format!("{} is {}, expected {}", c.name, c.report.classification.class.name(), c.expected.name()))
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    Ok(success_code(report.inconclusive()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
