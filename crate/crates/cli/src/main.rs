use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use famsynth::family::{induce, Family, Realization};
use famsynth::io::{ce_quality_report, generate_benchmark, parse_sketch, parse_spec, serialize_sketch, ReportMode};
use famsynth::numerics::{evaluate, mc_reach_exact, Bound, Direction, Property, Specification, Tolerances, Verdict};
use famsynth::synthesis::{synthesize, BoundsMode, CostUnits, Method, Outcome, SynthesisConfig, SynthesisResult};
use famsynth::Error;

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "famsynth", version, about = "Synthesis over families of Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a member satisfying (or optimizing) a specification.
    Synth(SynthArgs),
    /// Benchmark utilities.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// Report conflict sizes for every violating member.
    CeReport(ReportArgs),
}

#[derive(clap::Args)]
struct SynthArgs {
    #[arg(long)]
    sketch: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Hybrid)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = BoundsArg::Family)]
    bounds: BoundsArg,
    /// Recompute the witness values with a direct linear solve.
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum, default_value_t = CostArg::Deterministic)]
    cost_units: CostArg,
    /// Recorded in the output; the search itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Write a seeded random sketch.
    Gen {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        params: usize,
        #[arg(long)]
        domain: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(long)]
    sketch: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value_t = BoundsArg::Family)]
    mode: BoundsArg,
    /// Also compute a minimum conflict by exhaustive search.
    #[arg(long)]
    minimal_oracle: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Onebyone,
    Cegis,
    Ar,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundsArg {
    Trivial,
    Family,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostArg {
    Deterministic,
    Wallclock,
}

enum Failure {
    Input(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource_cap() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(sketch: &Path, spec: &Path) -> Result<(Family, Specification), Failure> {
    let family = parse_sketch(&read(sketch)?).map_err(|e| Failure::Input(format!("{}: {e}", sketch.display())))?;
    let spec = parse_spec(&read(spec)?, &family).map_err(|e| Failure::Input(format!("{}: {e}", spec.display())))?;
    Ok((family, spec))
}

fn targets_text(family: &Family, targets: &[usize]) -> String {
    let names: Vec<&str> = targets.iter().map(|&t| family.state_name(t)).collect();
    names.join(" ")
}

fn property_text(family: &Family, p: &Property) -> String {
    let op = match p.bound {
        Bound::AtMost => "<=",
        Bound::AtLeast => ">=",
    };
    format!("P{op}{} [F {}]", p.threshold, targets_text(family, &p.targets))
}

fn realization_json(family: &Family, r: &Realization) -> Value {
    let map: Map<String, Value> = (0..family.num_params())
        .map(|k| (family.param_name(k).to_string(), json!(family.state_name(r.value(k)))))
        .collect();
    Value::Object(map)
}

fn synth(args: SynthArgs) -> Result<u8, Failure> {
    let (family, spec) = load(&args.sketch, &args.spec)?;
    let config = SynthesisConfig {
        tolerances: Tolerances::from_env(),
        bounds: match args.bounds {
            BoundsArg::Trivial => BoundsMode::Trivial,
            BoundsArg::Family => BoundsMode::Family,
        },
        cost_units: match args.cost_units {
            CostArg::Deterministic => CostUnits::Deterministic,
            CostArg::Wallclock => CostUnits::WallClock,
        },
        ..SynthesisConfig::default()
    };
    let method = match args.method {
        MethodArg::Onebyone => Method::OneByOne,
        MethodArg::Cegis => Method::Cegis,
        MethodArg::Ar => Method::Ar,
        MethodArg::Hybrid => Method::Hybrid,
    };
    let SynthesisResult { outcome, stats } = synthesize(&family, &spec, method, &config)?;

    let verdict = match outcome {
        Outcome::Feasible { .. } => "feasible",
        Outcome::Infeasible => "infeasible",
        Outcome::Optimal { .. } => "optimal",
    };
    let mut values: Vec<(String, f64)> = Vec::new();
    let mut objective: Option<f64> = None;
    let mut certified: Option<bool> = None;
    if let Some(r) = outcome.realization() {
        let mc = induce(&family, r)?;
        let reach = |targets: &[usize]| -> Result<f64, Failure> {
            if args.exact {
                Ok(mc_reach_exact(&mc, targets)?[mc.initial()])
            } else {
                Ok(famsynth::numerics::mc_reach(&mc, targets, config.tolerances.tol)?[mc.initial()])
            }
        };
        let mut all_sat = true;
        for p in &spec.properties {
            let v = reach(&p.targets)?;
            all_sat &= evaluate(v, p, config.tolerances.eta) == Verdict::Sat;
            values.push((property_text(&family, p), v));
        }
        if let Some(o) = &spec.objective {
            objective = Some(reach(&o.targets)?);
        }
        if args.exact {
            certified = Some(all_sat);
        }
    }

    if args.json {
        let out = json!({
            "verdict": verdict,
            "realization": outcome.realization().map(|r| realization_json(&family, r)),
            "values": values.iter().map(|(p, v)| json!({"property": p, "value": v})).collect::<Vec<_>>(),
            "objective": objective,
            "certified": certified,
            "iterations": {"cegis": stats.cegis_iterations, "ar": stats.ar_iterations},
            "model_checks": stats.model_checks,
            "conflicts": stats.conflicts,
            "pruned": stats.pruned.to_string(),
            "checked": stats.checked.to_string(),
            "wall_time": stats.wall_time_secs,
            "seed": args.seed,
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("json values serialize"));
    } else {
        println!("verdict: {verdict}");
        if let Some(r) = outcome.realization() {
            println!("realization: {}", family.display_realization(r));
        }
        for (p, v) in &values {
            println!("{p}: {v}");
        }
        if let (Some(o), Some(v)) = (&spec.objective, objective) {
            let dir = match o.direction {
                Direction::Min => "min",
                Direction::Max => "max",
            };
            println!("{dir} P [F {}]: {v}", targets_text(&family, &o.targets));
        }
        if let Some(c) = certified {
            println!("exact check: {}", if c { "passed" } else { "FAILED" });
        }
        println!(
            "iterations: cegis {}, ar {}; model checks {}; {:.3} s",
            stats.cegis_iterations, stats.ar_iterations, stats.model_checks, stats.wall_time_secs
        );
    }
    Ok(if outcome.is_feasible() { 0 } else { EXIT_INFEASIBLE })
}

fn bench(command: BenchCommand) -> Result<u8, Failure> {
    let BenchCommand::Gen {
        states,
        params,
        domain,
        seed,
        output,
    } = command;
    let family = generate_benchmark(states, params, domain, seed)?;
    fs::write(&output, serialize_sketch(&family)).map_err(|e| Failure::Input(format!("{}: {e}", output.display())))?;
    Ok(0)
}

fn ce_report(args: ReportArgs) -> Result<u8, Failure> {
    let (family, spec) = load(&args.sketch, &args.spec)?;
    let mode = match args.mode {
        BoundsArg::Trivial => ReportMode::Trivial,
        BoundsArg::Family => ReportMode::Family,
    };
    let report = ce_quality_report(&family, &spec, mode, args.minimal_oracle, Tolerances::from_env())?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print!("{}", report.to_text());
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => synth(args),
        Command::Bench { command } => bench(command),
        Command::CeReport(args) => ce_report(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("resource limit: {msg}");
            ExitCode::from(EXIT_RESOURCE)
        }
    }
}
