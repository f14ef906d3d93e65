use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use marble_core::analysis::{
    bits_string, enumerate, timing_lint, verify_gate, GateReport, DEFAULT_ARITY_CAP,
};
use marble_core::gates::library;
use marble_core::netlist::{
    elaborate, has_errors, parse, print_canonical, validate, Circuit, CircuitAst, ElaborateOptions,
    Severity, SyncPolicy,
};
use marble_core::physics::{parse_physics_config, PhysicsConfig};
use marble_core::sim::{simulate, HazardKind, SimConfig};
use marble_core::{CollisionMode, NodeKind};

/// Simulate and verify liquid-marble logic circuits.
#[derive(Debug, Parser)]
#[command(name = "marble", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one input vector and print the outputs and the marble ledger.
    Run(RunArgs),
    /// Print the simulated truth table, rows in binary-counting order.
    Table(TableArgs),
    /// Check library gates exhaustively against their reference functions.
    Verify(VerifyArgs),
    /// Report netlist errors and junctions fed off their firing phase.
    Lint(LintArgs),
    /// Print a netlist in canonical form.
    Print(PrintArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeFlag {
    Bounce,
    Merge,
    /// Decide from the physics configuration.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    /// One `key=value` record per line.
    Records,
}

#[derive(Debug, Args)]
struct ModeArgs {
    /// Collision mode at every junction.
    #[arg(long, value_enum, default_value_t = ModeFlag::Bounce)]
    mode: ModeFlag,
    /// Physics configuration file (key=value lines) used by `--mode auto`.
    /// MARBLE_PHYSICS, when set, takes precedence.
    #[arg(long, value_name = "FILE")]
    physics: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Netlist file or built-in gate name.
    circuit: String,
    /// Input bits, first circuit input leftmost (e.g. 010).
    #[arg(long)]
    inputs: String,
    #[command(flatten)]
    mode: ModeArgs,
    /// Print every simulation event before the outputs.
    #[arg(long)]
    trace: bool,
    /// Fail instead of warning when a marble reaches a junction off phase.
    #[arg(long)]
    strict_timing: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Netlist file or built-in gate name.
    circuit: String,
    #[command(flatten)]
    mode: ModeArgs,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Built-in gate name.
    #[arg(required_unless_present = "all", conflicts_with = "all")]
    gate: Option<String>,
    /// Verify every gate in the library.
    #[arg(long)]
    all: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct LintArgs {
    /// Netlist file or built-in gate name.
    circuit: String,
    /// Lint the circuit as written, without inserting synchronizing holds.
    #[arg(long)]
    no_repair: bool,
}

#[derive(Debug, Args)]
struct PrintArgs {
    /// Netlist file or built-in gate name.
    circuit: String,
    /// Print the flattened primitive circuit, holds included.
    #[arg(long)]
    elaborated: bool,
}

/// A parsed netlist together with a label for diagnostics.
struct Source {
    label: String,
    ast: CircuitAst,
}

fn load(spec: &str) -> Result<Source> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        let ast = parse(&text).map_err(|e| anyhow!("{spec}:{e}"))?;
        return Ok(Source {
            label: spec.to_string(),
            ast,
        });
    }
    match library().get(spec) {
        Some(m) => Ok(Source {
            label: m.name.clone(),
            ast: m.expansion.clone(),
        }),
        None if spec.ends_with(".net") => bail!("cannot read netlist {spec}"),
        None => bail!("unknown gate `{spec}` (not a file either)"),
    }
}

fn build(src: &Source, sync: SyncPolicy) -> Result<Circuit> {
    let diags = validate(&src.ast, library());
    if has_errors(&diags) {
        let lines: Vec<String> = diags
            .iter()
            .map(|d| format!("{}: {d}", src.label))
            .collect();
        bail!("{}", lines.join("\n"));
    }
    elaborate(&src.ast, library(), ElaborateOptions { sync })
        .map_err(|e| anyhow!("{}: {e}", src.label))
}

fn physics_config(flag: Option<&Path>) -> Result<PhysicsConfig> {
    let env = std::env::var_os("MARBLE_PHYSICS").map(PathBuf::from);
    match env.as_deref().or(flag) {
        None => Ok(PhysicsConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_physics_config(&text).map_err(|e| anyhow!("{}: {e}", p.display()))
        }
    }
}

fn resolve_mode(args: &ModeArgs) -> Result<CollisionMode> {
    match args.mode {
        ModeFlag::Bounce => Ok(CollisionMode::Bounce),
        ModeFlag::Merge => Ok(CollisionMode::Merge),
        ModeFlag::Auto => {
            let decision = physics_config(args.physics.as_deref())?.decide()?;
            if let Some(d) = decision.diagnostic {
                eprintln!("{d}");
            }
            Ok(decision.mode)
        }
    }
}

fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => bail!("input bits must be 0 or 1, got `{c}`"),
        })
        .collect()
}

fn bit(b: bool) -> u8 {
    b as u8
}

fn cmd_run(a: &RunArgs) -> Result<bool> {
    let src = load(&a.circuit)?;
    let circuit = build(&src, SyncPolicy::Repair)?;
    let input = parse_bits(&a.inputs)?;
    let mode = resolve_mode(&a.mode)?;
    let cfg = SimConfig {
        strict_timing: a.strict_timing,
        trace_enabled: a.trace,
        ..SimConfig::new(mode)
    };
    let r = simulate(&circuit, &input, cfg)?;
    let mut out = String::new();
    let names = circuit.output_names();
    match a.format {
        Format::Text => {
            if a.trace {
                out.push_str(&r.trace.render(&circuit));
            }
            let pairs: Vec<String> = names
                .iter()
                .zip(&r.outputs)
                .map(|(n, &b)| format!("{n}={}", bit(b)))
                .collect();
            writeln!(out, "{}", pairs.join(" "))?;
            writeln!(out, "ledger: {}", r.ledger)?;
        }
        Format::Records => {
            if a.trace {
                for e in &r.trace.events {
                    writeln!(
                        out,
                        "event phase={} node={} port={} marble={} mass={} kind={}",
                        e.phase,
                        circuit.node(e.node).name,
                        e.port,
                        e.marble.id,
                        e.marble.mass,
                        e.kind.as_str()
                    )?;
                }
            }
            for (n, &b) in names.iter().zip(&r.outputs) {
                writeln!(out, "output name={n} bit={}", bit(b))?;
            }
            let l = &r.ledger;
            writeln!(
                out,
                "ledger in={} const={} injected={} out={} waste={} mass_in={} mass_injected={} mass_out={} mass_waste={}",
                l.input_marbles,
                l.const_marbles,
                l.injected,
                l.output_marbles,
                l.waste_marbles,
                l.input_mass,
                l.injected_mass,
                l.output_mass,
                l.waste_mass
            )?;
        }
    }
    print!("{out}");
    for h in &r.hazards {
        let node = &circuit.node(h.node).name;
        match h.kind {
            HazardKind::OffPhase { expected } => eprintln!(
                "warning: marble reached {node} at phase {}, node fires at phase {expected}",
                h.phase
            ),
            HazardKind::JoinCoalescence { marbles } => {
                eprintln!(
                    "warning: {marbles} marbles coalesced at join {node} in phase {}",
                    h.phase
                )
            }
        }
    }
    Ok(true)
}

fn cmd_table(a: &TableArgs) -> Result<bool> {
    let src = load(&a.circuit)?;
    let circuit = build(&src, SyncPolicy::Repair)?;
    let mode = resolve_mode(&a.mode)?;
    let e = enumerate(&circuit, mode, DEFAULT_ARITY_CAP)?;
    match a.format {
        Format::Text => print!(
            "{}",
            e.table
                .render(&circuit.input_names(), &circuit.output_names())
        ),
        Format::Records => {
            for (i, row) in e.table.rows.iter().enumerate() {
                println!(
                    "row in={} out={} injected={} waste={}",
                    bits_string(&e.table.input(i)),
                    bits_string(row),
                    e.ledgers[i].injected,
                    e.ledgers[i].waste_marbles
                );
            }
        }
    }
    Ok(true)
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    let names: Vec<String> = match &a.gate {
        Some(g) => vec![g.clone()],
        None => library().names().map(String::from).collect(),
    };
    // Gates are independent; verify them side by side and report in order.
    let reports: Vec<Result<GateReport>> = thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|n| s.spawn(move || verify_gate(n).map_err(anyhow::Error::from)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verifier panicked"))
            .collect()
    });
    let mut passed = 0;
    for r in &reports {
        let r = match r {
            Ok(r) => r,
            Err(e) => bail!("{e}"),
        };
        match a.format {
            Format::Text => print!("{}", r.render_text()),
            Format::Records => print!("{}", r.render_records()),
        }
        passed += r.pass() as usize;
    }
    if a.all {
        match a.format {
            Format::Text => println!("{passed}/{} gates pass", reports.len()),
            Format::Records => println!("summary passed={passed} total={}", reports.len()),
        }
    }
    Ok(passed == reports.len())
}

fn cmd_lint(a: &LintArgs) -> Result<bool> {
    let src = load(&a.circuit)?;
    let diags = validate(&src.ast, library());
    for d in &diags {
        println!("{}: {d}", src.label);
    }
    if has_errors(&diags) {
        return Ok(false);
    }
    let sync = if a.no_repair {
        SyncPolicy::Off
    } else {
        SyncPolicy::Repair
    };
    let circuit = build(&src, sync)?;
    for n in &circuit.nodes {
        if let NodeKind::EmHold { phases } = n.kind {
            if n.name.ends_with(".hold") {
                println!("{}: note: inserted {} ({phases} phases)", src.label, n.name);
            }
        }
    }
    let lint = timing_lint(&circuit);
    for v in &lint {
        println!("{}: {}", src.label, v.diagnostic());
    }
    let clean = lint.is_empty() && !diags.iter().any(|d| d.severity == Severity::Error);
    if clean {
        println!("{}: ok", src.label);
    }
    Ok(clean)
}

fn cmd_print(a: &PrintArgs) -> Result<bool> {
    let src = load(&a.circuit)?;
    if a.elaborated {
        let circuit = build(&src, SyncPolicy::Repair)?;
        print!("{}", print_canonical(&circuit.to_ast()));
    } else {
        print!("{}", print_canonical(&src.ast));
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Table(a) => cmd_table(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Lint(a) => cmd_lint(a),
        Command::Print(a) => cmd_print(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
