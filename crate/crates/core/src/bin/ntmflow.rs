use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ntmflow::bundle::{parse_segment, CounterexampleBundle, StateSelection};
use ntmflow::commodity::build_tcon_graphs;
use ntmflow::decider::{analyze, decide, format_decision, DeciderConfig};
use ntmflow::difftest::{compare_verdicts, run_difftest, DifftestConfig, VerdictComparison};
use ntmflow::dot::{cfg_dot, seqgraph_dot};
use ntmflow::lp::{build_tcpelp, SolveLimits};
use ntmflow::machine::{parse_machine, MachineSpec, Symbol};
use ntmflow::oracle::{format_oracle, oracle_decide};
use ntmflow::random::MachineBounds;
use ntmflow::seqgraph::build_seq_graph;
use ntmflow::Error;

#[derive(Parser)]
#[command(name = "ntmflow", version, about = "Decide NTM acceptance through step graphs and flow programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Lp,
    Oracle,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    Seqgraph,
    Cfg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    #[value(name = "F")]
    F,
    Any,
}

impl From<SetArg> for StateSelection {
    fn from(s: SetArg) -> Self {
        match s {
            SetArg::F => StateSelection::Accepting,
            SetArg::Any => StateSelection::Any,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the decider and print its report
    Decide {
        machine: PathBuf,
        word: String,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
        step_cap: u32,
        #[arg(long, value_enum, default_value = "lp")]
        mode: Mode,
        #[arg(long, default_value_t = SolveLimits::default().max_variables)]
        max_vars: usize,
    },
    /// Breadth-first simulation only
    Oracle {
        machine: PathBuf,
        word: String,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
        step_cap: u32,
    },
    /// Write the step graph or the control-flow graph as DOT
    ExportGraph {
        machine: PathBuf,
        word: String,
        #[arg(long, value_enum)]
        stage: Stage,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        mu: u32,
        #[arg(long, value_enum, default_value = "F")]
        set: SetArg,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Write the linear system for one window
    DumpLp {
        machine: PathBuf,
        word: String,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        mu: u32,
        #[arg(long, value_enum)]
        set: SetArg,
        #[arg(long, value_parser = parse_seg_arg, allow_hyphen_values = true)]
        seg: (i64, i64),
        #[arg(long, default_value_t = SolveLimits::default().max_variables)]
        max_vars: usize,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Compare the decider with simulation on random machines
    Difftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        machines: usize,
        #[arg(long, default_value_t = 3)]
        max_input_len: usize,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
        mu: u32,
        #[arg(long, default_value_t = 4)]
        max_states: usize,
        #[arg(long, default_value_t = 3)]
        max_symbols: usize,
        #[arg(long, default_value_t = 8)]
        max_transitions: usize,
        #[arg(long, default_value_t = DifftestConfig::default().limits.max_variables)]
        max_vars: usize,
        /// Directory for the report and one bundle per disagreement
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Re-run a counterexample bundle and check it still disagrees
    Replay {
        bundle: PathBuf,
        #[arg(long, default_value_t = SolveLimits::default().max_variables)]
        max_vars: usize,
    },
}

fn parse_seg_arg(s: &str) -> Result<(i64, i64), String> {
    parse_segment(s).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Capacity(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_capacity() {
            Failure::Capacity(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn load(machine: &Path, word: &str) -> Result<(MachineSpec, Vec<Symbol>), Failure> {
    let text = fs::read_to_string(machine)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", machine.display())))?;
    let m = parse_machine(&text).map_err(|e| Failure::Usage(format!("{}: {e}", machine.display())))?;
    let x = m.parse_word(word)?;
    Ok((m, x))
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Exit status 3 means the run completed and found counterexamples.
fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Decide {
            machine,
            word,
            step_cap,
            mode,
            max_vars,
        } => {
            let (m, x) = load(&machine, &word)?;
            let config = DeciderConfig {
                step_cap,
                limits: SolveLimits { max_variables: max_vars },
                parallel: true,
            };
            let mut out = String::new();
            let lp = match mode {
                Mode::Lp | Mode::Both => {
                    let d = decide(&m, &x, config)?;
                    out.push_str(&format_decision(&m, &d));
                    Some(d.verdict)
                }
                Mode::Oracle => None,
            };
            if let Mode::Oracle | Mode::Both = mode {
                let o = oracle_decide(&m, &x, step_cap);
                out.push_str(&format_oracle(&m, &o));
                if let Some(v) = lp {
                    let agree = compare_verdicts(v, o.verdict) == VerdictComparison::Agree;
                    out.push_str(&format!("AGREE {agree}\n"));
                }
            }
            print!("{out}");
            Ok(0)
        }
        Command::Oracle { machine, word, step_cap } => {
            let (m, x) = load(&machine, &word)?;
            print!("{}", format_oracle(&m, &oracle_decide(&m, &x, step_cap)));
            Ok(0)
        }
        Command::ExportGraph {
            machine,
            word,
            stage,
            mu,
            set,
            output,
        } => {
            let (m, x) = load(&machine, &word)?;
            let g = build_seq_graph(&m, &x, mu);
            let text = match stage {
                Stage::Seqgraph => seqgraph_dot(&g, &m),
                Stage::Cfg => {
                    let a = analyze(&g, &m, &x, &StateSelection::from(set).states(&m));
                    cfg_dot(&a.cfg, &m)
                }
            };
            emit(&output, &text)?;
            Ok(0)
        }
        Command::DumpLp {
            machine,
            word,
            mu,
            set,
            seg,
            max_vars,
            output,
        } => {
            let (m, x) = load(&machine, &word)?;
            let g = build_seq_graph(&m, &x, mu);
            let a = analyze(&g, &m, &x, &StateSelection::from(set).states(&m));
            let r = a.cfg.range();
            if seg.0 < r.left || seg.1 > r.right {
                return Err(Failure::Usage(format!(
                    "window {}:{} is outside the tape range {}:{}",
                    seg.0, seg.1, r.left, r.right
                )));
            }
            let tcon = build_tcon_graphs(&a.commodities, seg);
            let p = build_tcpelp(&a.cfg, &a.commodities, &tcon, seg, max_vars)?;
            emit(&output, &p.system.to_lp_text())?;
            Ok(0)
        }
        Command::Difftest {
            seed,
            machines,
            max_input_len,
            mu,
            max_states,
            max_symbols,
            max_transitions,
            max_vars,
            output,
        } => {
            if max_states < 1 || max_symbols < 2 || max_transitions < 1 {
                return Err(Failure::Usage(
                    "machine bounds must be at least 1 state, 2 symbols and 1 transition".into(),
                ));
            }
            let config = DifftestConfig {
                machines,
                seed,
                max_input_len,
                mu_cap: mu,
                bounds: MachineBounds::new(max_states, max_symbols, max_transitions),
                limits: SolveLimits { max_variables: max_vars },
                bundle_dir: output.clone(),
            };
            let report = run_difftest(&config)?;
            let text = report.to_text();
            if let Some(dir) = &output {
                fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
                fs::write(dir.join("report.txt"), &text)
                    .map_err(|e| Failure::Usage(format!("cannot write report: {e}")))?;
            }
            print!("{text}");
            Ok(if report.all_agree() { 0 } else { 3 })
        }
        Command::Replay { bundle, max_vars } => {
            let b = CounterexampleBundle::read(&bundle)?;
            let r = b.replay(SolveLimits { max_variables: max_vars })?;
            let shown = r.direction.map_or("agree".to_string(), |d| d.to_string());
            println!("RECORDED {}", b.direction);
            println!("REPLAYED {shown}");
            println!("IDENTICAL {}", r.identical);
            if let Some(v) = r.certificate_valid {
                println!("CERTIFICATE_VALID {v}");
            }
            println!("REPRODUCES {}", r.reproduces(&b));
            Ok(if r.reproduces(&b) { 3 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match run(cli) {
        Ok(c) => c,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Capacity(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}
