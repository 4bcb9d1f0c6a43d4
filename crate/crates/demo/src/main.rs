use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use easel::backend::HeadlessBackend;
use easel_demo::{Demo, Inputs, Script, ScriptBackend, Session};
use easel_term::{run_interactive, TerminalBackend, TerminalError};

#[derive(Parser)]
#[command(name = "easel", version, about = "Example programs for the easel GUI library")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one of the example programs
    Demo(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    Counter,
    Counters,
    Goodbye,
    Tracker,
}

impl From<DemoName> for Demo {
    fn from(d: DemoName) -> Demo {
        match d {
            DemoName::Counter => Demo::Counter,
            DemoName::Counters => Demo::Counters,
            DemoName::Goodbye => Demo::Goodbye,
            DemoName::Tracker => Demo::Tracker,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Headless,
    Terminal,
}

#[derive(Args)]
struct DemoArgs {
    name: DemoName,
    /// Defaults to terminal when attached to one, headless otherwise
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// Event script to run against the demo
    #[arg(long)]
    script: Option<PathBuf>,
    /// Write the backend call log here when the demo ends
    #[arg(long)]
    dump_log: Option<PathBuf>,
    /// Hand views derived copies of every input observable
    #[arg(long)]
    derived_inputs: bool,
}

const USAGE_ERROR: u8 = 2;

fn main() -> ExitCode {
    let Cmd::Demo(args) = Cli::parse().command;
    let demo = Demo::from(args.name);
    let inputs = if args.derived_inputs { Inputs::Derived } else { Inputs::Roots };
    let interactive = std::io::stdin().is_terminal() && std::io::stdout().is_terminal();
    let backend = args.backend.unwrap_or(if interactive {
        BackendKind::Terminal
    } else {
        BackendKind::Headless
    });
    let script = match &args.script {
        None => None,
        Some(path) => match load_script(path) {
            Ok(s) => Some(s),
            Err(msg) => {
                eprintln!("easel: {msg}");
                return ExitCode::from(USAGE_ERROR);
            }
        },
    };
    let dump = args.dump_log.as_deref();
    match (backend, script) {
        (BackendKind::Headless, script) => {
            scripted(demo, inputs, HeadlessBackend::new(), &script.unwrap_or_default(), dump)
        }
        (BackendKind::Terminal, Some(script)) => scripted(demo, inputs, TerminalBackend::new(), &script, dump),
        (BackendKind::Terminal, None) => interactive_run(demo, inputs, dump),
    }
}

fn load_script(path: &Path) -> Result<Script, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Script::parse(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_dump(path: Option<&Path>, log: &str) -> Result<(), ExitCode> {
    if let Some(path) = path {
        if let Err(e) = std::fs::write(path, log) {
            eprintln!("easel: cannot write {}: {e}", path.display());
            return Err(ExitCode::from(USAGE_ERROR));
        }
    }
    Ok(())
}

fn scripted<B: ScriptBackend>(demo: Demo, inputs: Inputs, backend: B, script: &Script, dump: Option<&Path>) -> ExitCode {
    let session = match Session::start(demo, inputs, backend) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("easel: cannot render {demo}: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    let outcome = session.run(script);
    if let Err(code) = write_dump(dump, &session.backend.dump_log()) {
        return code;
    }
    match outcome {
        Err(e) => {
            eprintln!("easel: script error: {e}");
            ExitCode::from(USAGE_ERROR)
        }
        Ok(outcome) => {
            print!("{}", outcome.report);
            if outcome.closed_by_app {
                println!("window closed");
            }
            if outcome.report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn interactive_run(demo: Demo, inputs: Inputs, dump: Option<&Path>) -> ExitCode {
    let session = match Session::start(demo, inputs, TerminalBackend::new()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("easel: cannot render {demo}: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    let result = run_interactive(&session.renderer, &session.root, &session.backend);
    session.root.teardown();
    if let Err(code) = write_dump(dump, &session.backend.dump_log()) {
        return code;
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(TerminalError::TerminalUnavailable) => {
            eprintln!("easel: no interactive terminal; use --backend headless");
            ExitCode::from(USAGE_ERROR)
        }
        Err(e) => {
            eprintln!("easel: {e}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
