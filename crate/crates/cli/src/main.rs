use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use micz_lab::{exit, report, run_file, DEFAULT_OUT_DIR, OUT_ENV};

#[derive(Parser)]
#[command(name = "micz-lab", version, about = "Run integrability, reduction and separation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its summary.
    Run {
        config: PathBuf,
        /// Output directory (overrides MICZ_LAB_OUT and the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Consolidate summaries matching a glob into report.md and report.json.
    Report {
        pattern: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn env_out() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return code(if e.use_stderr() { exit::CONFIG } else { exit::PASS });
        }
    };
    match cli.command {
        Command::Run { config, out } => match run_file(&config, out.or_else(env_out).as_deref()) {
            Ok((s, path)) => {
                for c in &s.claims {
                    let v = c.value.map_or_else(|| "n/a".into(), |v| format!("{v:.3e}"));
                    println!("[{}] {} = {v} ({})", if c.passed { "PASS" } else { "FAIL" }, c.id, c.check.describe());
                }
                for e in &s.errors {
                    eprintln!("case {}: {}", e.case, e.message);
                }
                println!("summary: {}", path.display());
                code(if s.passed { exit::PASS } else { exit::CHECK_FAILED })
            }
            Err(e) => {
                eprintln!("micz-lab: {e}");
                code(e.exit_code())
            }
        },
        Command::Report { pattern, out } => {
            let paths = match report::expand(&pattern) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("micz-lab: {e}");
                    return code(e.exit_code());
                }
            };
            if paths.is_empty() {
                eprintln!("micz-lab: no summaries match `{pattern}`");
                return code(exit::CONFIG);
            }
            let rep = report::build(&paths);
            let dir = out.or_else(env_out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
            if let Err(e) = report::write(&rep, &dir) {
                eprintln!("micz-lab: {e}");
                return code(e.exit_code());
            }
            print!("{}", rep.to_markdown());
            for k in &rep.skipped {
                eprintln!("skipped {}: {}", k.path, k.reason);
            }
            code(rep.exit_code())
        }
    }
}
