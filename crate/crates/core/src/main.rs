use clap::{Parser, Subcommand};
use graphrep::cli::{exit_code, run_config, schema_text, verify, EXIT_INVARIANT, EXIT_IO, EXIT_OK, EXPERIMENTS, MANIFEST_FILE};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "graphrep", version, about = "Graphical representations of the Ising model: exact checks, samplers and experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a configuration file.
    Run {
        config: PathBuf,
        /// Output directory for the CSV files and the manifest.
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-execute a manifest and byte-compare its outputs.
    Verify { manifest: PathBuf },
    /// List the available experiments.
    ListExperiments,
    /// Print the configuration grammar and every documented key.
    PrintSchema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run { config, out } => match std::fs::read_to_string(&config) {
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", config.display());
                EXIT_IO
            }
            Ok(text) => match run_config(&text, &out) {
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    exit_code(&e)
                }
                Ok(rep) => {
                    for o in &rep.manifest.outputs {
                        println!("wrote {}", rep.dir.join(&o.file).display());
                    }
                    println!("wrote {}", rep.dir.join(MANIFEST_FILE).display());
                    if rep.manifest.breaches.is_empty() {
                        EXIT_OK
                    } else {
                        for b in &rep.manifest.breaches {
                            eprintln!("invariant breach: {b}");
                        }
                        EXIT_INVARIANT
                    }
                }
            },
        },
        Cmd::Verify { manifest } => match verify(&manifest) {
            Err(e) => {
                eprintln!("error: {}: {e}", manifest.display());
                exit_code(&e)
            }
            Ok(rep) => {
                rep.lines().iter().for_each(|l| println!("{l}"));
                if rep.all_match() {
                    EXIT_OK
                } else {
                    eprintln!("invariant breach: reproducible_outputs");
                    EXIT_INVARIANT
                }
            }
        },
        Cmd::ListExperiments => {
            for (name, doc) in EXPERIMENTS {
                println!("{name:<13} {doc}");
            }
            EXIT_OK
        }
        Cmd::PrintSchema => {
            print!("{}", schema_text());
            EXIT_OK
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
