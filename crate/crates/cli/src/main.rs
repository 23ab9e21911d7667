use std::process::ExitCode;

use clap::Parser;
use sharpineq_cli::commands::{execute, replay, Cli, Command, Failure, Report};

fn init_pool() -> Result<(), Failure> {
    let Ok(v) = std::env::var("SHARPINEQ_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Usage(format!("SHARPINEQ_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn emit(cli: &Cli, report: &Report) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => std::fs::write(path, &report.text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{}", report.text);
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    init_pool()?;
    if let Command::Replay(args) = &cli.command {
        let text = std::fs::read_to_string(&args.file)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.file.display())))?;
        let (report, same) = replay(&text)?;
        if cli.out.is_some() {
            emit(cli, &report)?;
        }
        eprintln!("{}: {}", args.file.display(), if same { "reproduced" } else { "differs" });
        return Ok(same);
    }
    let report = execute(&cli.command, cli.config(), cli.format)?;
    emit(cli, &report)?;
    Ok(report.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(match f {
                Failure::Usage(_) => 2,
                Failure::Runtime(_) => 1,
            })
        }
    }
}
