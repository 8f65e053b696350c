use nlsbif_cli::config::Scenario;
use nlsbif_cli::{run_from_file, EXIT_CONFIG, EXIT_OK};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "usage: nlsbif <scenario> --config <path> [--out <dir>] [--workers N] [--allow-unverified]
  scenarios: trace | pitchfork | scaling | localized | reproduce_figure
  exit codes: 0 success, 2 config error, 3 numerical failure";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match parse_and_run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!("{USAGE}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}

fn parse_and_run(args: &[String]) -> Result<i32, String> {
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        println!("{USAGE}");
        return Ok(EXIT_OK);
    }
    let scenario = Scenario::parse(&args[0])
        .ok_or_else(|| format!("unknown scenario '{}'", args[0]))?;
    let mut config: Option<PathBuf> = None;
    let mut out: Option<PathBuf> = None;
    let mut workers = 2usize;
    let mut allow_unverified = false;
    let mut it = args[1..].iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => {
                config = Some(PathBuf::from(
                    it.next().ok_or("--config needs a path")?,
                ))
            }
            "--out" => out = Some(PathBuf::from(it.next().ok_or("--out needs a dir")?)),
            "--workers" => {
                workers = it
                    .next()
                    .ok_or("--workers needs a count")?
                    .parse()
                    .map_err(|e| format!("--workers: {e}"))?
            }
            "--allow-unverified" => allow_unverified = true,
            other => return Err(format!("unknown argument '{other}'")),
        }
    }
    let config = config.ok_or("missing --config <path>")?;
    match run_from_file(scenario, &config, out, workers, allow_unverified) {
        Ok((cfg, artifacts, summary)) => {
            print!("{summary}");
            println!("wrote {} artifacts to {}", artifacts.len(), cfg.output_dir.display());
            Ok(EXIT_OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(e.exit_code())
        }
    }
}
