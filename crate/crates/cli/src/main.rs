mod commands;
mod manifest;
mod params;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Arg, ArgMatches, Command};
use serde_json::{Map, Value as Json};

use commands::{CmdError, Spec, COMMANDS};
use manifest::RunDir;
use params::{read_config, ConfigError, UsageError};

/// Config keys consumed by the driver rather than a subcommand.
const GLOBAL_KEYS: [&str; 2] = ["seed", "threads"];

fn cli() -> Command {
    let mut root = Command::new("mockq")
        .about("Mock quantum mechanics of Lotka-Volterra dynamics")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(Arg::new("config").long("config").global(true).value_name("FILE").help("flat JSON object of parameters"))
        .arg(Arg::new("out").long("out").global(true).value_name("DIR").help("output directory (default: out)"))
        .arg(Arg::new("seed").long("seed").global(true).value_name("INT").help("RNG seed; else config, MOCKQ_SEED, 0"))
        .arg(Arg::new("threads").long("threads").global(true).value_name("INT").help("worker threads (default: all cores)"));
    let mut groups: Vec<(&str, Command)> = Vec::new();
    for spec in COMMANDS {
        let leaf = params::with_args(Command::new(leaf_name(spec)).about(spec.about), spec.table);
        match spec.name.split_once(' ') {
            None => root = root.subcommand(leaf),
            Some((group, _)) => match groups.iter_mut().find(|(g, _)| *g == group) {
                Some((_, cmd)) => *cmd = cmd.clone().subcommand(leaf),
                None => groups.push((group, Command::new(group.to_string()).subcommand_required(true).subcommand(leaf))),
            },
        }
    }
    for (_, cmd) in groups {
        root = root.subcommand(cmd);
    }
    root
}

fn leaf_name(spec: &Spec) -> String {
    spec.name.rsplit(' ').next().unwrap_or(spec.name).to_string()
}

/// The chosen leaf command and its matches.
fn find<'a>(m: &'a ArgMatches) -> Option<(&'static Spec, &'a ArgMatches)> {
    let (name, sub) = m.subcommand()?;
    let (full, leaf) = match sub.subcommand() {
        Some((inner, leaf)) => (format!("{name} {inner}"), leaf),
        None => (name.to_string(), sub),
    };
    COMMANDS.iter().find(|s| s.name == full).map(|s| (s, leaf))
}

enum Failure {
    Usage(String),
    Run(CmdError),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<CmdError> for Failure {
    fn from(e: CmdError) -> Self {
        Failure::Run(e)
    }
}

fn global_u64(name: &str, flag: Option<&String>, config: &Map<String, Json>) -> Result<Option<u64>, UsageError> {
    if let Some(text) = flag {
        return text
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| UsageError(format!("{name}: expected a nonnegative integer, got {text:?}")));
    }
    match config.get(name) {
        None => Ok(None),
        Some(j) => j
            .as_u64()
            .map(Some)
            .ok_or_else(|| UsageError(format!("{name}: expected a nonnegative integer, got {j}"))),
    }
}

fn execute(m: &ArgMatches) -> Result<PathBuf, Failure> {
    let (spec, leaf) = find(m).ok_or_else(|| Failure::Usage("unknown subcommand".into()))?;
    let mut config = match leaf.get_one::<String>("config") {
        None => Map::new(),
        Some(path) => match read_config(Path::new(path)) {
            Ok(c) => c,
            Err(ConfigError::Io(p, e)) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CmdError::NotFound(p).into())
            }
            Err(ConfigError::Io(p, e)) => return Err(CmdError::Io(format!("{p}: {e}")).into()),
            Err(ConfigError::Usage(u)) => return Err(u.into()),
        },
    };
    let seed = match global_u64("seed", leaf.get_one("seed"), &config)? {
        Some(s) => s,
        None => match std::env::var("MOCKQ_SEED") {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| UsageError(format!("MOCKQ_SEED: expected a nonnegative integer, got {s:?}")))?,
            Err(_) => 0,
        },
    };
    if let Some(n) = global_u64("threads", leaf.get_one("threads"), &config)? {
        if n == 0 {
            return Err(UsageError("threads: must be >= 1, got 0".into()).into());
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global();
    }
    for k in GLOBAL_KEYS {
        config.remove(k);
    }
    let params = params::resolve(spec.table, &config, leaf)?;
    let out = leaf.get_one::<String>("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
    let mut run = RunDir::create(&out).map_err(|e| CmdError::Io(format!("{}: {e}", out.display())))?;
    let started = Instant::now();
    (spec.run)(&params, seed, &mut run)?;
    let wall = started.elapsed().as_secs_f64();
    Ok(run.finish(spec.name, params.to_json(), seed, wall).map_err(CmdError::from)?)
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&matches) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("{}: {e}", e.code());
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_command_is_reachable() {
        cli().debug_assert();
        for spec in COMMANDS {
            let mut argv = vec!["mockq"];
            argv.extend(spec.name.split(' '));
            let m = cli().try_get_matches_from(&argv).unwrap();
            assert_eq!(find(&m).unwrap().0.name, spec.name);
        }
    }

    #[test]
    fn tables_have_valid_defaults() {
        for spec in COMMANDS {
            let m = params::with_args(Command::new("t"), spec.table).try_get_matches_from(["t"]).unwrap();
            params::resolve(spec.table, &Map::new(), &m).unwrap_or_else(|e| panic!("{}: {e}", spec.name));
        }
    }
}
