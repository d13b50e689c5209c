//! Typed parameter tables shared by flag parsing, config files and the manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::{Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Real,
    Int,
    Bool,
    Path,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    Any,
    Positive,
    NonNegative,
    /// Integer at least this large.
    AtLeast(i64),
}

impl Check {
    fn describe(self) -> String {
        match self {
            Check::Any => "any finite value".into(),
            Check::Positive => "> 0".into(),
            Check::NonNegative => ">= 0".into(),
            Check::AtLeast(n) => format!(">= {n}"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub name: &'static str,
    pub kind: Kind,
    /// Default in the same text form a flag would take; `None` means required
    /// unless the command treats it as optional.
    pub default: Option<&'static str>,
    pub check: Check,
    pub help: &'static str,
}

pub const fn real(name: &'static str, default: &'static str, check: Check, help: &'static str) -> Param {
    Param { name, kind: Kind::Real, default: Some(default), check, help }
}

pub const fn int(name: &'static str, default: &'static str, check: Check, help: &'static str) -> Param {
    Param { name, kind: Kind::Int, default: Some(default), check, help }
}

pub const fn choice(name: &'static str, options: &'static [&'static str], default: &'static str, help: &'static str) -> Param {
    Param { name, kind: Kind::Choice(options), default: Some(default), check: Check::Any, help }
}

pub const fn path(name: &'static str, help: &'static str) -> Param {
    Param { name, kind: Kind::Path, default: None, check: Check::Any, help }
}

pub const fn flag(name: &'static str, help: &'static str) -> Param {
    Param { name, kind: Kind::Bool, default: Some("false"), check: Check::Any, help }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Value {
    pub fn to_json(&self) -> Json {
        match self {
            Value::Real(x) => serde_json::Number::from_f64(*x).map(Json::Number).unwrap_or(Json::Null),
            Value::Int(n) => Json::from(*n),
            Value::Bool(b) => Json::from(*b),
            Value::Text(s) => Json::from(s.as_str()),
        }
    }
}

/// Bad flag or config value; reported with exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn kind_name(kind: Kind) -> String {
    match kind {
        Kind::Real => "a real number".into(),
        Kind::Int => "an integer".into(),
        Kind::Bool => "a boolean".into(),
        Kind::Path => "a file path".into(),
        Kind::Choice(opts) => format!("one of {}", opts.join("|")),
    }
}

fn parse_text(p: &Param, text: &str) -> Result<Value, UsageError> {
    let bad = || UsageError(format!("{}: expected {}, got {text:?}", p.name, kind_name(p.kind)));
    let v = match p.kind {
        Kind::Real => Value::Real(text.trim().parse::<f64>().map_err(|_| bad())?),
        Kind::Int => Value::Int(text.trim().parse::<i64>().map_err(|_| bad())?),
        Kind::Bool => Value::Bool(text.trim().parse::<bool>().map_err(|_| bad())?),
        Kind::Path => Value::Text(text.to_string()),
        Kind::Choice(opts) => {
            if !opts.contains(&text) {
                return Err(bad());
            }
            Value::Text(text.to_string())
        }
    };
    check(p, &v)?;
    Ok(v)
}

fn parse_json(p: &Param, json: &Json) -> Result<Value, UsageError> {
    let bad = || UsageError(format!("{}: expected {}, got {json}", p.name, kind_name(p.kind)));
    let v = match (p.kind, json) {
        (Kind::Real, Json::Number(n)) => Value::Real(n.as_f64().ok_or_else(bad)?),
        (Kind::Int, Json::Number(n)) => Value::Int(n.as_i64().ok_or_else(bad)?),
        (Kind::Bool, Json::Bool(b)) => Value::Bool(*b),
        (Kind::Path, Json::String(s)) => Value::Text(s.clone()),
        (Kind::Choice(_), Json::String(s)) => return parse_text(p, s),
        _ => return Err(bad()),
    };
    check(p, &v)?;
    Ok(v)
}

fn check(p: &Param, v: &Value) -> Result<(), UsageError> {
    let ok = match (v, p.check) {
        (Value::Real(x), c) => {
            x.is_finite()
                && match c {
                    Check::Positive => *x > 0.0,
                    Check::NonNegative => *x >= 0.0,
                    Check::AtLeast(n) => *x >= n as f64,
                    Check::Any => true,
                }
        }
        (Value::Int(n), c) => match c {
            Check::Positive => *n > 0,
            Check::NonNegative => *n >= 0,
            Check::AtLeast(m) => *n >= m,
            Check::Any => true,
        },
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        let shown = match v {
            Value::Real(x) => x.to_string(),
            Value::Int(n) => n.to_string(),
            other => format!("{other:?}"),
        };
        Err(UsageError(format!("{}: must be {}, got {shown}", p.name, p.check.describe())))
    }
}

/// clap arguments for a table. No clap defaults, so an explicitly given flag
/// can be told apart from a missing one when merging with a config file.
pub fn args(table: &[Param]) -> Vec<Arg> {
    table
        .iter()
        .map(|p| {
            let arg = Arg::new(p.name).long(p.name.replace('_', "-")).help(p.help);
            match p.kind {
                Kind::Bool => arg.action(ArgAction::SetTrue),
                // Negative numbers must reach validation rather than look like flags.
                Kind::Real | Kind::Int => arg.allow_negative_numbers(true).value_name(match p.kind {
                    Kind::Int => "INT",
                    _ => "REAL",
                }),
                _ => arg.value_name(match p.kind {
                    Kind::Path => "FILE",
                    _ => "NAME",
                }),
            }
        })
        .collect()
}

pub fn with_args(cmd: Command, table: &[Param]) -> Command {
    cmd.args(args(table))
}

/// Resolved parameters of one run.
#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<&'static str, Value>,
}

impl Params {
    pub fn real(&self, name: &str) -> f64 {
        match self.values.get(name) {
            Some(Value::Real(x)) => *x,
            Some(Value::Int(n)) => *n as f64,
            other => panic!("parameter {name} is not a real: {other:?}"),
        }
    }

    pub fn int(&self, name: &str) -> i64 {
        match self.values.get(name) {
            Some(Value::Int(n)) => *n,
            other => panic!("parameter {name} is not an integer: {other:?}"),
        }
    }

    pub fn usize(&self, name: &str) -> usize {
        self.int(name) as usize
    }

    pub fn flag(&self, name: &str) -> bool {
        matches!(self.values.get(name), Some(Value::Bool(true)))
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        match self.values.get(name) {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Json {
        Json::Object(self.values.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect())
    }
}

/// Merge order: table default, then config file, then explicit flags.
/// Keys in `config` that the table does not know are rejected.
pub fn resolve(table: &[Param], config: &Map<String, Json>, matches: &ArgMatches) -> Result<Params, UsageError> {
    if let Some(unknown) = config.keys().find(|k| !table.iter().any(|p| p.name == k.as_str())) {
        let known: Vec<&str> = table.iter().map(|p| p.name).collect();
        return Err(UsageError(format!("{unknown}: unknown key (expected one of {})", known.join(", "))));
    }
    let mut values = BTreeMap::new();
    for p in table {
        let from_flag = match p.kind {
            Kind::Bool => matches.get_flag(p.name).then(|| Value::Bool(true)),
            _ => matches.get_one::<String>(p.name).map(|s| parse_text(p, s)).transpose()?,
        };
        let value = match from_flag {
            Some(v) => Some(v),
            None => match config.get(p.name) {
                Some(j) => Some(parse_json(p, j)?),
                None => p.default.map(|d| parse_text(p, d)).transpose()?,
            },
        };
        if let Some(v) = value {
            values.insert(p.name, v);
        }
    }
    Ok(Params { values })
}

/// Flat JSON object from a config file. Values are checked later against the
/// subcommand table; global keys are split off by the caller.
pub fn read_config(path: &Path) -> Result<Map<String, Json>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
    match serde_json::from_str::<Json>(&text) {
        Ok(Json::Object(map)) => {
            if let Some((k, _)) = map.iter().find(|(_, v)| v.is_object() || v.is_array()) {
                return Err(ConfigError::Usage(UsageError(format!("{k}: config must be a flat object"))));
            }
            Ok(map)
        }
        Ok(_) => Err(ConfigError::Usage(UsageError("config: top level must be a JSON object".into()))),
        Err(e) => Err(ConfigError::Usage(UsageError(format!("config: invalid JSON ({e})")))),
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String, std::io::Error),
    Usage(UsageError),
}
