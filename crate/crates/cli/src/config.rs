//! Flag and config-file parsing into a typed [`RunConfig`].
//!
//! A config file is flat `key = value` text. `#` starts a comment. Repeating a
//! key appends to it, which is how grids are listed point by point. Any value
//! that takes a list also accepts `start:stop:step`, inclusive of `stop`
//! within half a step. Numbers may be written as multiples of pi
//! (`pi/2`, `0.45pi`). A flag given on the command line replaces every value
//! the file gave for that key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ptsim::randamp::SourceModel;
use ptsim::signaling::Quantity;
use ptsim::{AliceMeasurement, BobMeasurement, CanonicalQubitParams};

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "PTSIM_SEED";

#[derive(Debug, Parser)]
#[command(name = "ptsim", version, about = "PT-symmetric signaling and randomness-amplification simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Check every closed form against brute force and emit a JSON report.
    Verify(Options),
    /// Evaluate quantities over state-parameter and alpha grids.
    Sweep(Options),
    /// Run the randomness-amplification protocol.
    Randamp(Options),
    /// Check the dilation: unitarity, channel equivalence, success probability.
    DilationCheck(Options),
    /// Bob-perturbation distance of Werner-like states across local dimensions.
    DimScan(Options),
}

/// Every option is kept as raw text so flags and file entries share one parser.
#[derive(Debug, Default, Args)]
pub struct Options {
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// phi-plus, werner, non-max, werner-like, canonical, product or qutrit.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Vec<String>,
    #[arg(long)]
    pub beta: Vec<String>,
    #[arg(long)]
    pub gamma: Vec<String>,
    /// Local dimensions (werner-like and dim-scan).
    #[arg(long)]
    pub dim: Vec<String>,
    /// Evolution time; replaces the specific time everywhere.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub quantity: Vec<String>,
    /// Alice's measurement polar angle.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    /// Alice's measurement phase.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Bob's measurement polar angle.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Bob's measurement phase.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Alice's local vector `x,y,z` (canonical, product, qutrit).
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    /// Bob's local vector `x,y,z`.
    #[arg(long = "m-prime", allow_hyphen_values = true)]
    pub m_prime: Option<String>,
    /// Diagonal correlators `xx,yy,zz`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long)]
    pub rounds: Option<String>,
    /// Falls back to the PTSIM_SEED environment variable.
    #[arg(long)]
    pub seed: Option<String>,
    /// fair, iid or markov.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Random cases per formula in `verify`.
    #[arg(long)]
    pub cases: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Per-round CSV log for `randamp`.
    #[arg(long)]
    pub log: Option<String>,
}

pub const KEYS: &[&str] = &[
    "state", "alpha", "p", "beta", "gamma", "dim", "t", "quantity", "y", "v", "z", "u", "m", "m-prime", "c",
    "rounds", "seed", "source", "epsilon", "cases", "out", "format", "log",
];

impl Options {
    fn entries(&self) -> Vec<(&'static str, Vec<String>)> {
        let one = |o: &Option<String>| o.iter().cloned().collect::<Vec<_>>();
        vec![
            ("state", one(&self.state)),
            ("alpha", self.alpha.clone()),
            ("p", self.p.clone()),
            ("beta", self.beta.clone()),
            ("gamma", self.gamma.clone()),
            ("dim", self.dim.clone()),
            ("t", one(&self.t)),
            ("quantity", self.quantity.clone()),
            ("y", one(&self.y)),
            ("v", one(&self.v)),
            ("z", one(&self.z)),
            ("u", one(&self.u)),
            ("m", one(&self.m)),
            ("m-prime", one(&self.m_prime)),
            ("c", one(&self.c)),
            ("rounds", one(&self.rounds)),
            ("seed", one(&self.seed)),
            ("source", one(&self.source)),
            ("epsilon", one(&self.epsilon)),
            ("cases", one(&self.cases)),
            ("out", one(&self.out)),
            ("format", one(&self.format)),
            ("log", one(&self.log)),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Sweep,
    Randamp,
    DilationCheck,
    DimScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    PhiPlus,
    Werner,
    NonMax,
    WernerLike,
    Canonical,
    Product,
    Qutrit,
}

impl Family {
    fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "phi-plus" => Family::PhiPlus,
            "werner" => Family::Werner,
            "non-max" => Family::NonMax,
            "werner-like" => Family::WernerLike,
            "canonical" => Family::Canonical,
            "product" => Family::Product,
            "qutrit" => Family::Qutrit,
            other => return Err(CliError::bad_value("state", format!("unknown family {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub family: Family,
    pub alpha: Vec<f64>,
    pub p: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub dims: Vec<usize>,
    pub t: Option<f64>,
    pub quantities: Vec<Quantity>,
    pub measurement: Option<(AliceMeasurement, BobMeasurement)>,
    /// `m`, `m-prime` and `c`; product states read `m`, `m-prime` as Bloch vectors.
    pub local: CanonicalQubitParams,
    pub rounds: usize,
    pub seed: Option<u64>,
    pub source: SourceModel,
    pub cases: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub log: Option<PathBuf>,
}

/// Raw values per key after merging file and flags.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct RawConfig(BTreeMap<String, Vec<String>>);

impl RawConfig {
    pub fn parse_file_text(text: &str) -> CliResult<Self> {
        let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!("config line {}: expected key = value", lineno + 1)));
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", lineno + 1)));
            }
            map.entry(key.to_string()).or_default().push(value.trim().to_string());
        }
        Ok(Self(map))
    }

    fn overlay(&mut self, opts: &Options) {
        for (key, values) in opts.entries() {
            if !values.is_empty() {
                self.0.insert(key.to_string(), values);
            }
        }
    }

    fn values(&self, key: &str) -> &[String] {
        self.0.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    fn single(&self, key: &str) -> CliResult<Option<&str>> {
        match self.values(key) {
            [] => Ok(None),
            [v] => Ok(Some(v.as_str())),
            _ => Err(CliError::bad_value(key, "given more than once")),
        }
    }

    fn number(&self, key: &str) -> CliResult<Option<f64>> {
        self.single(key)?.map(|s| parse_number(s).map_err(|m| CliError::bad_value(key, m))).transpose()
    }

    fn integer<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.single(key)?
            .map(|s| s.parse::<T>().map_err(|e| CliError::bad_value(key, e)))
            .transpose()
    }

    fn grid(&self, key: &str, default: &str) -> CliResult<Vec<f64>> {
        let raw = self.values(key);
        let owned;
        let raw = if raw.is_empty() {
            owned = [default.to_string()];
            &owned[..]
        } else {
            raw
        };
        let mut out = Vec::new();
        for item in raw {
            out.extend(parse_grid(item).map_err(|m| CliError::bad_value(key, m))?);
        }
        if out.is_empty() {
            return Err(CliError::bad_value(key, "grid is empty"));
        }
        Ok(out)
    }

    fn triple(&self, key: &str) -> CliResult<[f64; 3]> {
        let Some(s) = self.single(key)? else {
            return Ok([0.0; 3]);
        };
        let parts: Vec<f64> = s
            .split(',')
            .map(|x| parse_number(x.trim()))
            .collect::<Result<_, _>>()
            .map_err(|m| CliError::bad_value(key, m))?;
        parts
            .try_into()
            .map_err(|_| CliError::bad_value(key, "expected three comma-separated numbers"))
    }
}

/// `pi`, `pi/4`, `0.45pi`, `3pi/4` or a plain float.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let bad = || format!("{s:?} is not a number");
    let value = if let Some(idx) = s.find("pi") {
        let (coef, rest) = (&s[..idx], &s[idx + 2..]);
        let coef = match coef.trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let div = match rest.strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        coef * std::f64::consts::PI / div
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// A single number, or `start:stop:step` with `stop` included within half a
/// step. Range points are rounded to 12 decimals so `0:1:0.1` yields `0.3`
/// rather than `0.30000000000000004`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![parse_number(one)?]),
        [start, stop, step] => {
            let (start, stop, step) = (parse_number(start)?, parse_number(stop)?, parse_number(step)?);
            if step.is_nan() || step <= 0.0 {
                return Err(format!("step must be positive in {s:?}"));
            }
            let count = ((stop - start) / step + 0.5).floor();
            if count < 0.0 {
                return Ok(Vec::new());
            }
            if count > 1e7 {
                return Err(format!("{s:?} has too many points"));
            }
            Ok((0..=count as usize)
                .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(format!("{s:?} is neither a number nor start:stop:step")),
    }
}

/// Merges the optional config file with the flags and types the result.
/// `env_seed` is the value of `PTSIM_SEED`, if set.
pub fn parse_config(command: &CommandArgs, file_text: Option<&str>, env_seed: Option<&str>) -> CliResult<RunConfig> {
    let (command, opts) = match command {
        CommandArgs::Verify(o) => (Command::Verify, o),
        CommandArgs::Sweep(o) => (Command::Sweep, o),
        CommandArgs::Randamp(o) => (Command::Randamp, o),
        CommandArgs::DilationCheck(o) => (Command::DilationCheck, o),
        CommandArgs::DimScan(o) => (Command::DimScan, o),
    };
    let mut raw = match file_text {
        Some(text) => RawConfig::parse_file_text(text)?,
        None => RawConfig::default(),
    };
    raw.overlay(opts);
    build(command, &raw, env_seed)
}

fn build(command: Command, raw: &RawConfig, env_seed: Option<&str>) -> CliResult<RunConfig> {
    let default_family = match command {
        Command::Sweep | Command::Verify => "werner",
        Command::DimScan => "werner-like",
        Command::Randamp | Command::DilationCheck => "phi-plus",
    };
    let family = Family::parse(raw.single("state")?.unwrap_or(default_family))?;
    let default_alpha = match command {
        Command::DimScan => "0.45pi",
        Command::Randamp => "pi/2",
        Command::DilationCheck => "0:1.5:0.1",
        Command::Sweep | Command::Verify => "0.1:1.4:0.1",
    };
    let alpha = raw.grid("alpha", default_alpha)?;
    if command == Command::Randamp && alpha.len() != 1 {
        return Err(CliError::bad_value("alpha", "randamp takes a single angle"));
    }
    let dims = raw
        .grid("dim", if command == Command::DimScan { "2:3:1" } else { "2" })?
        .into_iter()
        .map(|d| {
            if d.fract() == 0.0 && (2.0..=3.0).contains(&d) {
                Ok(d as usize)
            } else {
                Err(CliError::bad_value("dim", format!("{d} is not 2 or 3")))
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    let quantities = if raw.values("quantity").is_empty() {
        vec![match command {
            Command::DimScan => Quantity::BobPerturbation,
            _ => Quantity::GapSigmaY,
        }]
    } else {
        raw.values("quantity")
            .iter()
            .flat_map(|s| s.split(','))
            .map(|s| s.trim().parse::<Quantity>().map_err(|e| CliError::bad_value("quantity", e)))
            .collect::<CliResult<_>>()?
    };
    let angles = [raw.number("y")?, raw.number("v")?, raw.number("z")?, raw.number("u")?];
    let measurement = match angles {
        [None, None, None, None] => None,
        [y, v, z, u] => {
            let half_pi = std::f64::consts::FRAC_PI_2;
            let or = |x: Option<f64>| x.unwrap_or(half_pi);
            Some((AliceMeasurement::new(or(y), or(v)), BobMeasurement::new(or(z), or(u))))
        }
    };
    let seed = match raw.single("seed")? {
        Some(s) => Some(s.parse::<u64>().map_err(|e| CliError::bad_value("seed", e))?),
        None => match env_seed {
            Some(s) => Some(s.trim().parse::<u64>().map_err(|e| CliError::bad_value(SEED_ENV, e))?),
            None => None,
        },
    };
    if command == Command::Randamp && seed.is_none() {
        return Err(CliError::Usage(format!("randamp needs --seed or {SEED_ENV}")));
    }
    let epsilon = raw.number("epsilon")?;
    let source = match (raw.single("source")?, epsilon) {
        (None, None) | (Some("fair"), None) => SourceModel::Fair,
        (None, Some(e)) | (Some("iid"), Some(e)) => SourceModel::IidBiased(e),
        (Some("iid"), None) => SourceModel::IidBiased(0.0),
        (Some("markov"), e) => SourceModel::MarkovAdversary(e.unwrap_or(0.0)),
        (Some("fair"), Some(_)) => return Err(CliError::bad_value("epsilon", "a fair source takes no bias")),
        (Some(other), _) => return Err(CliError::bad_value("source", format!("unknown source {other:?}"))),
    };
    source.validate().map_err(|e| CliError::bad_value("epsilon", e))?;
    let rounds = raw.integer::<usize>("rounds")?.unwrap_or(100_000);
    if rounds == 0 {
        return Err(CliError::bad_value("rounds", "must be at least 1"));
    }
    let default_format = match command {
        Command::Verify | Command::Randamp => "json",
        _ => "csv",
    };
    let format = match raw.single("format")?.unwrap_or(default_format) {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(CliError::bad_value("format", format!("unknown format {other:?}"))),
    };
    if matches!(command, Command::Verify | Command::Randamp) && format != Format::Json {
        return Err(CliError::bad_value("format", "this command only emits json"));
    }
    let path = |key: &str| -> CliResult<Option<PathBuf>> { Ok(raw.single(key)?.map(PathBuf::from)) };
    Ok(RunConfig {
        command,
        family,
        alpha,
        p: raw.grid("p", "0:1:0.1")?,
        beta: raw.grid("beta", "0:1:0.1")?,
        gamma: raw.grid("gamma", "0:1:0.1")?,
        dims,
        t: raw.number("t")?,
        quantities,
        measurement,
        local: CanonicalQubitParams::new(raw.triple("m")?, raw.triple("m-prime")?, raw.triple("c")?),
        rounds,
        seed,
        source,
        cases: raw.integer::<usize>("cases")?.unwrap_or(1000).max(1),
        out: path("out")?,
        format,
        log: path("log")?,
    })
}

pub fn read_config_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
