//! `colorsurg` command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a verification check failed.
//! Output goes to `--out`, else to `$COLORSURG_OUT/<default name>` when that
//! variable is set, else to stdout.

use crate::geometry::{build_color_patch, build_surface_patch};
use crate::montecarlo::{fit_scaling, results_csv, Campaign, Prepared, Protocol};
use crate::resources::{self, Family, ResourceModel};
use crate::surgery::{CnotMode, InjectionInput};
use crate::{verify, Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const OUT_DIR_ENV: &str = "COLORSURG_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "colorsurg", version, about = "Lattice surgery with 4.8.8 color codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a code patch as JSON.
    Lattice(LatticeArgs),
    /// Run the noiseless oracle suite for a protocol.
    Verify(VerifyArgs),
    /// Estimate logical failure rates.
    Montecarlo(MonteCarloArgs),
    /// Closed-form resource tables and crossover analysis.
    Resources(ResourcesArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LatticeFamily {
    Color488,
    Surface,
}

#[derive(Args, Debug)]
pub struct LatticeArgs {
    #[arg(long, value_enum, default_value = "color488")]
    pub family: LatticeFamily,
    #[arg(long)]
    pub d: i64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VerifyProtocol {
    Cnot,
    Inject,
    Hadamard,
    Phase,
    Merge,
    Memory,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub protocol: VerifyProtocol,
    #[arg(long)]
    pub d: i64,
    /// Injected state: zero, plus, s_plus or t.
    #[arg(long, default_value = "zero")]
    pub state: String,
    /// CNOT mode: accelerated, seven_step or horsman.
    #[arg(long, default_value = "accelerated")]
    pub mode: String,
    /// Number of simulator seeds (0..N) each check runs on.
    #[arg(long, default_value_t = 16)]
    pub seeds: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct MonteCarloArgs {
    /// key=value lines or a JSON object; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Comma-separated error rates.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Lookup decoder order, 1 or 2.
    #[arg(long)]
    pub order: Option<usize>,
    /// Keep only trials without any detection event.
    #[arg(long)]
    pub postselect: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Store the resolved configuration as JSON.
    #[arg(long)]
    pub save_config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum ResourceTable {
    Table1,
    Table2,
    Table3,
    RatioCurves,
    Crossover,
}

#[derive(Args, Debug)]
pub struct ResourcesArgs {
    #[arg(value_enum)]
    pub which: ResourceTable,
    /// Color-code threshold.
    #[arg(long)]
    pub pthc: Option<f64>,
    /// Surface-code threshold.
    #[arg(long)]
    pub pths: Option<f64>,
    /// Comma-separated surface distances for ratio curves and crossovers.
    #[arg(long)]
    pub ds: Option<String>,
    /// Comma-separated distances for the tables.
    #[arg(long, default_value = "3,5,7,9,11")]
    pub d: String,
    /// Smallest p of the ratio curves.
    #[arg(long, default_value_t = 1e-12)]
    pub p_min: f64,
    #[arg(long, default_value_t = 60)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything that determines a Monte-Carlo CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub protocol: Protocol,
    pub d: usize,
    pub p: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default = "one")]
    pub order: usize,
    #[serde(default)]
    pub postselect: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one() -> usize {
    1
}

/// Partially specified config read from a file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    command: Option<String>,
    protocol: Option<String>,
    d: Option<usize>,
    p: Option<PList>,
    trials: Option<u64>,
    seed: Option<u64>,
    rounds: Option<usize>,
    order: Option<usize>,
    postselect: Option<bool>,
    out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PList {
    One(f64),
    Many(Vec<f64>),
    Text(String),
}

impl PList {
    fn values(self) -> Result<Vec<f64>> {
        match self {
            PList::One(p) => Ok(vec![p]),
            PList::Many(v) => Ok(v),
            PList::Text(s) => parse_list(&s),
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad list entry {t:?}"))))
        .collect()
}

fn parse_config_text(text: &str) -> Result<PartialConfig> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Error::Parse(format!("config JSON: {e}")));
    }
    let mut map = serde_json::Map::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        let value = match k {
            "d" | "trials" | "seed" | "rounds" | "order" => serde_json::Value::from(
                v.parse::<u64>()
                    .map_err(|_| Error::Parse(format!("config {k}: not an integer: {v:?}")))?,
            ),
            "postselect" => serde_json::Value::from(
                v.parse::<bool>()
                    .map_err(|_| Error::Parse(format!("config {k}: not a bool: {v:?}")))?,
            ),
            _ => serde_json::Value::from(v),
        };
        map.insert(k.to_string(), value);
    }
    serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| Error::Parse(format!("config: {e}")))
}

impl RunConfig {
    /// Merge a config file (if any) with command-line flags.
    pub fn resolve(a: &MonteCarloArgs) -> Result<RunConfig> {
        let file = match &a.config {
            Some(path) => parse_config_text(&std::fs::read_to_string(path)?)?,
            None => PartialConfig::default(),
        };
        if let Some(c) = &file.command {
            if c != "montecarlo" {
                return Err(Error::Invalid(format!("config is for command {c:?}, not montecarlo")));
            }
        }
        let protocol: Protocol = a.protocol.clone().or(file.protocol).unwrap_or_else(|| "memory".into()).parse()?;
        let p = match &a.p {
            Some(s) => parse_list(s)?,
            None => match file.p {
                Some(pl) => pl.values()?,
                None => return Err(Error::Invalid("no error rates given (--p or config key p)".into())),
            },
        };
        let seed = a
            .seed
            .or(file.seed)
            .ok_or_else(|| Error::Invalid("--seed is required for montecarlo".into()))?;
        let cfg = RunConfig {
            command: "montecarlo".into(),
            protocol,
            d: a.d.or(file.d).unwrap_or(3),
            p,
            trials: a.trials.or(file.trials).unwrap_or(10_000),
            seed,
            rounds: a.rounds.or(file.rounds),
            order: a.order.or(file.order).unwrap_or(1),
            postselect: a.postselect || file.postselect.unwrap_or(false),
            out: a.out.clone().or(file.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn campaigns(&self) -> Vec<Campaign> {
        self.p
            .iter()
            .map(|&p| Campaign {
                rounds: self.rounds,
                decoder_order: self.order,
                postselect: self.postselect,
                ..Campaign::new(self.protocol, self.d, p, self.trials, self.seed)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(Error::Invalid("empty error-rate grid".into()));
        }
        self.campaigns().iter().try_for_each(Campaign::validate)
    }

    /// CSV with the fitted exponent (when at least three points failed) as
    /// a footer.
    pub fn run(&self) -> Result<String> {
        let prep = Prepared::new(self.protocol, self.d, self.rounds, self.order)?;
        let results = self.campaigns().iter().map(|c| prep.run(c)).collect::<Result<Vec<_>>>()?;
        let pts: Vec<(f64, f64)> = results
            .iter()
            .filter(|r| r.campaign.p > 0.0)
            .map(|r| (r.campaign.p, r.p_fail))
            .collect();
        let fit = fit_scaling(&pts).ok();
        let mut csv = results_csv(&results, fit.as_ref());
        if fit.is_none() && pts.len() > 1 {
            csv.push_str("# fit: fewer than 3 points with failures\n");
        }
        Ok(csv)
    }
}

fn emit(out: &mut dyn Write, explicit: Option<&Path>, default_name: &str, content: &str) -> Result<()> {
    let path = explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)));
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&p, content)?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(content.as_bytes())?,
    }
    Ok(())
}

fn cmd_lattice(a: &LatticeArgs, out: &mut dyn Write) -> Result<i32> {
    let (patch, fam) = match a.family {
        LatticeFamily::Color488 => (build_color_patch(a.d)?, "color488"),
        LatticeFamily::Surface => (build_surface_patch(a.d)?, "surface"),
    };
    let mut text = serde_json::to_string_pretty(&patch.to_json()).map_err(|e| Error::Invalid(e.to_string()))?;
    text.push('\n');
    emit(out, a.out.as_deref(), &format!("lattice_{fam}_d{}.json", a.d), &text)?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let d = crate::check_distance(a.d)?;
    let report = match a.protocol {
        VerifyProtocol::Cnot => verify::verify_cnot(d, a.mode.parse::<CnotMode>()?, a.seeds)?,
        VerifyProtocol::Inject => verify::verify_injection(d, a.state.parse::<InjectionInput>()?, a.seeds)?,
        VerifyProtocol::Hadamard => verify::verify_hadamard(d, a.seeds)?,
        VerifyProtocol::Phase => verify::verify_phase(d, a.seeds)?,
        VerifyProtocol::Merge => verify::verify_merge(d, a.seeds)?,
        VerifyProtocol::Memory => verify::verify_memory(d, a.seeds)?,
    };
    emit(
        out,
        a.out.as_deref(),
        &format!("verify_{:?}_d{d}.txt", a.protocol).to_lowercase(),
        &format!("{report}\n"),
    )?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_montecarlo(a: &MonteCarloArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::resolve(a)?;
    if let Some(path) = &a.save_config {
        let mut j = serde_json::to_string_pretty(&cfg).map_err(|e| Error::Invalid(e.to_string()))?;
        j.push('\n');
        std::fs::write(path, j)?;
    }
    let csv = match a.jobs {
        Some(0) => return Err(Error::Invalid("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Invalid(e.to_string()))?
            .install(|| cfg.run())?,
        None => cfg.run()?,
    };
    emit(
        out,
        cfg.out.as_deref(),
        &format!("montecarlo_{}_d{}.csv", cfg.protocol, cfg.d),
        &csv,
    )?;
    Ok(EXIT_OK)
}

fn resource_model(a: &ResourcesArgs) -> Result<ResourceModel> {
    let base = ResourceModel::best_for_color();
    ResourceModel::new(a.pthc.unwrap_or(base.p_th_color), a.pths.unwrap_or(base.p_th_surface))
}

fn cmd_resources(a: &ResourcesArgs, out: &mut dyn Write) -> Result<i32> {
    let ds: Vec<usize> = parse_list(&a.d)?;
    for &d in &ds {
        crate::check_distance(d as i64)?;
    }
    let surface_ds: Vec<usize> = match &a.ds {
        Some(s) => parse_list(s)?,
        None => vec![5, 11, 21, 51, 101, 201],
    };
    let csv = match a.which {
        ResourceTable::Table1 => resources::gate_table_csv(&[Family::Color], &ds)?,
        ResourceTable::Table2 => resources::gate_table_csv(&[Family::Surface], &ds)?,
        ResourceTable::Table3 => resources::cnot_table_csv(&ds)?,
        ResourceTable::RatioCurves => resources::ratio_curves_csv(&resource_model(a)?, &surface_ds, a.p_min, a.points)?,
        ResourceTable::Crossover => {
            if a.pthc.is_some() || a.pths.is_some() {
                resources::crossover_csv(&[("custom", &resource_model(a)?)], &surface_ds)?
            } else {
                resources::crossover_csv(
                    &[
                        ("best_for_color", &ResourceModel::best_for_color()),
                        ("best_for_surface", &ResourceModel::best_for_surface()),
                    ],
                    &surface_ds,
                )?
            }
        }
    };
    let name = format!("{:?}.csv", a.which).to_lowercase();
    emit(out, a.out.as_deref(), &name, &csv)?;
    Ok(EXIT_OK)
}

/// Parse and run; returns the process exit code. Errors go to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let r = match &cli.command {
        Command::Lattice(a) => cmd_lattice(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Montecarlo(a) => cmd_montecarlo(a, out),
        Command::Resources(a) => cmd_resources(a, out),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}
