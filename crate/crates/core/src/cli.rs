//! Command-line front end for the `nsreg` binary.
//!
//! Every subcommand resolves its configuration as defaults, then the
//! `--config` JSON file, then explicit flags. Reports carry a header with the
//! crate version, the seed, and the SHA-256 of the canonical configuration.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::energy::{energy_functional, pressure_term_bound};
use crate::error::{Error, Result};
use crate::exponents::{
    check_admissible, gamma_from_relation, holder_chain, region_csv, region_map, select_theta, ExponentTuple,
    RegionGrid,
};
use crate::grid::{generate_field, generate_pressure, load_field, store_field, FieldKind, FieldSpec, Profile, SpaceTimeGrid};
use crate::hausdorff::{covering_sweep, SweepConfig};
use crate::localq::quantity_profile;
use crate::lorentz::{interpolate_bound, Distribution, Samples, SimpleFunction};
use crate::regularity::{
    a_scan, band_limited_ensemble, epsilon_scan, lemma_ratio_harness_specs, BasePoints, CandidateSet,
    HarnessConfig, RadiusLadder, RegularityConfig,
};

const AFTER_HELP: &str = "Configuration precedence: explicit flags > --config JSON file > built-in defaults.\n\
Exit status: 0 on success, 2 on invalid input, 1 on runtime failure.";

#[derive(Parser, Debug)]
#[command(name = "nsreg", version, about = "Scale-invariant regularity diagnostics for sampled velocity fields", after_help = AFTER_HELP)]
pub struct Cli {
    /// JSON file with subcommand settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for random ensembles.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to NSREG_WORKERS, then the core count).
    #[arg(long, global = true, env = "NSREG_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic velocity field (and its pressure companion).
    Gen(GenArgs),
    /// Classify an exponent tuple and select theta.
    Theta(ThetaArgs),
    /// Tabulate the admissible region in the (1/p, 1/r) plane as CSV.
    Region(RegionArgs),
    /// Lorentz quasinorm of a simple function or a field slice.
    Lorentz(LorentzArgs),
    /// Local scale-invariant quantities over a radius ladder.
    Diagnose(DiagnoseArgs),
    /// Epsilon-regularity scan producing a candidate set.
    Scan(ScanArgs),
    /// Covering bound for a candidate set over a scale sweep.
    Cover(CoverArgs),
    /// Higher-integrability energy ledger and pressure majorant.
    Energy(EnergyArgs),
    /// Fitted constants of the local inequalities over a random ensemble.
    Harness(HarnessArgs),
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}` is not a number: {e}")))
        .collect()
}

fn parse_triple(s: &str) -> std::result::Result<[f64; 3], String> {
    let v = parse_list(s)?;
    v.try_into().map_err(|_| "expected three comma-separated numbers".to_string())
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let v = parse_list(s)?;
    v.try_into().map_err(|_| "expected two comma-separated numbers".to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Zero,
    Constant,
    LinearShear,
    TaylorLike,
    BlowupProfile,
    BandLimited,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProfileShape {
    Swirl,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub kind: GenKind,
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
    pub scale: f64,
    pub value: [f64; 3],
    pub amplitude: f64,
    pub wavenumber: f64,
    pub decay: f64,
    pub t_blow: f64,
    pub center: [f64; 3],
    pub width: f64,
    pub profile: ProfileShape,
    pub modes: usize,
    pub max_wavenumber: f64,
    pub out: PathBuf,
    pub pressure_out: Option<PathBuf>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            kind: GenKind::TaylorLike,
            n: 32,
            lo: -1.0,
            hi: 1.0,
            t0: 0.0,
            t1: 1.0,
            nt: 8,
            scale: 1.0,
            value: [1.0, 0.0, 0.0],
            amplitude: 1.0,
            wavenumber: 1.0,
            decay: 0.0,
            t_blow: 1.1,
            center: [0.0; 3],
            width: 1.0,
            profile: ProfileShape::Swirl,
            modes: 8,
            max_wavenumber: 3.0,
            out: PathBuf::from("v.nsfd"),
            pressure_out: None,
        }
    }
}

impl GenConfig {
    pub fn spec(&self, seed: u64) -> Result<FieldSpec> {
        let grid = SpaceTimeGrid::cube(self.lo, self.hi, self.n, self.t0, self.t1, self.nt)?;
        let kind = match self.kind {
            GenKind::Zero => FieldKind::Zero,
            GenKind::Constant => FieldKind::Constant { value: self.value },
            GenKind::LinearShear => FieldKind::LinearShear,
            GenKind::TaylorLike => {
                FieldKind::TaylorLike { amplitude: self.amplitude, wavenumber: self.wavenumber, decay: self.decay }
            }
            GenKind::BlowupProfile => {
                let profile = match self.profile {
                    ProfileShape::Swirl => Profile::Swirl { amplitude: self.amplitude, width: self.width },
                    ProfileShape::Gaussian => Profile::Gaussian { amplitude: self.amplitude, width: self.width },
                };
                FieldKind::BlowupProfile { t_blow: self.t_blow, center: self.center, profile }
            }
            GenKind::BandLimited => FieldKind::BandLimited {
                seed,
                modes: self.modes,
                amplitude: self.amplitude,
                max_wavenumber: self.max_wavenumber,
            },
        };
        let spec = FieldSpec { kind, grid, scale: self.scale };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    kind: Option<GenKind>,
    /// Cells per spatial axis.
    #[arg(long)]
    n: Option<usize>,
    /// Spatial box `lo,hi` on every axis.
    #[arg(long = "box", value_parser = parse_pair, allow_hyphen_values = true)]
    bounds: Option<[f64; 2]>,
    /// Time interval `t0,t1`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    time: Option<[f64; 2]>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    value: Option<[f64; 3]>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    wavenumber: Option<f64>,
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    t_blow: Option<f64>,
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    center: Option<[f64; 3]>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long, value_enum)]
    profile: Option<ProfileShape>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    max_wavenumber: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    pressure_out: Option<PathBuf>,
}

fn set<T>(target: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *target = v;
    }
}

impl GenArgs {
    fn apply(self, c: &mut GenConfig) {
        set(&mut c.kind, self.kind);
        set(&mut c.n, self.n);
        if let Some([lo, hi]) = self.bounds {
            c.lo = lo;
            c.hi = hi;
        }
        if let Some([t0, t1]) = self.time {
            c.t0 = t0;
            c.t1 = t1;
        }
        set(&mut c.nt, self.nt);
        set(&mut c.scale, self.scale);
        set(&mut c.value, self.value);
        set(&mut c.amplitude, self.amplitude);
        set(&mut c.wavenumber, self.wavenumber);
        set(&mut c.decay, self.decay);
        set(&mut c.t_blow, self.t_blow);
        set(&mut c.center, self.center);
        set(&mut c.width, self.width);
        set(&mut c.profile, self.profile);
        set(&mut c.modes, self.modes);
        set(&mut c.max_wavenumber, self.max_wavenumber);
        set(&mut c.out, self.out);
        if self.pressure_out.is_some() {
            c.pressure_out = self.pressure_out;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaConfig {
    pub p: Option<f64>,
    pub r: Option<f64>,
    pub delta: Option<f64>,
    /// Taken from `2/r + 3/p = 2 + gamma` when absent.
    pub gamma: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
pub struct ThetaArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub n: usize,
    pub delta_samples: usize,
    pub out: Option<PathBuf>,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self { n: 50, delta_samples: 9, out: None }
    }
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
pub struct RegionArgs {
    /// Grid points per axis over 1/p, 1/r in [0, 1].
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta_samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorentzConfig {
    /// JSON simple function `{"pieces": [[level, measure], ...]}`.
    pub simple: Option<PathBuf>,
    /// Field whose speed on one slice is measured.
    pub field: Option<PathBuf>,
    /// Time slice of `field`; the last one when absent.
    pub slice: Option<usize>,
    pub p: f64,
    /// Second index; `"inf"` gives the weak norm.
    #[serde(with = "extended")]
    pub q: f64,
    /// Also checks the interpolation inequality between `L^{p,inf}` and `L^{r,inf}`.
    pub interpolate_r: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Default for LorentzConfig {
    fn default() -> Self {
        Self { simple: None, field: None, slice: None, p: 2.0, q: 2.0, interpolate_r: None, out: None }
    }
}

mod extended {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
pub struct LorentzArgs {
    #[arg(long)]
    simple: Option<PathBuf>,
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    slice: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// A number or `inf`.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    interpolate_r: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Radius list: `geometric:r_max,factor,count` or explicit `r1,r2,...`.
#[derive(Clone, Debug, PartialEq)]
pub enum RadiiSpec {
    Geometric(RadiusLadder),
    List(Vec<f64>),
}

impl RadiiSpec {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        if let Some(rest) = s.strip_prefix("geometric:") {
            let v = parse_list(rest)?;
            let [r_max, factor, count] = v[..] else {
                return Err("geometric ladder needs r_max,factor,count".into());
            };
            if count < 1.0 || count.fract() != 0.0 {
                return Err(format!("ladder count {count} must be a positive integer"));
            }
            Ok(RadiiSpec::Geometric(RadiusLadder { r_max, factor, count: count as usize }))
        } else {
            parse_list(s).map(RadiiSpec::List)
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        match self {
            RadiiSpec::Geometric(l) => l.radii(),
            RadiiSpec::List(v) => v.clone(),
        }
    }

    fn as_string(&self) -> String {
        match self {
            RadiiSpec::Geometric(l) => format!("geometric:{},{},{}", l.r_max, l.factor, l.count),
            RadiiSpec::List(v) => v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub field: Option<PathBuf>,
    pub pressure: Option<PathBuf>,
    /// Box center when absent.
    pub center: Option<[f64; 3]>,
    /// Final grid time when absent.
    pub t0: Option<f64>,
    /// Default ladder of the grid when absent.
    pub radii: Option<String>,
    pub q: f64,
    pub out: Option<PathBuf>,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self { field: None, pressure: None, center: None, t0: None, radii: None, q: 2.6, out: None }
    }
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
pub struct DiagnoseArgs {
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    pressure: Option<PathBuf>,
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    center: Option<[f64; 3]>,
    #[arg(long)]
    t0: Option<f64>,
    /// `geometric:r_max,factor,count` or `r1,r2,...` (decreasing).
    #[arg(long, value_parser = RadiiSpec::parse)]
    radii: Option<RadiiSpec>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScanModeArg {
    Bq,
    A,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanCliConfig {
    pub field: Option<PathBuf>,
    pub mode: ScanModeArg,
    /// `grid`, `grid:N`, or a JSON file with a list of points.
    pub points: String,
    /// Threshold for the chosen mode; the mode's default when absent.
    pub eps: Option<f64>,
    /// `geometric:r_max,factor,count`; the grid default when absent.
    pub radii: Option<String>,
    pub q: f64,
    pub out: Option<PathBuf>,
}

impl Default for ScanCliConfig {
    fn default() -> Self {
        Self { field: None, mode: ScanModeArg::Bq, points: "grid".into(), eps: None, radii: None, q: 2.6, out: None }
    }
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
pub struct ScanArgs {
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ScanModeArg>,
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_parser = RadiiSpec::parse)]
    radii: Option<RadiiSpec>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverConfig {
    pub sigma: Option<PathBuf>,
    pub field: Option<PathBuf>,
    pub delta: f64,
    pub eps_q: f64,
    /// Largest scan radius (capped by the time extent) when absent.
    pub eps_hat_max: Option<f64>,
    pub factor: f64,
    pub count: usize,
    pub out: Option<PathBuf>,
}

impl Default for CoverConfig {
    fn default() -> Self {
        Self { sigma: None, field: None, delta: 0.2, eps_q: 0.05, eps_hat_max: None, factor: 0.5, count: 5, out: None }
    }
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
pub struct CoverArgs {
    #[arg(long)]
    sigma: Option<PathBuf>,
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps_q: Option<f64>,
    #[arg(long)]
    eps_hat_max: Option<f64>,
    #[arg(long)]
    factor: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub field: Option<PathBuf>,
    pub pressure: Option<PathBuf>,
    pub delta: f64,
    /// Full time extent when absent.
    pub window: Option<[f64; 2]>,
    /// JSON with `p`, `r` and optionally `gamma`, `delta` (top level or under `tuple`).
    pub tuple: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self { field: None, pressure: None, delta: 0.2, window: None, tuple: None, out: None }
    }
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
pub struct EnergyArgs {
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    pressure: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    window: Option<[f64; 2]>,
    #[arg(long)]
    tuple: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessCliConfig {
    pub members: usize,
    pub n: usize,
    pub nt: usize,
    pub q: f64,
    /// `(r, rho)` pairs, all centered at the box center at the final time.
    pub pairs: Vec<(f64, f64)>,
    pub out: Option<PathBuf>,
}

impl Default for HarnessCliConfig {
    fn default() -> Self {
        Self { members: 100, n: 16, nt: 6, q: 2.6, pairs: vec![(0.25, 0.5), (0.125, 0.5), (0.5, 0.5)], out: None }
    }
}

impl HarnessCliConfig {
    /// Box `[-1, 1]^3` over `t in [0, 0.5]`.
    pub fn grid(&self) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::cube(-1.0, 1.0, self.n, 0.0, 0.5, self.nt)
    }
}

fn parse_radius_pair(pair: &str) -> std::result::Result<(f64, f64), String> {
    let (r, rho) = pair.split_once(':').ok_or_else(|| format!("`{pair}` is not r:rho"))?;
    let r = r.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let rho = rho.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((r, rho))
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
pub struct HarnessArgs {
    /// Ensemble size.
    #[arg(long)]
    members: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    /// Comma-separated `r:rho` pairs.
    #[arg(long, value_parser = parse_radius_pair, value_delimiter = ',')]
    pairs: Option<Vec<(f64, f64)>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportHeader {
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub config: Value,
}

/// SHA-256 of the canonical (key-sorted, compact) JSON of `subcommand`,
/// `seed` and `config`.
pub fn config_hash(subcommand: &str, seed: u64, config: &Value) -> String {
    let canonical = json!({ "subcommand": subcommand, "seed": seed, "config": config }).to_string();
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn header<C: Serialize>(subcommand: &'static str, seed: u64, config: &C) -> Result<ReportHeader> {
    let config = serde_json::to_value(config)?;
    Ok(ReportHeader {
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        seed,
        config_hash: config_hash(subcommand, seed, &config),
        config,
    })
}

/// Merges `result` (an object) with the header under the `header` key.
pub fn json_report<R: Serialize>(header: &ReportHeader, result: &R) -> Result<String> {
    let mut value = serde_json::to_value(result)?;
    let h = serde_json::to_value(header)?;
    match &mut value {
        Value::Object(map) => {
            map.insert("header".into(), h);
        }
        other => {
            value = json!({ "header": h, "result": other.take() });
        }
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

/// CSV with the header block as leading `#` comment lines.
pub fn csv_report(header: &ReportHeader, body: &str) -> Result<String> {
    Ok(format!(
        "# nsreg {} {}\n# seed: {}\n# config_hash: {}\n# config: {}\n{body}",
        header.version,
        header.subcommand,
        header.seed,
        header.config_hash,
        serde_json::to_string(&header.config)?
    ))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value.as_deref().ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

fn run_gen(cli: &Globals, args: GenArgs) -> Result<()> {
    let mut cfg: GenConfig = load_config(cli.config.as_deref())?;
    args.apply(&mut cfg);
    let spec = cfg.spec(cli.seed)?;
    let v = generate_field(&spec)?;
    store_field(&v, &cfg.out)?;
    if let Some(p) = &cfg.pressure_out {
        store_field(&generate_pressure(&spec)?, p)?;
    }
    let h = header("gen", cli.seed, &cfg)?;
    let summary = json!({
        "spec": spec,
        "max_speed_final": v.max_magnitude(v.grid.nt - 1),
        "samples": v.grid.len(),
    });
    emit(None, &json_report(&h, &summary)?)
}

fn run_theta(cli: &Globals, args: ThetaArgs) -> Result<()> {
    let mut cfg: ThetaConfig = load_config(cli.config.as_deref())?;
    if args.p.is_some() {
        cfg.p = args.p;
    }
    if args.r.is_some() {
        cfg.r = args.r;
    }
    if args.delta.is_some() {
        cfg.delta = args.delta;
    }
    if args.gamma.is_some() {
        cfg.gamma = args.gamma;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let p = cfg.p.ok_or_else(|| Error::Config("--p is required".into()))?;
    let r = cfg.r.ok_or_else(|| Error::Config("--r is required".into()))?;
    let delta = cfg.delta.ok_or_else(|| Error::Config("--delta is required".into()))?;
    let gamma = cfg.gamma.unwrap_or_else(|| gamma_from_relation(p, r));
    let mut tuple = check_admissible(p, r, delta, gamma);
    let mut chain = None;
    if tuple.is_admissible() {
        tuple = select_theta(&tuple)?;
        if let Some(theta) = tuple.theta {
            chain = Some(holder_chain(p, r, delta, theta)?);
        }
    }
    let h = header("theta", cli.seed, &cfg)?;
    let result = json!({
        "case": tuple.case().map(|c| c.as_str()),
        "theta": tuple.theta,
        "tuple": tuple,
        "holder_chain": chain,
    });
    emit(cfg.out.as_deref(), &json_report(&h, &result)?)
}

fn run_region(cli: &Globals, args: RegionArgs) -> Result<()> {
    let mut cfg: RegionConfig = load_config(cli.config.as_deref())?;
    set(&mut cfg.n, args.n);
    set(&mut cfg.delta_samples, args.delta_samples);
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if cfg.n < 2 || cfg.delta_samples == 0 {
        return Err(Error::Config("--n must be at least 2 and --delta-samples at least 1".into()));
    }
    let grid = RegionGrid::from_exponent_ranges(1.0, f64::INFINITY, 1.0, f64::INFINITY, cfg.n, cfg.delta_samples)?;
    let rows = region_map(&grid)?;
    let h = header("region", cli.seed, &cfg)?;
    emit(cfg.out.as_deref(), &csv_report(&h, &region_csv(&rows))?)
}

fn run_lorentz(cli: &Globals, args: LorentzArgs) -> Result<()> {
    let mut cfg: LorentzConfig = load_config(cli.config.as_deref())?;
    if args.simple.is_some() {
        cfg.simple = args.simple;
    }
    if args.field.is_some() {
        cfg.field = args.field;
    }
    if args.slice.is_some() {
        cfg.slice = args.slice;
    }
    set(&mut cfg.p, args.p);
    set(&mut cfg.q, args.q);
    if args.interpolate_r.is_some() {
        cfg.interpolate_r = args.interpolate_r;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let h = header("lorentz", cli.seed, &cfg)?;
    let result = match (&cfg.simple, &cfg.field) {
        (Some(path), None) => {
            let f: SimpleFunction = serde_json::from_str(&fs::read_to_string(path)?)?;
            lorentz_result(&f, &cfg)?
        }
        (None, Some(path)) => {
            let field = load_field(path)?;
            let slice = cfg.slice.unwrap_or(field.grid.nt - 1);
            if slice >= field.grid.nt {
                return Err(Error::Config(format!("--slice {slice} exceeds the {} time slices", field.grid.nt)));
            }
            lorentz_result(&Samples::from_field_slice(&field, slice)?, &cfg)?
        }
        _ => return Err(Error::Config("give exactly one of --simple and --field".into())),
    };
    emit(cfg.out.as_deref(), &json_report(&h, &result)?)
}

fn lorentz_result<F: Distribution>(f: &F, cfg: &LorentzConfig) -> Result<Value> {
    let norm = f.lorentz_quasinorm(cfg.p, cfg.q)?;
    let interpolation = match cfg.interpolate_r {
        Some(r) => Some(interpolate_bound(f, cfg.p, r, cfg.q)?),
        None => None,
    };
    Ok(json!({ "norm": norm, "interpolation": interpolation }))
}

fn run_diagnose(cli: &Globals, args: DiagnoseArgs) -> Result<()> {
    let mut cfg: DiagnoseConfig = load_config(cli.config.as_deref())?;
    if args.field.is_some() {
        cfg.field = args.field;
    }
    if args.pressure.is_some() {
        cfg.pressure = args.pressure;
    }
    if args.center.is_some() {
        cfg.center = args.center;
    }
    if args.t0.is_some() {
        cfg.t0 = args.t0;
    }
    if let Some(r) = args.radii {
        cfg.radii = Some(r.as_string());
    }
    set(&mut cfg.q, args.q);
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let v = load_field(required(&cfg.field, "field")?)?;
    let pi = cfg.pressure.as_deref().map(load_field).transpose()?;
    let grid = v.grid;
    let center = cfg.center.unwrap_or_else(|| {
        let (lo, hi) = (grid.box_lo(), grid.box_hi());
        [0, 1, 2].map(|a| 0.5 * (lo[a] + hi[a]))
    });
    let t0 = cfg.t0.unwrap_or_else(|| grid.final_time());
    let radii = match &cfg.radii {
        Some(s) => RadiiSpec::parse(s).map_err(Error::Config)?.radii(),
        None => RadiusLadder::default_for(&grid).radii(),
    };
    let rows = quantity_profile(&v, pi.as_ref(), center, t0, &radii, cfg.q)?;
    let h = header("diagnose", cli.seed, &cfg)?;
    emit(cfg.out.as_deref(), &json_report(&h, &json!({ "center": center, "t0": t0, "rows": rows }))?)
}

fn run_scan(cli: &Globals, args: ScanArgs) -> Result<()> {
    let mut cfg: ScanCliConfig = load_config(cli.config.as_deref())?;
    if args.field.is_some() {
        cfg.field = args.field;
    }
    set(&mut cfg.mode, args.mode);
    set(&mut cfg.points, args.points);
    if args.eps.is_some() {
        cfg.eps = args.eps;
    }
    if let Some(r) = args.radii {
        cfg.radii = Some(r.as_string());
    }
    set(&mut cfg.q, args.q);
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let v = load_field(required(&cfg.field, "field")?)?;
    let points = match BasePoints::parse_grid(&cfg.points) {
        Some(p) => p,
        None => BasePoints::List(serde_json::from_str(&fs::read_to_string(&cfg.points)?)?),
    };
    let ladder = match &cfg.radii {
        None => None,
        Some(s) => match RadiiSpec::parse(s).map_err(Error::Config)? {
            RadiiSpec::Geometric(l) => Some(l),
            RadiiSpec::List(_) => return Err(Error::Config("scan radii must be geometric:r_max,factor,count".into())),
        },
    };
    let mut reg = RegularityConfig { ladder, q: cfg.q, ..RegularityConfig::default() };
    let report = match cfg.mode {
        ScanModeArg::Bq => {
            set(&mut reg.epsilon_q, cfg.eps);
            epsilon_scan(&v, &points, &reg)?
        }
        ScanModeArg::A => {
            set(&mut reg.epsilon_star, cfg.eps);
            a_scan(&v, &points, &reg)?
        }
    };
    let h = header("scan", cli.seed, &cfg)?;
    emit(cfg.out.as_deref(), &json_report(&h, &report)?)
}

fn read_candidates(path: &Path) -> Result<CandidateSet> {
    let mut value: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let inner = value.get_mut("candidates").map(Value::take).unwrap_or(value);
    Ok(serde_json::from_value(inner)?)
}

fn run_cover(cli: &Globals, args: CoverArgs) -> Result<()> {
    let mut cfg: CoverConfig = load_config(cli.config.as_deref())?;
    if args.sigma.is_some() {
        cfg.sigma = args.sigma;
    }
    if args.field.is_some() {
        cfg.field = args.field;
    }
    set(&mut cfg.delta, args.delta);
    set(&mut cfg.eps_q, args.eps_q);
    if args.eps_hat_max.is_some() {
        cfg.eps_hat_max = args.eps_hat_max;
    }
    set(&mut cfg.factor, args.factor);
    set(&mut cfg.count, args.count);
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let sigma = read_candidates(required(&cfg.sigma, "sigma")?)?;
    let v = load_field(required(&cfg.field, "field")?)?;
    let grid = v.grid;
    let eps_hat_max = cfg.eps_hat_max.unwrap_or_else(|| {
        let r_max = sigma
            .points
            .first()
            .and_then(|p| p.profile.first().map(|&(r, _)| r))
            .unwrap_or_else(|| RadiusLadder::default_for(&grid).r_max);
        let extent = grid.final_time() - grid.origin[3];
        r_max.min(extent.sqrt())
    });
    let sweep = SweepConfig { eps_hat_max, factor: cfg.factor, count: cfg.count };
    let report = covering_sweep(&v, &sigma, cfg.delta, cfg.eps_q, &sweep)?;
    let h = header("cover", cli.seed, &cfg)?;
    emit(cfg.out.as_deref(), &json_report(&h, &report)?)
}

fn read_tuple(path: &Path, delta: f64) -> Result<ExponentTuple> {
    let value: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let obj = value.get("tuple").unwrap_or(&value);
    let num = |k: &str| obj.get(k).and_then(Value::as_f64);
    let p = num("p").ok_or_else(|| Error::Config(format!("{}: tuple needs p", path.display())))?;
    let r = num("r").ok_or_else(|| Error::Config(format!("{}: tuple needs r", path.display())))?;
    if let Some(d) = num("delta") {
        if (d - delta).abs() > 1e-12 {
            return Err(Error::Config(format!("tuple delta {d} differs from --delta {delta}")));
        }
    }
    let gamma = num("gamma").unwrap_or_else(|| gamma_from_relation(p, r));
    let tuple = check_admissible(p, r, delta, gamma);
    if !tuple.is_admissible() {
        return Err(Error::Config(format!("tuple (p = {p}, r = {r}, delta = {delta}) is not admissible")));
    }
    select_theta(&tuple)
}

fn run_energy(cli: &Globals, args: EnergyArgs) -> Result<()> {
    let mut cfg: EnergyConfig = load_config(cli.config.as_deref())?;
    if args.field.is_some() {
        cfg.field = args.field;
    }
    if args.pressure.is_some() {
        cfg.pressure = args.pressure;
    }
    set(&mut cfg.delta, args.delta);
    if args.window.is_some() {
        cfg.window = args.window;
    }
    if args.tuple.is_some() {
        cfg.tuple = args.tuple;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let v = load_field(required(&cfg.field, "field")?)?;
    let [t1, t] = cfg.window.unwrap_or([v.grid.origin[3], v.grid.final_time()]);
    let ledger = energy_functional(&v, cfg.delta, t1, t)?;
    let pressure = match (&cfg.pressure, &cfg.tuple) {
        (Some(pp), Some(tp)) => {
            let pi = load_field(pp)?;
            let tuple = read_tuple(tp, cfg.delta)?;
            Some(json!({ "tuple": tuple, "bound": pressure_term_bound(&v, &pi, &tuple, t1, t)? }))
        }
        (None, None) => None,
        _ => return Err(Error::Config("the pressure bound needs both --pressure and --tuple".into())),
    };
    let h = header("energy", cli.seed, &cfg)?;
    emit(cfg.out.as_deref(), &json_report(&h, &json!({ "ledger": ledger, "pressure_term": pressure }))?)
}

fn run_harness(cli: &Globals, args: HarnessArgs) -> Result<()> {
    let mut cfg: HarnessCliConfig = load_config(cli.config.as_deref())?;
    set(&mut cfg.members, args.members);
    set(&mut cfg.n, args.n);
    set(&mut cfg.nt, args.nt);
    set(&mut cfg.q, args.q);
    set(&mut cfg.pairs, args.pairs);
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let specs = band_limited_ensemble(cfg.grid()?, cli.seed, cfg.members);
    let report = lemma_ratio_harness_specs(&specs, &HarnessConfig { q: cfg.q, pairs: cfg.pairs.clone(), centers: None })?;
    let h = header("harness", cli.seed, &cfg)?;
    emit(cfg.out.as_deref(), &json_report(&h, &report)?)
}

/// Settings shared by every subcommand.
struct Globals {
    config: Option<PathBuf>,
    seed: u64,
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        // A pool may already exist when running in-process; it is then reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let g = Globals { config: cli.config, seed: cli.seed };
    match cli.command {
        Command::Gen(a) => run_gen(&g, a),
        Command::Theta(a) => run_theta(&g, a),
        Command::Region(a) => run_region(&g, a),
        Command::Lorentz(a) => run_lorentz(&g, a),
        Command::Diagnose(a) => run_diagnose(&g, a),
        Command::Scan(a) => run_scan(&g, a),
        Command::Cover(a) => run_cover(&g, a),
        Command::Energy(a) => run_energy(&g, a),
        Command::Harness(a) => run_harness(&g, a),
    }
}

/// Parses `args`, runs the subcommand, and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("nsreg: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}
