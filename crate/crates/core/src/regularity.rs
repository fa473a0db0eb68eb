//! Epsilon-regularity scans, the decay iteration, and the lemma ratio harness.
//!
//! A scan evaluates `B_q` (or `A`) at the final grid time over a geometric
//! radius ladder for every base point and flags points whose supremum reaches
//! the threshold. Small suprema mean the criterion certifies regularity, so
//! only large-supremum points remain candidate singular points.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{generate_field, generate_pressure, Field, FieldKind, FieldSpec, SpaceTimeGrid};
use crate::localq::{self, check_q, evaluate_a, evaluate_bq, evaluate_cylinder, ParabolicCylinder, Wanted};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusLadder {
    pub r_max: f64,
    pub factor: f64,
    pub count: usize,
}

impl RadiusLadder {
    /// A quarter of the shortest box half-width, halved eight times.
    pub fn default_for(grid: &SpaceTimeGrid) -> Self {
        Self { r_max: 0.25 * grid.min_half_width(), factor: 0.5, count: 8 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!("ladder r_max = {} must be positive", self.r_max)));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::Config(format!("ladder factor = {} must lie in (0, 1)", self.factor)));
        }
        if self.count == 0 {
            return Err(Error::Config("ladder needs at least one rung".into()));
        }
        Ok(())
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.r_max * self.factor.powi(j as i32)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityConfig {
    pub epsilon_q: f64,
    pub epsilon_star: f64,
    /// `None` uses [`RadiusLadder::default_for`] on the scanned grid.
    pub ladder: Option<RadiusLadder>,
    pub q: f64,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        Self { epsilon_q: 0.05, epsilon_star: 0.1, ladder: None, q: 2.6 }
    }
}

impl RegularityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_q > 0.0) || !(self.epsilon_star > 0.0) {
            return Err(Error::Config("scan thresholds must be positive".into()));
        }
        check_q(self.q)?;
        if let Some(l) = &self.ladder {
            l.validate()?;
        }
        Ok(())
    }

    pub fn ladder_for(&self, grid: &SpaceTimeGrid) -> RadiusLadder {
        self.ladder.unwrap_or_else(|| RadiusLadder::default_for(grid))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasePoints {
    /// `n^3` evenly spaced points whose largest cylinder stays inside the box.
    Grid(usize),
    List(Vec<[f64; 3]>),
}

impl BasePoints {
    /// Parses `grid`, `grid:N` (default `N = 9`).
    pub fn parse_grid(s: &str) -> Option<Self> {
        match s.strip_prefix("grid") {
            Some("") => Some(BasePoints::Grid(9)),
            Some(rest) => rest.strip_prefix(':')?.parse().ok().map(BasePoints::Grid),
            None => None,
        }
    }

    pub fn resolve(&self, grid: &SpaceTimeGrid, r_max: f64) -> Result<Vec<[f64; 3]>> {
        match self {
            BasePoints::List(points) => Ok(points.clone()),
            BasePoints::Grid(n) => {
                if *n == 0 {
                    return Err(Error::Config("grid base points need n >= 1".into()));
                }
                let counts = grid.counts();
                let mut axes = Vec::with_capacity(3);
                for a in 0..3 {
                    let h = grid.spacing[a];
                    let lo = grid.origin[a] + 1.5 * h + r_max;
                    let hi = grid.origin[a] + (counts[a] as f64 - 1.5) * h - r_max;
                    if lo > hi {
                        return Err(Error::CylinderOutOfDomain(format!(
                            "no base point keeps a ball of radius {r_max} inside the box along axis {a}"
                        )));
                    }
                    let coords: Vec<f64> = if *n == 1 {
                        vec![0.5 * (lo + hi)]
                    } else {
                        (0..*n).map(|i| lo + (hi - lo) * i as f64 / (*n - 1) as f64).collect()
                    };
                    axes.push(coords);
                }
                let mut points = Vec::with_capacity(n * n * n);
                for &z in &axes[2] {
                    for &y in &axes[1] {
                        for &x in &axes[0] {
                            points.push([x, y, z]);
                        }
                    }
                }
                Ok(points)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// `B_q` criterion.
    Bq,
    /// Kinetic-energy criterion on `A`.
    A,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointProfile {
    pub x: [f64; 3],
    pub t: f64,
    /// `(radius, value)` over the ladder, largest radius first.
    pub profile: Vec<(f64, f64)>,
    pub sup: f64,
    pub argmax_r: f64,
    pub flagged: bool,
}

/// Flagged points, sorted lexicographically by position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub mode: ScanMode,
    pub threshold: f64,
    pub q: f64,
    pub points: Vec<PointProfile>,
}

impl CandidateSet {
    pub fn empty(mode: ScanMode, threshold: f64, q: f64) -> Self {
        Self { mode, threshold, q, points: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub radii: Vec<f64>,
    /// Every scanned point in input order.
    pub profiles: Vec<PointProfile>,
    pub candidates: CandidateSet,
}

fn lexicographic(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(a[2].total_cmp(&b[2]))
}

fn scan(v: &Field, points: &BasePoints, config: &RegularityConfig, mode: ScanMode) -> Result<ScanReport> {
    config.validate()?;
    v.require_components(3, "velocity")?;
    let grid = &v.grid;
    let ladder = config.ladder_for(grid);
    ladder.validate()?;
    let radii = ladder.radii();
    let base = points.resolve(grid, ladder.r_max)?;
    let t = grid.final_time();
    let threshold = match mode {
        ScanMode::Bq => config.epsilon_q,
        ScanMode::A => config.epsilon_star,
    };

    let profiles: Vec<PointProfile> = base
        .par_iter()
        .map(|&x| {
            let mut profile = Vec::with_capacity(radii.len());
            for &r in &radii {
                let cyl = ParabolicCylinder::new(x, t, r);
                let value = match mode {
                    ScanMode::Bq => evaluate_bq(v, &cyl, config.q)?,
                    ScanMode::A => evaluate_a(v, &cyl)?,
                };
                profile.push((r, value));
            }
            let (argmax_r, sup) = profile
                .iter()
                .copied()
                .fold((radii[0], f64::NEG_INFINITY), |best, (r, val)| if val > best.1 { (r, val) } else { best });
            Ok(PointProfile { x, t, profile, sup, argmax_r, flagged: sup >= threshold })
        })
        .collect::<Result<_>>()?;

    let mut flagged: Vec<PointProfile> = profiles.iter().filter(|p| p.flagged).cloned().collect();
    flagged.sort_by(|a, b| lexicographic(&a.x, &b.x));
    Ok(ScanReport {
        radii,
        profiles,
        candidates: CandidateSet { mode, threshold, q: config.q, points: flagged },
    })
}

/// Flags points with `sup_r B_q >= epsilon_q` at the final grid time.
pub fn epsilon_scan(v: &Field, points: &BasePoints, config: &RegularityConfig) -> Result<ScanReport> {
    scan(v, points, config, ScanMode::Bq)
}

/// Flags points with `sup_r A >= epsilon_star` at the final grid time.
pub fn a_scan(v: &Field, points: &BasePoints, config: &RegularityConfig) -> Result<ScanReport> {
    scan(v, points, config, ScanMode::A)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    /// Radius ratio per step, in `(0, 1/2]`.
    pub theta_decay: f64,
    /// Young's inequality auxiliary.
    pub delta_aux: f64,
    pub epsilon: f64,
    #[serde(default = "default_c11")]
    pub c11: f64,
    pub q: f64,
}

fn default_c11() -> f64 {
    1.0
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        let th = self.theta_decay;
        if !(th > 0.0 && th <= 0.5) {
            return Err(Error::Config(format!("theta = {th} must lie in (0, 1/2]")));
        }
        if !(self.delta_aux > 0.0) {
            return Err(Error::Config(format!("delta = {} must be positive", self.delta_aux)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon = {} must lie in [0, 1)", self.epsilon)));
        }
        if !(self.c11 > 0.0) {
            return Err(Error::Config(format!("C11 = {} must be positive", self.c11)));
        }
        check_q(self.q).map_err(|e| Error::Config(e.to_string()))?;
        if 2.0 * self.c11 * th > 1.0 {
            return Err(Error::Config(format!("2 C11 theta = {} exceeds 1", 2.0 * self.c11 * th)));
        }
        if !(self.c11 * self.delta_aux < 0.5 * th * th) {
            return Err(Error::Config(format!(
                "C11 delta = {} is not below theta^2 / 2 = {}",
                self.c11 * self.delta_aux,
                0.5 * th * th
            )));
        }
        Ok(())
    }

    /// `G = C11 (eps + delta^{-(4-q)/(q-2)} eps^{1/(q-2)} theta^{-12/(q-2)})`.
    pub fn g_term(&self) -> f64 {
        let q = self.q;
        let e = self.epsilon;
        if e == 0.0 {
            return 0.0;
        }
        self.c11
            * (e + self.delta_aux.powf(-(4.0 - q) / (q - 2.0))
                * e.powf(1.0 / (q - 2.0))
                * self.theta_decay.powf(-12.0 / (q - 2.0)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub theta: f64,
    pub g: f64,
    /// `E_0, ..., E_k` with `E_{j+1} = theta^2 E_j + G`.
    pub sequence: Vec<f64>,
    /// `theta^{2j} E_0 + G (1 - theta^{2j}) / (1 - theta^2)`.
    pub closed_form: Vec<f64>,
    /// `theta^{2k} E_0 + G / (1 - theta^2)`.
    pub iterated_bound: f64,
    /// `(r^2 / theta^6) E_0 + G / (theta^4 (1 - theta^2))` at `r = theta^k`.
    pub radius_bound: f64,
}

/// Worst-case recursion `E_{j+1} = theta^2 E_j + g`.
pub fn iterate_recursion(e0: f64, theta: f64, g: f64, k: usize) -> Vec<f64> {
    let t2 = theta * theta;
    let mut seq = Vec::with_capacity(k + 1);
    let mut e = e0;
    seq.push(e);
    for _ in 0..k {
        e = t2 * e + g;
        seq.push(e);
    }
    seq
}

/// Simulates the decay recursion and checks it against both closed-form bounds.
pub fn iterate_decay(e0: f64, config: &IterationConfig, k: usize) -> Result<DecayReport> {
    config.validate()?;
    if !(e0 >= 0.0 && e0.is_finite()) {
        return Err(Error::Config(format!("E0 = {e0} must be finite and nonnegative")));
    }
    let th = config.theta_decay;
    let t2 = th * th;
    let g = config.g_term();
    if !g.is_finite() {
        return Err(Error::Domain(format!(
            "G overflows for theta = {th}, q = {}; use a larger theta or q further from 2",
            config.q
        )));
    }
    let sequence = iterate_recursion(e0, th, g, k);
    let closed_form: Vec<f64> = (0..=k)
        .map(|j| {
            let p = t2.powi(j as i32);
            p * e0 + g * (1.0 - p) / (1.0 - t2)
        })
        .collect();
    let iterated_bound = t2.powi(k as i32) * e0 + g / (1.0 - t2);
    let r = th.powi(k as i32);
    let radius_bound = r * r / th.powi(6) * e0 + g / (th.powi(4) * (1.0 - t2));
    for (j, &e) in sequence.iter().enumerate() {
        let bound = t2.powi(j as i32) * e0 + g / (1.0 - t2);
        if e > bound * (1.0 + 1e-12) {
            return Err(Error::InternalContradiction(format!(
                "step {j}: E = {e} exceeds the iterated bound {bound}"
            )));
        }
    }
    Ok(DecayReport { theta: th, g, sequence, closed_form, iterated_bound, radius_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub q: f64,
    /// `(r, rho)` with `r <= rho`.
    pub pairs: Vec<(f64, f64)>,
    /// Cylinder centers; `None` uses the box center.
    #[serde(default)]
    pub centers: Option<Vec<[f64; 3]>>,
}

/// Fitted constant for one inequality: the ensemble supremum of
/// `lhs / rhs-without-constant`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FittedConstant {
    pub inequality: &'static str,
    pub sup_ratio: f64,
    pub argmax_member: Option<usize>,
    pub evaluations: usize,
    /// Evaluations where the right side vanished but the left side did not.
    pub degenerate: usize,
    pub finite: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnessReport {
    pub q: f64,
    pub pairs: Vec<(f64, f64)>,
    pub members: usize,
    pub constants: Vec<FittedConstant>,
}

pub const HARNESS_INEQUALITIES: [&str; 4] = [
    "oscillation_bound",
    "gradient_speed_bound",
    "cubic_decay_bound",
    "pressure_decay_bound",
];

#[derive(Clone, Copy, Debug, Default)]
struct Ratio {
    value: f64,
    degenerate: bool,
}

fn ratio(lhs: f64, rhs: f64) -> Ratio {
    if rhs > 0.0 {
        Ratio { value: lhs / rhs, degenerate: false }
    } else if lhs > 0.0 {
        Ratio { value: 0.0, degenerate: true }
    } else {
        Ratio { value: 0.0, degenerate: false }
    }
}

fn member_ratios(v: &Field, pi: Option<&Field>, cfg: &HarnessConfig) -> Result<[Vec<Ratio>; 4]> {
    let q = cfg.q;
    let grid = &v.grid;
    let t0 = grid.final_time();
    let centers = match &cfg.centers {
        Some(c) => c.clone(),
        None => {
            let lo = grid.box_lo();
            let hi = grid.box_hi();
            vec![[0, 1, 2].map(|a| 0.5 * (lo[a] + hi[a]))]
        }
    };
    let mut out: [Vec<Ratio>; 4] = Default::default();
    for &x0 in &centers {
        for &(r, rho) in &cfg.pairs {
            let small = evaluate_cylinder(v, pi, &ParabolicCylinder::new(x0, t0, r), q)?;
            let big = evaluate_cylinder(v, pi, &ParabolicCylinder::new(x0, t0, rho), q)?;

            let rhs = small.a.powf((4.0 - q) / 4.0) * small.c.powf(1.0 / 3.0) * small.bq.sqrt();
            out[0].push(ratio(small.s, rhs));

            let wanted = Wanted { speed2: true, bq: true, grad_speed: true, ..Wanted::default() };
            let cs = localq::window_slices(v, None, x0, r, t0 - r * r, t0, q, wanted)?;
            for s in &cs.slices {
                let rhs = r.powf(3.0 * (q - 2.0) / 4.0) * s.speed2.powf((4.0 - q) / 4.0) * s.bq.sqrt();
                out[1].push(ratio(s.grad_speed, rhs));
            }

            let growth = big.a.powf(3.0 * (4.0 - q) / 8.0) * big.bq.powf(0.75);
            let rhs = (r / rho).powi(3) * big.a.powf(1.5) + growth * (rho / r).powi(3);
            out[2].push(ratio(small.c, rhs));

            if let (Some(d_small), Some(d_big)) = (small.d, big.d) {
                let rhs = (rho / r).powi(2) * growth + (r / rho).powf(2.5) * d_big;
                out[3].push(ratio(d_small, rhs));
            }
        }
    }
    Ok(out)
}

fn validate_harness(cfg: &HarnessConfig) -> Result<()> {
    check_q(cfg.q)?;
    if cfg.pairs.is_empty() {
        return Err(Error::Config("harness needs at least one (r, rho) pair".into()));
    }
    for &(r, rho) in &cfg.pairs {
        if !(r > 0.0 && r <= rho) {
            return Err(Error::Config(format!("pair ({r}, {rho}) must satisfy 0 < r <= rho")));
        }
    }
    Ok(())
}

fn assemble(cfg: &HarnessConfig, per_member: Vec<[Vec<Ratio>; 4]>) -> HarnessReport {
    let constants = HARNESS_INEQUALITIES
        .iter()
        .enumerate()
        .map(|(which, name)| {
            let mut sup = 0.0;
            let mut argmax = None;
            let mut evaluations = 0;
            let mut degenerate = 0;
            for (m, ratios) in per_member.iter().enumerate() {
                for r in &ratios[which] {
                    evaluations += 1;
                    if r.degenerate {
                        degenerate += 1;
                    } else if r.value > sup || argmax.is_none() {
                        sup = r.value.max(sup);
                        argmax = Some(m);
                    }
                }
            }
            FittedConstant {
                inequality: name,
                sup_ratio: sup,
                argmax_member: argmax,
                evaluations,
                degenerate,
                finite: sup.is_finite(),
            }
        })
        .collect();
    HarnessReport { q: cfg.q, pairs: cfg.pairs.clone(), members: per_member.len(), constants }
}

/// Fits the implied constants of the four local inequalities over an ensemble.
pub fn lemma_ratio_harness(ensemble: &[(Field, Option<Field>)], cfg: &HarnessConfig) -> Result<HarnessReport> {
    validate_harness(cfg)?;
    if ensemble.is_empty() {
        return Err(Error::Config("harness ensemble is empty".into()));
    }
    let per_member = ensemble
        .par_iter()
        .map(|(v, pi)| member_ratios(v, pi.as_ref(), cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(cfg, per_member))
}

/// Same as [`lemma_ratio_harness`] but generates each member on demand.
pub fn lemma_ratio_harness_specs(specs: &[FieldSpec], cfg: &HarnessConfig) -> Result<HarnessReport> {
    validate_harness(cfg)?;
    if specs.is_empty() {
        return Err(Error::Config("harness ensemble is empty".into()));
    }
    let per_member = specs
        .par_iter()
        .map(|spec| {
            let v = generate_field(spec)?;
            let pi = generate_pressure(spec)?;
            member_ratios(&v, Some(&pi), cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(cfg, per_member))
}

/// Band-limited ensemble; member `i` draws from seed `seed + i` and its own
/// amplitude and bandwidth so the ensemble covers several scales.
pub fn band_limited_ensemble(grid: SpaceTimeGrid, seed: u64, count: usize) -> Vec<FieldSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let kind = FieldKind::BandLimited {
                seed: seed.wrapping_add(i as u64),
                modes: rng.gen_range(4..=12),
                amplitude: rng.gen_range(0.5..=2.0),
                max_wavenumber: rng.gen_range(1.0..=4.0),
            };
            FieldSpec::new(kind, grid)
        })
        .collect()
}
