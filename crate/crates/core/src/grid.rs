//! Uniform space-time grids, synthetic fields, parabolic rescaling and the
//! `NSFD` binary container.
//!
//! Spatial samples sit at cell centers: sample `(i, j, k)` lives at
//! `origin + (i + 1/2, j + 1/2, k + 1/2) * h`, so the grid box is
//! `[origin, origin + n h]` on each axis. Time samples sit on nodes
//! `t_n = t_0 + n h_t`; the final time is `t_0 + (nt - 1) h_t`.
//!
//! Arrays are stored component-planar, time-major, then `z`, `y`, `x`:
//! `data[c][((n * nz + k) * ny + j) * nx + i]`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of stored `f64` values per generated field.
pub const DEFAULT_VALUE_BUDGET: u128 = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub nt: usize,
    /// Lower box corner `(x, y, z)` and first sample time.
    pub origin: [f64; 4],
    /// `(hx, hy, hz, ht)`
    pub spacing: [f64; 4],
}

impl SpaceTimeGrid {
    /// Cube `[lo, hi]^3` with `n` cells per axis and `nt` time nodes from `t0` to `t1`.
    pub fn cube(lo: f64, hi: f64, n: usize, t0: f64, t1: f64, nt: usize) -> Result<Self> {
        if nt < 2 {
            return Err(Error::InvalidGrid(format!("nt = {nt} must be at least 2")));
        }
        let h = (hi - lo) / n as f64;
        let grid = Self {
            nx: n,
            ny: n,
            nz: n,
            nt,
            origin: [lo, lo, lo, t0],
            spacing: [h, h, h, (t1 - t0) / (nt - 1) as f64],
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in self.counts_named() {
            if n < 2 {
                return Err(Error::InvalidGrid(format!("{name} = {n} must be at least 2")));
            }
        }
        for (axis, h) in self.spacing.iter().enumerate() {
            if !(*h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidGrid(format!("spacing[{axis}] = {h} must be positive")));
            }
        }
        if let Some(o) = self.origin.iter().find(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid(format!("origin entry {o} is not finite")));
        }
        Ok(())
    }

    fn counts_named(&self) -> [(&'static str, usize); 4] {
        [("nx", self.nx), ("ny", self.ny), ("nz", self.nz), ("nt", self.nt)]
    }

    pub fn counts(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn spatial_len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn len(&self) -> usize {
        self.spatial_len() * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fails when `components * len` exceeds the value budget.
    pub fn check_budget(&self, components: usize, budget: u128) -> Result<()> {
        let samples = components as u128
            * self.nx as u128
            * self.ny as u128
            * self.nz as u128
            * self.nt as u128;
        if samples > budget {
            return Err(Error::GridTooLarge { samples, budget });
        }
        Ok(())
    }

    #[inline]
    pub fn spatial_index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    /// Cell-center coordinate of index `i` along `axis`.
    #[inline]
    pub fn center(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + (i as f64 + 0.5) * self.spacing[axis]
    }

    #[inline]
    pub fn time(&self, n: usize) -> f64 {
        self.origin[3] + n as f64 * self.spacing[3]
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.nt - 1)
    }

    pub fn box_lo(&self) -> [f64; 3] {
        [self.origin[0], self.origin[1], self.origin[2]]
    }

    pub fn box_hi(&self) -> [f64; 3] {
        let c = self.counts();
        [0, 1, 2].map(|a| self.origin[a] + c[a] as f64 * self.spacing[a])
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    pub fn box_volume(&self) -> f64 {
        self.cell_volume() * self.spatial_len() as f64
    }

    /// Smallest half-width of the spatial box.
    pub fn min_half_width(&self) -> f64 {
        let c = self.counts();
        (0..3)
            .map(|a| 0.5 * c[a] as f64 * self.spacing[a])
            .fold(f64::INFINITY, f64::min)
    }

    /// Grid whose samples map onto this grid's samples under
    /// `(x, t) -> (lambda x, lambda^2 t)`.
    pub fn pulled_back(&self, lambda: f64) -> Self {
        let l2 = lambda * lambda;
        Self {
            origin: [
                self.origin[0] / lambda,
                self.origin[1] / lambda,
                self.origin[2] / lambda,
                self.origin[3] / l2,
            ],
            spacing: [
                self.spacing[0] / lambda,
                self.spacing[1] / lambda,
                self.spacing[2] / lambda,
                self.spacing[3] / l2,
            ],
            ..*self
        }
    }
}

/// Samples of a scalar (`1` component) or vector (`3` components) field.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: SpaceTimeGrid,
    pub data: Vec<Vec<f64>>,
}

/// Three components.
pub type VectorField = Field;
/// One component.
pub type ScalarField = Field;

impl Field {
    pub fn new(grid: SpaceTimeGrid, data: Vec<Vec<f64>>) -> Result<Self> {
        grid.validate()?;
        if data.is_empty() {
            return Err(Error::InvalidGrid("a field needs at least one component".into()));
        }
        for (c, comp) in data.iter().enumerate() {
            if comp.len() != grid.len() {
                return Err(Error::InvalidGrid(format!(
                    "component {c} has {} values, grid needs {}",
                    comp.len(),
                    grid.len()
                )));
            }
            if let Some(v) = comp.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidGrid(format!("component {c} holds non-finite value {v}")));
            }
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: SpaceTimeGrid, components: usize) -> Result<Self> {
        grid.validate()?;
        grid.check_budget(components, DEFAULT_VALUE_BUDGET)?;
        Ok(Self { grid, data: vec![vec![0.0; grid.len()]; components] })
    }

    pub fn components(&self) -> usize {
        self.data.len()
    }

    pub fn require_components(&self, n: usize, what: &str) -> Result<()> {
        if self.components() != n {
            return Err(Error::InvalidGrid(format!(
                "{what} needs {n} component(s), field has {}",
                self.components()
            )));
        }
        Ok(())
    }

    /// One component of one time slice.
    pub fn slice(&self, component: usize, n: usize) -> &[f64] {
        let s = self.grid.spatial_len();
        &self.data[component][n * s..(n + 1) * s]
    }

    /// Euclidean magnitude across components at `(slice, spatial index)`.
    #[inline]
    pub fn magnitude(&self, n: usize, idx: usize) -> f64 {
        let at = n * self.grid.spatial_len() + idx;
        let mut s = 0.0;
        for comp in &self.data {
            s += comp[at] * comp[at];
        }
        s.sqrt()
    }

    pub fn max_magnitude(&self, n: usize) -> f64 {
        (0..self.grid.spatial_len())
            .map(|idx| self.magnitude(n, idx))
            .fold(0.0, f64::max)
    }

    fn scaled_onto(&self, grid: SpaceTimeGrid, factor: f64) -> Self {
        Self {
            grid,
            data: self.data.iter().map(|c| c.iter().map(|v| v * factor).collect()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Profile {
    /// `U(y) = amplitude * exp(-|y|^2 / width^2) * e1`
    Gaussian { amplitude: f64, width: f64 },
    /// `U(y) = amplitude * (-y2, y1, 0) * exp(-|y|^2 / width^2)`, divergence free.
    Swirl { amplitude: f64, width: f64 },
}

impl Profile {
    pub fn width(&self) -> f64 {
        match *self {
            Profile::Gaussian { width, .. } | Profile::Swirl { width, .. } => width,
        }
    }

    pub fn eval(&self, y: [f64; 3]) -> [f64; 3] {
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        match *self {
            Profile::Gaussian { amplitude, width } => {
                [amplitude * (-r2 / (width * width)).exp(), 0.0, 0.0]
            }
            Profile::Swirl { amplitude, width } => {
                let g = amplitude * (-r2 / (width * width)).exp();
                [-y[1] * g, y[0] * g, 0.0]
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FieldKind {
    Zero,
    Constant {
        value: [f64; 3],
    },
    /// `v = (x1, -x2, 0)`
    LinearShear,
    /// Taylor-Green cell `a e^{-d t} (sin kx cos ky cos kz, -cos kx sin ky cos kz, 0)`.
    TaylorLike {
        amplitude: f64,
        wavenumber: f64,
        #[serde(default)]
        decay: f64,
    },
    /// `v = (T - t)^{-1/2} U((x - c) / sqrt(T - t))`
    BlowupProfile {
        t_blow: f64,
        center: [f64; 3],
        profile: Profile,
    },
    /// Random divergence-free superposition of plane waves.
    BandLimited {
        seed: u64,
        modes: usize,
        amplitude: f64,
        max_wavenumber: f64,
    },
}

fn default_scale() -> f64 {
    1.0
}

/// Recipe for a synthetic field. `scale = s` evaluates `s v(s x, s^2 t)`
/// (and `s^2 pi(s x, s^2 t)` for the companion pressure).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub grid: SpaceTimeGrid,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

impl FieldSpec {
    pub fn new(kind: FieldKind, grid: SpaceTimeGrid) -> Self {
        Self { kind, grid, scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidGrid(format!("scale {} must be positive", self.scale)));
        }
        match self.kind {
            FieldKind::BlowupProfile { t_blow, profile, .. } => {
                let last = self.scale * self.scale * self.grid.final_time();
                if !(t_blow > last) {
                    return Err(Error::InvalidGrid(format!(
                        "blow-up time {t_blow} must exceed the final grid time {last}"
                    )));
                }
                if !(profile.width() > 0.0) {
                    return Err(Error::InvalidGrid("profile width must be positive".into()));
                }
            }
            FieldKind::BandLimited { modes, max_wavenumber, .. } => {
                if modes == 0 || !(max_wavenumber > 0.0) {
                    return Err(Error::InvalidGrid(
                        "band-limited fields need modes >= 1 and a positive max wavenumber".into(),
                    ));
                }
            }
            FieldKind::TaylorLike { wavenumber, .. } if !wavenumber.is_finite() => {
                return Err(Error::InvalidGrid("wavenumber must be finite".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// The same field pulled back by `(x, t) -> (lambda x, lambda^2 t)`, sampled
    /// on the pulled-back grid. Evaluation stays analytic.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            kind: self.kind,
            grid: self.grid.pulled_back(lambda),
            scale: self.scale * lambda,
        })
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator::new(self)
    }
}

#[derive(Clone, Copy, Debug)]
struct Wave {
    k: [f64; 3],
    amp: [f64; 3],
    omega: f64,
    phase: f64,
}

/// Pointwise evaluation of a [`FieldSpec`].
#[derive(Clone, Debug)]
pub struct Evaluator {
    kind: FieldKind,
    scale: f64,
    velocity_waves: Vec<Wave>,
    pressure_waves: Vec<Wave>,
}

impl Evaluator {
    fn new(spec: &FieldSpec) -> Self {
        let (velocity_waves, pressure_waves) = match spec.kind {
            FieldKind::BandLimited { seed, modes, amplitude, max_wavenumber } => {
                band_limited_waves(seed, modes, amplitude, max_wavenumber)
            }
            _ => (Vec::new(), Vec::new()),
        };
        Self { kind: spec.kind, scale: spec.scale, velocity_waves, pressure_waves }
    }

    fn base_velocity(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        match self.kind {
            FieldKind::Zero => [0.0; 3],
            FieldKind::Constant { value } => value,
            FieldKind::LinearShear => [x[0], -x[1], 0.0],
            FieldKind::TaylorLike { amplitude, wavenumber: k, decay } => {
                let a = amplitude * (-decay * t).exp();
                let (sx, cx) = (k * x[0]).sin_cos();
                let (sy, cy) = (k * x[1]).sin_cos();
                let cz = (k * x[2]).cos();
                [a * sx * cy * cz, -a * cx * sy * cz, 0.0]
            }
            FieldKind::BlowupProfile { t_blow, center, profile } => {
                let tau = t_blow - t;
                let s = tau.sqrt();
                let y = [0, 1, 2].map(|a| (x[a] - center[a]) / s);
                profile.eval(y).map(|u| u / s)
            }
            FieldKind::BandLimited { .. } => {
                let mut v = [0.0; 3];
                for w in &self.velocity_waves {
                    let c = (w.k[0] * x[0] + w.k[1] * x[1] + w.k[2] * x[2] + w.omega * t + w.phase).cos();
                    for a in 0..3 {
                        v[a] += w.amp[a] * c;
                    }
                }
                v
            }
        }
    }

    fn base_pressure(&self, x: [f64; 3], t: f64) -> f64 {
        match self.kind {
            FieldKind::BandLimited { .. } => self
                .pressure_waves
                .iter()
                .map(|w| w.amp[0] * (w.k[0] * x[0] + w.k[1] * x[1] + w.k[2] * x[2] + w.omega * t + w.phase).cos())
                .sum(),
            _ => {
                let v = self.base_velocity(x, t);
                -0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            }
        }
    }

    pub fn velocity(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let s = self.scale;
        self.base_velocity(x.map(|c| s * c), s * s * t).map(|c| s * c)
    }

    /// Companion scalar used as a pressure stand-in. Not a Navier-Stokes
    /// pressure: `-|v|^2 / 2` for deterministic kinds, an independent random
    /// superposition for band-limited fields.
    pub fn pressure(&self, x: [f64; 3], t: f64) -> f64 {
        let s = self.scale;
        s * s * self.base_pressure(x.map(|c| s * c), s * s * t)
    }
}

fn band_limited_waves(seed: u64, modes: usize, amplitude: f64, kmax: f64) -> (Vec<Wave>, Vec<Wave>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = amplitude / (modes as f64).sqrt();
    let draw_k = |rng: &mut ChaCha8Rng| {
        loop {
            let k = [0; 3].map(|_| rng.gen_range(-kmax..=kmax));
            if k.iter().map(|c| c * c).sum::<f64>() > 1e-6 * kmax * kmax {
                return k;
            }
        }
    };
    let mut velocity = Vec::with_capacity(modes);
    for _ in 0..modes {
        let k = draw_k(&mut rng);
        let raw = [0; 3].map(|_| rng.gen_range(-1.0..=1.0));
        // project out the wavevector so each wave is divergence free
        let kk: f64 = k.iter().map(|c| c * c).sum();
        let dot: f64 = (0..3).map(|a| raw[a] * k[a]).sum();
        let amp = [0, 1, 2].map(|a| norm * (raw[a] - dot / kk * k[a]));
        let omega = rng.gen_range(0.0..=kmax);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        velocity.push(Wave { k, amp, omega, phase });
    }
    let mut pressure = Vec::with_capacity(modes);
    for _ in 0..modes {
        let k = draw_k(&mut rng);
        let a = norm * norm * rng.gen_range(-1.0..=1.0);
        let omega = rng.gen_range(0.0..=kmax);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        pressure.push(Wave { k, amp: [a, 0.0, 0.0], omega, phase });
    }
    (velocity, pressure)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("rescaling factor {lambda} must be positive")));
    }
    Ok(())
}

fn sample<F>(grid: &SpaceTimeGrid, components: usize, f: F) -> Vec<Vec<f64>>
where
    F: Fn([f64; 3], f64) -> [f64; 3] + Sync,
{
    let s = grid.spatial_len();
    let values: Vec<[f64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|at| {
            let n = at / s;
            let idx = at % s;
            let i = idx % grid.nx;
            let j = (idx / grid.nx) % grid.ny;
            let k = idx / (grid.nx * grid.ny);
            let x = [grid.center(0, i), grid.center(1, j), grid.center(2, k)];
            f(x, grid.time(n))
        })
        .collect();
    (0..components).map(|c| values.iter().map(|v| v[c]).collect()).collect()
}

/// Samples the velocity of `spec` on its grid.
pub fn generate_field(spec: &FieldSpec) -> Result<VectorField> {
    generate_field_within(spec, DEFAULT_VALUE_BUDGET)
}

pub fn generate_field_within(spec: &FieldSpec, budget: u128) -> Result<VectorField> {
    spec.validate()?;
    spec.grid.check_budget(3, budget)?;
    let ev = spec.evaluator();
    let data = sample(&spec.grid, 3, |x, t| ev.velocity(x, t));
    Field::new(spec.grid, data)
}

/// Samples the companion pressure stand-in of `spec`.
pub fn generate_pressure(spec: &FieldSpec) -> Result<ScalarField> {
    generate_pressure_within(spec, DEFAULT_VALUE_BUDGET)
}

pub fn generate_pressure_within(spec: &FieldSpec, budget: u128) -> Result<ScalarField> {
    spec.validate()?;
    spec.grid.check_budget(1, budget)?;
    let ev = spec.evaluator();
    let data = sample(&spec.grid, 1, |x, t| [ev.pressure(x, t), 0.0, 0.0]);
    Field::new(spec.grid, data)
}

/// `v_lambda(x, t) = lambda v(lambda x, lambda^2 t)` on the pulled-back grid.
///
/// Pulled-back samples land exactly on source samples, so no interpolation is
/// involved; `lambda = 1` returns a bit-exact copy.
pub fn rescale(v: &VectorField, lambda: f64) -> Result<VectorField> {
    check_lambda(lambda)?;
    Ok(v.scaled_onto(v.grid.pulled_back(lambda), lambda))
}

/// `pi_lambda(x, t) = lambda^2 pi(lambda x, lambda^2 t)` on the pulled-back grid.
pub fn rescale_pressure(pi: &ScalarField, lambda: f64) -> Result<ScalarField> {
    check_lambda(lambda)?;
    Ok(pi.scaled_onto(pi.grid.pulled_back(lambda), lambda * lambda))
}

/// Rescales onto an arbitrary target grid: `lambda^power f(lambda x, lambda^2 t)`
/// with trilinear interpolation between cell centers and linear interpolation
/// in time.
pub fn rescale_onto(f: &Field, lambda: f64, power: i32, target: &SpaceTimeGrid) -> Result<Field> {
    check_lambda(lambda)?;
    target.validate()?;
    target.check_budget(f.components(), DEFAULT_VALUE_BUDGET)?;
    let src = &f.grid;
    let factor = lambda.powi(power);
    let l2 = lambda * lambda;

    // fractional sample coordinates of every target node, per axis
    let frac = |axis: usize, count: usize| -> Result<Vec<(usize, f64)>> {
        (0..count)
            .map(|i| {
                let x = lambda * target.center(axis, i);
                let u = (x - src.origin[axis]) / src.spacing[axis] - 0.5;
                locate(u, src.counts()[axis], x, axis)
            })
            .collect()
    };
    let fx = frac(0, target.nx)?;
    let fy = frac(1, target.ny)?;
    let fz = frac(2, target.nz)?;
    let ft: Vec<(usize, f64)> = (0..target.nt)
        .map(|n| {
            let t = l2 * target.time(n);
            locate((t - src.origin[3]) / src.spacing[3], src.nt, t, 3)
        })
        .collect::<Result<_>>()?;

    let s = src.spatial_len();
    let data = f
        .data
        .iter()
        .map(|comp| {
            let mut out = vec![0.0; target.len()];
            out.par_chunks_mut(target.nx).enumerate().for_each(|(row, chunk)| {
                let j = row % target.ny;
                let k = (row / target.ny) % target.nz;
                let n = row / (target.ny * target.nz);
                let (j0, wy) = fy[j];
                let (k0, wz) = fz[k];
                let (n0, wt) = ft[n];
                for (i, slot) in chunk.iter_mut().enumerate() {
                    let (i0, wx) = fx[i];
                    let mut acc = 0.0;
                    for (dn, bt) in [(0, 1.0 - wt), (1, wt)] {
                        if bt == 0.0 {
                            continue;
                        }
                        for (dk, bz) in [(0, 1.0 - wz), (1, wz)] {
                            if bz == 0.0 {
                                continue;
                            }
                            for (dj, by) in [(0, 1.0 - wy), (1, wy)] {
                                if by == 0.0 {
                                    continue;
                                }
                                for (di, bx) in [(0, 1.0 - wx), (1, wx)] {
                                    if bx == 0.0 {
                                        continue;
                                    }
                                    let at = (n0 + dn) * s + src.spatial_index(i0 + di, j0 + dj, k0 + dk);
                                    acc += bt * bz * by * bx * comp[at];
                                }
                            }
                        }
                    }
                    *slot = factor * acc;
                }
            });
            out
        })
        .collect();
    Field::new(*target, data)
}

/// Splits a fractional sample coordinate into a base index and weight.
fn locate(u: f64, count: usize, coord: f64, axis: usize) -> Result<(usize, f64)> {
    let tol = 1e-9;
    let last = (count - 1) as f64;
    if u < -tol || u > last + tol {
        let name = ["x", "y", "z", "t"][axis];
        return Err(Error::OutOfDomain(format!(
            "pulled-back {name} = {coord} lies outside the source samples"
        )));
    }
    let u = u.clamp(0.0, last);
    let base = (u.floor() as usize).min(count - 2);
    Ok((base, u - base as f64))
}

const MAGIC: &[u8; 4] = b"NSFD";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 * 8 + 8 * 8;

/// Serializes a field into the `NSFD` container.
pub fn to_bytes(field: &Field) -> Vec<u8> {
    let g = &field.grid;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.components() * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(field.components() as u32).to_le_bytes());
    for n in [g.nx, g.ny, g.nz, g.nt] {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for v in g.origin.iter().chain(g.spacing.iter()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for comp in &field.data {
        for v in comp {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, section: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.offset < n {
            return Err(Error::Format {
                offset: self.offset as u64,
                message: format!(
                    "truncated {section}: need {n} bytes, {} remain",
                    self.bytes.len() - self.offset
                ),
            });
        }
        let s = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(s)
    }

    fn u32(&mut self, section: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, section: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, section)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self, section: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, section)?.try_into().expect("8 bytes")))
    }
}

/// Parses an `NSFD` container.
pub fn from_bytes(bytes: &[u8]) -> Result<Field> {
    let mut cur = Cursor { bytes, offset: 0 };
    if cur.take(4, "magic")? != MAGIC {
        return Err(Error::Format { offset: 0, message: "bad magic, expected \"NSFD\"".into() });
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(Error::Version(version));
    }
    let comp_offset = cur.offset as u64;
    let components = cur.u32("component count")? as usize;
    if components == 0 {
        return Err(Error::Format { offset: comp_offset, message: "component count is 0".into() });
    }
    let mut counts = [0usize; 4];
    for (a, name) in ["nx", "ny", "nz", "nt"].iter().enumerate() {
        let at = cur.offset as u64;
        let n = cur.u64(name)?;
        if n < 2 {
            return Err(Error::Format { offset: at, message: format!("{name} = {n} must be at least 2") });
        }
        counts[a] = usize::try_from(n)
            .map_err(|_| Error::Format { offset: at, message: format!("{name} = {n} too large") })?;
    }
    let mut origin = [0.0; 4];
    for o in origin.iter_mut() {
        *o = cur.f64("origin")?;
    }
    let mut spacing = [0.0; 4];
    for (a, h) in spacing.iter_mut().enumerate() {
        let at = cur.offset as u64;
        *h = cur.f64("spacing")?;
        if !(*h > 0.0 && h.is_finite()) {
            return Err(Error::Format { offset: at, message: format!("spacing[{a}] = {h} must be positive") });
        }
    }
    let grid = SpaceTimeGrid {
        nx: counts[0],
        ny: counts[1],
        nz: counts[2],
        nt: counts[3],
        origin,
        spacing,
    };
    let len = counts
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::Format { offset: 12, message: "sample count overflows".into() })?;
    let mut data = Vec::with_capacity(components);
    for c in 0..components {
        let section = format!("payload component {c}");
        let raw = cur.take(len.saturating_mul(8), &section)?;
        let start = cur.offset - raw.len();
        let mut comp = Vec::with_capacity(len);
        for (i, chunk) in raw.chunks_exact(8).enumerate() {
            let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
            if !v.is_finite() {
                return Err(Error::Format {
                    offset: (start + 8 * i) as u64,
                    message: format!("non-finite value in {section}"),
                });
            }
            comp.push(v);
        }
        data.push(comp);
    }
    if cur.offset != bytes.len() {
        return Err(Error::Format {
            offset: cur.offset as u64,
            message: format!("{} trailing bytes after payload", bytes.len() - cur.offset),
        });
    }
    Field::new(grid, data)
}

pub fn store_field(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&to_bytes(field))?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Field> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}
