//! Scale-invariant local quantities over parabolic cylinders
//! `Q(z0, r) = B(x0, r) x (t0 - r^2, t0)`.
//!
//! Spatial integrals weight each cell by the fraction of its volume inside the
//! ball. Time integrals integrate the piecewise-linear interpolant of the
//! per-slice spatial integrals exactly, so windows need not align with nodes.
//! All accumulation is compensated and runs in a fixed cell order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::Q_MARGIN;
use crate::grid::{Field, SpaceTimeGrid};
use crate::sum::KahanSum;

const SUBSAMPLES: usize = 16;
const NODE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParabolicCylinder {
    pub center: [f64; 3],
    pub t0: f64,
    pub radius: f64,
}

impl ParabolicCylinder {
    pub fn new(center: [f64; 3], t0: f64, radius: f64) -> Self {
        Self { center, t0, radius }
    }
}

/// Cells meeting a ball with the fraction of each cell inside it.
#[derive(Clone, Debug)]
pub struct BallStencil {
    /// `(i, j, k, spatial index, weight)`
    pub cells: Vec<(usize, usize, usize, usize, f64)>,
    /// Weighted measure `sum(w) * cell volume`.
    pub measure: f64,
    pub cell_volume: f64,
}

/// Inclusive index range of cells meeting `[c - r, c + r]` along one axis.
fn axis_range(grid: &SpaceTimeGrid, axis: usize, c: f64, r: f64) -> (i64, i64) {
    let h = grid.spacing[axis];
    let o = grid.origin[axis];
    (((c - r - o) / h).floor() as i64, ((c + r - o) / h).floor() as i64)
}

/// Checks that the ball keeps a one-cell margin from the box faces, so that
/// every cell it touches has centered-difference neighbours.
pub fn ball_in_domain(grid: &SpaceTimeGrid, center: [f64; 3], r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::CylinderOutOfDomain(format!("radius {r} must be positive")));
    }
    let counts = grid.counts();
    for axis in 0..3 {
        let (lo, hi) = axis_range(grid, axis, center[axis], r);
        if lo < 1 || hi > counts[axis] as i64 - 2 {
            return Err(Error::CylinderOutOfDomain(format!(
                "ball at {:?} with radius {r} leaves the interior of the box along axis {axis}",
                center
            )));
        }
    }
    Ok(())
}

/// Partial-cell ball weights.
pub fn ball_stencil(grid: &SpaceTimeGrid, center: [f64; 3], r: f64) -> Result<BallStencil> {
    ball_in_domain(grid, center, r)?;
    let h = [grid.spacing[0], grid.spacing[1], grid.spacing[2]];
    let half_diag = 0.5 * (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let hmax = h[0].max(h[1]).max(h[2]);
    let ranges: Vec<(usize, usize)> = (0..3)
        .map(|a| {
            let (lo, hi) = axis_range(grid, a, center[a], r);
            (lo as usize, hi as usize)
        })
        .collect();

    let mut cells = Vec::new();
    let mut total = KahanSum::new();
    for k in ranges[2].0..=ranges[2].1 {
        for j in ranges[1].0..=ranges[1].1 {
            for i in ranges[0].0..=ranges[0].1 {
                let c = [grid.center(0, i), grid.center(1, j), grid.center(2, k)];
                let d = [c[0] - center[0], c[1] - center[1], c[2] - center[2]];
                let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                let w = if dist + half_diag <= r {
                    1.0
                } else if dist - half_diag >= r {
                    0.0
                } else if r < 2.0 * hmax || dist < half_diag {
                    subsampled_fraction(d, h, r)
                } else {
                    let n = d.map(|x| x / dist);
                    let a = [0, 1, 2].map(|x| n[x].abs() * h[x]);
                    // mean gap between the tangent plane and the sphere over the cell
                    let lateral: f64 = (0..3).map(|x| h[x] * h[x] * (1.0 - n[x] * n[x])).sum();
                    let s = r - dist - lateral / (24.0 * r);
                    planar_fraction(a, s + 0.5 * (a[0] + a[1] + a[2]))
                };
                if w > 0.0 {
                    total.add(w);
                    cells.push((i, j, k, grid.spatial_index(i, j, k), w));
                }
            }
        }
    }
    let cell_volume = grid.cell_volume();
    Ok(BallStencil { cells, measure: total.value() * cell_volume, cell_volume })
}

fn subsampled_fraction(d: [f64; 3], h: [f64; 3], r: f64) -> f64 {
    let m = SUBSAMPLES;
    let r2 = r * r;
    let mut inside = 0usize;
    for c in 0..m {
        let z = d[2] + ((c as f64 + 0.5) / m as f64 - 0.5) * h[2];
        for b in 0..m {
            let y = d[1] + ((b as f64 + 0.5) / m as f64 - 0.5) * h[1];
            for a in 0..m {
                let x = d[0] + ((a as f64 + 0.5) / m as f64 - 0.5) * h[0];
                if x * x + y * y + z * z < r2 {
                    inside += 1;
                }
            }
        }
    }
    inside as f64 / (m * m * m) as f64
}

/// Volume fraction of the unit cube `[0,1]^3` where `a . w <= s`, `a >= 0`.
/// Components below `1e-3 max(a)` are averaged out to keep the
/// inclusion-exclusion sum well conditioned.
fn planar_fraction(mut a: [f64; 3], mut s: f64) -> f64 {
    a.sort_by(|x, y| y.total_cmp(x));
    let sum = a[0] + a[1] + a[2];
    if s <= 0.0 {
        return 0.0;
    }
    if s >= sum {
        return 1.0;
    }
    let cut = 1e-3 * a[0];
    let mut dims = 3;
    while dims > 1 && a[dims - 1] < cut {
        s -= 0.5 * a[dims - 1];
        dims -= 1;
    }
    let frac = match dims {
        3 => {
            let mut acc = 0.0;
            for v in 0..8u32 {
                let shift: f64 = (0..3).filter(|b| v & (1 << b) != 0).map(|b| a[b]).sum();
                let t = (s - shift).max(0.0);
                let sign = if v.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * t * t * t;
            }
            acc / (6.0 * a[0] * a[1] * a[2])
        }
        2 => {
            let mut acc = 0.0;
            for v in 0..4u32 {
                let shift: f64 = (0..2).filter(|b| v & (1 << b) != 0).map(|b| a[b]).sum();
                let t = (s - shift).max(0.0);
                let sign = if v.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * t * t;
            }
            acc / (2.0 * a[0] * a[1])
        }
        _ => s / a[0],
    };
    frac.clamp(0.0, 1.0)
}

/// Fractional node coordinates of a time window, validated against the grid.
#[derive(Clone, Copy, Debug)]
pub struct TimeWindow {
    pub lo: f64,
    pub hi: f64,
}

impl TimeWindow {
    /// Window `(t_lo, t_hi)` in node units; errors if it leaves the sampled range.
    pub fn new(grid: &SpaceTimeGrid, t_lo: f64, t_hi: f64) -> Result<Self> {
        let ht = grid.spacing[3];
        let lo = (t_lo - grid.origin[3]) / ht;
        let hi = (t_hi - grid.origin[3]) / ht;
        let last = (grid.nt - 1) as f64;
        if !(lo >= -NODE_TOL && hi <= last + NODE_TOL && lo <= hi) {
            return Err(Error::WindowOutOfDomain(format!(
                "time window ({t_lo}, {t_hi}) is not inside [{}, {}]",
                grid.origin[3],
                grid.final_time()
            )));
        }
        Ok(Self { lo: lo.clamp(0.0, last), hi: hi.clamp(0.0, last) })
    }

    /// Nodes whose values the interpolant on the window depends on.
    pub fn nodes(&self, nt: usize) -> std::ops::RangeInclusive<usize> {
        let first = (self.lo + NODE_TOL).floor().max(0.0) as usize;
        let last = ((self.hi - NODE_TOL).ceil().max(0.0) as usize).min(nt - 1);
        first.min(last)..=last
    }

    /// Exact integral of the piecewise-linear interpolant of `values`
    /// (indexed from `first`) over the window, in time units.
    pub fn integrate(&self, first: usize, values: &[f64], ht: f64) -> f64 {
        if values.len() == 1 {
            return values[0] * (self.hi - self.lo) * ht;
        }
        let mut acc = KahanSum::new();
        for seg in 0..values.len() - 1 {
            let n = (first + seg) as f64;
            let u0 = self.lo.max(n);
            let u1 = self.hi.min(n + 1.0);
            if u1 <= u0 {
                continue;
            }
            let slope = values[seg + 1] - values[seg];
            let g0 = values[seg] + (u0 - n) * slope;
            let g1 = values[seg] + (u1 - n) * slope;
            acc.add(0.5 * (u1 - u0) * (g0 + g1));
        }
        acc.value() * ht
    }

    /// Linear interpolation of `values` at node coordinate `u`.
    pub fn interpolate(first: usize, values: &[f64], u: f64) -> f64 {
        let rel = (u - first as f64).clamp(0.0, (values.len() - 1) as f64);
        let base = (rel.floor() as usize).min(values.len().saturating_sub(2));
        if values.len() == 1 {
            return values[0];
        }
        let w = rel - base as f64;
        values[base] * (1.0 - w) + values[base + 1] * w
    }
}

/// Which per-slice integrals to compute.
#[derive(Clone, Copy, Debug, Default)]
pub struct Wanted {
    pub speed2: bool,
    pub grad2: bool,
    pub speed3: bool,
    pub bq: bool,
    pub oscillation: bool,
    pub grad_speed: bool,
    pub pressure: bool,
}

impl Wanted {
    pub fn all() -> Self {
        Self {
            speed2: true,
            grad2: true,
            speed3: true,
            bq: true,
            oscillation: true,
            grad_speed: true,
            pressure: true,
        }
    }
}

/// Spatial integrals over one ball on one time slice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SliceIntegrals {
    /// `int |v|^2`
    pub speed2: f64,
    /// `int |grad v|^2`
    pub grad2: f64,
    /// `int |v|^3`
    pub speed3: f64,
    /// `int |grad v|^2 |v|^{q-2}`
    pub bq: f64,
    /// `int ||v|^2 - [|v|^2]_B| |v|`
    pub oscillation: f64,
    /// `int |grad v| |v|`
    pub grad_speed: f64,
    /// `int |pi - [pi]_B|^{3/2}`
    pub pressure: f64,
}

/// Squared Frobenius norm of the centered-difference Jacobian.
#[inline]
pub fn grad_sq_centered(v: &Field, n: usize, i: usize, j: usize, k: usize) -> f64 {
    let g = &v.grid;
    let s = g.spatial_len();
    let base = n * s + g.spatial_index(i, j, k);
    let strides = [1, g.nx, g.nx * g.ny];
    let mut acc = 0.0;
    for comp in &v.data {
        for axis in 0..3 {
            let d = (comp[base + strides[axis]] - comp[base - strides[axis]]) / (2.0 * g.spacing[axis]);
            acc += d * d;
        }
    }
    acc
}

/// Squared Jacobian norm with centered differences inside the box and
/// one-sided differences on its faces.
pub fn grad_sq_any(v: &Field, n: usize, i: usize, j: usize, k: usize) -> f64 {
    let g = &v.grid;
    let base = n * g.spatial_len() + g.spatial_index(i, j, k);
    let strides = [1, g.nx, g.nx * g.ny];
    let pos = [i, j, k];
    let counts = g.counts();
    let mut acc = 0.0;
    for comp in &v.data {
        for axis in 0..3 {
            let h = g.spacing[axis];
            let st = strides[axis];
            let d = if pos[axis] == 0 {
                (comp[base + st] - comp[base]) / h
            } else if pos[axis] == counts[axis] - 1 {
                (comp[base] - comp[base - st]) / h
            } else {
                (comp[base + st] - comp[base - st]) / (2.0 * h)
            };
            acc += d * d;
        }
    }
    acc
}

/// `int_{t_lo}^{t_hi} int_box |grad v|^2 |v|^{q-2}` over the whole grid box.
pub fn box_bq_integral(v: &Field, t_lo: f64, t_hi: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    check_vector(v, None)?;
    let g = &v.grid;
    let window = TimeWindow::new(g, t_lo, t_hi)?;
    let nodes = window.nodes(g.nt);
    let first = *nodes.start();
    let dv = g.cell_volume();
    let values: Vec<f64> = nodes
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| {
            let mut acc = KahanSum::new();
            for k in 0..g.nz {
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        let speed = v.magnitude(n, g.spatial_index(i, j, k));
                        if speed > 0.0 {
                            acc.add(grad_sq_any(v, n, i, j, k) * speed.powf(q - 2.0));
                        }
                    }
                }
            }
            acc.value() * dv
        })
        .collect();
    Ok(window.integrate(first, &values, g.spacing[3]))
}

/// Integrals over `stencil` on slice `n`.
pub fn slice_integrals(
    v: &Field,
    pi: Option<&Field>,
    stencil: &BallStencil,
    n: usize,
    q: f64,
    wanted: Wanted,
) -> SliceIntegrals {
    let dv = stencil.cell_volume;
    let mut speed2 = KahanSum::new();
    let mut grad2 = KahanSum::new();
    let mut speed3 = KahanSum::new();
    let mut bq = KahanSum::new();
    let mut grad_speed = KahanSum::new();
    let need_grad = wanted.grad2 || wanted.bq || wanted.grad_speed;
    let need_mean = wanted.oscillation;
    for &(i, j, k, idx, w) in &stencil.cells {
        let speed = v.magnitude(n, idx);
        let s2 = speed * speed;
        if wanted.speed2 || need_mean {
            speed2.add(w * s2);
        }
        if wanted.speed3 {
            speed3.add(w * s2 * speed);
        }
        if need_grad {
            let g2 = grad_sq_centered(v, n, i, j, k);
            if wanted.grad2 {
                grad2.add(w * g2);
            }
            if wanted.bq && speed > 0.0 {
                bq.add(w * g2 * speed.powf(q - 2.0));
            }
            if wanted.grad_speed {
                grad_speed.add(w * g2.sqrt() * speed);
            }
        }
    }
    let weight_sum = stencil.measure / dv;
    let mut oscillation = 0.0;
    if wanted.oscillation {
        let mean = speed2.value() / weight_sum;
        let mut acc = KahanSum::new();
        for &(_, _, _, idx, w) in &stencil.cells {
            let speed = v.magnitude(n, idx);
            acc.add(w * (speed * speed - mean).abs() * speed);
        }
        oscillation = acc.value() * dv;
    }
    let mut pressure = 0.0;
    if let (true, Some(p)) = (wanted.pressure, pi) {
        let slice = p.slice(0, n);
        let mean = KahanSum::sum_iter(stencil.cells.iter().map(|&(_, _, _, idx, w)| w * slice[idx])) / weight_sum;
        let acc = KahanSum::sum_iter(stencil.cells.iter().map(|&(_, _, _, idx, w)| w * (slice[idx] - mean).abs().powf(1.5)));
        pressure = acc * dv;
    }
    SliceIntegrals {
        speed2: speed2.value() * dv,
        grad2: grad2.value() * dv,
        speed3: speed3.value() * dv,
        bq: bq.value() * dv,
        oscillation,
        grad_speed: grad_speed.value() * dv,
        pressure,
    }
}

pub fn check_q(q: f64) -> Result<()> {
    if !(q > 2.0 + Q_MARGIN && q < 3.0 - Q_MARGIN) {
        return Err(Error::QOutOfRange(q));
    }
    Ok(())
}

fn check_vector(v: &Field, pi: Option<&Field>) -> Result<()> {
    v.require_components(3, "velocity")?;
    if let Some(p) = pi {
        p.require_components(1, "pressure")?;
        if p.grid != v.grid {
            return Err(Error::InvalidGrid("pressure and velocity grids differ".into()));
        }
    }
    Ok(())
}

/// Per-slice integrals over the nodes covering the cylinder's time window.
pub struct CylinderSlices {
    pub window: TimeWindow,
    pub first: usize,
    pub slices: Vec<SliceIntegrals>,
    pub stencil: BallStencil,
}

impl CylinderSlices {
    pub fn integrate(&self, ht: f64, f: impl Fn(&SliceIntegrals) -> f64) -> f64 {
        let values: Vec<f64> = self.slices.iter().map(f).collect();
        self.window.integrate(self.first, &values, ht)
    }

    /// Max over nodes in `(lo, hi]` and the value interpolated at `hi`.
    pub fn sup_closed_right(&self, f: impl Fn(&SliceIntegrals) -> f64) -> f64 {
        let values: Vec<f64> = self.slices.iter().map(f).collect();
        let mut best = TimeWindow::interpolate(self.first, &values, self.window.hi);
        for (offset, val) in values.iter().enumerate() {
            let u = (self.first + offset) as f64;
            if u > self.window.lo + NODE_TOL && u <= self.window.hi + NODE_TOL {
                best = best.max(*val);
            }
        }
        best
    }
}

/// Computes the per-slice integrals for a ball over an arbitrary time window.
#[allow(clippy::too_many_arguments)]
pub fn window_slices(
    v: &Field,
    pi: Option<&Field>,
    center: [f64; 3],
    radius: f64,
    t_lo: f64,
    t_hi: f64,
    q: f64,
    wanted: Wanted,
) -> Result<CylinderSlices> {
    check_vector(v, pi)?;
    let grid = &v.grid;
    let window = TimeWindow::new(grid, t_lo, t_hi).map_err(|e| match e {
        Error::WindowOutOfDomain(m) => Error::CylinderOutOfDomain(m),
        other => other,
    })?;
    let stencil = ball_stencil(grid, center, radius)?;
    let nodes = window.nodes(grid.nt);
    let first = *nodes.start();
    let slices: Vec<SliceIntegrals> = nodes
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| slice_integrals(v, pi, &stencil, n, q, wanted))
        .collect();
    Ok(CylinderSlices { window, first, slices, stencil })
}

fn cylinder_slices(v: &Field, pi: Option<&Field>, cyl: &ParabolicCylinder, q: f64, wanted: Wanted) -> Result<CylinderSlices> {
    let r = cyl.radius;
    window_slices(v, pi, cyl.center, r, cyl.t0 - r * r, cyl.t0, q, wanted)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalQuantities {
    pub r: f64,
    pub q: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "S")]
    pub s: f64,
    /// Absent without a pressure field.
    #[serde(rename = "D")]
    pub d: Option<f64>,
    #[serde(rename = "Bq")]
    pub bq: f64,
    /// `A^{3/2} + D^2`, absent without a pressure field.
    #[serde(rename = "calE")]
    pub cal_e: Option<f64>,
}

/// All local quantities on one cylinder.
pub fn evaluate_cylinder(v: &Field, pi: Option<&Field>, cyl: &ParabolicCylinder, q: f64) -> Result<LocalQuantities> {
    check_q(q)?;
    let wanted = Wanted { pressure: pi.is_some(), grad_speed: false, ..Wanted::all() };
    let cs = cylinder_slices(v, pi, cyl, q, wanted)?;
    let ht = v.grid.spacing[3];
    let r = cyl.radius;
    let a = cs.sup_closed_right(|s| s.speed2) / r;
    let d = pi.map(|_| cs.integrate(ht, |s| s.pressure) / (r * r));
    Ok(LocalQuantities {
        r,
        q,
        a,
        e: cs.integrate(ht, |s| s.grad2) / r,
        c: cs.integrate(ht, |s| s.speed3) / (r * r),
        s: cs.integrate(ht, |s| s.oscillation) / (r * r),
        d,
        bq: cs.integrate(ht, |s| s.bq) * r.powf(q - 3.0),
        cal_e: d.map(|d| a.powf(1.5) + d * d),
    })
}

/// `B_q` alone.
pub fn evaluate_bq(v: &Field, cyl: &ParabolicCylinder, q: f64) -> Result<f64> {
    check_q(q)?;
    let wanted = Wanted { bq: true, ..Wanted::default() };
    let cs = cylinder_slices(v, None, cyl, q, wanted)?;
    Ok(cs.integrate(v.grid.spacing[3], |s| s.bq) * cyl.radius.powf(q - 3.0))
}

/// `A` alone.
pub fn evaluate_a(v: &Field, cyl: &ParabolicCylinder) -> Result<f64> {
    let wanted = Wanted { speed2: true, ..Wanted::default() };
    let cs = cylinder_slices(v, None, cyl, 2.5, wanted)?;
    Ok(cs.sup_closed_right(|s| s.speed2) / cyl.radius)
}

/// Un-normalized cylinder integrals behind `E`, `C` and `B_q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RawIntegrals {
    pub grad2: f64,
    pub speed3: f64,
    pub bq: f64,
}

pub fn raw_integrals(v: &Field, cyl: &ParabolicCylinder, q: f64) -> Result<RawIntegrals> {
    check_q(q)?;
    let wanted = Wanted { grad2: true, speed3: true, bq: true, ..Wanted::default() };
    let cs = cylinder_slices(v, None, cyl, q, wanted)?;
    let ht = v.grid.spacing[3];
    Ok(RawIntegrals {
        grad2: cs.integrate(ht, |s| s.grad2),
        speed3: cs.integrate(ht, |s| s.speed3),
        bq: cs.integrate(ht, |s| s.bq),
    })
}

/// `int_{t_lo}^{t_hi} int_B |grad v|^2 |v|^{q-2}` over an arbitrary window.
pub fn bq_integral(v: &Field, center: [f64; 3], radius: f64, t_lo: f64, t_hi: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    let wanted = Wanted { bq: true, ..Wanted::default() };
    let cs = window_slices(v, None, center, radius, t_lo, t_hi, q, wanted)?;
    Ok(cs.integrate(v.grid.spacing[3], |s| s.bq))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BqRow {
    pub r: f64,
    #[serde(rename = "Bq")]
    pub bq: f64,
    /// Sup of `B_q` over this radius and every larger one before it.
    pub running_sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BqProfile {
    pub rows: Vec<BqRow>,
    pub sup: f64,
    pub argmax_r: f64,
}

fn check_decreasing(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Domain("radius list is empty".into()));
    }
    for w in radii.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Domain(format!("radii must strictly decrease ({} then {})", w[0], w[1])));
        }
    }
    Ok(())
}

/// `B_q` over a decreasing radius list at `(x0, t0)`.
pub fn bq_profile(v: &Field, x0: [f64; 3], t0: f64, radii: &[f64], q: f64) -> Result<BqProfile> {
    check_q(q)?;
    check_decreasing(radii)?;
    let values: Vec<f64> = radii
        .par_iter()
        .map(|&r| evaluate_bq(v, &ParabolicCylinder::new(x0, t0, r), q))
        .collect::<Result<_>>()?;
    Ok(profile_from(radii, &values))
}

pub(crate) fn profile_from(radii: &[f64], values: &[f64]) -> BqProfile {
    let mut rows = Vec::with_capacity(radii.len());
    let mut sup = f64::NEG_INFINITY;
    let mut argmax_r = radii[0];
    for (&r, &bq) in radii.iter().zip(values) {
        if bq > sup {
            sup = bq;
            argmax_r = r;
        }
        rows.push(BqRow { r, bq, running_sup: sup });
    }
    BqProfile { rows, sup, argmax_r }
}

/// All local quantities over a decreasing radius list.
pub fn quantity_profile(
    v: &Field,
    pi: Option<&Field>,
    x0: [f64; 3],
    t0: f64,
    radii: &[f64],
    q: f64,
) -> Result<Vec<LocalQuantities>> {
    check_q(q)?;
    check_decreasing(radii)?;
    radii
        .par_iter()
        .map(|&r| evaluate_cylinder(v, pi, &ParabolicCylinder::new(x0, t0, r), q))
        .collect()
}
