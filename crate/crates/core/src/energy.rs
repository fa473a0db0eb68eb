//! Higher-integrability energy functional and the pressure-term majorant.
//!
//! All integrals run over the whole grid box. Time integrals integrate the
//! piecewise-linear interpolant of per-slice values exactly; suprema over
//! `[t1, t]` include the interpolated values at both ends.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{ExponentTuple, ExtReal};
use crate::grid::{Field, SpaceTimeGrid};
use crate::localq::{grad_sq_any, TimeWindow};
use crate::sum::KahanSum;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub delta: f64,
    pub t1: f64,
    pub t: f64,
    /// `sup_{t1 <= s <= t} int |v|^{3 - 2 delta}`
    pub sup_term: f64,
    /// `int int |grad(|v|^{3/2 - delta})|^2`
    pub grad_term: f64,
    /// `int int |grad v|^2 |v|^{1 - 2 delta}`
    pub mixed_term: f64,
    #[serde(rename = "E_delta")]
    pub e_delta: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1/2)")));
    }
    Ok(())
}

fn check_velocity(v: &Field) -> Result<()> {
    v.require_components(3, "velocity")?;
    let [nx, ny, nz] = v.grid.counts();
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(Error::InvalidGrid("gradients need at least two cells per axis".into()));
    }
    Ok(())
}

fn speeds(v: &Field, n: usize) -> Vec<f64> {
    (0..v.grid.spatial_len()).map(|idx| v.magnitude(n, idx)).collect()
}

/// `|grad(|v|^s)|^2` from the derived scalar field `w = speed^s`. Differences
/// are centered except on box faces and where one neighbour is an exact zero
/// of `v`, which use the one-sided difference away from that neighbour.
fn grad_power_sq(grid: &SpaceTimeGrid, speed: &[f64], w: &[f64], i: usize, j: usize, k: usize) -> f64 {
    let idx = grid.spatial_index(i, j, k);
    let strides = [1, grid.nx, grid.nx * grid.ny];
    let pos = [i, j, k];
    let counts = grid.counts();
    let mut acc = 0.0;
    for axis in 0..3 {
        let h = grid.spacing[axis];
        let st = strides[axis];
        let has_lo = pos[axis] > 0;
        let has_hi = pos[axis] + 1 < counts[axis];
        let lo_zero = has_lo && speed[idx - st] == 0.0;
        let hi_zero = has_hi && speed[idx + st] == 0.0;
        let d = if has_lo && has_hi && lo_zero == hi_zero {
            (w[idx + st] - w[idx - st]) / (2.0 * h)
        } else if has_hi && !hi_zero || !has_lo {
            (w[idx + st] - w[idx]) / h
        } else {
            (w[idx] - w[idx - st]) / h
        };
        acc += d * d;
    }
    acc
}

#[derive(Clone, Copy, Debug, Default)]
struct EnergySlice {
    power: f64,
    grad: f64,
    mixed: f64,
}

fn energy_slice(v: &Field, n: usize, delta: f64) -> EnergySlice {
    let g = &v.grid;
    let s = 1.5 - delta;
    let speed = speeds(v, n);
    let w: Vec<f64> = speed.iter().map(|&x| x.powf(s)).collect();
    let mut power = KahanSum::new();
    let mut grad = KahanSum::new();
    let mut mixed = KahanSum::new();
    for k in 0..g.nz {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let idx = g.spatial_index(i, j, k);
                let sp = speed[idx];
                power.add(sp.powf(3.0 - 2.0 * delta));
                grad.add(grad_power_sq(g, &speed, &w, i, j, k));
                if sp > 0.0 {
                    mixed.add(grad_sq_any(v, n, i, j, k) * sp.powf(1.0 - 2.0 * delta));
                }
            }
        }
    }
    let dv = g.cell_volume();
    EnergySlice { power: power.value() * dv, grad: grad.value() * dv, mixed: mixed.value() * dv }
}

/// Max of the interpolant of `values` over the closed window.
fn sup_closed(window: &TimeWindow, first: usize, values: &[f64]) -> f64 {
    let mut best = TimeWindow::interpolate(first, values, window.lo).max(TimeWindow::interpolate(first, values, window.hi));
    for (offset, &val) in values.iter().enumerate() {
        let u = (first + offset) as f64;
        if u >= window.lo && u <= window.hi {
            best = best.max(val);
        }
    }
    best
}

pub fn energy_functional(v: &Field, delta: f64, t1: f64, t: f64) -> Result<EnergyLedger> {
    check_delta(delta)?;
    check_velocity(v)?;
    let g = &v.grid;
    let window = TimeWindow::new(g, t1, t)?;
    let nodes = window.nodes(g.nt);
    let first = *nodes.start();
    let slices: Vec<EnergySlice> = nodes
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| energy_slice(v, n, delta))
        .collect();
    let ht = g.spacing[3];
    let pick = |f: fn(&EnergySlice) -> f64| slices.iter().map(f).collect::<Vec<_>>();
    let sup_term = sup_closed(&window, first, &pick(|s| s.power));
    let grad_term = window.integrate(first, &pick(|s| s.grad), ht);
    let mixed_term = window.integrate(first, &pick(|s| s.mixed), ht);
    Ok(EnergyLedger { delta, t1, t, sup_term, grad_term, mixed_term, e_delta: sup_term + grad_term })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PressureBound {
    /// `int int |pi| |grad w| |v|^{1/2 - delta}` with `w = |v|^{3/2 - delta}`.
    #[serde(rename = "I")]
    pub i: f64,
    /// `||pi||_{L^r_t L^p_x}`
    pub pressure_norm: f64,
    /// `||grad w||_{L^2}`
    pub gradient_norm: f64,
    /// `||w||_{L^{mu a/s}_t L^{lambda a/s}_x}` with `a = 5/2 - 2 theta - delta`, `s = 3/2 - delta`.
    pub power_norm: f64,
    /// `pressure_norm^theta * gradient_norm * power_norm^{a/s}`
    pub majorant: f64,
    /// `I / majorant`, zero when both vanish.
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, Default)]
struct PressureSlice {
    product: f64,
    pressure_p: f64,
    grad: f64,
    power: f64,
}

fn pressure_slice(v: &Field, pi: &Field, n: usize, delta: f64, p: f64, space_exp: ExtReal) -> PressureSlice {
    let g = &v.grid;
    let s = 1.5 - delta;
    let speed = speeds(v, n);
    let w: Vec<f64> = speed.iter().map(|&x| x.powf(s)).collect();
    let pres = pi.slice(0, n);
    let mut product = KahanSum::new();
    let mut pressure_p = KahanSum::new();
    let mut grad = KahanSum::new();
    let mut power = KahanSum::new();
    let mut power_max: f64 = 0.0;
    for k in 0..g.nz {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let idx = g.spatial_index(i, j, k);
                let gw2 = grad_power_sq(g, &speed, &w, i, j, k);
                let ap = pres[idx].abs();
                product.add(ap * gw2.sqrt() * speed[idx].powf(0.5 - delta));
                pressure_p.add(ap.powf(p));
                grad.add(gw2);
                match space_exp {
                    ExtReal::Infinite => power_max = power_max.max(w[idx]),
                    ExtReal::Finite(e) => power.add(w[idx].powf(e)),
                }
            }
        }
    }
    let dv = g.cell_volume();
    PressureSlice {
        product: product.value() * dv,
        pressure_p: pressure_p.value() * dv,
        grad: grad.value() * dv,
        power: match space_exp {
            ExtReal::Infinite => power_max,
            ExtReal::Finite(e) => (power.value() * dv).powf(1.0 / e),
        },
    }
}

/// Mixed norm in time of per-slice spatial norms.
fn time_norm(window: &TimeWindow, first: usize, norms: &[f64], exp: ExtReal, ht: f64) -> f64 {
    match exp {
        ExtReal::Infinite => sup_closed(window, first, norms),
        ExtReal::Finite(e) => {
            let powered: Vec<f64> = norms.iter().map(|x| x.powf(e)).collect();
            window.integrate(first, &powered, ht).powf(1.0 / e)
        }
    }
}

fn scale_ext(x: ExtReal, factor: f64) -> ExtReal {
    match x {
        ExtReal::Infinite => ExtReal::Infinite,
        ExtReal::Finite(v) => ExtReal::Finite(v * factor),
    }
}

/// Direct pressure integral against the Hölder-chain majorant with unit constant.
pub fn pressure_term_bound(v: &Field, pi: &Field, tuple: &ExponentTuple, t1: f64, t: f64) -> Result<PressureBound> {
    check_velocity(v)?;
    pi.require_components(1, "pressure")?;
    if pi.grid != v.grid {
        return Err(Error::InvalidGrid("pressure and velocity grids differ".into()));
    }
    if !tuple.is_admissible() {
        return Err(Error::Config("the exponent tuple is not admissible".into()));
    }
    let (Some(theta), Some(lambda), Some(mu)) = (tuple.theta, tuple.lambda, tuple.mu) else {
        return Err(Error::Config("the exponent tuple needs theta, lambda and mu; select theta first".into()));
    };
    let delta = tuple.delta;
    check_delta(delta)?;
    let s = 1.5 - delta;
    let a = 2.5 - 2.0 * theta - delta;
    let space_exp = scale_ext(lambda, a / s);
    let time_exp = scale_ext(mu, a / s);

    let g = &v.grid;
    let window = TimeWindow::new(g, t1, t)?;
    let nodes = window.nodes(g.nt);
    let first = *nodes.start();
    let slices: Vec<PressureSlice> = nodes
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| pressure_slice(v, pi, n, delta, tuple.p, space_exp))
        .collect();
    let ht = g.spacing[3];

    let i = window.integrate(first, &slices.iter().map(|x| x.product).collect::<Vec<_>>(), ht);
    let pressure_space: Vec<f64> = slices.iter().map(|x| x.pressure_p.powf(1.0 / tuple.p)).collect();
    let pressure_norm = time_norm(&window, first, &pressure_space, ExtReal::Finite(tuple.r), ht);
    let gradient_norm = window.integrate(first, &slices.iter().map(|x| x.grad).collect::<Vec<_>>(), ht).sqrt();
    let power_space: Vec<f64> = slices.iter().map(|x| x.power).collect();
    let power_norm = time_norm(&window, first, &power_space, time_exp, ht);
    let majorant = pressure_norm.powf(theta) * gradient_norm * power_norm.powf(a / s);

    let ratio = if majorant > 0.0 {
        i / majorant
    } else if i > 0.0 {
        return Err(Error::DegenerateNorm(format!("I = {i} is positive but the majorant vanishes")));
    } else {
        0.0
    };
    Ok(PressureBound { i, pressure_norm, gradient_norm, power_norm, majorant, ratio, pass: ratio.is_finite() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{generate_field, FieldKind, FieldSpec};

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::cube(-1.0, 1.0, 8, 0.0, 1.0, 5).unwrap()
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let v = Field::zeros(grid(), 3).unwrap();
        let l = energy_functional(&v, 0.2, 0.0, 1.0).unwrap();
        assert_eq!((l.sup_term, l.grad_term, l.mixed_term, l.e_delta), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_field_closed_form() {
        let spec = FieldSpec::new(FieldKind::Constant { value: [1.0, 2.0, 2.0] }, grid());
        let v = generate_field(&spec).unwrap();
        let l = energy_functional(&v, 0.2, 0.1, 0.9).unwrap();
        let exact = 8.0 * 3f64.powf(2.6);
        assert!((l.sup_term - exact).abs() < 1e-12 * exact);
        assert!(l.grad_term.abs() < 1e-20 && l.mixed_term.abs() < 1e-20);
    }

    #[test]
    fn window_must_fit() {
        let v = Field::zeros(grid(), 3).unwrap();
        assert!(matches!(energy_functional(&v, 0.2, -0.5, 0.5), Err(Error::WindowOutOfDomain(_))));
        assert!(energy_functional(&v, 0.7, 0.0, 0.5).is_err());
    }
}
