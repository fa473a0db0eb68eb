#![allow(dead_code)]

use nsreg::grid::{FieldKind, FieldSpec, Profile, SpaceTimeGrid};
use nsreg::hausdorff::{Ball, BallFamily};
use nsreg::lorentz::SimpleFunction;
use rand::Rng;

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Draws `(p, r, delta, gamma)` strictly inside the admissible region, or
/// `None` when the drawn `(delta, gamma)` leaves the chosen branch empty.
pub fn sample_admissible<R: Rng>(rng: &mut R) -> Option<(f64, f64, f64, f64)> {
    let gamma: f64 = rng.gen_range(1e-3..0.499);
    let delta_lo = 3.0 * gamma / (2.0 + 2.0 * gamma);
    let delta: f64 = rng.gen_range(delta_lo..0.5);
    if delta <= delta_lo || delta >= 0.5 {
        return None;
    }
    let q = 3.0 - 2.0 * delta;
    if q <= 2.0 + 1e-5 || q >= 3.0 - 1e-5 {
        return None;
    }
    let p_lo = 3.0 / (2.0 + gamma);
    let (lo, hi) = if rng.gen_bool(0.5) {
        // r >= 2
        let den = 2.0 * delta - (1.0 - delta) * gamma;
        if den <= 0.0 {
            return None;
        }
        ((3.0 * delta / den).max(p_lo), 3.0 / (1.0 + gamma))
    } else {
        // 1 < r < 2
        (3.0 / (1.0 + gamma), (2.0 * delta / gamma).min(3.0 / gamma))
    };
    let pad = 1e-7 * (hi - lo).abs().max(1.0);
    if hi - lo <= 4.0 * pad {
        return None;
    }
    let p = rng.gen_range(lo + pad..hi - pad);
    let r = 2.0 / (2.0 + gamma - 3.0 / p);
    Some((p, r, delta, gamma))
}

/// Scale-invariant endpoint pair `2/r + 3/s = 2` in the requested family
/// (0: `r > 2`, 1: `1 < r < 2`, 2: `r = 2`).
pub fn sample_path_pair<R: Rng>(rng: &mut R, family: u32) -> (f64, f64) {
    let inv_r = match family {
        0 => rng.gen_range(0.01..0.499),
        1 => rng.gen_range(0.501..0.99),
        _ => 0.5,
    };
    let r = 1.0 / inv_r;
    let s = 3.0 / (2.0 - 2.0 * inv_r);
    (r, s)
}

pub fn random_simple<R: Rng>(rng: &mut R) -> SimpleFunction {
    let k = rng.gen_range(1..=8);
    let mut level = rng.gen_range(0.5..20.0);
    let mut pieces = Vec::with_capacity(k);
    for _ in 0..k {
        pieces.push((level, rng.gen_range(0.01..10.0)));
        level *= rng.gen_range(0.1..0.95);
    }
    SimpleFunction::new(pieces).unwrap()
}

pub fn random_family<R: Rng>(rng: &mut R) -> BallFamily {
    let n = rng.gen_range(1..=60);
    let balls = (0..n)
        .map(|_| Ball {
            center: [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ],
            radius: rng.gen_range(0.01..0.4),
        })
        .collect();
    BallFamily::new(balls).unwrap()
}

pub fn cube(lo: f64, hi: f64, n: usize, t0: f64, t1: f64, nt: usize) -> SpaceTimeGrid {
    SpaceTimeGrid::cube(lo, hi, n, t0, t1, nt).unwrap()
}

pub fn swirl_blowup(grid: SpaceTimeGrid, amplitude: f64) -> FieldSpec {
    FieldSpec::new(
        FieldKind::BlowupProfile {
            t_blow: 1.0,
            center: [0.0; 3],
            profile: Profile::Swirl { amplitude, width: 1.0 },
        },
        grid,
    )
}

pub fn taylor(grid: SpaceTimeGrid) -> FieldSpec {
    FieldSpec::new(
        FieldKind::TaylorLike { amplitude: 1.0, wavenumber: 1.0, decay: 0.0 },
        grid,
    )
}
