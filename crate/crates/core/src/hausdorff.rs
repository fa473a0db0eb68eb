//! Vitali covering, Hausdorff premeasure estimates, the singular-set measure
//! bound, and dimension bracketing from premeasure trends.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::localq::{box_bq_integral, bq_integral, check_q};
use crate::regularity::{CandidateSet, ScanMode};
use crate::sum::KahanSum;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: [f64; 3],
    pub radius: f64,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl Ball {
    /// Closed balls: touching counts as intersecting.
    pub fn intersects(&self, other: &Ball) -> bool {
        dist(self.center, other.center) <= self.radius + other.radius
    }

    /// Whether `other` lies inside this ball enlarged by `factor`.
    pub fn enlarged_contains(&self, other: &Ball, factor: f64) -> bool {
        dist(self.center, other.center) + other.radius <= factor * self.radius
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub balls: Vec<Ball>,
}

impl BallFamily {
    pub fn new(balls: Vec<Ball>) -> Result<Self> {
        for (i, b) in balls.iter().enumerate() {
            if !(b.radius > 0.0 && b.radius.is_finite()) || b.center.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain(format!("ball {i} needs a finite center and positive radius")));
            }
        }
        Ok(Self { balls })
    }
}

/// Greedy largest-first selection, ties broken by index. Returns selected
/// indices in selection order.
pub fn vitali_select(family: &BallFamily) -> Vec<usize> {
    let balls = &family.balls;
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| balls[b].radius.total_cmp(&balls[a].radius).then(a.cmp(&b)));
    let mut selected: Vec<usize> = Vec::new();
    for i in order {
        if selected.iter().all(|&s| !balls[s].intersects(&balls[i])) {
            selected.push(i);
        }
    }
    selected
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SelectionCheck {
    pub disjoint: bool,
    pub covered: bool,
}

/// Exhaustive check of pairwise disjointness and 5r-coverage.
pub fn check_selection(family: &BallFamily, selected: &[usize]) -> SelectionCheck {
    let balls = &family.balls;
    let disjoint = selected
        .iter()
        .enumerate()
        .all(|(a, &i)| selected[a + 1..].iter().all(|&j| !balls[i].intersects(&balls[j])));
    let covered = balls
        .iter()
        .all(|b| selected.iter().any(|&s| balls[s].enlarged_contains(b, 5.0)));
    SelectionCheck { disjoint, covered }
}

/// Finite point sample of a set with its sampling resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub points: Vec<[f64; 3]>,
    /// Spacing below which the sample carries no information.
    pub resolution: f64,
}

impl PointSample {
    pub fn new(points: Vec<[f64; 3]>, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Domain(format!("resolution {resolution} must be positive")));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Domain("sample points must be finite".into()));
        }
        Ok(Self { points, resolution })
    }

    /// `n` evenly spaced points on `[0, 1]` along the first axis.
    pub fn unit_segment(n: usize) -> Self {
        let step = 1.0 / (n.max(2) - 1) as f64;
        let points = (0..n).map(|i| [i as f64 * step, 0.0, 0.0]).collect();
        Self { points, resolution: step }
    }

    /// Centers of the `2^level` intervals of the ternary Cantor construction.
    pub fn cantor(level: u32) -> Self {
        let width = 3f64.powi(-(level as i32));
        let mut lefts = vec![0.0f64];
        for j in 1..=level {
            let w = 3f64.powi(-(j as i32));
            lefts = lefts.iter().flat_map(|&l| [l, l + 2.0 * w]).collect();
        }
        let points = lefts.into_iter().map(|l| [l + 0.5 * width, 0.0, 0.0]).collect();
        Self { points, resolution: width }
    }

    fn bbox(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = *self.points.first()?;
        let mut lo = first;
        let mut hi = first;
        for p in &self.points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        Some((lo, hi))
    }
}

/// Cube hierarchy: level `j` has side `base_side / refinement^j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PremeasureConfig {
    pub refinement: u32,
    /// Defaults to the sample's largest extent.
    pub base_side: Option<f64>,
    /// Defaults to the sample's bounding-box minimum.
    pub anchor: Option<[f64; 3]>,
}

impl Default for PremeasureConfig {
    fn default() -> Self {
        Self { refinement: 2, base_side: None, anchor: None }
    }
}

impl PremeasureConfig {
    /// Triadic cubes anchored at the origin, matching the Cantor construction.
    pub fn triadic() -> Self {
        Self { refinement: 3, base_side: Some(1.0), anchor: Some([0.0; 3]) }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Level {
    side: f64,
    diams: Vec<f64>,
}

/// Occupied cubes at every level of the hierarchy down to the sample resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeHierarchy {
    levels: Vec<Level>,
    base_side: f64,
    refinement: f64,
    points: usize,
    empty: bool,
}

impl CubeHierarchy {
    pub fn build(sample: &PointSample, config: &PremeasureConfig) -> Result<Self> {
        if config.refinement < 2 {
            return Err(Error::Domain("cube refinement must be at least 2".into()));
        }
        let eta = sample.resolution;
        let Some((lo, hi)) = sample.bbox() else {
            return Ok(Self { levels: Vec::new(), base_side: eta, refinement: 2.0, points: 0, empty: true });
        };
        let extent = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        let base_side = config.base_side.unwrap_or(extent).max(eta);
        if !(base_side > 0.0 && base_side.is_finite()) {
            return Err(Error::Domain(format!("base side {base_side} must be positive")));
        }
        let anchor = config.anchor.unwrap_or(lo);
        let refinement = config.refinement as f64;
        let mut levels = Vec::new();
        let mut j = 0i32;
        loop {
            let side = base_side * refinement.powi(-j);
            // relative slack keeps exact powers like 3^-8 on their own level
            if side < eta * (1.0 - 1e-9) {
                break;
            }
            levels.push(Level { side, diams: cube_diameters(&sample.points, anchor, side, eta) });
            j += 1;
        }
        Ok(Self { levels, base_side, refinement, points: sample.points.len(), empty: false })
    }

    /// Upper estimate of `H^{lambda, epsilon}` on the sample.
    pub fn estimate(&self, lambda: f64, epsilon: f64) -> f64 {
        if self.empty {
            return 0.0;
        }
        let best = self
            .levels
            .iter()
            .filter(|l| l.side * SQRT3 <= epsilon * (1.0 + 1e-12))
            .map(|l| sum_powers(&l.diams, lambda))
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            return best;
        }
        // Below the sample resolution every point gets its own cube of the
        // largest side that fits under epsilon.
        let mut side = self.base_side;
        while side * SQRT3 > epsilon {
            side /= self.refinement;
        }
        self.points as f64 * (side * SQRT3).powf(lambda)
    }
}

fn cube_diameters(points: &[[f64; 3]], anchor: [f64; 3], side: f64, eta: f64) -> Vec<f64> {
    let mut cubes: BTreeMap<[i64; 3], ([f64; 3], [f64; 3])> = BTreeMap::new();
    for p in points {
        let key = [0, 1, 2].map(|a| ((p[a] - anchor[a]) / side).floor() as i64);
        cubes
            .entry(key)
            .and_modify(|(lo, hi)| {
                for a in 0..3 {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            })
            .or_insert((*p, *p));
    }
    cubes
        .values()
        .map(|(lo, hi)| (dist(*lo, *hi) + eta).min(side * SQRT3))
        .collect()
}

fn sum_powers(diams: &[f64], lambda: f64) -> f64 {
    diams.iter().map(|d| d.powf(lambda)).collect::<KahanSum>().value()
}

/// Convenience wrapper building the hierarchy on every call.
pub fn hausdorff_premeasure(sample: &PointSample, lambda: f64, epsilon: f64, config: &PremeasureConfig) -> Result<f64> {
    if !(lambda > 0.0) || !(epsilon > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} and epsilon = {epsilon} must be positive")));
    }
    Ok(CubeHierarchy::build(sample, config)?.estimate(lambda, epsilon))
}

/// Estimates over a `lambda` grid and a decreasing `epsilon` ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub lambda: f64,
    /// One estimate per ladder rung, largest epsilon first.
    pub estimates: Vec<f64>,
    pub grows: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionBracket {
    /// Largest lambda whose estimate grows as epsilon shrinks.
    pub lambda_low: Option<f64>,
    /// Smallest lambda whose estimate stops growing.
    pub lambda_high: Option<f64>,
    /// Set when growth and non-growth interleave along the lambda grid.
    pub inconclusive: Option<String>,
    pub growth_tolerance: f64,
    pub rows: Vec<TrendRow>,
}

/// Relative increase across the ladder above which an estimate counts as growing.
pub const GROWTH_TOLERANCE: f64 = 0.01;

pub fn dimension_bracket(
    sample: &PointSample,
    lambda_grid: &[f64],
    epsilon_ladder: &[f64],
    config: &PremeasureConfig,
) -> Result<DimensionBracket> {
    if lambda_grid.is_empty() || epsilon_ladder.is_empty() {
        return Err(Error::Domain("lambda grid and epsilon ladder must be nonempty".into()));
    }
    if lambda_grid.windows(2).any(|w| !(w[0] < w[1])) || lambda_grid[0] <= 0.0 {
        return Err(Error::Domain("lambda grid must be positive and strictly increasing".into()));
    }
    if epsilon_ladder.windows(2).any(|w| !(w[0] > w[1])) || *epsilon_ladder.last().unwrap() <= 0.0 {
        return Err(Error::Domain("epsilon ladder must be positive and strictly decreasing".into()));
    }
    let hierarchy = CubeHierarchy::build(sample, config)?;
    let rows: Vec<TrendRow> = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let estimates: Vec<f64> = epsilon_ladder.iter().map(|&e| hierarchy.estimate(lambda, e)).collect();
            let first = estimates[0];
            let last = *estimates.last().unwrap();
            TrendRow { lambda, grows: last > first * (1.0 + GROWTH_TOLERANCE), estimates }
        })
        .collect();

    let lambda_low = rows.iter().rev().find(|r| r.grows).map(|r| r.lambda);
    let lambda_high = rows.iter().find(|r| !r.grows).map(|r| r.lambda);
    let inconclusive = match (lambda_low, lambda_high) {
        (Some(lo), Some(hi)) if lo > hi => {
            Some(format!("estimate grows at lambda = {lo} but not at the smaller lambda = {hi}"))
        }
        (_, None) => Some("estimate grows at every lambda in the grid".into()),
        _ => None,
    };
    Ok(DimensionBracket { lambda_low, lambda_high, inconclusive, growth_tolerance: GROWTH_TOLERANCE, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    pub delta: f64,
    pub lambda: f64,
    pub epsilon_hat: f64,
    pub epsilon_q: f64,
    pub witnesses: Vec<Ball>,
    /// Indices into `witnesses`.
    pub selected: Vec<usize>,
    /// `sum (5 r_i)^{2 delta}` over the selected balls.
    pub comb_sum: f64,
    /// `(2 * 5^{2 delta} / eps_q) * sum_i int int_{slab x B_i} |v|^{q-2} |grad v|^2`.
    pub witness_bound: f64,
    /// `(2 * 5^{2 delta} / eps_q) * int int_{slab x box} |v|^{q-2} |grad v|^2`.
    pub integral_bound: f64,
    pub slab_integral: f64,
    pub comb_le_witness: bool,
    pub witness_le_integral: bool,
    pub ok: bool,
}

const CHAIN_TOL: f64 = 1e-9;

fn le(a: f64, b: f64) -> bool {
    a <= b + CHAIN_TOL * b.abs().max(a.abs())
}

/// Covers the candidate set by witness balls and checks the measure chain
/// `comb_sum <= witness_bound <= integral_bound` at one scale.
pub fn singular_measure_bound(
    v: &Field,
    sigma: &CandidateSet,
    delta: f64,
    epsilon_q: f64,
    epsilon_hat: f64,
) -> Result<CoveringReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1/2)")));
    }
    if !(epsilon_q > 0.0) || !(epsilon_hat > 0.0) {
        return Err(Error::Domain("epsilon_q and epsilon_hat must be positive".into()));
    }
    let q = 3.0 - 2.0 * delta;
    check_q(q)?;
    if sigma.mode != ScanMode::Bq {
        return Err(Error::Config("the covering bound needs a B_q candidate set".into()));
    }
    if !sigma.is_empty() && (sigma.q - q).abs() > 1e-12 {
        return Err(Error::Config(format!("candidate set was scanned at q = {} but 3 - 2 delta = {q}", sigma.q)));
    }
    let t_star = v.grid.final_time();
    let t_lo = t_star - epsilon_hat * epsilon_hat;

    let mut witnesses = Vec::with_capacity(sigma.len());
    for (index, p) in sigma.points.iter().enumerate() {
        let radius = p
            .profile
            .iter()
            .filter(|&&(r, b)| 5.0 * r < epsilon_hat && b >= 0.5 * epsilon_q)
            .map(|&(r, _)| r)
            .fold(None, |best: Option<f64>, r| Some(best.map_or(r, |b| b.max(r))));
        match radius {
            Some(radius) => witnesses.push(Ball { center: p.x, radius }),
            None => return Err(Error::WitnessMissing { index, eps_hat: epsilon_hat }),
        }
    }
    let family = BallFamily { balls: witnesses };
    let selected = vitali_select(&family);

    let comb_sum: f64 = selected
        .iter()
        .map(|&i| (5.0 * family.balls[i].radius).powf(2.0 * delta))
        .collect::<KahanSum>()
        .value();
    let per_ball: Vec<f64> = selected
        .par_iter()
        .map(|&i| {
            let b = family.balls[i];
            bq_integral(v, b.center, b.radius, t_lo, t_star, q)
        })
        .collect::<Result<_>>()?;
    let scale = 2.0 * 5f64.powf(2.0 * delta) / epsilon_q;
    let witness_bound = scale * per_ball.iter().copied().collect::<KahanSum>().value();
    let slab_integral = box_bq_integral(v, t_lo, t_star, q)?;
    let integral_bound = scale * slab_integral;
    let comb_le_witness = le(comb_sum, witness_bound);
    let witness_le_integral = le(witness_bound, integral_bound);
    Ok(CoveringReport {
        delta,
        lambda: 2.0 * delta,
        epsilon_hat,
        epsilon_q,
        witnesses: family.balls,
        selected,
        comb_sum,
        witness_bound,
        integral_bound,
        slab_integral,
        comb_le_witness,
        witness_le_integral,
        ok: comb_le_witness && witness_le_integral,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub eps_hat_max: f64,
    pub factor: f64,
    pub count: usize,
}

impl SweepConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.eps_hat_max > 0.0) || !(self.factor > 0.0 && self.factor < 1.0) || self.count == 0 {
            return Err(Error::Config("sweep needs eps_hat_max > 0, factor in (0, 1), count >= 1".into()));
        }
        Ok((0..self.count).map(|j| self.eps_hat_max * self.factor.powi(j as i32)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps_hat: f64,
    pub selected: usize,
    pub comb_sum: f64,
    pub witness_bound: f64,
    pub integral_bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub delta: f64,
    pub sweep: Vec<SweepRow>,
}

/// The covering bound along a decreasing sequence of scales.
pub fn covering_sweep(
    v: &Field,
    sigma: &CandidateSet,
    delta: f64,
    epsilon_q: f64,
    sweep: &SweepConfig,
) -> Result<SweepReport> {
    let rows = sweep
        .values()?
        .into_iter()
        .map(|eps_hat| {
            let rep = singular_measure_bound(v, sigma, delta, epsilon_q, eps_hat)?;
            Ok(SweepRow {
                eps_hat,
                selected: rep.selected.len(),
                comb_sum: rep.comb_sum,
                witness_bound: rep.witness_bound,
                integral_bound: rep.integral_bound,
                ok: rep.ok,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport { delta, sweep: rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(x: f64, r: f64) -> Ball {
        Ball { center: [x, 0.0, 0.0], radius: r }
    }

    #[test]
    fn collinear_unit_balls() {
        let fam = BallFamily::new(vec![ball(0.0, 1.0), ball(1.5, 1.0), ball(3.0, 1.0)]).unwrap();
        let sel = vitali_select(&fam);
        assert_eq!(sel, vec![0, 2]);
        assert_eq!(check_selection(&fam, &sel), SelectionCheck { disjoint: true, covered: true });
    }

    #[test]
    fn touching_balls_intersect() {
        let fam = BallFamily::new(vec![ball(0.0, 1.0), ball(2.0, 1.0)]).unwrap();
        assert_eq!(vitali_select(&fam), vec![0]);
    }

    #[test]
    fn segment_premeasure_near_one() {
        let s = PointSample::unit_segment(1001);
        let e = hausdorff_premeasure(&s, 1.0, 0.1, &PremeasureConfig::default()).unwrap();
        assert!((1.0..=1.1).contains(&e), "{e}");
    }

    #[test]
    fn cantor_covering_sum_is_one() {
        let s = PointSample::cantor(8);
        let h = CubeHierarchy::build(&s, &PremeasureConfig::triadic()).unwrap();
        let lambda = 2f64.ln() / 3f64.ln();
        for j in 0..=8 {
            let eps = SQRT3 * 3f64.powi(-j);
            let e = h.estimate(lambda, eps);
            assert!(e <= 1.0 + 1e-9, "level {j}: {e}");
        }
    }

    #[test]
    fn single_point_vanishes() {
        let s = PointSample::new(vec![[0.3, 0.2, 0.1]], 1e-3).unwrap();
        let cfg = PremeasureConfig::default();
        let big = hausdorff_premeasure(&s, 0.5, 1.0, &cfg).unwrap();
        let small = hausdorff_premeasure(&s, 0.5, 1e-8, &cfg).unwrap();
        assert!(small < 1e-3 && small <= big);
    }
}
