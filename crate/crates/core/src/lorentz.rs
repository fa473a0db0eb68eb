//! Distribution functions and Lorentz quasinorms.
//!
//! Two input shapes are supported: [`SimpleFunction`], a finite list of
//! `(level, measure)` pieces evaluated in closed form, and [`Samples`], a bag
//! of cell values with a common cell measure evaluated by quadrature in the
//! level variable. Both routes share the strict `|f| > alpha` convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::sum::KahanSum;

/// Piecewise-constant nonnegative function described by its level sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSimple", into = "RawSimple")]
pub struct SimpleFunction {
    levels: Vec<f64>,
    measures: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSimple {
    pieces: Vec<(f64, f64)>,
}

impl TryFrom<RawSimple> for SimpleFunction {
    type Error = Error;
    fn try_from(raw: RawSimple) -> Result<Self> {
        SimpleFunction::from_pieces(raw.pieces)
    }
}

impl From<SimpleFunction> for RawSimple {
    fn from(f: SimpleFunction) -> Self {
        RawSimple { pieces: f.pieces().collect() }
    }
}

impl SimpleFunction {
    pub fn zero() -> Self {
        Self { levels: Vec::new(), measures: Vec::new() }
    }

    /// Pieces must have strictly decreasing positive levels and positive measures.
    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self> {
        let mut levels = Vec::with_capacity(pieces.len());
        let mut measures = Vec::with_capacity(pieces.len());
        for (k, &(level, measure)) in pieces.iter().enumerate() {
            if !(level > 0.0 && level.is_finite()) {
                return Err(Error::Domain(format!("piece {k}: level {level} must be positive")));
            }
            if !(measure > 0.0 && measure.is_finite()) {
                return Err(Error::Domain(format!("piece {k}: measure {measure} must be positive")));
            }
            if let Some(&prev) = levels.last() {
                if level >= prev {
                    return Err(Error::Domain(format!(
                        "piece {k}: levels must be strictly decreasing ({prev} then {level})"
                    )));
                }
            }
            levels.push(level);
            measures.push(measure);
        }
        Ok(Self { levels, measures })
    }

    /// Accepts pieces in any order: sorts, merges equal levels, and drops
    /// zero levels or zero measures.
    pub fn from_pieces(mut pieces: Vec<(f64, f64)>) -> Result<Self> {
        for &(level, measure) in &pieces {
            if !(level >= 0.0 && level.is_finite() && measure >= 0.0 && measure.is_finite()) {
                return Err(Error::Domain(format!(
                    "piece ({level}, {measure}) must have finite nonnegative entries"
                )));
            }
        }
        pieces.retain(|&(l, m)| l > 0.0 && m > 0.0);
        pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (l, m) in pieces {
            match merged.last_mut() {
                Some(last) if last.0 == l => last.1 += m,
                _ => merged.push((l, m)),
            }
        }
        Self::new(merged)
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.levels.iter().copied().zip(self.measures.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        KahanSum::sum_iter(self.measures.iter().copied())
    }

    /// `c * f`; a zero factor gives the zero function.
    pub fn scaled(&self, c: f64) -> Self {
        let c = c.abs();
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            levels: self.levels.iter().map(|l| l * c).collect(),
            measures: self.measures.clone(),
        }
    }

    /// Cumulative measures `M_k = m_1 + ... + m_k`.
    fn cumulative(&self) -> Vec<f64> {
        let mut acc = KahanSum::new();
        self.measures
            .iter()
            .map(|&m| {
                acc.add(m);
                acc.value()
            })
            .collect()
    }
}

/// Cell values of a sampled field with a common cell measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub values: Vec<f64>,
    pub cell_measure: f64,
}

impl Samples {
    pub fn new(values: Vec<f64>, cell_measure: f64) -> Result<Self> {
        if !(cell_measure > 0.0 && cell_measure.is_finite()) {
            return Err(Error::Domain(format!("cell measure {cell_measure} must be positive")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sample value {v} is not finite")));
        }
        Ok(Self { values, cell_measure })
    }

    /// Pointwise magnitude of one time slice of a field (the Euclidean norm
    /// across components) over the full grid box.
    pub fn from_field_slice(field: &Field, slice: usize) -> Result<Self> {
        let g = &field.grid;
        if slice >= g.nt {
            return Err(Error::Domain(format!("time slice {slice} out of range 0..{}", g.nt)));
        }
        let n = g.spatial_len();
        let base = slice * n;
        let values = (0..n)
            .map(|idx| {
                let s: f64 = field.data.iter().map(|c| c[base + idx] * c[base + idx]).sum();
                s.sqrt()
            })
            .collect();
        Self::new(values, g.cell_volume())
    }

    /// Distinct magnitudes in decreasing order with the measure of each level set.
    fn level_sets(&self) -> Vec<(f64, f64)> {
        let mut mags: Vec<f64> = self.values.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for m in mags {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 += self.cell_measure,
                _ => out.push((m, self.cell_measure)),
            }
        }
        out
    }
}

/// Anything with a distribution function.
pub trait Distribution {
    /// `mu{|f| > alpha}`.
    fn distribution(&self, alpha: f64) -> f64;
    /// `sup |f|`.
    fn sup(&self) -> f64;
    fn lorentz_quasinorm(&self, p: f64, q: f64) -> Result<LorentzNormResult>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    ExactSimple,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LorentzNormResult {
    pub p: f64,
    /// `f64::INFINITY` for the weak norm.
    #[serde(serialize_with = "serialize_extended")]
    pub q: f64,
    pub value: f64,
    pub method: NormMethod,
}

fn serialize_extended<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn check_indices(p: f64, q: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("Lorentz index p = {p} must lie in [1, inf)")));
    }
    if !(q >= 1.0) || q.is_nan() {
        return Err(Error::Domain(format!("Lorentz index q = {q} must lie in [1, inf]")));
    }
    Ok(())
}

impl Distribution for SimpleFunction {
    fn distribution(&self, alpha: f64) -> f64 {
        KahanSum::sum_iter(self.pieces().filter(|(l, _)| *l > alpha).map(|(_, m)| m))
    }

    fn sup(&self) -> f64 {
        self.levels.first().copied().unwrap_or(0.0)
    }

    /// On `[l_{k+1}, l_k)` the distribution function equals `M_k`, so the
    /// integral splits into `M_k^{q/p} (l_k^q - l_{k+1}^q) / q` per piece.
    fn lorentz_quasinorm(&self, p: f64, q: f64) -> Result<LorentzNormResult> {
        check_indices(p, q)?;
        let cum = self.cumulative();
        let value = if q.is_infinite() {
            self.levels
                .iter()
                .zip(&cum)
                .map(|(l, m)| l * m.powf(1.0 / p))
                .fold(0.0, f64::max)
        } else {
            let mut acc = KahanSum::new();
            for k in 0..self.levels.len() {
                let next = self.levels.get(k + 1).copied().unwrap_or(0.0);
                acc.add(cum[k].powf(q / p) * (self.levels[k].powf(q) - next.powf(q)));
            }
            (p / q * acc.value()).powf(1.0 / q)
        };
        Ok(LorentzNormResult { p, q, value, method: NormMethod::ExactSimple })
    }
}

impl Distribution for Samples {
    fn distribution(&self, alpha: f64) -> f64 {
        let count = self.values.iter().filter(|v| v.abs() > alpha).count();
        count as f64 * self.cell_measure
    }

    fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Integrates `p alpha^{q-1} d(alpha)^{q/p}` segment by segment between
    /// consecutive sample magnitudes with adaptive Simpson quadrature.
    fn lorentz_quasinorm(&self, p: f64, q: f64) -> Result<LorentzNormResult> {
        check_indices(p, q)?;
        let sets = self.level_sets();
        let value = if q.is_infinite() {
            let mut d = 0.0;
            let mut best: f64 = 0.0;
            for &(level, measure) in &sets {
                d += measure;
                best = best.max(level * d.powf(1.0 / p));
            }
            best
        } else {
            let mut acc = KahanSum::new();
            let mut d = 0.0;
            for (k, &(level, measure)) in sets.iter().enumerate() {
                d += measure;
                let lower = sets.get(k + 1).map(|s| s.0).unwrap_or(0.0);
                let weight = d.powf(q / p);
                let integrand = |a: f64| a.powf(q - 1.0);
                let seg = adaptive_simpson(&integrand, lower, level, 1e-13 * level.powf(q));
                acc.add(p * weight * seg);
            }
            acc.value().powf(1.0 / q)
        };
        Ok(LorentzNormResult { p, q, value, method: NormMethod::Quadrature })
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol.max(f64::MIN_POSITIVE), 48)
}

/// Outcome of the weak-type interpolation inequality check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpolationCheck {
    pub p: f64,
    pub r: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub q: f64,
    pub theta: f64,
    pub constant: f64,
    /// `||f||_{L^r}`
    pub lhs: f64,
    /// `constant * ||f||_{L^{p,inf}}^theta * ||f||_{L^{q,inf}}^{1-theta}`
    pub rhs: f64,
    /// `lhs / rhs`, with `0/0` reported as 0.
    pub ratio: f64,
    pub pass: bool,
}

/// Checks `||f||_r <= (r/(r-p) + r/(q-r))^{1/r} ||f||_{p,inf}^theta ||f||_{q,inf}^{1-theta}`
/// where `1/r = theta/p + (1-theta)/q`. `q = inf` uses `sup |f|`.
pub fn interpolate_bound<F: Distribution>(f: &F, p: f64, r: f64, q: f64) -> Result<InterpolationCheck> {
    if !(p >= 1.0 && p < r && r < q) || r.is_infinite() {
        return Err(Error::Domain(format!(
            "interpolation needs 1 <= p < r < q <= inf, got p = {p}, r = {r}, q = {q}"
        )));
    }
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let theta = (1.0 / r - inv_q) / (1.0 / p - inv_q);
    let tail = if q.is_infinite() { 0.0 } else { r / (q - r) };
    let constant = (r / (r - p) + tail).powf(1.0 / r);

    let lhs = f.lorentz_quasinorm(r, r)?.value;
    let weak_p = f.lorentz_quasinorm(p, f64::INFINITY)?.value;
    let weak_q = if q.is_infinite() {
        f.sup()
    } else {
        f.lorentz_quasinorm(q, f64::INFINITY)?.value
    };
    let rhs = constant * weak_p.powf(theta) * weak_q.powf(1.0 - theta);
    let ratio = if rhs == 0.0 {
        if lhs == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        lhs / rhs
    };
    Ok(InterpolationCheck {
        p,
        r,
        q,
        theta,
        constant,
        lhs,
        rhs,
        ratio,
        pass: lhs <= rhs * (1.0 + 1e-9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator(m: f64) -> SimpleFunction {
        SimpleFunction::new(vec![(1.0, m)]).unwrap()
    }

    #[test]
    fn distribution_uses_strict_inequality() {
        let f = indicator(2.5);
        assert_eq!(f.distribution(0.5), 2.5);
        assert_eq!(f.distribution(1.0), 0.0);
        let g = SimpleFunction::new(vec![(3.0, 1.0), (1.0, 4.0)]).unwrap();
        assert_eq!(g.distribution(2.0), 1.0);
    }

    #[test]
    fn indicator_norms() {
        let f = indicator(2.5);
        for p in [1.0, 1.5, 2.0, 3.7] {
            let strong = f.lorentz_quasinorm(p, p).unwrap().value;
            let weak = f.lorentz_quasinorm(p, f64::INFINITY).unwrap().value;
            let expected = 2.5f64.powf(1.0 / p);
            assert!((strong - expected).abs() < 1e-14 * expected);
            assert!((weak - expected).abs() < 1e-14 * expected);
        }
    }

    #[test]
    fn weak_norm_takes_best_level() {
        let f = SimpleFunction::new(vec![(2.0, 1.0), (1.0, 3.0)]).unwrap();
        assert_eq!(f.lorentz_quasinorm(2.0, f64::INFINITY).unwrap().value, 2.0);
    }

    #[test]
    fn rejects_p_below_one() {
        assert!(indicator(1.0).lorentz_quasinorm(0.5, 2.0).is_err());
    }

    #[test]
    fn from_pieces_sorts_and_merges() {
        let f = SimpleFunction::from_pieces(vec![(1.0, 2.0), (3.0, 1.0), (1.0, 0.5), (0.0, 9.0)]).unwrap();
        assert_eq!(f.pieces().collect::<Vec<_>>(), vec![(3.0, 1.0), (1.0, 2.5)]);
        assert!(SimpleFunction::new(vec![(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let zero = interpolate_bound(&SimpleFunction::zero(), 1.0, 2.0, 4.0).unwrap();
        assert_eq!((zero.lhs, zero.rhs, zero.ratio), (0.0, 0.0, 0.0));
        assert!(zero.pass);

        let c = interpolate_bound(&indicator(1.0), 1.0, 2.0, 4.0).unwrap();
        assert!((c.theta - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.lhs - 1.0).abs() < 1e-15);
        assert!((c.rhs - 3f64.sqrt()).abs() < 1e-14);
        assert!(c.pass);

        assert!(interpolate_bound(&indicator(1.0), 2.0, 2.0, 4.0).is_err());
    }

    #[test]
    fn sampled_path_matches_closed_form() {
        // level 3 on 2 cells, level 1.5 on 5 cells, zero on 3 cells; cell measure 0.25
        let mut values = vec![3.0, -3.0];
        values.extend([1.5; 5]);
        values.extend([0.0; 3]);
        let s = Samples::new(values, 0.25).unwrap();
        let f = SimpleFunction::new(vec![(3.0, 0.5), (1.5, 1.25)]).unwrap();
        assert_eq!(s.distribution(1.5), f.distribution(1.5));
        for (p, q) in [(1.0, 1.0), (2.0, 3.0), (1.5, 1.2), (2.5, f64::INFINITY)] {
            let a = s.lorentz_quasinorm(p, q).unwrap().value;
            let b = f.lorentz_quasinorm(p, q).unwrap().value;
            assert!((a - b).abs() <= 1e-9 * b, "p={p} q={q}: {a} vs {b}");
        }
    }

    #[test]
    fn simple_function_json_roundtrip() {
        let f: SimpleFunction = serde_json::from_str(r#"{"pieces": [[1, 3], [2, 1]]}"#).unwrap();
        assert_eq!(f.pieces().collect::<Vec<_>>(), vec![(2.0, 1.0), (1.0, 3.0)]);
        let back: SimpleFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
