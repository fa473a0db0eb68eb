//! Exponent bookkeeping for the higher-integrability argument.
//!
//! A pressure bound `pi in L^r_t L^p_x` with `2/r + 3/p = 2 + gamma` is
//! admissible for an integrability gain `q = 3 - 2 delta` when the four numbers
//! sit in a specific region. Inside that region a Hölder splitting exponent
//! `theta` must be chosen so that a chain of inequalities closes; this module
//! classifies tuples into the six sub-cases of that argument, picks `theta`,
//! and re-checks every link of the chain numerically.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute tolerance on `2/r + 3/p - (2 + gamma)` for user-supplied tuples.
pub const RELATION_TOL: f64 = 1e-9;
/// `q = 3 - 2 delta` must stay this far inside `(2, 3)`.
pub const Q_MARGIN: f64 = 1e-6;
/// Slack tolerated by the constraint report.
pub const CHECK_TOL: f64 = 1e-9;
const BOUNDARY_TOL: f64 = 1e-12;

/// A value in `[0, +inf]`, used for Hölder conjugates that may degenerate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    /// Builds `1 / denominator`, mapping a vanishing denominator to infinity.
    fn from_reciprocal(denominator: f64) -> Self {
        if denominator.abs() <= BOUNDARY_TOL {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(1.0 / denominator)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    /// `1/x` with `1/inf = 0`.
    pub fn recip(self) -> f64 {
        match self {
            ExtReal::Finite(v) => 1.0 / v,
            ExtReal::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinite)
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    I1,
    I2,
    I3,
    II1,
    II2,
    II3,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::I1 => "I.1",
            CaseLabel::I2 => "I.2",
            CaseLabel::I3 => "I.3",
            CaseLabel::II1 => "II.1",
            CaseLabel::II2 => "II.2",
            CaseLabel::II3 => "II.3",
        }
    }

    /// `r >= 2` family.
    pub fn is_large_r(self) -> bool {
        matches!(self, CaseLabel::I1 | CaseLabel::I2 | CaseLabel::I3)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// One violated admissibility constraint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Verdict {
    Admissible(CaseLabel),
    Rejected(Vec<Violation>),
}

impl Verdict {
    pub fn case(&self) -> Option<CaseLabel> {
        match self {
            Verdict::Admissible(c) => Some(*c),
            Verdict::Rejected(_) => None,
        }
    }
}

/// How the splitting exponent was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThetaRule {
    /// The per-case closed-form choice satisfied every constraint.
    CaseFormula,
    /// The per-case value exceeded the lower half of the lambda window and
    /// was replaced by the midpoint of the feasible interval.
    Recentered { case_formula: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentTuple {
    pub p: f64,
    pub r: f64,
    pub delta: f64,
    pub gamma: f64,
    pub q: f64,
    pub theta: Option<f64>,
    pub theta_rule: Option<ThetaRule>,
    pub lambda: Option<ExtReal>,
    pub mu: Option<ExtReal>,
    pub verdict: Verdict,
}

impl ExponentTuple {
    pub fn case(&self) -> Option<CaseLabel> {
        self.verdict.case()
    }

    pub fn is_admissible(&self) -> bool {
        self.case().is_some()
    }
}

/// `g(delta, gamma) = 3 delta / (2 delta - (1 - delta) gamma)`, the lower
/// threshold on `p` when `r >= 2`.
pub fn g_threshold(delta: f64, gamma: f64) -> Result<f64> {
    let den = 2.0 * delta - (1.0 - delta) * gamma;
    if den <= 0.0 {
        return Err(Error::DegenerateDenominator(format!(
            "2 delta - (1 - delta) gamma = {den} for delta = {delta}, gamma = {gamma}"
        )));
    }
    Ok(3.0 * delta / den)
}

/// `gamma` forced by the scaling relation `2/r + 3/p = 2 + gamma`.
pub fn gamma_from_relation(p: f64, r: f64) -> f64 {
    2.0 / r + 3.0 / p - 2.0
}

/// Lower bound on theta: `delta / (2 delta - gamma (3/2 - delta))`.
pub fn theta_lower(delta: f64, gamma: f64) -> f64 {
    delta / (2.0 * delta - gamma * (1.5 - delta))
}

/// Upper bound on theta from the upper half of the lambda window:
/// `(2 - 2 delta) p / (9 - 6 delta - 2 p)`, infinite when `p >= (9 - 6 delta)/2`.
pub fn theta_window_cap(p: f64, delta: f64) -> f64 {
    let den = 9.0 - 6.0 * delta - 2.0 * p;
    if den <= 0.0 {
        f64::INFINITY
    } else {
        (2.0 - 2.0 * delta) * p / den
    }
}

/// Upper bound on theta from the lower half of the lambda window:
/// `1 / (2 - (3 - 2 delta)/p)`.
pub fn theta_lambda_floor_cap(p: f64, delta: f64) -> f64 {
    let den = 2.0 - (3.0 - 2.0 * delta) / p;
    if den <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / den
    }
}

/// Checks the admissibility region and, when admissible, labels the case.
///
/// Rejection is a value: the returned tuple lists every violated constraint.
pub fn check_admissible(p: f64, r: f64, delta: f64, gamma: f64) -> ExponentTuple {
    let q = 3.0 - 2.0 * delta;
    let mut violations = Vec::new();
    let mut reject = |constraint: &'static str, detail: String| {
        violations.push(Violation { constraint, detail });
    };

    let finite = [p, r, delta, gamma].iter().all(|v| v.is_finite());
    if !finite || p <= 0.0 || r <= 0.0 || delta <= 0.0 {
        reject(
            "positive_inputs",
            format!("p = {p}, r = {r}, delta = {delta}, gamma = {gamma}"),
        );
        return rejected(p, r, delta, gamma, q, violations);
    }

    let residual = 2.0 / r + 3.0 / p - (2.0 + gamma);
    if residual.abs() > RELATION_TOL {
        reject(
            "scaling_relation",
            format!("2/r + 3/p - (2 + gamma) = {residual}"),
        );
    }
    let gamma_ok = gamma > 0.0 && gamma < 0.5;
    if !gamma_ok {
        reject("gamma_range", format!("gamma = {gamma} not in (0, 1/2)"));
    }
    if r <= 1.0 {
        reject("r_range", format!("r = {r} not in (1, inf)"));
    }
    if delta >= 0.5 {
        reject("delta_range", format!("delta = {delta} not below 1/2"));
    }
    if !(q > 2.0 + Q_MARGIN && q < 3.0 - Q_MARGIN) {
        reject("q_margin", format!("q = 3 - 2 delta = {q} too close to 2 or 3"));
    }

    if gamma_ok {
        let p_lo = 3.0 / (2.0 + gamma);
        let p_hi = 3.0 / gamma;
        if !(p > p_lo && p < p_hi) {
            reject("p_range", format!("p = {p} not in ({p_lo}, {p_hi})"));
        }
        let delta_lo = 3.0 * gamma / (2.0 + 2.0 * gamma);
        if delta <= delta_lo {
            reject(
                "delta_range",
                format!("delta = {delta} not above 3 gamma/(2 + 2 gamma) = {delta_lo}"),
            );
        }
        if r >= 2.0 {
            match g_threshold(delta, gamma) {
                Ok(g) if p > g => {}
                Ok(g) => reject("p_above_g", format!("p = {p} not above g = {g}")),
                Err(e) => reject("p_above_g", e.to_string()),
            }
        } else if r > 1.0 {
            let lo = 3.0 / (1.0 + gamma);
            let hi = 2.0 * delta / gamma;
            if !(p > lo && p <= hi) {
                reject(
                    "p_small_r_window",
                    format!("p = {p} not in ({lo}, {hi}]"),
                );
            }
        }
    }

    if !violations.is_empty() {
        return rejected(p, r, delta, gamma, q, violations);
    }

    let case = classify(p, r, delta, gamma);
    ExponentTuple {
        p,
        r,
        delta,
        gamma,
        q,
        theta: None,
        theta_rule: None,
        lambda: None,
        mu: None,
        verdict: Verdict::Admissible(case),
    }
}

fn rejected(p: f64, r: f64, delta: f64, gamma: f64, q: f64, v: Vec<Violation>) -> ExponentTuple {
    ExponentTuple {
        p,
        r,
        delta,
        gamma,
        q,
        theta: None,
        theta_rule: None,
        lambda: None,
        mu: None,
        verdict: Verdict::Rejected(v),
    }
}

// Boundaries go to the lower-numbered case.
fn classify(p: f64, r: f64, delta: f64, gamma: f64) -> CaseLabel {
    if r >= 2.0 {
        if p >= 2.5 - delta {
            CaseLabel::I1
        } else if p >= (9.0 - 6.0 * delta) / (4.0 - 2.0 * delta) {
            CaseLabel::I2
        } else {
            CaseLabel::I3
        }
    } else if delta >= 9.0 * gamma / (4.0 + 6.0 * gamma) {
        if p >= 4.5 - 3.0 * delta {
            CaseLabel::II1
        } else {
            CaseLabel::II2
        }
    } else {
        CaseLabel::II3
    }
}

/// The per-case closed-form theta.
pub fn case_formula_theta(case: CaseLabel, p: f64, r: f64, delta: f64, gamma: f64) -> f64 {
    let lower = theta_lower(delta, gamma);
    let cap = theta_window_cap(p, delta);
    match case {
        CaseLabel::I1 | CaseLabel::I2 => 1.0,
        CaseLabel::I3 => 0.5 * (lower + cap),
        CaseLabel::II1 => 0.5 * (lower + r / 2.0),
        CaseLabel::II2 | CaseLabel::II3 => 0.5 * (lower + (r / 2.0).min(cap)),
    }
}

/// Chooses theta for an admissible tuple and verifies the whole chain.
///
/// The case formula is used whenever it lands inside the feasible interval.
/// The formula ignores the upper bound `1/(2 - (3 - 2 delta)/p)` implied by
/// the lower half of the lambda window, so when it overshoots that bound the
/// midpoint of `[lower, min(all caps)]` is used instead.
pub fn select_theta(tuple: &ExponentTuple) -> Result<ExponentTuple> {
    let case = tuple.case().ok_or_else(|| {
        Error::Domain("select_theta requires an admissible tuple".to_string())
    })?;
    let ExponentTuple { p, r, delta, gamma, .. } = *tuple;

    let lower = theta_lower(delta, gamma);
    let upper = 1.0f64
        .min(r / 2.0)
        .min(p / 2.0)
        .min(theta_window_cap(p, delta))
        .min(theta_lambda_floor_cap(p, delta));

    let formula = case_formula_theta(case, p, r, delta, gamma);
    let tol = BOUNDARY_TOL * formula.abs().max(1.0);
    let (theta, rule) = if formula >= lower - tol && formula <= upper + tol {
        (formula, ThetaRule::CaseFormula)
    } else {
        (
            0.5 * (lower + upper),
            ThetaRule::Recentered {
                case_formula: formula,
            },
        )
    };

    let chain = holder_chain(p, r, delta, theta)?;
    let mut failures: Vec<String> = chain
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} (slack {})", c.name, c.slack))
        .collect();
    for c in theta_checks(p, r, delta, gamma, theta) {
        if !c.pass {
            failures.push(format!("{} (slack {})", c.name, c.slack));
        }
    }
    if !failures.is_empty() {
        return Err(Error::InternalContradiction(format!(
            "theta = {theta} for case {case} at (p, r, delta, gamma) = ({p}, {r}, {delta}, {gamma}) violates {}",
            failures.join(", ")
        )));
    }

    Ok(ExponentTuple {
        theta: Some(theta),
        theta_rule: Some(rule),
        lambda: Some(chain.lambda),
        mu: Some(chain.mu),
        ..tuple.clone()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// Signed margin; nonnegative when the constraint holds.
    pub slack: f64,
    pub pass: bool,
}

impl ConstraintCheck {
    fn at_most(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self { name, lhs, rhs, slack, pass: slack >= -CHECK_TOL }
    }

    fn below(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self { name, lhs, rhs, slack, pass: slack > 0.0 }
    }
}

/// Constraints on theta itself, independent of the Hölder conjugates.
pub fn theta_checks(p: f64, r: f64, delta: f64, gamma: f64, theta: f64) -> Vec<ConstraintCheck> {
    let lower = theta_lower(delta, gamma);
    vec![
        ConstraintCheck::below("theta_lower_above_half", 0.5, lower),
        ConstraintCheck::at_most("theta_above_lower", lower, theta),
        ConstraintCheck::at_most("theta_below_caps", theta, 1.0f64.min(r / 2.0).min(p / 2.0)),
        ConstraintCheck::at_most(
            "lower_bound_compatible",
            (2.0 - (2.0 / p) * (1.5 - delta)) * lower,
            1.0,
        ),
        ConstraintCheck::at_most(
            "lambda_window_cap",
            theta * (9.0 - 6.0 * delta - 2.0 * p),
            (2.0 - 2.0 * delta) * p,
        ),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderChain {
    pub lambda: ExtReal,
    pub mu: ExtReal,
    pub checks: Vec<ConstraintCheck>,
}

impl HolderChain {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Hölder conjugates `1/lambda = 1/2 - theta/p`, `1/mu = 1/2 - theta/r` and
/// the constraint report for the pressure-term chain.
pub fn holder_chain(p: f64, r: f64, delta: f64, theta: f64) -> Result<HolderChain> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain(format!("delta = {delta} not in (0, 1/2)")));
    }
    if theta < 0.5 - BOUNDARY_TOL {
        return Err(Error::Domain(format!("theta = {theta} below 1/2")));
    }
    let lambda_den = 0.5 - theta / p;
    let mu_den = 0.5 - theta / r;
    if lambda_den < -BOUNDARY_TOL {
        return Err(Error::Domain(format!(
            "theta/p = {} exceeds 1/2; lambda would be negative",
            theta / p
        )));
    }
    if mu_den < -BOUNDARY_TOL {
        return Err(Error::Domain(format!(
            "theta/r = {} exceeds 1/2; mu would be negative",
            theta / r
        )));
    }
    let lambda = ExtReal::from_reciprocal(lambda_den);
    let mu = ExtReal::from_reciprocal(mu_den);

    let s = 1.5 - delta;
    let a = 2.5 - 2.0 * theta - delta;
    let half_lambda_a = match lambda {
        ExtReal::Infinite if a > 0.0 => f64::INFINITY,
        ExtReal::Infinite => 0.0,
        ExtReal::Finite(l) => 0.5 * l * a,
    };
    let budget = 2.0 * mu.recip() + 3.0 * lambda.recip();

    let checks = vec![
        ConstraintCheck::at_most("exponent_ratio_at_most_one", a / s, 1.0),
        ConstraintCheck::at_most("lambda_window_lower", s, half_lambda_a),
        ConstraintCheck::at_most("lambda_window_upper", half_lambda_a, 3.0 * s),
        ConstraintCheck::below("singular_integral_margin", 1.0, half_lambda_a),
        ConstraintCheck::at_most("scaling_budget", 1.5 * a / s, budget),
    ];
    Ok(HolderChain { lambda, mu, checks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PathCase {
    /// `r > 2`
    I,
    /// `1 < r < 2`
    II,
    /// `r = 2, s = 3`
    III,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationPath {
    pub r: f64,
    pub s: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Supremum of admissible gamma for this case; `gamma` is below it.
    pub gamma_bound: f64,
    pub r1: f64,
    pub s1: f64,
    pub case: PathCase,
    pub admissible: bool,
}

fn path_case(r: f64, s: f64) -> Result<PathCase> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::Domain(format!("r = {r} not in (1, inf)")));
    }
    if !(s > 1.5 && s.is_finite()) {
        return Err(Error::Domain(format!("s = {s} not in (3/2, inf)")));
    }
    let residual = 2.0 / r + 3.0 / s - 2.0;
    if residual.abs() > RELATION_TOL {
        return Err(Error::Domain(format!(
            "2/r + 3/s - 2 = {residual}; the endpoint pair must be scale invariant"
        )));
    }
    Ok(if (r - 2.0).abs() <= RELATION_TOL {
        PathCase::III
    } else if r > 2.0 {
        PathCase::I
    } else {
        PathCase::II
    })
}

/// Supremum of the gamma values for which interpolating against the energy
/// class pressure bound lands in the admissible region.
pub fn path_gamma_bound(r: f64, s: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain(format!("delta = {delta} not in (0, 1/2)")));
    }
    let region = 2.0 * delta / (3.0 - 2.0 * delta);
    Ok(match path_case(r, s)? {
        PathCase::I => {
            let threshold = delta * (2.0 * s - 3.0) / (s - 3.0 * delta);
            // keeps r1 >= 2
            let time_side = 1.0 - s / 3.0;
            threshold.min(region).min(time_side).min(0.5)
        }
        PathCase::II => {
            let a = 2.0 * delta / s;
            let window = a / (1.0 + a - 4.0 * delta / 3.0);
            window.min(1.0 / 3.0).min(region)
        }
        PathCase::III => (2.0 * delta / (3.0 - delta)).min(1.0 / 3.0),
    })
}

/// Interpolation path with gamma fixed at half the case bound.
pub fn interpolation_path(r: f64, s: f64, delta: f64) -> Result<InterpolationPath> {
    let bound = path_gamma_bound(r, s, delta)?;
    let path = interpolation_path_with_gamma(r, s, delta, 0.5 * bound)?;
    if !path.admissible {
        return Err(Error::InternalContradiction(format!(
            "interpolated tuple (s1, r1, delta, gamma) = ({}, {}, {delta}, {}) is not admissible",
            path.s1, path.r1, path.gamma
        )));
    }
    Ok(path)
}

/// Interpolation path for a caller-chosen gamma.
pub fn interpolation_path_with_gamma(
    r: f64,
    s: f64,
    delta: f64,
    gamma: f64,
) -> Result<InterpolationPath> {
    let case = path_case(r, s)?;
    let gamma_bound = path_gamma_bound(r, s, delta)?;
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::Domain(format!("gamma = {gamma} not in (0, 1/2)")));
    }
    let inv_s1 = match case {
        PathCase::I => 1.0 / s + gamma * (1.0 / 3.0 - 1.0 / s),
        PathCase::II => (1.0 - gamma) / s + 2.0 * gamma / 3.0,
        PathCase::III => (2.0 + gamma) / 6.0,
    };
    let s1 = 1.0 / inv_s1;
    let r1 = 2.0 / (2.0 + gamma - 3.0 * inv_s1);

    let tuple = check_admissible(s1, r1, delta, gamma);
    let admissible = tuple.is_admissible()
        && match case {
            PathCase::I => tuple.case().is_some_and(CaseLabel::is_large_r),
            PathCase::II | PathCase::III => {
                s1 > 3.0 / (1.0 + gamma) && s1 <= 2.0 * delta / gamma
            }
        };
    Ok(InterpolationPath {
        r,
        s,
        delta,
        gamma,
        gamma_bound,
        r1,
        s1,
        case,
        admissible,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionRow {
    pub inv_p: f64,
    pub inv_r: f64,
    pub gamma: f64,
    pub admissible: bool,
    pub best_delta: Option<f64>,
    pub case: Option<CaseLabel>,
    /// Distance to `1/r + 1/p = 1`.
    pub dist_l1: f64,
    /// Distance to `1/r + 3/p = 2`.
    pub dist_l2: f64,
    /// Distance to `2/r + 3/p = 2`.
    pub dist_scale2: f64,
    /// Distance to `2/r + 3/p = 3`.
    pub dist_scale3: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionGrid {
    pub inv_p_min: f64,
    pub inv_p_max: f64,
    pub inv_r_min: f64,
    pub inv_r_max: f64,
    pub n: usize,
    pub delta_samples: usize,
}

impl RegionGrid {
    /// Grid over `p in [pmin, pmax]`, `r in [rmin, rmax]` (either max may be infinite).
    pub fn from_exponent_ranges(
        pmin: f64,
        pmax: f64,
        rmin: f64,
        rmax: f64,
        n: usize,
        delta_samples: usize,
    ) -> Result<Self> {
        for (name, v) in [("pmin", pmin), ("pmax", pmax), ("rmin", rmin), ("rmax", rmax)] {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("{name} = {v} must be positive")));
            }
        }
        if pmin > pmax || rmin > rmax {
            return Err(Error::Domain("min exceeds max".to_string()));
        }
        Ok(Self {
            inv_p_min: 1.0 / pmax,
            inv_p_max: 1.0 / pmin,
            inv_r_min: 1.0 / rmax,
            inv_r_max: 1.0 / rmin,
            n,
            delta_samples,
        })
    }

    pub fn delta_values(&self) -> Vec<f64> {
        let m = self.delta_samples;
        (0..m).map(|j| 0.5 * (j + 1) as f64 / (m + 1) as f64).collect()
    }
}

fn line_distance(a: f64, b: f64, c: f64, x: f64, y: f64) -> f64 {
    (a * x + b * y - c).abs() / (a * a + b * b).sqrt()
}

/// Classifies one `(1/p, 1/r)` point against a set of sampled `delta` values.
pub fn region_point(inv_p: f64, inv_r: f64, deltas: &[f64]) -> RegionRow {
    let gamma = 2.0 * inv_r + 3.0 * inv_p - 2.0;
    let p = 1.0 / inv_p;
    let r = 1.0 / inv_r;
    let mut best: Option<(f64, CaseLabel)> = None;
    if gamma > 0.0 && gamma < 0.5 {
        for &delta in deltas {
            if let Some(case) = check_admissible(p, r, delta, gamma).case() {
                if best.is_none_or(|(d, _)| delta < d) {
                    best = Some((delta, case));
                }
            }
        }
    }
    RegionRow {
        inv_p,
        inv_r,
        gamma,
        admissible: best.is_some(),
        best_delta: best.map(|b| b.0),
        case: best.map(|b| b.1),
        dist_l1: line_distance(1.0, 1.0, 1.0, inv_p, inv_r),
        dist_l2: line_distance(3.0, 1.0, 2.0, inv_p, inv_r),
        dist_scale2: line_distance(3.0, 2.0, 2.0, inv_p, inv_r),
        dist_scale3: line_distance(3.0, 2.0, 3.0, inv_p, inv_r),
    }
}

/// Admissibility table over a regular `(1/p, 1/r)` grid.
pub fn region_map(grid: &RegionGrid) -> Result<Vec<RegionRow>> {
    if grid.n < 2 {
        return Err(Error::Domain(format!("grid resolution {} below 2", grid.n)));
    }
    if grid.delta_samples == 0 {
        return Err(Error::Domain("need at least one delta sample".to_string()));
    }
    let deltas = grid.delta_values();
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (grid.n - 1) as f64;
    let mut rows = Vec::with_capacity(grid.n * grid.n);
    for j in 0..grid.n {
        let inv_r = step(grid.inv_r_min, grid.inv_r_max, j);
        for i in 0..grid.n {
            let inv_p = step(grid.inv_p_min, grid.inv_p_max, i);
            rows.push(region_point(inv_p, inv_r, &deltas));
        }
    }
    Ok(rows)
}

pub const REGION_CSV_HEADER: &str =
    "inv_p,inv_r,gamma,admissible,best_delta,case,dist_l1,dist_l2,dist_scale2,dist_scale3";

pub fn region_csv(rows: &[RegionRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 96);
    out.push_str(REGION_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let best = row.best_delta.map(|d| d.to_string()).unwrap_or_default();
        let case = row.case.map(|c| c.as_str()).unwrap_or("");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.inv_p,
            row.inv_r,
            row.gamma,
            row.admissible,
            best,
            case,
            row.dist_l1,
            row.dist_l2,
            row.dist_scale2,
            row.dist_scale3
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case_i3_p() -> f64 {
        3.0 / (2.1 - 2.0 / 3.0)
    }

    #[test]
    fn g_threshold_values() {
        assert!((g_threshold(0.4, 0.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((g_threshold(0.3, 0.1).unwrap() - 1.698_113_207_547_17).abs() < 1e-12);
        assert!((g_threshold(0.4, 0.2).unwrap() - 1.764_705_882_352_941).abs() < 1e-12);
    }

    #[test]
    fn g_threshold_degenerate() {
        // 2 delta - (1 - delta) gamma = 0.02 - 0.99 * 0.4 < 0
        assert!(matches!(
            g_threshold(0.01, 0.4),
            Err(Error::DegenerateDenominator(_))
        ));
    }

    #[test]
    fn case_i3_example() {
        let t = check_admissible(case_i3_p(), 3.0, 0.3, 0.1);
        assert_eq!(t.case(), Some(CaseLabel::I3));
        let t = select_theta(&t).unwrap();
        assert!((t.theta.unwrap() - 0.798_611_111_111_111).abs() < 1e-12);
        assert_eq!(t.theta_rule, Some(ThetaRule::CaseFormula));
    }

    #[test]
    fn rejects_broken_relation() {
        let t = check_admissible(2.0, 2.0, 0.3, 0.1);
        match t.verdict {
            Verdict::Rejected(v) => assert!(v.iter().any(|v| v.constraint == "scaling_relation")),
            _ => panic!("expected rejection"),
        }
    }

    #[test]
    fn rejects_negative_gamma() {
        let gamma = gamma_from_relation(5.0, 1.5);
        assert!((gamma + 0.066_666_666_666_666_6).abs() < 1e-12);
        let t = check_admissible(5.0, 1.5, 0.2, gamma);
        match t.verdict {
            Verdict::Rejected(v) => assert!(v.iter().any(|v| v.constraint == "gamma_range")),
            _ => panic!("expected rejection"),
        }
    }

    #[test]
    fn case_i1_takes_theta_one() {
        // r = 2.5, gamma = 0.05 -> p = 3/(2.05 - 0.8) = 2.4; delta = 0.05 puts p above 5/2 - delta?
        // 5/2 - 0.05 = 2.45 > 2.4, so use delta = 0.2: 5/2 - 0.2 = 2.3 <= 2.4.
        let p = 3.0 / (2.05 - 0.8);
        let t = check_admissible(p, 2.5, 0.2, 0.05);
        assert_eq!(t.case(), Some(CaseLabel::I1));
        let t = select_theta(&t).unwrap();
        assert_eq!(t.theta, Some(1.0));
    }

    #[test]
    fn case_i1_recenters_when_lambda_window_breaks() {
        // delta = 0.4, gamma = 0.05, p = 2.5: theta = 1 gives (lambda/2)(5/2 - 2 - 0.4) = 0.5 < 1.1
        let gamma = 0.05;
        let p = 2.5;
        let r = 2.0 / (2.0 + gamma - 3.0 / p);
        let t = check_admissible(p, r, 0.4, gamma);
        assert_eq!(t.case(), Some(CaseLabel::I1));
        let bad = holder_chain(p, r, 0.4, 1.0).unwrap();
        assert!(!bad.all_pass());
        let t = select_theta(&t).unwrap();
        assert!(matches!(t.theta_rule, Some(ThetaRule::Recentered { case_formula }) if case_formula == 1.0));
        assert!(holder_chain(p, r, 0.4, t.theta.unwrap()).unwrap().all_pass());
    }

    #[test]
    fn case_ii1_at_window_edge() {
        // p = 2 delta / gamma with r from the relation; lower bound, r/2 and
        // the lambda-floor cap all coincide here.
        let (delta, gamma, p) = (0.45, 0.05, 18.0);
        let r = 2.0 / (2.0 + gamma - 3.0 / p);
        let t = check_admissible(p, r, delta, gamma);
        assert_eq!(t.case(), Some(CaseLabel::II1));
        let t = select_theta(&t).unwrap();
        let expected = 0.5 * (theta_lower(delta, gamma) + r / 2.0);
        assert!((t.theta.unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.530_973_451_327_433_7).abs() < 1e-12);
    }

    #[test]
    fn holder_chain_examples() {
        let c = holder_chain(4.0, 4.0, 0.3, 1.0).unwrap();
        assert_eq!(c.lambda, ExtReal::Finite(4.0));
        assert_eq!(c.mu, ExtReal::Finite(4.0));

        let c = holder_chain(2.0, 4.0, 0.3, 1.0).unwrap();
        assert!(c.lambda.is_infinite());

        assert!(matches!(holder_chain(1.9, 4.0, 0.3, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn holder_chain_case_i3_slack_positive() {
        let t = select_theta(&check_admissible(case_i3_p(), 3.0, 0.3, 0.1)).unwrap();
        let c = holder_chain(t.p, t.r, t.delta, t.theta.unwrap()).unwrap();
        for check in &c.checks {
            assert!(check.slack > 0.0, "{check:?}");
        }
    }

    #[test]
    fn interpolation_case_iii() {
        let path = interpolation_path(2.0, 3.0, 0.2).unwrap();
        assert_eq!(path.case, PathCase::III);
        assert!((path.gamma - 0.071_428_571_428_571_44).abs() < 1e-12);
        assert!((path.s1 - 2.896_551_724_137_930_6).abs() < 1e-12);
        assert!(path.admissible);
    }

    #[test]
    fn interpolation_fixed_gamma_cases() {
        let p = interpolation_path_with_gamma(4.0, 2.0, 0.3, 0.1).unwrap();
        assert_eq!(p.case, PathCase::I);
        assert!((p.s1 - 2.068_965_517_241_379_4).abs() < 1e-12);
        assert!(p.admissible);

        let p = interpolation_path_with_gamma(4.0 / 3.0, 6.0, 0.4, 0.05).unwrap();
        assert_eq!(p.case, PathCase::II);
        assert!((p.s1 - 5.217_391_304_347_826).abs() < 1e-12);
        assert!(p.admissible);
    }

    #[test]
    fn interpolation_rejects_off_relation() {
        assert!(matches!(interpolation_path(3.0, 3.0, 0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn region_corner_and_interior() {
        let deltas = RegionGrid {
            inv_p_min: 0.0,
            inv_p_max: 1.0,
            inv_r_min: 0.0,
            inv_r_max: 1.0,
            n: 2,
            delta_samples: 9,
        }
        .delta_values();
        let corner = region_point(0.5, 0.5, &deltas);
        assert!(corner.dist_l1 < 1e-15 && corner.dist_l2 < 1e-15);

        // centroid of (2/3, 0), (0, 1), (1/2, 1/2)
        let inside = region_point((2.0 / 3.0 + 0.5) / 3.0, 0.5, &deltas);
        assert!(inside.admissible, "{inside:?}");

        let below = region_point(0.1, 0.1, &deltas);
        assert!(!below.admissible);
        assert!(below.gamma <= 0.0);
    }

    #[test]
    fn region_csv_header_and_rows() {
        let grid = RegionGrid::from_exponent_ranges(1.2, 10.0, 1.2, 10.0, 3, 4).unwrap();
        let rows = region_map(&grid).unwrap();
        let csv = region_csv(&rows);
        assert_eq!(csv.lines().count(), 10);
        assert!(csv.starts_with("inv_p,inv_r,gamma,admissible,best_delta,case"));
    }

    #[test]
    fn region_needs_two_points_per_axis() {
        let grid = RegionGrid::from_exponent_ranges(1.2, 10.0, 1.2, 10.0, 1, 4).unwrap();
        assert!(region_map(&grid).is_err());
    }
}
