//! Stationary solutions of the continuum limit
//! `u_t = a (x - 1/2) + K int_0^1 sin(u(y) - u(x)) dy` on `x in [0, 1]`,
//! their discretisation to `n` oscillators, and distances between
//! piecewise-constant states modulo the global phase.
//!
//! Every stationary profile here is built from
//! `U(x) = arcsin(a (x - 1/2) / (K C))`, optionally reflected to `pi - U` on
//! a flip set. The order parameter `C` carries a sign: a profile whose
//! reflected part outweighs the rest has a negative `C` (its order
//! parameter points the other way). Writing `eta = a / (2 K |C|)`, the
//! consistency equation becomes `C = F(eta)` with
//! `F(eta) = int_0^1 s(x) sqrt(1 - (2 eta (x - 1/2))^2) dx`, `s = -1` on the
//! flip set, and hence `a/K = 2 eta |F(eta)|`.

mod quadrature;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use quadrature::{adaptive_simpson, integrate_pieces, QUAD_TOL};

use crate::equilibria::{all_ones_fold, solve_xi, ChiCurve, SignSequence, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::model::{wrap_angle, ModelConfig};
use crate::roots::{bisect, golden_min};

/// Largest number of flip intervals accepted.
pub const MAX_FLIP_INTERVALS: usize = 64;

/// Bisection tolerance on `eta`.
const ETA_TOL: f64 = 1e-15;

/// Samples of `eta` used to bracket the roots of the flipped equation.
const ETA_GRID: usize = 512;

/// `phi(eta) = arcsin(eta) + eta sqrt(1 - eta^2)`, increasing from
/// `phi(0) = 0` to `phi(1) = pi/2`.
pub fn phi(eta: f64) -> f64 {
    let e = eta.clamp(-1.0, 1.0);
    e.asin() + e * (1.0 - e * e).max(0.0).sqrt()
}

/// Order parameter `C > 0` of the continuous family at `beta = a/K`, or
/// `None` when `beta > pi/2` (i.e. `K/a < 2/pi`).
pub fn solve_c_continuous(beta: f64) -> Result<Option<f64>> {
    Ok(continuous_eta(beta)?.map(|eta| beta / (2.0 * eta)))
}

fn continuous_eta(beta: f64) -> Result<Option<f64>> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain { value: beta, domain: "a/K > 0" });
    }
    let top = PI / 2.0;
    if beta > top * (1.0 + 1e-12) {
        return Ok(None);
    }
    if beta >= top {
        return Ok(Some(1.0));
    }
    Ok(Some(bisect(|e| phi(e) - beta, 0.0, 1.0, ETA_TOL)))
}

/// Which half of `[0, 1]` a flip interval lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlipSide {
    /// Inside `[0, 1/2]`; the profile there is `-U(x) - pi`.
    Minus,
    /// Inside `[1/2, 1]`; the profile there is `pi - U(x)`.
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlipInterval {
    pub lo: f64,
    pub hi: f64,
    pub side: FlipSide,
}

impl FlipInterval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

/// Sorted, interior-disjoint closed intervals on which the profile takes the
/// reflected branch.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FlipSet {
    intervals: Vec<FlipInterval>,
}

impl FlipSet {
    /// Validates `(lo, hi)` pairs: each inside `[0, 1/2]` or `[1/2, 1]`, no
    /// overlapping interiors, at most [`MAX_FLIP_INTERVALS`].
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() > MAX_FLIP_INTERVALS {
            return Err(Error::FlipSet(format!(
                "{} intervals exceed the limit of {MAX_FLIP_INTERVALS}",
                pairs.len()
            )));
        }
        let mut intervals = Vec::with_capacity(pairs.len());
        for &(lo, hi) in pairs {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::FlipSet(format!("[{lo}, {hi}] is not a subinterval of [0, 1]")));
            }
            let side = if hi <= 0.5 {
                FlipSide::Minus
            } else if lo >= 0.5 {
                FlipSide::Plus
            } else {
                return Err(Error::FlipSet(format!("[{lo}, {hi}] straddles x = 1/2")));
            };
            intervals.push(FlipInterval { lo, hi, side });
        }
        intervals.sort_by(|p, q| p.lo.total_cmp(&q.lo).then(p.hi.total_cmp(&q.hi)));
        for w in intervals.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::FlipSet(format!(
                    "[{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `[0, 1/2] u [1/2, 1]`.
    pub fn full() -> Self {
        Self::new(&[(0.0, 0.5), (0.5, 1.0)]).expect("valid")
    }

    pub fn intervals(&self) -> &[FlipInterval] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(FlipInterval::len).sum()
    }

    /// True when the flip set has measure zero.
    pub fn is_null(&self) -> bool {
        self.measure() == 0.0
    }

    /// True when the complement has measure zero.
    pub fn is_full(&self) -> bool {
        self.measure() >= 1.0
    }

    /// Side of the (non-degenerate) flip interval containing `x`, if any.
    pub fn side_at(&self, x: f64) -> Option<FlipSide> {
        self.intervals
            .iter()
            .find(|iv| !iv.is_empty() && iv.lo <= x && x <= iv.hi)
            .map(|iv| iv.side)
    }

    /// Interval endpoints, i.e. the points where the profile may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .filter(|iv| !iv.is_empty())
            .flat_map(|iv| [iv.lo, iv.hi])
            .collect()
    }
}

impl fmt::Display for FlipSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|iv| format!("{}:{}", iv.lo, iv.hi))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `lo:hi[,lo:hi...]`; the empty string is the empty set.
impl FromStr for FlipSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let mut pairs = Vec::new();
        for part in s.split(',') {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| Error::FlipSet(format!("'{part}' is not of the form lo:hi")))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::FlipSet(format!("'{t}' is not a number")))
            };
            pairs.push((parse(lo)?, parse(hi)?));
        }
        Self::new(&pairs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContinuumKind {
    /// `U(x) + theta`.
    ContinuousStable,
    /// The fully reflected profile.
    ContinuousMirror,
    /// Reflected on a proper flip set of positive measure.
    Discontinuous,
}

impl ContinuumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ContinuumKind::ContinuousStable => "continuous-stable",
            ContinuumKind::ContinuousMirror => "continuous-mirror",
            ContinuumKind::Discontinuous => "discontinuous",
        }
    }
}

/// A stationary profile of the continuum limit (up to the phase `theta`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumSolution {
    pub kind: ContinuumKind,
    /// `a / K`.
    pub beta: f64,
    /// `a / (2 K |C|)`; the arcsin argument spans `[-eta, eta]`.
    pub eta: f64,
    /// Signed order parameter.
    pub c: f64,
    pub flip_set: FlipSet,
    pub note: Option<String>,
}

impl ContinuumSolution {
    /// `U(x) = arcsin(a (x - 1/2) / (K C))` with the signed `C`.
    pub fn base(&self, x: f64) -> f64 {
        (2.0 * self.eta * self.c.signum() * (x - 0.5)).clamp(-1.0, 1.0).asin()
    }

    /// Profile value without wrapping: `U`, `pi - U` or `-U - pi`.
    pub fn profile_lifted(&self, x: f64) -> f64 {
        let u = self.base(x);
        match self.flip_set.side_at(x) {
            None => u,
            Some(FlipSide::Plus) => PI - u,
            Some(FlipSide::Minus) => -u - PI,
        }
    }

    /// Profile value in `(-pi, pi]`.
    pub fn profile(&self, x: f64) -> f64 {
        wrap_angle(self.profile_lifted(x))
    }

    /// `C - F(eta)` evaluated by quadrature.
    pub fn consistency_residual(&self) -> f64 {
        self.c - signed_integral(&self.flip_set, self.eta)
    }

    /// `|C| - a / (2 K eta)`; zero by construction up to round-off.
    pub fn scaling_residual(&self) -> f64 {
        self.c.abs() - self.beta / (2.0 * self.eta)
    }
}

fn sqrt_profile(eta: f64, x: f64) -> f64 {
    let r = 2.0 * eta * (x - 0.5);
    (1.0 - r * r).max(0.0).sqrt()
}

/// `F(eta) = int_0^1 s(x) sqrt(1 - (2 eta (x - 1/2))^2) dx` with `s = -1` on
/// the flip set.
pub fn signed_integral(flip: &FlipSet, eta: f64) -> f64 {
    let total = integrate_pieces(|x| sqrt_profile(eta, x), 0.0, 1.0, &[0.5], QUAD_TOL);
    let flipped: f64 = flip
        .intervals()
        .iter()
        .filter(|iv| !iv.is_empty())
        .map(|iv| adaptive_simpson(|x| sqrt_profile(eta, x), iv.lo, iv.hi, QUAD_TOL))
        .sum();
    total - 2.0 * flipped
}

/// The continuous family at `beta`, if it exists.
pub fn continuous_solution(beta: f64) -> Result<Option<ContinuumSolution>> {
    Ok(continuous_eta(beta)?.map(|eta| ContinuumSolution {
        kind: ContinuumKind::ContinuousStable,
        beta,
        eta,
        c: beta / (2.0 * eta),
        flip_set: FlipSet::empty(),
        note: None,
    }))
}

/// All `eta in (0, 1]` with `2 eta |F(eta)| = beta`, ascending.
pub fn flipped_roots(flip: &FlipSet, beta: f64) -> Result<Vec<f64>> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain { value: beta, domain: "a/K > 0" });
    }
    let g = |eta: f64| 2.0 * eta * signed_integral(flip, eta).abs() - beta;
    let mut roots = Vec::new();
    let mut prev = (0.0, -beta);
    for j in 1..=ETA_GRID {
        let eta = j as f64 / ETA_GRID as f64;
        let ge = g(eta);
        if ge == 0.0 {
            roots.push(eta);
        } else if prev.1 != 0.0 && (prev.1 > 0.0) != (ge > 0.0) {
            roots.push(bisect(g, prev.0, eta, ETA_TOL));
        }
        prev = (eta, ge);
    }
    Ok(roots)
}

/// Stationary profile reflected on `flip` at `beta`. Among several roots the
/// one with the largest `|C|` is returned; `None` if there is no root. A
/// flip set of measure zero gives the continuous family.
pub fn build_discontinuous(flip: &FlipSet, beta: f64) -> Result<Option<ContinuumSolution>> {
    if flip.is_null() {
        let note = (!flip.intervals().is_empty())
            .then(|| "flip set has measure zero; treated as the continuous family".to_string());
        return Ok(continuous_solution(beta)?.map(|s| ContinuumSolution { note, ..s }));
    }
    let Some(&eta) = flipped_roots(flip, beta)?.first() else {
        return Ok(None);
    };
    let kind = if flip.is_full() {
        ContinuumKind::ContinuousMirror
    } else {
        ContinuumKind::Discontinuous
    };
    Ok(Some(ContinuumSolution {
        kind,
        beta,
        eta,
        c: signed_integral(flip, eta),
        flip_set: flip.clone(),
        note: None,
    }))
}

/// The fully reflected family at `beta`.
pub fn mirror_solution(beta: f64) -> Result<Option<ContinuumSolution>> {
    build_discontinuous(&FlipSet::full(), beta)
}

/// A piecewise-constant function on the uniform partition of `[0, 1]` into
/// `n` cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunctionState {
    pub values: Vec<f64>,
}

impl StepFunctionState {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Square-integrable norm `sqrt((1/n) sum v_i^2)`.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.n() as f64).sqrt()
    }
}

fn cell(i: usize, n: usize) -> (f64, f64) {
    (i as f64 / n as f64, (i + 1) as f64 / n as f64)
}

/// Cell averages `n int_{I_i} u(x) dx` of the (unwrapped) profile, wrapped
/// to `(-pi, pi]`.
pub fn discretize(sol: &ContinuumSolution, n: usize) -> Result<StepFunctionState> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Config(format!("n = {n} must be odd and >= 3")));
    }
    let breaks = sol.flip_set.breakpoints();
    let values = (0..n)
        .map(|i| {
            let (lo, hi) = cell(i, n);
            let avg = integrate_pieces(|x| sol.profile_lifted(x), lo, hi, &breaks, QUAD_TOL) * n as f64;
            wrap_angle(avg)
        })
        .collect();
    Ok(StepFunctionState { values })
}

/// Square-integrable distance between a step function and a profile, with
/// pointwise differences wrapped to `(-pi, pi]`.
pub fn distance_to_profile(state: &StepFunctionState, sol: &ContinuumSolution) -> f64 {
    let n = state.n();
    let breaks = sol.flip_set.breakpoints();
    (0..n)
        .map(|i| {
            let (lo, hi) = cell(i, n);
            let c = state.values[i];
            integrate_pieces(
                |x| wrap_angle(c - sol.profile_lifted(x)).powi(2),
                lo,
                hi,
                &breaks,
                QUAD_TOL,
            )
        })
        .sum::<f64>()
        .sqrt()
}

fn wrapped_norm(x: &[f64], y: &[f64], theta: f64) -> f64 {
    let s: f64 = x
        .iter()
        .zip(y)
        .map(|(p, q)| wrap_angle(p - q - theta).powi(2))
        .sum();
    (s / x.len() as f64).sqrt()
}

/// `min_theta || x - y - theta ||` with wrapped differences, and the
/// minimising `theta`.
pub fn family_distance_with_shift(x: &StepFunctionState, y: &StepFunctionState) -> Result<(f64, f64)> {
    if x.n() != y.n() {
        return Err(Error::Dimension { expected: x.n(), got: y.n() });
    }
    if x.n() == 0 {
        return Ok((0.0, 0.0));
    }
    let (s, c) = x
        .values
        .iter()
        .zip(&y.values)
        .fold((0.0, 0.0), |(s, c), (p, q)| (s + (p - q).sin(), c + (p - q).cos()));
    let mean = s.atan2(c);
    let f = |t: f64| wrapped_norm(&x.values, &y.values, t);
    // coarse scan guards against local minima of the wrapped norm
    let m = 64;
    let width = 2.0 * PI / m as f64;
    let mut best = (mean, f(mean));
    for j in 0..m {
        let t = mean - PI + (j as f64 + 0.5) * width;
        let ft = f(t);
        if ft < best.1 {
            best = (t, ft);
        }
    }
    let (t, ft) = golden_min(f, best.0 - width, best.0 + width, 1e-10);
    Ok(if ft <= best.1 { (ft, wrap_angle(t)) } else { (best.1, wrap_angle(best.0)) })
}

/// Distance between the phase-shift families through `x` and `y`.
pub fn family_distance(x: &StepFunctionState, y: &StepFunctionState) -> Result<f64> {
    Ok(family_distance_with_shift(x, y)?.0)
}

/// Flip set whose cells reproduce the minus signs of `sigma` on the
/// `n = 2 n0 + 1` partition. Maximal runs of flipped nodes on each side of
/// the reference node become one interval; runs adjacent to the reference
/// node extend to `x = 1/2`, so the all-minus sequence gives the full flip.
pub fn flip_set_for_sigma(sigma: &SignSequence) -> FlipSet {
    let n0 = sigma.n0();
    let n = 2 * n0 + 1;
    let nf = n as f64;
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let push_run = |lo_node: usize, hi_node: usize, pairs: &mut Vec<(f64, f64)>| {
        // full node numbers are 1-based; cell of node j is [(j-1)/n, j/n]
        let lo = if lo_node == n0 + 2 { 0.5 } else { (lo_node - 1) as f64 / nf };
        let hi = if hi_node == n0 { 0.5 } else { hi_node as f64 / nf };
        pairs.push((lo, hi));
    };
    for (first, last) in [(1usize, n0), (n0 + 2, n)] {
        let mut start: Option<usize> = None;
        for j in first..=last {
            let i = if j <= n0 { j } else { j - 1 };
            let flipped = sigma.get(i) == -1;
            match (flipped, start) {
                (true, None) => start = Some(j),
                (false, Some(s)) => {
                    push_run(s, j - 1, &mut pairs);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            push_run(s, last, &mut pairs);
        }
    }
    FlipSet::new(&pairs).expect("runs are disjoint and on one side of 1/2")
}

/// The continuum profile matched to the `sigma` equilibria at the coupling
/// of `cfg`, or `None` if the matched equation has no root there.
pub fn match_discrete_to_continuum(
    sigma: &SignSequence,
    cfg: &ModelConfig,
) -> Result<Option<ContinuumSolution>> {
    if sigma.n0() != cfg.n0() {
        return Err(Error::Dimension { expected: 2 * cfg.n0(), got: sigma.len() });
    }
    build_discontinuous(&flip_set_for_sigma(sigma), cfg.beta())
}

/// Discrete order parameter of the all-ones branch against its continuum
/// value at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub c_d: f64,
    pub c: f64,
    pub error: f64,
}

/// `|C_D(n) - C|` on the stable all-ones branch (smallest `xi` root) at `K/a`.
pub fn cd_convergence(k_over_a: f64, ns: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let beta = 1.0 / k_over_a;
    let c = solve_c_continuous(beta)?
        .ok_or_else(|| Error::Numerical(format!("no continuous solution at K/a = {k_over_a}")))?;
    ns.iter()
        .map(|&n| {
            let cfg = ModelConfig::from_ratio(n, 1.0, k_over_a)?;
            let sigma = SignSequence::all_ones(cfg.n0());
            let xi = *solve_xi(&sigma, beta, DEFAULT_TOL)?.first().ok_or_else(|| {
                Error::Numerical(format!("no all-ones equilibrium for n = {n} at K/a = {k_over_a}"))
            })?;
            let c_d = cfg.n0() as f64 * beta / (n as f64 * xi);
            Ok(ConvergenceRow { n, c_d, c, error: (c_d - c).abs() })
        })
        .collect()
}

/// Least-squares slope of `-log(error)` against `log(n)`.
pub fn measured_order(rows: &[ConvergenceRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.error.ln()))
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -num / den
}

/// Fold location `xi0` of the all-ones branch for each odd `n`.
pub fn xi0_sweep(ns: &[usize]) -> Result<Vec<(usize, f64)>> {
    ns.iter()
        .map(|&n| {
            let cfg = ModelConfig::new(n, 1.0, 1.0)?;
            Ok((n, all_ones_fold(cfg.n0())?.xi))
        })
        .collect()
}

/// `sup |(n0/n) chi^{(1,...,1)}(xi) - phi(xi)/2|` over `xi in [0, 0.99]`.
pub fn chi_scaling_gap(n0: usize) -> f64 {
    let curve = ChiCurve::new(&SignSequence::all_ones(n0));
    let scale = n0 as f64 / (2 * n0 + 1) as f64;
    (0..=990)
        .map(|j| {
            let xi = j as f64 / 1000.0;
            (scale * curve.value(xi) - 0.5 * phi(xi)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::build_equilibrium;
    use crate::model::lift;
    use approx::assert_abs_diff_eq;

    /// `int sqrt(1 - eta^2 y^2)` in closed form on `[y0, y1]` (y = 2x - 1).
    fn exact_piece(eta: f64, x0: f64, x1: f64) -> f64 {
        let anti = |x: f64| {
            let y = 2.0 * x - 1.0;
            let r = (eta * y).clamp(-1.0, 1.0);
            0.5 * (y * (1.0 - r * r).max(0.0).sqrt() + r.asin() / eta)
        };
        0.5 * (anti(x1) - anti(x0))
    }

    #[test]
    fn phi_endpoints_and_monotone() {
        assert_eq!(phi(0.0), 0.0);
        assert_abs_diff_eq!(phi(1.0), PI / 2.0, epsilon = 1e-15);
        let mut last = 0.0;
        for j in 1..=1000 {
            let v = phi(j as f64 / 1000.0);
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn threshold_and_limits() {
        let c = solve_c_continuous(PI / 2.0).unwrap().unwrap();
        assert_abs_diff_eq!(c, PI / 4.0, epsilon = 1e-12);
        // K/a = 2/pi computed in floating point still has a solution
        let beta = 1.0 / (2.0 / PI);
        assert!(solve_c_continuous(beta).unwrap().is_some());
        assert!(solve_c_continuous(PI / 2.0 * (1.0 + 1e-9)).unwrap().is_none());
        let big = solve_c_continuous(1e-6).unwrap().unwrap();
        assert_abs_diff_eq!(big, 1.0, epsilon = 1e-9);
        assert!(solve_c_continuous(0.0).is_err());
    }

    #[test]
    fn c_at_unit_ratio_matches_direct_quadrature() {
        let c = solve_c_continuous(1.0).unwrap().unwrap();
        let direct = adaptive_simpson(
            |x: f64| (1.0 - ((x - 0.5) / c).powi(2)).max(0.0).sqrt(),
            0.0,
            1.0,
            1e-13,
        );
        assert_abs_diff_eq!(c, direct, epsilon = 1e-10);
    }

    #[test]
    fn flip_set_validation_and_parsing() {
        assert!(FlipSet::new(&[(0.4, 0.6)]).is_err());
        assert!(FlipSet::new(&[(0.1, 0.3), (0.2, 0.4)]).is_err());
        assert!(FlipSet::new(&[(0.3, 0.2)]).is_err());
        assert!(FlipSet::new(&vec![(0.5, 0.5); MAX_FLIP_INTERVALS + 1]).is_err());
        let f: FlipSet = "0.9:1.0, 0.0:0.1".parse().unwrap();
        assert_eq!(f.intervals().len(), 2);
        assert_eq!(f.intervals()[0].side, FlipSide::Minus);
        assert_abs_diff_eq!(f.measure(), 0.2, epsilon = 1e-15);
        assert_eq!(f.to_string().parse::<FlipSet>().unwrap(), f);
        assert!("0.1".parse::<FlipSet>().is_err());
        assert!("".parse::<FlipSet>().unwrap().is_null());
    }

    #[test]
    fn signed_integral_matches_closed_form() {
        let f = FlipSet::new(&[(0.05, 0.2), (0.7, 1.0)]).unwrap();
        for &eta in &[0.1, 0.5, 0.93, 1.0] {
            let exact = exact_piece(eta, 0.0, 1.0)
                - 2.0 * (exact_piece(eta, 0.05, 0.2) + exact_piece(eta, 0.7, 1.0));
            assert_abs_diff_eq!(signed_integral(&f, eta), exact, epsilon = 1e-11);
        }
    }

    #[test]
    fn empty_flip_reproduces_continuous() {
        for &beta in &[0.3, 1.0, 1.5] {
            let a = build_discontinuous(&FlipSet::empty(), beta).unwrap().unwrap();
            assert_eq!(a.c, solve_c_continuous(beta).unwrap().unwrap());
            assert_eq!(a.kind, ContinuumKind::ContinuousStable);
        }
        let degenerate = FlipSet::new(&[(0.8, 0.8)]).unwrap();
        let s = build_discontinuous(&degenerate, 1.0).unwrap().unwrap();
        assert_eq!(s.kind, ContinuumKind::ContinuousStable);
        assert!(s.note.is_some());
    }

    #[test]
    fn full_flip_is_the_mirror_with_negative_c() {
        let beta = 1.0;
        let m = mirror_solution(beta).unwrap().unwrap();
        let c = solve_c_continuous(beta).unwrap().unwrap();
        assert_eq!(m.kind, ContinuumKind::ContinuousMirror);
        assert_abs_diff_eq!(m.c, -c, epsilon = 1e-10);
        assert!(m.consistency_residual().abs() < 1e-10);
        // the profile is pi - U with U built from the signed C
        for &x in &[0.1, 0.4, 0.77] {
            let u = (2.0 * m.eta * m.c.signum() * (x - 0.5)).asin();
            assert_abs_diff_eq!(m.profile(x), wrap_angle(PI - u), epsilon = 1e-14);
        }
    }

    #[test]
    fn stationary_equation_holds_for_flipped_profiles() {
        // u_t = omega(x) + K int sin(u(y) - u(x)) dy vanishes for each profile
        for flip in [FlipSet::empty(), FlipSet::full(), FlipSet::new(&[(0.9, 1.0)]).unwrap()] {
            let beta = 0.8;
            let sol = build_discontinuous(&flip, beta).unwrap().unwrap();
            let breaks = flip.breakpoints();
            for &x in &[0.03, 0.31, 0.5, 0.64, 0.95] {
                let ux = sol.profile_lifted(x);
                let coupling =
                    integrate_pieces(|y| (sol.profile_lifted(y) - ux).sin(), 0.0, 1.0, &breaks, 1e-13);
                let rhs = beta * (x - 0.5) + coupling;
                assert!(rhs.abs() < 1e-9, "{flip}: x = {x}, residual {rhs:e}");
            }
        }
    }

    #[test]
    fn right_end_flip_matches_riemann_oracle() {
        let flip = FlipSet::new(&[(0.9, 1.0)]).unwrap();
        let beta = 1.0;
        let sol = build_discontinuous(&flip, beta).unwrap().unwrap();
        assert_eq!(sol.kind, ContinuumKind::Discontinuous);
        let m = 1_000_000;
        let riemann: f64 = (0..m)
            .map(|j| {
                let x = (j as f64 + 0.5) / m as f64;
                let s = if x >= 0.9 { -1.0 } else { 1.0 };
                s * (1.0 - ((x - 0.5) / sol.c).powi(2) * beta * beta).max(0.0).sqrt()
            })
            .sum::<f64>()
            / m as f64;
        assert_abs_diff_eq!(sol.c, riemann, epsilon = 1e-8);
        assert!(sol.consistency_residual().abs() < 1e-10);
        assert!(sol.scaling_residual().abs() < 1e-12);
    }

    #[test]
    fn discretize_constant_and_straddling_cells() {
        let sol = continuous_solution(1.0).unwrap().unwrap();
        let n = 5;
        let d = discretize(&sol, n).unwrap();
        assert_eq!(d.n(), n);
        assert_abs_diff_eq!(d.values[2], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(d.values[0], -d.values[4], epsilon = 1e-13);
        assert!(discretize(&sol, 4).is_err());

        let flip = FlipSet::new(&[(0.9, 1.0)]).unwrap();
        let s = build_discontinuous(&flip, 1.0).unwrap().unwrap();
        // with n = 5 the last cell [0.8, 1] is half flipped
        let d = discretize(&s, 5).unwrap();
        let expected = 5.0
            * (adaptive_simpson(|x| s.base(x), 0.8, 0.9, 1e-13)
                + adaptive_simpson(|x| PI - s.base(x), 0.9, 1.0, 1e-13));
        assert_abs_diff_eq!(d.values[4], wrap_angle(expected), epsilon = 1e-11);
    }

    #[test]
    fn discretization_error_decreases() {
        let sol = continuous_solution(1.0).unwrap().unwrap();
        let errs: Vec<f64> = [11, 23, 47, 95]
            .iter()
            .map(|&n| distance_to_profile(&discretize(&sol, n).unwrap(), &sol))
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn family_distance_properties() {
        let x = StepFunctionState::new(vec![0.3, -1.0, 2.9, 0.0, -3.0]);
        let shifted = StepFunctionState::new(x.values.iter().map(|v| wrap_angle(v + 1.7)).collect());
        assert!(family_distance(&x, &shifted).unwrap() < 1e-9);
        let eps = 1e-3;
        let mut bumped = x.clone();
        bumped.values[0] += eps;
        assert!(family_distance(&x, &bumped).unwrap() <= eps / 5f64.sqrt() + 1e-12);
        assert!(family_distance(&x, &StepFunctionState::new(vec![0.0; 3])).is_err());
    }

    #[test]
    fn family_distance_antipodal_pair_against_grid() {
        let x = StepFunctionState::new(vec![0.0, PI, 0.5]);
        let y = StepFunctionState::new(vec![PI, 0.0, -2.0]);
        let (d, _) = family_distance_with_shift(&x, &y).unwrap();
        let m = 1_000_000;
        let grid = (0..m)
            .map(|j| wrapped_norm(&x.values, &y.values, -PI + 2.0 * PI * j as f64 / m as f64))
            .fold(f64::INFINITY, f64::min);
        assert!(d <= grid + 1e-12);
        assert!(grid - d < 1e-5);
    }

    #[test]
    fn sigma_runs_become_flip_intervals() {
        let n0 = 3;
        assert!(flip_set_for_sigma(&SignSequence::all_ones(n0)).is_null());
        assert!(flip_set_for_sigma(&SignSequence::all_minus(n0)).is_full());
        let right_end: SignSequence = "+++++-".parse().unwrap();
        let f = flip_set_for_sigma(&right_end);
        assert_eq!(f.intervals().len(), 1);
        assert_eq!(f.intervals()[0].side, FlipSide::Plus);
        assert_abs_diff_eq!(f.intervals()[0].lo, 6.0 / 7.0, epsilon = 1e-15);
        // every non-reference cell midpoint is flipped iff its sign is -1
        let sigma: SignSequence = "-+--+-".parse().unwrap();
        let f = flip_set_for_sigma(&sigma);
        for j in 1..=7usize {
            if j == 4 {
                continue;
            }
            let i = if j <= 3 { j } else { j - 1 };
            let mid = (j as f64 - 0.5) / 7.0;
            assert_eq!(f.side_at(mid).is_some(), sigma.get(i) == -1, "node {j}");
        }
    }

    #[test]
    fn matched_all_ones_is_close_to_discrete_equilibrium() {
        let mut last = f64::INFINITY;
        for n in [11usize, 23, 47] {
            let cfg = ModelConfig::from_ratio(n, 1.0, 1.0).unwrap();
            let sigma = SignSequence::all_ones(cfg.n0());
            let sol = match_discrete_to_continuum(&sigma, &cfg).unwrap().unwrap();
            assert_eq!(sol.kind, ContinuumKind::ContinuousStable);
            let xi = solve_xi(&sigma, cfg.beta(), 1e-13).unwrap()[0];
            let eq = build_equilibrium(&sigma, xi, &cfg).unwrap();
            let discrete = StepFunctionState::new(lift(&eq.v, 0.0));
            let d = family_distance(&discrete, &discretize(&sol, n).unwrap()).unwrap();
            assert!(d < last, "n = {n}: {d}");
            last = d;
        }
    }

    #[test]
    fn convergence_sweeps() {
        let rows = cd_convergence(1.0, &[11, 23, 47, 95]).unwrap();
        assert!(rows.windows(2).all(|w| w[1].error < w[0].error));
        assert!(measured_order(&rows) >= 1.0, "{}", measured_order(&rows));
        let xs = xi0_sweep(&[5, 11, 23, 47]).unwrap();
        assert!(xs.windows(2).all(|w| w[1].1 > w[0].1 && w[1].1 < 1.0));
        assert!(chi_scaling_gap(20) < chi_scaling_gap(5));
    }
}
