//! Reference-value and property suite, grouped into six criteria.
//!
//! Each criterion returns named checks with the measured value, the expected
//! value, the tolerance and the comparison used, plus its wall-clock time
//! against a budget. The CLI `selfcheck` command and the `acceptance`
//! integration test both run this suite.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bifurcation::{branch_diagram, count_events, detect_pitchforks, detect_saddle_nodes};
use crate::continuum::{cd_convergence, measured_order, solve_c_continuous, xi0_sweep};
use crate::dynamics::{perturb_and_integrate, step_halving_order, DEFAULT_SEED};
use crate::equilibria::{
    all_equilibria, all_ones_fold, build_equilibrium, chi_extrema, enumerate_sequences,
    equilibria_for, find_reduced_zeros, torus_distance, ChiCurve, ExtremumKind,
    Equilibrium, NewtonSearch, SignSequence, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::model::{lift_raw, reduced_jacobian, reduced_vector_field, ModelConfig};
use crate::roots::bisect;
use crate::stability::{
    classify_by_pattern, equilibrium_stability, jacobian_spectrum, limit_matrix_check,
    n3_closed_form_stability, Verdict,
};

/// Default tolerance for reference constants.
pub const CONSTANT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `|measured - expected| <= tol`
    Close,
    /// `measured >= expected`
    AtLeast,
    /// `measured <= expected`
    AtMost,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Close => "~",
            Relation::AtLeast => ">=",
            Relation::AtMost => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tol: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl CheckResult {
    pub fn close(name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        let pass = (measured - expected).abs() <= tol;
        Self { name: name.into(), measured, expected, tol, relation: Relation::Close, pass }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: bound,
            tol: 0.0,
            relation: Relation::AtLeast,
            pass: measured >= bound,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: bound,
            tol: 0.0,
            relation: Relation::AtMost,
            pass: measured <= bound,
        }
    }

    /// Exact equality of counts.
    pub fn count(name: impl Into<String>, measured: usize, expected: usize) -> Self {
        Self::close(name, measured as f64, expected as f64, 0.0)
    }

    /// A boolean property, recorded as `1 ~ 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::close(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<CheckResult>,
    pub elapsed_s: f64,
    pub budget_s: f64,
    pub pass: bool,
}

impl CriterionReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// `criterion N: PASS|FAIL  title  (passed/total checks, seconds)`.
    pub fn summary_line(&self) -> String {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        format!(
            "criterion {}: {}  {}  ({}/{} checks, {:.2} s of {:.0} s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            passed,
            self.checks.len(),
            self.elapsed_s,
            self.budget_s
        )
    }
}

/// `(title, time budget in seconds)` of each criterion.
pub const CRITERIA: [(&str, f64); 6] = [
    ("reference constants", 10.0),
    ("exhaustive counting", 60.0),
    ("stability cross-validation", 60.0),
    ("diagram data", 60.0),
    ("dynamics", 120.0),
    ("convergence and properties", 120.0),
];

/// Runs criterion `id` (1 to 6). An internal error becomes a failing check.
pub fn run_criterion(id: u8) -> Result<CriterionReport> {
    let (title, budget_s) = *CRITERIA
        .get((id as usize).wrapping_sub(1))
        .ok_or_else(|| Error::Config(format!("criterion {id} does not exist (1..=6)")))?;
    let start = Instant::now();
    let outcome = match id {
        1 => reference_constants(),
        2 => counting(),
        3 => stability_cross_validation(),
        4 => diagram_data(),
        5 => dynamics_checks(),
        _ => convergence_and_properties(),
    };
    let mut checks = match outcome {
        Ok(c) => c,
        Err(e) => vec![CheckResult::holds(format!("error: {e}"), false)],
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    checks.push(CheckResult::at_most("runtime_s", elapsed_s, budget_s));
    let pass = checks.iter().all(|c| c.pass);
    Ok(CriterionReport { id, title, checks, elapsed_s, budget_s, pass })
}

/// Runs all six criteria in order.
pub fn run_all() -> Vec<CriterionReport> {
    (1..=6)
        .map(|id| run_criterion(id).expect("ids 1..=6 exist"))
        .collect()
}

fn unit_cfg(n0: usize) -> Result<ModelConfig> {
    ModelConfig::with_n0(n0, 1.0, 1.0)
}

/// `(kappa0, xi0, kappa1)` of the all-ones branch.
fn all_ones_constants(n0: usize) -> Result<(f64, f64, f64)> {
    let fold = all_ones_fold(n0)?;
    let kappa1 = 1.0 / ChiCurve::new(&SignSequence::all_ones(n0)).value(1.0);
    Ok((1.0 / fold.value, fold.xi, kappa1))
}

/// The extremum of `chi^{(-1,-1)}` for `n = 3`: `(xi, |chi|)`.
fn n3_mirror_extremum() -> Result<(f64, f64)> {
    chi_extrema(&SignSequence::all_minus(1), 1e-13)
        .into_iter()
        .find(|e| e.kind == ExtremumKind::Min && e.is_abs_max())
        .map(|e| (e.xi, e.value.abs()))
        .ok_or_else(|| Error::Numerical("no minimum on the (-1,-1) branch".into()))
}

fn reference_constants() -> Result<Vec<CheckResult>> {
    let tol = CONSTANT_TOL;
    let mut out = Vec::new();

    let (kappa0, xi0, _) = all_ones_constants(1)?;
    out.push(CheckResult::close("n3.kappa0", kappa0, 0.56812, tol));
    out.push(CheckResult::close("n3.v0", xi0.asin(), 0.93592, tol));
    out.push(CheckResult::close("n3.C_D0", 1.0 / (3.0 * kappa0 * xi0), 0.72871, tol));
    let fork = detect_pitchforks(&SignSequence::all_ones(1).quadruple(), &unit_cfg(1)?)?
        .ok_or_else(|| Error::Numerical("no pitchfork for n = 3".into()))?;
    out.push(CheckResult::close("n3.pitchfork_ratio", fork.ratio, 1.0, tol));
    let (xm, beta_m) = n3_mirror_extremum()?;
    out.push(CheckResult::close("n3.hat_C_D0", -beta_m / (3.0 * xm), -0.22871, tol));
    out.push(CheckResult::close("n3.mirror_angle", -xm.asin(), -0.56782, tol));
    out.push(CheckResult::close("n3.hat_kappa0", 1.0 / beta_m, 2.70996, tol));

    for (n0, k0, x0, cd1, k1, cd0) in [
        (2usize, 0.60670, 0.88209, 0.54641, 0.73205, 0.74741),
        (5, 0.62791, 0.94573, 0.69023, 0.65853, 0.76543),
    ] {
        let n = 2 * n0 + 1;
        let ratio = n0 as f64 / n as f64;
        let (kappa0, xi0, kappa1) = all_ones_constants(n0)?;
        out.push(CheckResult::close(format!("n{n}.kappa0"), kappa0, k0, tol));
        out.push(CheckResult::close(format!("n{n}.xi0"), xi0, x0, tol));
        out.push(CheckResult::close(format!("n{n}.C_D1"), ratio / kappa1, cd1, tol));
        out.push(CheckResult::close(format!("n{n}.kappa1"), kappa1, k1, tol));
        out.push(CheckResult::close(format!("n{n}.C_D0"), ratio / (kappa0 * xi0), cd0, tol));
    }

    // existence threshold located by bisection on "a solution exists"
    let exists = |k: f64| if solve_c_continuous(1.0 / k).ok().flatten().is_some() { 1.0 } else { -1.0 };
    let threshold = bisect(exists, 0.1, 2.0, 1e-12);
    out.push(CheckResult::close("continuum.threshold_ratio", threshold, 2.0 / PI, tol));
    let c_thr = solve_c_continuous(PI / 2.0)?.unwrap_or(f64::NAN);
    out.push(CheckResult::close("continuum.C_at_threshold", c_thr, PI / 4.0, tol));
    let c_big = solve_c_continuous(1e-6)?.unwrap_or(f64::NAN);
    out.push(CheckResult::close("continuum.C_strong_coupling", c_big, 1.0, tol));
    Ok(out)
}

fn counting() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for n0 in 2..=6usize {
        let c = count_events(n0)?;
        let p = format!("n0={n0}");
        out.push(CheckResult::count(format!("{p}.families_distinct"), c.families_distinct, 1 << (2 * n0)));
        out.push(CheckResult::count(
            format!("{p}.families_coarse"),
            c.families_coarse,
            3 << (2 * (n0 - 1)),
        ));
        out.push(CheckResult::at_least(
            format!("{p}.saddle_nodes"),
            c.saddle_nodes as f64,
            c.saddle_node_bound as f64,
        ));
        out.push(CheckResult::at_least(
            format!("{p}.pitchforks"),
            c.pitchforks as f64,
            c.pitchfork_bound as f64,
        ));
        if let Some(b) = c.pitchfork_prime_bound {
            out.push(CheckResult::at_least(format!("{p}.pitchforks_prime"), c.pitchforks as f64, b as f64));
        }
    }
    Ok(out)
}

/// Grid of `xi` values used by the cross-validation.
fn xi_grid() -> Vec<f64> {
    (1..=50).map(|j| (j as f64 - 0.5) / 50.0).collect()
}

/// `(mismatches, compared)` between the spectrum and the sign-pattern verdicts.
fn cross_validate(n0: usize) -> Result<(usize, usize)> {
    let grid = xi_grid();
    let per: Vec<(usize, usize)> = enumerate_sequences(n0)?
        .par_iter()
        .map(|sigma| {
            let curve = ChiCurve::new(sigma);
            let mut tally = (0, 0);
            for &xi in &grid {
                let beta = curve.value(xi).abs();
                if beta < 1e-8 {
                    continue;
                }
                let cfg = ModelConfig::with_n0(n0, 1.0, 1.0)?;
                let cfg = cfg.with_k(1.0 / beta)?;
                let predicted = classify_by_pattern(sigma, xi, &cfg)?;
                if predicted == Verdict::Marginal {
                    continue;
                }
                let eq = build_equilibrium(sigma, xi, &cfg)?;
                let computed = equilibrium_stability(&eq, &cfg)?.verdict;
                tally.1 += 1;
                if computed != predicted {
                    tally.0 += 1;
                }
            }
            Ok(tally)
        })
        .collect::<Result<_>>()?;
    Ok(per.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1)))
}

fn stability_cross_validation() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for n0 in [1usize, 2, 5] {
        let n = 2 * n0 + 1;
        let (bad, total) = cross_validate(n0)?;
        out.push(CheckResult::count(format!("n{n}.verdict_mismatches"), bad, 0));
        out.push(CheckResult::at_least(format!("n{n}.points_compared"), total as f64, 1.0));
    }

    let mut bad = 0;
    for sigma in enumerate_sequences(1)? {
        let curve = ChiCurve::new(&sigma);
        for xi in xi_grid() {
            let beta = curve.value(xi).abs();
            if beta < 1e-8 {
                continue;
            }
            let cfg = ModelConfig::from_beta(3, 1.0, beta)?;
            let eq = build_equilibrium(&sigma, xi, &cfg)?;
            let computed = jacobian_spectrum(&eq.v, &cfg)?.verdict;
            let closed = n3_closed_form_stability(eq.v[0], eq.v[1]);
            if computed != Verdict::Marginal && closed != Verdict::Marginal && computed != closed {
                bad += 1;
            }
        }
    }
    out.push(CheckResult::count("n3.closed_form_mismatches", bad, 0));

    for n0 in [2usize, 3, 5] {
        let cfg = unit_cfg(n0)?;
        let mut failed = 0;
        let mut worst: f64 = 0.0;
        for n_plus in 0..=2 * n0 {
            let signs: Vec<i8> = (0..2 * n0).map(|i| if i < 2 * n0 - n_plus { -1 } else { 1 }).collect();
            let check = limit_matrix_check(&SignSequence::new(signs)?, &cfg)?;
            worst = worst.max(check.prediction_error);
            if !check.passed() {
                failed += 1;
            }
        }
        out.push(CheckResult::count(format!("n0={n0}.limit_split_failures"), failed, 0));
        out.push(CheckResult::at_most(format!("n0={n0}.limit_eigenvalue_error"), worst, 1e-9));
    }
    Ok(out)
}

fn diagram_data() -> Result<Vec<CheckResult>> {
    let tol = CONSTANT_TOL;
    let mut out = Vec::new();

    // C_D and C_hat tables at the endpoint couplings
    for (n0, cd0, cd1) in [(1usize, 0.72871, None), (2, 0.74741, Some(0.54641)), (5, 0.76543, Some(0.69023))] {
        let n = 2 * n0 + 1;
        let (kappa0, _, kappa1) = all_ones_constants(n0)?;
        let cfg = ModelConfig::from_ratio(n, 1.0, kappa0 * (1.0 + 1e-9))?;
        let eqs = equilibria_for(&SignSequence::all_ones(n0), &cfg, DEFAULT_TOL)?;
        out.push(CheckResult::count(format!("n{n}.roots_at_fold"), eqs.len(), 2));
        for eq in &eqs {
            out.push(CheckResult::close(format!("n{n}.C_D_at_fold"), eq.c_hat, cd0, tol));
        }
        if let Some(cd1) = cd1 {
            let cfg = ModelConfig::from_ratio(n, 1.0, kappa1)?;
            let top = equilibria_for(&SignSequence::all_ones(n0), &cfg, DEFAULT_TOL)?
                .into_iter()
                .max_by(|p, q| p.xi.total_cmp(&q.xi))
                .ok_or_else(|| Error::Numerical(format!("no all-ones root at kappa1 for n = {n}")))?;
            out.push(CheckResult::close(format!("n{n}.C_D_at_branch_point"), top.c_hat, cd1, tol));
        }
    }
    let (xm, beta_m) = n3_mirror_extremum()?;
    let cfg = ModelConfig::from_beta(3, 1.0, beta_m * (1.0 - 1e-9))?;
    for eq in equilibria_for(&SignSequence::all_minus(1), &cfg, DEFAULT_TOL)? {
        if (eq.xi - xm).abs() < 1e-3 {
            out.push(CheckResult::close("n3.hat_C_D_at_fold", eq.c_hat, -0.22871, tol));
        }
    }

    // branch diagrams: stable flags exactly on the all-ones branch below its fold
    for (n0, k_min, k_max, samples) in [(1usize, 0.3, 3.0, 271), (2, 0.3, 2.0, 171), (5, 0.5, 1.5, 41)] {
        let n = 2 * n0 + 1;
        let cfg = unit_cfg(n0)?;
        let (kappa0, xi0, kappa1) = all_ones_constants(n0)?;
        let rows = branch_diagram(&cfg, k_min, k_max, samples, None)?;
        let stray = rows
            .iter()
            .filter(|r| r.verdict == Verdict::Stable && !(r.sigma.is_all_ones() && r.xi < xi0))
            .count();
        let missing = rows
            .iter()
            .filter(|r| r.sigma.is_all_ones() && r.xi < xi0 - 1e-6 && r.verdict != Verdict::Stable)
            .count();
        out.push(CheckResult::count(format!("n{n}.stray_stable_rows"), stray, 0));
        out.push(CheckResult::count(format!("n{n}.unflagged_stable_rows"), missing, 0));
        let first_k = rows
            .iter()
            .filter(|r| r.sigma.is_all_ones())
            .map(|r| r.k)
            .fold(f64::INFINITY, f64::min);
        let step = (k_max - k_min) / (samples - 1) as f64;
        out.push(CheckResult::close(format!("n{n}.first_all_ones_K"), first_k, kappa0 + 0.5 * step, 0.5 * step + 1e-12));

        let fold = detect_saddle_nodes(&SignSequence::all_ones(n0), &cfg)?;
        let fold_k = fold.first().map_or(f64::NAN, |e| e.ratio);
        out.push(CheckResult::close(format!("n{n}.fold_K"), fold_k, kappa0, 1e-10));
        let fork = detect_pitchforks(&SignSequence::all_ones(n0).quadruple(), &cfg)?;
        out.push(CheckResult::close(format!("n{n}.branch_point_K"), fork.map_or(f64::NAN, |e| e.ratio), kappa1, 1e-10));
    }
    Ok(out)
}

fn dynamics_checks() -> Result<Vec<CheckResult>> {
    let cfg = ModelConfig::from_ratio(5, 1.0, 0.7)?;
    let mut out = Vec::new();
    let stable = equilibria_for(&SignSequence::all_ones(2), &cfg, DEFAULT_TOL)?;
    let eq = stable
        .first()
        .ok_or_else(|| Error::Numerical("no all-ones equilibrium at K/a = 0.7".into()))?;
    let run = perturb_and_integrate(eq, &cfg, 1e-3, DEFAULT_SEED, 200.0 / cfg.k())?;
    out.push(CheckResult::at_most("n5.stable_final_distance", run.final_distance, 1e-6));

    // at K/a = 0.7 only the all-ones branch exists; its upper root is the
    // unstable equilibrium there, so the branches with a minus sign are
    // exercised at K/a = 3 where all of them exist
    let strong = ModelConfig::from_ratio(5, 1.0, 3.0)?;
    let mut cases: Vec<(ModelConfig, Equilibrium)> = stable.iter().skip(1).map(|e| (cfg, e.clone())).collect();
    let at_07 = cases.len();
    for sigma in enumerate_sequences(2)?.into_iter().filter(|s| !s.is_all_ones()) {
        for e in equilibria_for(&sigma, &strong, DEFAULT_TOL)? {
            cases.push((strong, e));
        }
    }
    let escapes: Vec<f64> = cases
        .par_iter()
        .map(|(c, eq)| Ok(perturb_and_integrate(eq, c, 1e-6, DEFAULT_SEED, 500.0 / c.k())?.max_distance))
        .collect::<Result<_>>()?;
    out.push(CheckResult::count("n5@0.7.unstable_equilibria", at_07, 1));
    out.push(CheckResult::at_least("n5@3.0.minus_sign_equilibria", (cases.len() - at_07) as f64, 15.0));
    let weakest = escapes.iter().copied().fold(f64::INFINITY, f64::min);
    out.push(CheckResult::at_least("n5.weakest_escape_distance", weakest, 1e-2));

    let u0 = [0.9, -0.4, 0.0, 2.0, -1.3];
    let halving = step_halving_order(&u0, &cfg, 20.0 / cfg.k(), 0.2 / cfg.k())?;
    out.push(CheckResult::close("rk4.step_halving_order", halving.order, 4.0, 0.5));
    Ok(out)
}

/// Central-difference Jacobian of the reduced field.
fn fd_jacobian(v: &[f64], cfg: &ModelConfig) -> Result<Vec<Vec<f64>>> {
    let h = 1e-6;
    let m = v.len();
    let mut cols = Vec::with_capacity(m);
    for k in 0..m {
        let mut p = v.to_vec();
        let mut q = v.to_vec();
        p[k] += h;
        q[k] -= h;
        let fp = reduced_vector_field(&p, cfg)?;
        let fq = reduced_vector_field(&q, cfg)?;
        cols.push(fp.iter().zip(&fq).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<f64>>());
    }
    Ok((0..m).map(|i| (0..m).map(|k| cols[k][i]).collect()).collect())
}

fn convergence_and_properties() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    let rows = cd_convergence(1.0, &[11, 23, 47, 95])?;
    out.push(CheckResult::holds(
        "C_D_error_decreasing",
        rows.windows(2).all(|w| w[1].error < w[0].error),
    ));
    out.push(CheckResult::at_least("C_D_measured_order", measured_order(&rows), 1.0));
    let xs = xi0_sweep(&[5, 11, 23, 47])?;
    out.push(CheckResult::holds(
        "xi0_increasing_below_1",
        xs.windows(2).all(|w| w[1].1 > w[0].1) && xs.iter().all(|x| x.1 < 1.0),
    ));

    // properties over every equilibrium of a few configurations
    let mut fd_err: f64 = 0.0;
    let mut sin_sum: f64 = 0.0;
    let mut zero_missing = 0;
    let mut zero_angle: f64 = 0.0;
    let mut count = 0;
    for (n, ratio) in [(3usize, 1.3), (5, 0.7), (5, 1.1), (11, 1.2)] {
        let cfg = ModelConfig::from_ratio(n, 1.0, ratio)?;
        for eq in all_equilibria(&cfg, DEFAULT_TOL)? {
            count += 1;
            let exact = reduced_jacobian(&eq.v, &cfg)?;
            let fd = fd_jacobian(&eq.v, &cfg)?;
            for (r, s) in exact.iter().zip(&fd) {
                for (x, y) in r.iter().zip(s) {
                    fd_err = fd_err.max((x - y).abs());
                }
            }
            sin_sum = sin_sum.max(lift_raw(&eq.v).iter().map(|x| x.sin()).sum::<f64>().abs());
            let rep = equilibrium_stability(&eq, &cfg)?;
            if rep.l_zero < 1 {
                zero_missing += 1;
            }
            zero_angle = zero_angle.max(rep.zero_mode_angle());
        }
    }
    out.push(CheckResult::at_least("equilibria_examined", count as f64, 1.0));
    out.push(CheckResult::at_most("jacobian_fd_error", fd_err, 1e-6));
    out.push(CheckResult::count("zero_mode_missing", zero_missing, 0));
    out.push(CheckResult::at_most("zero_mode_angle", zero_angle, 1e-6));
    out.push(CheckResult::at_most("sum_sin_v", sin_sum, 1e-12));

    // chi' = chi/xi - h xi^2 against the closed-form derivative, and against
    // a Richardson-extrapolated difference quotient as an independent oracle
    let mut identity_err: f64 = 0.0;
    let mut fd_gap: f64 = 0.0;
    for n0 in 1..=3usize {
        for sigma in enumerate_sequences(n0)? {
            let curve = ChiCurve::new(&sigma);
            for j in 1..=95 {
                let xi = j as f64 / 100.0;
                let rhs = curve.value(xi) / xi - curve.h(xi) * xi * xi;
                identity_err = identity_err.max((curve.deriv(xi) - rhs).abs());
                let d = |s: f64| (curve.value(xi + s) - curve.value(xi - s)) / (2.0 * s);
                let fd = (4.0 * d(5e-4) - d(1e-3)) / 3.0;
                fd_gap = fd_gap.max((fd - rhs).abs());
            }
        }
    }
    out.push(CheckResult::at_most("chi_derivative_identity", identity_err, 1e-8));
    out.push(CheckResult::at_most("chi_derivative_identity_fd", fd_gap, 1e-6));

    // brute-force multistart search finds exactly the constructed equilibria
    for (n, ratio) in [(3usize, 1.3), (3, 0.8), (5, 1.1), (5, 2.5)] {
        let cfg = ModelConfig::from_ratio(n, 1.0, ratio)?;
        let known = all_equilibria(&cfg, DEFAULT_TOL)?;
        let found = find_reduced_zeros(&cfg, &NewtonSearch::default());
        let unmatched_found = found
            .iter()
            .filter(|z| known.iter().all(|e| torus_distance(&e.v, z) > 1e-7))
            .count();
        let unmatched_known = known
            .iter()
            .filter(|e| found.iter().all(|z| torus_distance(&e.v, z) > 1e-7))
            .count();
        out.push(CheckResult::count(format!("n{n}@{ratio}.search_extra"), unmatched_found, 0));
        out.push(CheckResult::count(format!("n{n}@{ratio}.search_missed"), unmatched_known, 0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(CheckResult::close("a", 1.00005, 1.0, 1e-4).pass);
        assert!(!CheckResult::close("a", 1.0002, 1.0, 1e-4).pass);
        assert!(CheckResult::at_least("b", 3.0, 3.0).pass);
        assert!(!CheckResult::at_most("c", 3.1, 3.0).pass);
        assert!(CheckResult::count("d", 4, 4).pass);
        assert!(!CheckResult::holds("e", false).pass);
    }

    #[test]
    fn unknown_criterion_is_an_error() {
        assert!(run_criterion(0).is_err());
        assert!(run_criterion(7).is_err());
    }

    #[test]
    fn reference_constants_pass() {
        let report = run_criterion(1).unwrap();
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }
}
