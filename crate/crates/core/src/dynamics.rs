//! Time integration of the full Kuramoto model.
//!
//! Fixed-step classic RK4 in lifted (unwrapped) coordinates; angles are
//! wrapped only when a state is recorded. Perturbations are drawn from a
//! seeded ChaCha stream so every experiment is bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::continuum::{
    build_discontinuous, discretize, family_distance, flip_set_for_sigma, ContinuumKind,
    ContinuumSolution, FlipSet, StepFunctionState,
};
use crate::equilibria::{equilibria_for, Equilibrium, SignSequence, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::model::{km_vector_field_into, lift, lift_raw, wrap_angle, FrequencyProfile, ModelConfig};
use crate::stability::equilibrium_stability;

/// Default step in units of `1/K`.
pub const DEFAULT_DT_K: f64 = 0.01;

/// Default perturbation seed.
pub const DEFAULT_SEED: u64 = 20_240_101;

/// Recorded solution of one integration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Phases in `(-pi, pi]`, one row per recorded time.
    pub states: Vec<Vec<f64>>,
    /// `(1/n) sum u_i` of the lifted state at each recorded time.
    pub mean_phase: Vec<f64>,
    /// Final state without wrapping.
    pub final_lifted: Vec<f64>,
    pub cfg: ModelConfig,
    /// Step actually used (`t_end` divided evenly).
    pub dt: f64,
    pub initial: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest `|mean(u(t)) - mean(u(0))|` over the recorded times.
    pub fn mean_phase_drift(&self) -> f64 {
        let m0 = self.mean_phase.first().copied().unwrap_or(0.0);
        self.mean_phase
            .iter()
            .map(|m| (m - m0).abs())
            .fold(0.0, f64::max)
    }
}

/// Integration settings beyond `t_end` and `dt`.
#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    /// Record every `record_every`-th step (the final step is always kept).
    pub record_every: usize,
    /// Free-text description of the initial condition.
    pub initial: String,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { record_every: 1, initial: "user".into() }
    }
}

/// Integrates from the full state `u0` to `t_end`, recording every step.
pub fn integrate(u0: &[f64], cfg: &ModelConfig, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_with(u0, cfg, t_end, dt, &IntegrateOptions::default())
}

pub fn integrate_with(
    u0: &[f64],
    cfg: &ModelConfig,
    t_end: f64,
    dt: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let n = cfg.n();
    if u0.len() != n {
        return Err(Error::Dimension { expected: n, got: u0.len() });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain { value: dt, domain: "dt > 0" });
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Domain { value: t_end, domain: "t_end > 0" });
    }
    if let Some((index, &value)) = u0.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::NonFinite { t: 0.0, index, value });
    }
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let every = opts.record_every.max(1);
    let omegas = FrequencyProfile::evenly_spaced(cfg).omegas;
    let scale = cfg.k() / n as f64;
    let f = |u: &[f64], out: &mut [f64]| km_vector_field_into(u, scale, &omegas, out);

    let mean = |u: &[f64]| u.iter().sum::<f64>() / n as f64;
    let mut u = u0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![u.iter().map(|&x| wrap_angle(x)).collect::<Vec<_>>()];
    let mut mean_phase = vec![mean(&u)];

    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for step in 1..=steps {
        f(&u, &mut k1);
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * h * k1[i];
        }
        f(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * h * k2[i];
        }
        f(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = u[i] + h * k3[i];
        }
        f(&tmp, &mut k4);
        for i in 0..n {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = step as f64 * h;
        if let Some((index, &value)) = u.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFinite { t, index, value });
        }
        if step % every == 0 || step == steps {
            times.push(t);
            states.push(u.iter().map(|&x| wrap_angle(x)).collect());
            mean_phase.push(mean(&u));
        }
    }
    Ok(Trajectory {
        times,
        states,
        mean_phase,
        final_lifted: u,
        cfg: *cfg,
        dt: h,
        initial: opts.initial.clone(),
    })
}

/// Final-state differences for the steps `dt`, `dt/2`, `dt/4` and the
/// observed order `log2(e1 / e2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepHalving {
    pub dt: f64,
    /// `|u(dt) - u(dt/2)|_inf` at `t_end`.
    pub e1: f64,
    /// `|u(dt/2) - u(dt/4)|_inf` at `t_end`.
    pub e2: f64,
    pub order: f64,
}

pub fn step_halving_order(u0: &[f64], cfg: &ModelConfig, t_end: f64, dt: f64) -> Result<StepHalving> {
    let opts = IntegrateOptions { record_every: usize::MAX, initial: "step-halving".into() };
    let finals: Vec<Vec<f64>> = [dt, dt / 2.0, dt / 4.0]
        .iter()
        .map(|&h| Ok(integrate_with(u0, cfg, t_end, h, &opts)?.final_lifted))
        .collect::<Result<_>>()?;
    let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let e1 = diff(&finals[0], &finals[1]);
    let e2 = diff(&finals[1], &finals[2]);
    Ok(StepHalving { dt, e1, e2, order: (e1 / e2).log2() })
}

/// Seeded perturbation of root-mean-square size `size`.
pub fn perturbation(n: usize, size: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rms = (raw.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    raw.into_iter().map(|x| x * size / rms).collect()
}

/// Distance from a full state to the phase-shift family of a full state.
pub fn distance_to_family(u: &[f64], reference: &[f64]) -> Result<f64> {
    family_distance(
        &StepFunctionState::new(u.to_vec()),
        &StepFunctionState::new(reference.to_vec()),
    )
}

/// One perturbed-equilibrium run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationRun {
    pub sigma: SignSequence,
    pub xi: f64,
    pub size: f64,
    pub seed: u64,
    pub t_end: f64,
    pub initial_distance: f64,
    pub final_distance: f64,
    /// Largest distance reached along the recorded trajectory.
    pub max_distance: f64,
}

/// Integrates `eq + perturbation(size, seed)` to `t_end` with the default
/// step and records the distance to the equilibrium family.
pub fn perturb_and_integrate(
    eq: &Equilibrium,
    cfg: &ModelConfig,
    size: f64,
    seed: u64,
    t_end: f64,
) -> Result<PerturbationRun> {
    let base = lift_raw(&eq.v);
    let u0: Vec<f64> = base
        .iter()
        .zip(perturbation(cfg.n(), size, seed))
        .map(|(x, p)| x + p)
        .collect();
    let opts = IntegrateOptions { record_every: 100, initial: format!("{} + {size:e}", eq.sigma) };
    let traj = integrate_with(&u0, cfg, t_end, DEFAULT_DT_K / cfg.k(), &opts)?;
    let distances: Vec<f64> = traj
        .states
        .iter()
        .map(|s| distance_to_family(s, &base))
        .collect::<Result<_>>()?;
    Ok(PerturbationRun {
        sigma: eq.sigma.clone(),
        xi: eq.xi,
        size,
        seed,
        t_end,
        initial_distance: distances[0],
        final_distance: *distances.last().expect("at least the initial state"),
        max_distance: distances.iter().copied().fold(0.0, f64::max),
    })
}

/// Distance-to-family samples of one convergence run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceSample {
    pub n: usize,
    pub t: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceExperiment {
    pub kind: ContinuumKind,
    pub delta: f64,
    pub seed: u64,
    pub samples: Vec<ConvergenceSample>,
    /// Per `n`: distance between the discretised profile and the family of
    /// the matched discrete equilibrium.
    pub residuals: Vec<(usize, f64)>,
}

impl ConvergenceExperiment {
    pub fn for_n(&self, n: usize) -> Vec<ConvergenceSample> {
        self.samples.iter().copied().filter(|s| s.n == n).collect()
    }
}

/// Sign sequence on `n = 2 n0 + 1` nodes whose non-reference cell midpoints
/// lie in `flip`.
pub fn sigma_for_flip_set(flip: &FlipSet, n0: usize) -> SignSequence {
    let n = (2 * n0 + 1) as f64;
    let signs = (1..=2 * n0 + 1)
        .filter(|&j| j != n0 + 1)
        .map(|j| if flip.side_at((j as f64 - 0.5) / n).is_some() { -1 } else { 1 })
        .collect();
    SignSequence::new(signs).expect("even positive length")
}

/// Discrete equilibrium matching `sol` at `n`: the sign sequence of its flip
/// set, on the root whose `C_hat` is closest to the signed `C`.
pub fn matched_equilibrium(sol: &ContinuumSolution, n: usize) -> Result<(ModelConfig, Equilibrium)> {
    let cfg = ModelConfig::from_beta(n, 1.0, sol.beta)?;
    let sigma = sigma_for_flip_set(&sol.flip_set, cfg.n0());
    let eq = equilibria_for(&sigma, &cfg, DEFAULT_TOL)?
        .into_iter()
        .min_by(|p, q| (p.c_hat - sol.c).abs().total_cmp(&(q.c_hat - sol.c).abs()))
        .ok_or_else(|| Error::Numerical(format!("no {sigma} equilibrium at n = {n}")))?;
    Ok((cfg, eq))
}

/// For each `n`, integrates the matched discrete equilibrium perturbed by a
/// seeded disturbance of size `delta` for `t_end_k / K` time units, and
/// samples the distance to its family `samples + 1` times.
pub fn convergence_experiment(
    sol: &ContinuumSolution,
    n_list: &[usize],
    t_end_k: f64,
    delta: f64,
    seed: u64,
    samples: usize,
) -> Result<ConvergenceExperiment> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("n_list must be increasing".into()));
    }
    let samples = samples.max(1);
    let runs: Vec<(Vec<ConvergenceSample>, (usize, f64))> = n_list
        .par_iter()
        .map(|&n| {
            let (cfg, eq) = matched_equilibrium(sol, n)?;
            let base = lift_raw(&eq.v);
            let residual = family_distance(&discretize(sol, n)?, &StepFunctionState::new(base.clone()))?;
            let u0: Vec<f64> = base
                .iter()
                .zip(perturbation(n, delta, seed))
                .map(|(x, p)| x + p)
                .collect();
            let t_end = t_end_k / cfg.k();
            let dt = DEFAULT_DT_K / cfg.k();
            let steps = (t_end / dt).ceil() as usize;
            let opts = IntegrateOptions {
                record_every: (steps / samples).max(1),
                initial: format!("{} + {delta:e}", eq.sigma),
            };
            let traj = integrate_with(&u0, &cfg, t_end, dt, &opts)?;
            let rows = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(&t, s)| Ok(ConvergenceSample { n, t, distance: distance_to_family(s, &base)? }))
                .collect::<Result<_>>()?;
            Ok((rows, (n, residual)))
        })
        .collect::<Result<_>>()?;
    let (samples, residuals): (Vec<Vec<ConvergenceSample>>, Vec<(usize, f64)>) = runs.into_iter().unzip();
    Ok(ConvergenceExperiment {
        kind: sol.kind,
        delta,
        seed,
        samples: samples.into_iter().flatten().collect(),
        residuals,
    })
}

/// A finite-`n` equilibrium with a single reflected node at the boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryFlip {
    pub n: usize,
    pub sigma: SignSequence,
    pub xi: f64,
    /// Unstable eigenvalue count of the discrete equilibrium.
    pub l_plus: usize,
    /// Measure of the matched flip set at this `n`.
    pub flip_measure: f64,
    /// Kind of the limiting continuum match (flip set shrunk to `x = 1`).
    pub limit_kind: ContinuumKind,
    /// Distance from the discrete equilibrium to the discretised limit
    /// profile, modulo phase.
    pub distance_to_limit: f64,
}

/// The sign sequence of all ones except a `-1` at the last node, at each
/// `n`: the discrete equilibrium (smallest `xi` root) is unstable while the
/// flip set shrinks to a null set, whose continuum match is the continuous
/// family.
pub fn boundary_flip(ns: &[usize], k_over_a: f64) -> Result<Vec<BoundaryFlip>> {
    let limit = build_discontinuous(&FlipSet::new(&[(1.0, 1.0)])?, 1.0 / k_over_a)?
        .ok_or_else(|| Error::Numerical(format!("no continuum solution at K/a = {k_over_a}")))?;
    ns.iter()
        .map(|&n| {
            let cfg = ModelConfig::from_ratio(n, 1.0, k_over_a)?;
            let n0 = cfg.n0();
            let mut signs = vec![1i8; 2 * n0];
            signs[2 * n0 - 1] = -1;
            let sigma = SignSequence::new(signs)?;
            let eq = equilibria_for(&sigma, &cfg, DEFAULT_TOL)?
                .into_iter()
                .next()
                .ok_or_else(|| Error::Numerical(format!("no {sigma} equilibrium at n = {n}")))?;
            let report = equilibrium_stability(&eq, &cfg)?;
            let distance_to_limit = family_distance(
                &StepFunctionState::new(lift(&eq.v, 0.0)),
                &discretize(&limit, n)?,
            )?;
            Ok(BoundaryFlip {
                n,
                flip_measure: flip_set_for_sigma(&sigma).measure(),
                sigma,
                xi: eq.xi,
                l_plus: report.l_plus,
                limit_kind: limit.kind,
                distance_to_limit,
            })
        })
        .collect()
}
