//! Saddle-node and pitchfork bifurcations of the sign-sequence branches,
//! their exhaustive counts, and sampled branch diagrams.
//!
//! Along the `sigma` branch the coupling is `K = a / |chi^sigma(xi)|`, so
//! folds sit at interior extrema of `|chi^sigma|` and the outer-pair
//! quadruple meets at `xi = 1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::{
    build_equilibrium, enumerate_sequences, solve_xi, ChiCurve, PairedChi, SignSequence,
    DEFAULT_TOL, ZERO_VALUE_TOL,
};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::stability::{equilibrium_stability, Verdict};

/// Highest derivative order used to decide pitchfork criticality.
pub const MAX_DEGENERACY_ORDER: usize = 4;

/// Taylor coefficients below this are treated as vanishing derivatives.
pub const DERIVATIVE_ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    SaddleNode,
    Pitchfork,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::SaddleNode => "saddle-node",
            EventKind::Pitchfork => "pitchfork",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criticality {
    /// The new equilibria exist for couplings above `K*`.
    Supercritical,
    /// The new equilibria exist for couplings below `K*`.
    Subcritical,
    /// All derivatives up to [`MAX_DEGENERACY_ORDER`] vanish.
    Indeterminate,
}

impl Criticality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criticality::Supercritical => "supercritical",
            Criticality::Subcritical => "subcritical",
            Criticality::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationEvent {
    pub kind: EventKind,
    pub k_star: f64,
    /// `K* / a`.
    pub ratio: f64,
    pub xi_star: f64,
    /// `chi^sigma(xi*)`.
    pub chi: f64,
    pub criticality: Criticality,
    /// One sequence for a saddle-node; `[++, +-, -+, --]` for a pitchfork.
    pub participants: Vec<SignSequence>,
    /// Order of the first non-vanishing derivative deciding the criticality
    /// (always 1 for saddle-nodes).
    pub degeneracy_order: usize,
}

/// Saddle-node events of the `sigma` branch: one per interior extremum of
/// `|chi^sigma|`, supercritical iff it is a local maximum.
pub fn detect_saddle_nodes(sigma: &SignSequence, cfg: &ModelConfig) -> Result<Vec<BifurcationEvent>> {
    check_n0(sigma, cfg)?;
    let curve = ChiCurve::new(sigma);
    Ok(curve
        .extrema()
        .iter()
        .map(|e| {
            let k_star = cfg.a() / e.value.abs();
            BifurcationEvent {
                kind: EventKind::SaddleNode,
                k_star,
                ratio: k_star / cfg.a(),
                xi_star: e.xi,
                chi: e.value,
                criticality: if e.is_abs_max() {
                    Criticality::Supercritical
                } else {
                    Criticality::Subcritical
                },
                participants: vec![sigma.clone()],
                degeneracy_order: 1,
            }
        })
        .collect())
}

fn check_n0(sigma: &SignSequence, cfg: &ModelConfig) -> Result<()> {
    if sigma.n0() != cfg.n0() {
        return Err(Error::Dimension { expected: 2 * cfg.n0(), got: sigma.len() });
    }
    Ok(())
}

fn check_quadruple(q: &[SignSequence; 4]) -> Result<()> {
    let m = q[0].len();
    if q.iter().any(|s| s.len() != m) {
        return Err(Error::Sigma("quadruple members differ in length".into()));
    }
    let corners = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
    for (s, &(first, last)) in q.iter().zip(&corners) {
        if s.get(1) != first || s.get(m) != last {
            return Err(Error::Sigma(format!(
                "{s} does not have outer signs ({first:+}, {last:+})"
            )));
        }
        if s.signs()[1..m - 1] != q[0].signs()[1..m - 1] {
            return Err(Error::Sigma(format!("{s} differs from {} off the outer pair", q[0])));
        }
    }
    Ok(())
}

/// Criticality from the Taylor expansion of `chi^{+-}` at `xi = 1`: the sign
/// of `chi(1)` times the first non-vanishing derivative.
pub fn pitchfork_criticality(sigma_pm: &SignSequence) -> Result<(Criticality, usize)> {
    let coeffs = PairedChi::new(sigma_pm)
        .taylor(1.0, MAX_DEGENERACY_ORDER)
        .ok_or_else(|| Error::Sigma(format!("{sigma_pm}: outer pair must have opposite signs")))?;
    let chi1 = coeffs[0];
    for (order, &c) in coeffs.iter().enumerate().skip(1) {
        if c.abs() > DERIVATIVE_ZERO_TOL {
            let crit = if chi1 * c > 0.0 {
                Criticality::Supercritical
            } else {
                Criticality::Subcritical
            };
            return Ok((crit, order));
        }
    }
    Ok((Criticality::Indeterminate, MAX_DEGENERACY_ORDER))
}

/// Pitchfork of the quadruple `[++, +-, -+, --]` (outer signs), or `None` if
/// `chi(1) = 0`.
pub fn detect_pitchforks(
    quadruple: &[SignSequence; 4],
    cfg: &ModelConfig,
) -> Result<Option<BifurcationEvent>> {
    check_quadruple(quadruple)?;
    check_n0(&quadruple[0], cfg)?;
    let chi1 = PairedChi::new(&quadruple[1]).value(1.0);
    if chi1.abs() < ZERO_VALUE_TOL {
        return Ok(None);
    }
    let (criticality, degeneracy_order) = pitchfork_criticality(&quadruple[1])?;
    let k_star = cfg.a() / chi1.abs();
    Ok(Some(BifurcationEvent {
        kind: EventKind::Pitchfork,
        k_star,
        ratio: k_star / cfg.a(),
        xi_star: 1.0,
        chi: chi1,
        criticality,
        participants: quadruple.to_vec(),
        degeneracy_order,
    }))
}

/// All events for `n0`: saddle-nodes by sequence, then pitchforks by
/// quadruple, each in lexicographic order of the (first) participant.
pub fn all_events(cfg: &ModelConfig) -> Result<Vec<BifurcationEvent>> {
    let sequences = enumerate_sequences(cfg.n0())?;
    let folds: Vec<Vec<BifurcationEvent>> = sequences
        .par_iter()
        .map(|s| detect_saddle_nodes(s, cfg))
        .collect::<Result<_>>()?;
    let forks: Vec<Option<BifurcationEvent>> = sequences
        .par_iter()
        .filter(|s| s.get(1) == 1 && s.get(s.len()) == 1)
        .map(|s| detect_pitchforks(&s.quadruple(), cfg))
        .collect::<Result<_>>()?;
    Ok(folds.into_iter().flatten().chain(forks.into_iter().flatten()).collect())
}

/// Exhaustive counts with the lower bounds they are compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventCounts {
    pub n0: usize,
    /// Sign sequences whose branch is non-empty.
    pub families_distinct: usize,
    /// Branches after joining `sigma^{++}` and `sigma^{--}` through each
    /// pitchfork.
    pub families_coarse: usize,
    pub saddle_nodes: usize,
    pub saddle_nodes_supercritical: usize,
    pub pitchforks: usize,
    pub pitchforks_supercritical: usize,
    pub pitchforks_indeterminate: usize,
    pub saddle_node_bound: u64,
    pub pitchfork_bound: u64,
    /// Stronger bound, applicable when `n0` is prime.
    pub pitchfork_prime_bound: Option<u64>,
}

impl EventCounts {
    /// Whether every applicable lower bound holds.
    pub fn bounds_hold(&self) -> bool {
        self.saddle_nodes as u64 >= self.saddle_node_bound
            && self.pitchforks as u64 >= self.pitchfork_bound
            && self.pitchfork_prime_bound.is_none_or(|b| self.pitchforks as u64 >= b)
    }
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// `floor(2^e)` for a possibly negative exponent.
fn pow2_floor(e: i64) -> u64 {
    if e < 0 {
        0
    } else {
        1u64 << e
    }
}

/// Lower bound on pitchfork events, `2^(2 n0 - 3) + 2^(n0 - 2) n0`, for `n0 >= 2`.
pub fn pitchfork_lower_bound(n0: usize) -> u64 {
    let n0i = n0 as i64;
    pow2_floor(2 * n0i - 3) + pow2_floor(n0i - 2) * n0 as u64
}

/// Exhaustively enumerates all branches for `n0` and counts events.
pub fn count_events(n0: usize) -> Result<EventCounts> {
    let cfg = ModelConfig::with_n0(n0, 1.0, 1.0)?;
    let sequences = enumerate_sequences(n0)?;
    let per_sigma: Vec<(bool, usize, usize)> = sequences
        .par_iter()
        .map(|s| {
            let curve = ChiCurve::new(s);
            let folds = detect_saddle_nodes(s, &cfg)?;
            let sup = folds
                .iter()
                .filter(|e| e.criticality == Criticality::Supercritical)
                .count();
            Ok((curve.max_abs() > 0.0, folds.len(), sup))
        })
        .collect::<Result<_>>()?;
    let forks: Vec<BifurcationEvent> = sequences
        .par_iter()
        .filter(|s| s.get(1) == 1 && s.get(s.len()) == 1)
        .map(|s| detect_pitchforks(&s.quadruple(), &cfg))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let families_distinct = per_sigma.iter().filter(|p| p.0).count();
    let n0i = n0 as i64;
    Ok(EventCounts {
        n0,
        families_distinct,
        families_coarse: families_distinct - forks.len(),
        saddle_nodes: per_sigma.iter().map(|p| p.1).sum(),
        saddle_nodes_supercritical: per_sigma.iter().map(|p| p.2).sum(),
        pitchforks: forks.len(),
        pitchforks_supercritical: forks
            .iter()
            .filter(|e| e.criticality == Criticality::Supercritical)
            .count(),
        pitchforks_indeterminate: forks
            .iter()
            .filter(|e| e.criticality == Criticality::Indeterminate)
            .count(),
        saddle_node_bound: pow2_floor(2 * (n0i - 1)),
        pitchfork_bound: pitchfork_lower_bound(n0),
        pitchfork_prime_bound: is_prime(n0).then(|| pow2_floor(2 * (n0i - 1))),
    })
}

/// One component of one equilibrium at one sampled coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramRow {
    pub k: f64,
    pub sigma: SignSequence,
    /// Lexicographic index of `sigma`.
    pub sigma_id: u64,
    /// Index of the `xi` root (ascending) for this `sigma` and `K`.
    pub root: usize,
    pub xi: f64,
    pub c_hat: f64,
    /// 1-based reduced coordinate.
    pub component: usize,
    pub v: f64,
    pub verdict: Verdict,
}

/// Evenly spaced couplings `k_min..=k_max`.
pub fn k_samples(k_min: f64, k_max: f64, samples: usize) -> Result<Vec<f64>> {
    if !(k_min > 0.0 && k_max > k_min && k_max.is_finite()) {
        return Err(Error::Config(format!(
            "coupling range [{k_min}, {k_max}] must satisfy 0 < K_min < K_max"
        )));
    }
    if samples < 2 {
        return Err(Error::Config(format!("samples = {samples} must be at least 2")));
    }
    let step = (k_max - k_min) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|j| if j + 1 == samples { k_max } else { k_min + j as f64 * step })
        .collect())
}

/// Equilibria of every branch (or of `only`) at sampled couplings, with
/// the verdict from the computed spectrum. Rows are ordered by
/// `(sigma, K, root, component)`.
pub fn branch_diagram(
    cfg: &ModelConfig,
    k_min: f64,
    k_max: f64,
    samples: usize,
    only: Option<&SignSequence>,
) -> Result<Vec<DiagramRow>> {
    let ks = k_samples(k_min, k_max, samples)?;
    let sequences = match only {
        Some(s) => {
            check_n0(s, cfg)?;
            vec![s.clone()]
        }
        None => enumerate_sequences(cfg.n0())?,
    };
    let cells: Vec<(usize, usize)> = (0..sequences.len())
        .flat_map(|i| (0..ks.len()).map(move |j| (i, j)))
        .collect();
    let blocks: Vec<Vec<DiagramRow>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let sigma = &sequences[i];
            let c = cfg.with_k(ks[j])?;
            let mut rows = Vec::new();
            for (root, xi) in solve_xi(sigma, c.beta(), DEFAULT_TOL)?.into_iter().enumerate() {
                let eq = build_equilibrium(sigma, xi, &c)?;
                let verdict = equilibrium_stability(&eq, &c)?.verdict;
                for (m, &v) in eq.v.iter().enumerate() {
                    rows.push(DiagramRow {
                        k: ks[j],
                        sigma: sigma.clone(),
                        sigma_id: sigma.index(),
                        root,
                        xi,
                        c_hat: eq.c_hat,
                        component: m + 1,
                        v,
                        verdict,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(x: &str) -> SignSequence {
        x.parse().unwrap()
    }

    fn cfg(n0: usize) -> ModelConfig {
        ModelConfig::with_n0(n0, 1.0, 1.0).unwrap()
    }

    /// One-sided difference quotient at 1 with two Richardson steps.
    fn richardson_derivative(p: &PairedChi) -> f64 {
        let d = |h: f64| (p.value(1.0) - p.value(1.0 - h)) / h;
        let (d1, d2, d3) = (d(1e-4), d(5e-5), d(2.5e-5));
        let r1 = 2.0 * d2 - d1;
        let r2 = 2.0 * d3 - d2;
        (4.0 * r2 - r1) / 3.0
    }

    #[test]
    fn n3_fold_and_pitchfork() {
        let c = cfg(1);
        let folds = detect_saddle_nodes(&s("++"), &c).unwrap();
        assert_eq!(folds.len(), 1);
        assert_eq!(folds[0].criticality, Criticality::Supercritical);
        assert_abs_diff_eq!(folds[0].ratio, 0.56812, epsilon = 1e-5);
        assert_abs_diff_eq!(folds[0].xi_star, ((15.0 + 33f64.sqrt()) / 32.0).sqrt(), epsilon = 1e-10);

        let fork = detect_pitchforks(&s("++").quadruple(), &c).unwrap().unwrap();
        assert_abs_diff_eq!(fork.ratio, 1.0, epsilon = 1e-14);
        assert_eq!(fork.criticality, Criticality::Supercritical);
        assert_eq!(fork.degeneracy_order, 1);
        assert_eq!(fork.participants.len(), 4);
    }

    #[test]
    fn all_ones_pitchfork_locations() {
        let f5 = detect_pitchforks(&SignSequence::all_ones(2).quadruple(), &cfg(2)).unwrap().unwrap();
        assert_abs_diff_eq!(f5.ratio, 3f64.sqrt() - 1.0, epsilon = 1e-12);
        let f11 = detect_pitchforks(&SignSequence::all_ones(5).quadruple(), &cfg(5)).unwrap().unwrap();
        assert_abs_diff_eq!(f11.ratio, 0.65853, epsilon = 1e-5);
        // fold precedes pitchfork on the all-ones branch
        for n0 in [2usize, 5] {
            let fold = detect_saddle_nodes(&SignSequence::all_ones(n0), &cfg(n0)).unwrap();
            let fork = detect_pitchforks(&SignSequence::all_ones(n0).quadruple(), &cfg(n0)).unwrap().unwrap();
            assert!(fold[0].ratio < fork.ratio);
        }
    }

    #[test]
    fn quadruple_validation() {
        let q = s("+-+-").quadruple();
        assert!(detect_pitchforks(&q, &cfg(2)).is_ok());
        let bad = [q[1].clone(), q[0].clone(), q[2].clone(), q[3].clone()];
        assert!(detect_pitchforks(&bad, &cfg(2)).is_err());
        let mixed = [q[0].clone(), s("+++-"), q[2].clone(), q[3].clone()];
        assert!(detect_pitchforks(&mixed, &cfg(2)).is_err());
    }

    #[test]
    fn taylor_derivative_matches_richardson_oracle() {
        for n0 in 1..=5usize {
            for sigma in enumerate_sequences(n0).unwrap() {
                if sigma.get(1) != 1 || sigma.get(2 * n0) != -1 {
                    continue;
                }
                let p = PairedChi::new(&sigma);
                let exact = p.taylor(1.0, 1).unwrap()[1];
                let fd = richardson_derivative(&p);
                assert!((exact - fd).abs() < 1e-6 * exact.abs().max(1.0), "{sigma}: {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn saddle_nodes_match_brute_force_scan() {
        let sigma = s("+--+");
        let p = PairedChi::new(&sigma);
        let m = 1_000_000;
        let signed: Vec<f64> = (0..=m).map(|j| p.value(j as f64 / m as f64)).collect();
        let vals: Vec<f64> = signed.iter().map(|x| x.abs()).collect();
        let mut scan = Vec::new();
        for j in 1..m {
            // a kink of |chi| at a sign change of chi is not a fold
            if signed[j - 1] * signed[j + 1] <= 0.0 {
                continue;
            }
            let (a, b, c) = (vals[j - 1], vals[j], vals[j + 1]);
            if (b > a && b > c) || (b < a && b < c) {
                scan.push(j as f64 / m as f64);
            }
        }
        let events = detect_saddle_nodes(&sigma, &cfg(2)).unwrap();
        assert_eq!(events.len(), scan.len());
        for (e, x) in events.iter().zip(&scan) {
            assert!((e.xi_star - x).abs() < 2e-6);
        }
    }

    #[test]
    fn counts_respect_bounds() {
        for n0 in 2..=4usize {
            let c = count_events(n0).unwrap();
            assert_eq!(c.families_distinct, 1 << (2 * n0));
            assert_eq!(c.families_coarse, 3 << (2 * (n0 - 1)));
            assert!(c.bounds_hold(), "{c:?}");
        }
        assert_eq!(pitchfork_lower_bound(2), 4);
        assert_eq!(pitchfork_lower_bound(3), 14);
        assert_eq!(pitchfork_lower_bound(5), 168);
        assert!(is_prime(5) && !is_prime(4) && !is_prime(1));
    }

    #[test]
    fn events_invariant_under_pairing_swap() {
        let c = cfg(3);
        for sigma in enumerate_sequences(3).unwrap() {
            for i in 1..=3 {
                if let Some(t) = sigma.swap_pair(i) {
                    let a = detect_saddle_nodes(&sigma, &c).unwrap();
                    let b = detect_saddle_nodes(&t, &c).unwrap();
                    assert_eq!(a.len(), b.len());
                    for (x, y) in a.iter().zip(&b) {
                        assert_eq!(x.k_star, y.k_star);
                        assert_eq!(x.criticality, y.criticality);
                    }
                }
            }
        }
    }

    #[test]
    fn root_count_changes_only_at_events() {
        // Per branch, the number of roots changes by 2 across a fold value of
        // |chi| and by 1 across |chi(1)|, where a root leaves through xi = 1.
        for n0 in 1..=3usize {
            for sigma in enumerate_sequences(n0).unwrap() {
                let curve = ChiCurve::new(&sigma);
                let mut critical: Vec<f64> = curve.extrema().iter().map(|e| e.value.abs()).collect();
                let end = curve.value(1.0).abs();
                critical.push(end);
                let top = curve.max_abs() * 1.05;
                let m = 2000;
                let mut last: Option<(f64, usize)> = None;
                for j in 1..=m {
                    let beta = top * j as f64 / m as f64;
                    let count = curve.roots(beta, 1e-13).len();
                    if let Some((b0, c0)) = last {
                        let crossed: Vec<f64> =
                            critical.iter().copied().filter(|&v| v > b0 && v <= beta).collect();
                        let expected_change: i64 = crossed
                            .iter()
                            .map(|&v| if v == end { 1 } else { 2 })
                            .sum();
                        let change = (count as i64 - c0 as i64).abs();
                        if crossed.is_empty() {
                            assert_eq!(change, 0, "{sigma} between {b0} and {beta}");
                        } else if crossed.len() == 1 {
                            assert_eq!(change, expected_change, "{sigma} across {crossed:?}");
                        }
                    }
                    last = Some((beta, count));
                }
            }
        }
    }

    #[test]
    fn diagram_stability_only_on_all_ones_below_fold() {
        let c = ModelConfig::new(5, 1.0, 1.0).unwrap();
        let rows = branch_diagram(&c, 0.5, 2.5, 21, None).unwrap();
        assert!(!rows.is_empty());
        let xi0 = crate::equilibria::all_ones_fold(2).unwrap().xi;
        for r in &rows {
            if r.verdict == Verdict::Stable {
                assert!(r.sigma.is_all_ones());
                assert!(r.xi < xi0);
            }
        }
        assert!(rows.windows(2).all(|w| (w[0].sigma_id, w[0].k) <= (w[1].sigma_id, w[1].k)));
        let below = branch_diagram(&c, 0.1, 0.5, 5, None).unwrap();
        assert!(below.is_empty());
    }
}
