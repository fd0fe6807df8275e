//! Sign-sequence equilibria of the reduced Kuramoto system.
//!
//! Every equilibrium of the reduced system is `v^sigma` for some sign
//! sequence `sigma` and some `xi in (0, 1]` solving `a/K = |chi^sigma(xi)|`.

mod chi;
mod search;
mod sequence;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

pub use chi::{
    chi_eval, chi_extrema, h_sigma, solve_xi, ChiCurve, Extremum, ExtremumKind, PairedChi,
    DEFAULT_TOL, GRID_POINTS, ZERO_VALUE_TOL,
};
pub use search::{find_reduced_zeros, NewtonSearch};
pub use sequence::{enumerate_sequences, PairedIndex, SignSequence, MAX_ENUMERATION_N0};

use crate::error::{Error, Result};
use crate::model::{reduced_offset, wrap_angle, ModelConfig};

/// Relative mismatch between `|chi(xi)|` and `a/K` tolerated by
/// [`build_equilibrium`].
pub const CONSISTENCY_TOL: f64 = 1e-6;

/// Two equilibria closer than this (max-norm on the torus) are the same point.
pub const COINCIDENCE_TOL: f64 = 1e-9;

/// An equilibrium `v^sigma` of the reduced system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub sigma: SignSequence,
    pub xi: f64,
    /// Sign of `chi^sigma(xi)` (and of `c_hat`).
    pub chi_sign: i8,
    /// Phase differences to the reference oscillator, in `(-pi, pi]`.
    pub v: Vec<f64>,
    /// Order-parameter constant `C_hat = +-n0 a / (n K xi)`.
    pub c_hat: f64,
    pub k: f64,
    /// Number of sign sequences realising this same point.
    pub multiplicity: usize,
}

/// Materialises `v^sigma` at `xi`, checking `|chi^sigma(xi)| = a/K`.
pub fn build_equilibrium(sigma: &SignSequence, xi: f64, cfg: &ModelConfig) -> Result<Equilibrium> {
    let n0 = cfg.n0();
    if sigma.n0() != n0 {
        return Err(Error::Dimension { expected: 2 * n0, got: sigma.len() });
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::Domain { value: xi, domain: "(0, 1]" });
    }
    let chi = chi_eval(sigma, xi)?;
    let beta = cfg.beta();
    if (chi.abs() - beta).abs() > CONSISTENCY_TOL * beta.max(1.0) {
        return Err(Error::Consistency { chi_abs: chi.abs(), beta });
    }
    let sign: i8 = if chi > 0.0 { 1 } else { -1 };
    let n0f = n0 as f64;
    let v = (1..=2 * n0)
        .map(|i| {
            let arg = (reduced_offset(i, n0) as f64 * xi / n0f).clamp(-1.0, 1.0);
            let phi = f64::from(sign) * arg.asin();
            if sigma.get(i) == 1 {
                phi
            } else {
                wrap_angle(PI - phi)
            }
        })
        .collect();
    let c_hat = f64::from(sign) * n0f * cfg.a() / (cfg.n() as f64 * cfg.k() * xi);
    Ok(Equilibrium {
        sigma: sigma.clone(),
        xi,
        chi_sign: sign,
        v,
        c_hat,
        k: cfg.k(),
        multiplicity: 1,
    })
}

/// All equilibria of one sign sequence at the coupling of `cfg`.
pub fn equilibria_for(sigma: &SignSequence, cfg: &ModelConfig, tol: f64) -> Result<Vec<Equilibrium>> {
    solve_xi(sigma, cfg.beta(), tol)?
        .into_iter()
        .map(|xi| build_equilibrium(sigma, xi, cfg))
        .collect()
}

/// Max-norm distance between two points of the torus.
pub fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| wrap_angle(a - b).abs())
        .fold(0.0, f64::max)
}

/// Every equilibrium at the coupling of `cfg`, over all sign sequences.
/// Points realised by several sequences (the outer-pair quadruple at
/// `xi = 1`) are reported once, with `multiplicity` counting them; the first
/// sequence in lexicographic order is kept as the representative.
pub fn all_equilibria(cfg: &ModelConfig, tol: f64) -> Result<Vec<Equilibrium>> {
    let sequences = enumerate_sequences(cfg.n0())?;
    let per_sigma: Vec<Vec<Equilibrium>> = sequences
        .par_iter()
        .map(|sigma| equilibria_for(sigma, cfg, tol))
        .collect::<Result<_>>()?;
    let mut merged: Vec<Equilibrium> = Vec::new();
    for eq in per_sigma.into_iter().flatten() {
        match merged
            .iter_mut()
            .find(|m| torus_distance(&m.v, &eq.v) < COINCIDENCE_TOL)
        {
            Some(m) => m.multiplicity += 1,
            None => merged.push(eq),
        }
    }
    Ok(merged)
}

/// The fold of the all-ones branch: the unique interior maximum of
/// `chi^{(1,...,1)}`, at `xi0` with value `1/kappa0`.
pub fn all_ones_fold(n0: usize) -> Result<Extremum> {
    if n0 == 0 {
        return Err(Error::Config("n0 must be at least 1".into()));
    }
    let curve = ChiCurve::new(&SignSequence::all_ones(n0));
    curve
        .extrema()
        .iter()
        .copied()
        .find(|e| e.kind == ExtremumKind::Max)
        .ok_or_else(|| Error::Numerical(format!("no fold found on the all-ones branch for n0 = {n0}")))
}

/// Partition of all sign sequences into classes sharing one `chi^sigma`,
/// keyed by the paired-index data.
pub fn dedup_chi_classes(n0: usize) -> Result<Vec<Vec<SignSequence>>> {
    let mut classes: BTreeMap<Vec<PairedIndex>, Vec<SignSequence>> = BTreeMap::new();
    for sigma in enumerate_sequences(n0)? {
        classes.entry(sigma.paired_indices()).or_default().push(sigma);
    }
    Ok(classes.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reduced_vector_field;
    use approx::assert_abs_diff_eq;

    fn s(x: &str) -> SignSequence {
        x.parse().unwrap()
    }

    fn residual(eq: &Equilibrium, cfg: &ModelConfig) -> f64 {
        reduced_vector_field(&eq.v, cfg)
            .unwrap()
            .iter()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn all_ones_matches_arcsin_profile() {
        let cfg = ModelConfig::from_ratio(7, 1.0, 1.2).unwrap();
        let sigma = SignSequence::all_ones(3);
        for xi in solve_xi(&sigma, cfg.beta(), 1e-13).unwrap() {
            let eq = build_equilibrium(&sigma, xi, &cfg).unwrap();
            for i in 1..=6 {
                let expected = (reduced_offset(i, 3) as f64 * xi / 3.0).asin();
                assert_abs_diff_eq!(eq.v[i - 1], expected, epsilon = 1e-15);
            }
            for i in 0..3 {
                assert_eq!(eq.v[i], -eq.v[5 - i]);
            }
            assert!(residual(&eq, &cfg) < 1e-10);
        }
    }

    #[test]
    fn n3_branch_point_values() {
        let cfg = ModelConfig::from_ratio(3, 1.0, 1.0).unwrap();
        let eq = build_equilibrium(&s("++"), 1.0, &cfg).unwrap();
        assert_abs_diff_eq!(eq.v[0], -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eq.v[1], PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eq.c_hat, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn n3_mirror_branch_matches_closed_form() {
        // v1 = arcsin(a / (3 K C)) - pi, v2 = -arcsin(a / (3 K C)) + pi
        let cfg = ModelConfig::from_ratio(3, 1.0, 4.0).unwrap();
        let sigma = s("--");
        let roots = solve_xi(&sigma, cfg.beta(), 1e-13).unwrap();
        assert!(!roots.is_empty());
        for xi in roots {
            let eq = build_equilibrium(&sigma, xi, &cfg).unwrap();
            let arg = (cfg.a() / (3.0 * cfg.k() * eq.c_hat)).asin();
            assert_abs_diff_eq!(wrap_angle(eq.v[0] - (arg - PI)), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(wrap_angle(eq.v[1] - (PI - arg)), 0.0, epsilon = 1e-12);
            // C_hat solves C = 1/3 - (2/3) sqrt(1 - (a / (3 K C))^2)
            let rhs = 1.0 / 3.0 - 2.0 / 3.0 * (1.0 - (cfg.a() / (3.0 * cfg.k() * eq.c_hat)).powi(2)).sqrt();
            assert_abs_diff_eq!(eq.c_hat, rhs, epsilon = 1e-12);
            assert!(residual(&eq, &cfg) < 1e-10);
        }
    }

    #[test]
    fn inconsistent_datum_is_rejected() {
        let cfg = ModelConfig::from_ratio(5, 1.0, 1.0).unwrap();
        let err = build_equilibrium(&SignSequence::all_ones(2), 0.3, &cfg).unwrap_err();
        assert!(matches!(err, Error::Consistency { .. }));
    }

    #[test]
    fn every_root_gives_an_equilibrium_with_zero_sine_sum() {
        for (n, ratio) in [(5, 0.7), (5, 1.3), (7, 2.0), (11, 0.9), (11, 3.0)] {
            let cfg = ModelConfig::from_ratio(n, 1.0, ratio).unwrap();
            for sigma in enumerate_sequences(cfg.n0()).unwrap() {
                for eq in equilibria_for(&sigma, &cfg, 1e-13).unwrap() {
                    assert!(residual(&eq, &cfg) < 1e-10, "{sigma} xi={}", eq.xi);
                    let sines: f64 = eq.v.iter().map(|x| x.sin()).sum();
                    assert!(sines.abs() < 1e-12, "{sigma}: {sines}");
                }
            }
        }
    }

    #[test]
    fn swap_pairing_preserves_c_hat() {
        let cfg = ModelConfig::from_ratio(7, 1.0, 1.5).unwrap();
        for sigma in enumerate_sequences(3).unwrap() {
            for i in 1..=3 {
                let Some(swapped) = sigma.swap_pair(i) else { continue };
                let a = equilibria_for(&sigma, &cfg, 1e-13).unwrap();
                let b = equilibria_for(&swapped, &cfg, 1e-13).unwrap();
                assert_eq!(a.len(), b.len());
                for (x, y) in a.iter().zip(&b) {
                    assert_eq!(x.c_hat, y.c_hat);
                }
            }
        }
    }

    #[test]
    fn quadruple_coincides_at_branch_point() {
        let cfg = ModelConfig::from_ratio(3, 1.0, 1.0).unwrap();
        let all = all_equilibria(&cfg, 1e-13).unwrap();
        let at_one: Vec<_> = all.iter().filter(|e| e.xi == 1.0).collect();
        assert_eq!(at_one.len(), 1);
        assert_eq!(at_one[0].multiplicity, 4);
    }

    #[test]
    fn chi_classes_small_cases() {
        let c1 = dedup_chi_classes(1).unwrap();
        assert_eq!(c1.len(), 3);
        let mixed = c1.iter().find(|c| c.len() == 2).unwrap();
        let names: Vec<String> = mixed.iter().map(|x| x.to_string()).collect();
        assert_eq!(names, ["-+", "+-"]);

        // brute force: group the 16 sequences by chi sampled on a grid
        let seqs = enumerate_sequences(2).unwrap();
        let sample = |sg: &SignSequence| -> Vec<i64> {
            (1..=50).map(|j| (chi_eval(sg, j as f64 / 50.0).unwrap() * 1e9).round() as i64).collect()
        };
        let mut by_grid: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        for sg in &seqs {
            *by_grid.entry(sample(sg)).or_default() += 1;
        }
        let c2 = dedup_chi_classes(2).unwrap();
        assert_eq!(c2.len(), by_grid.len());
        let mut sizes: Vec<usize> = c2.iter().map(Vec::len).collect();
        let mut grid_sizes: Vec<usize> = by_grid.values().copied().collect();
        sizes.sort();
        grid_sizes.sort();
        assert_eq!(sizes, grid_sizes);
        // chi = xi / 2 class: sigma_1 != sigma_4 and sigma_2 != sigma_3
        let half = c2.iter().find(|c| c[0].paired_indices().is_empty()).unwrap();
        assert_eq!(half.len(), 4);
        assert_abs_diff_eq!(chi_eval(&half[0], 0.6).unwrap(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn chi_classes_n0_five() {
        let classes = dedup_chi_classes(5).unwrap();
        // each pair is mismatched (2 ways) or matched with sign +-1: 3^5 classes
        assert_eq!(classes.len(), 243);
        assert_eq!(classes.iter().map(Vec::len).sum::<usize>(), 1024);
        for class in &classes {
            let chi0 = PairedChi::new(&class[0]);
            for other in class {
                for j in 1..20 {
                    let xi = j as f64 / 20.0;
                    assert_abs_diff_eq!(chi_eval(other, xi).unwrap(), chi0.value(xi), epsilon = 1e-14);
                }
            }
        }
    }
}
