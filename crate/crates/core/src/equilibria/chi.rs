//! The scalar function `chi^sigma(xi)` whose graph against `a/K` encodes
//! existence, folds and branch points of each equilibrium family.

use serde::Serialize;

use super::sequence::SignSequence;
use crate::error::{Error, Result};
use crate::model::reduced_offset;
use crate::roots::bisect;

/// Number of interior sample points used to bracket extrema and zeros.
pub const GRID_POINTS: usize = 4096;

/// Default bisection tolerance for extrema, zeros and roots.
pub const DEFAULT_TOL: f64 = 1e-12;

/// `|chi|` below this at an extremum candidate marks a zero crossing.
pub const ZERO_VALUE_TOL: f64 = 1e-10;

/// `chi^sigma(xi)` by its defining sum over all `2 n0` entries.
pub fn chi_eval(sigma: &SignSequence, xi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::Domain { value: xi, domain: "[0, 1]" });
    }
    let n0 = sigma.n0();
    let n0f = n0 as f64;
    let sum: f64 = (1..=2 * n0)
        .map(|i| {
            let r = reduced_offset(i, n0) as f64 / n0f * xi;
            f64::from(sigma.get(i)) * (1.0 - r * r).max(0.0).sqrt()
        })
        .sum();
    Ok(xi / n0f * (1.0 + sum))
}

/// `h^sigma(xi)`, the weighted sum with `dchi/dxi = chi/xi - h xi^2`.
pub fn h_sigma(sigma: &SignSequence, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain { value: xi, domain: "(0, 1)" });
    }
    Ok(PairedChi::new(sigma).h(xi))
}

/// `chi^sigma` reduced to the mirror pairs with equal signs:
/// `chi(xi) = (xi / n0) (1 + sum_k w_k sqrt(1 - c_k^2 xi^2))` with
/// `c_k = (n0 + 1 - i_k) / n0` and `w_k = 2 sigma_{i_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedChi {
    n0: usize,
    terms: Vec<(f64, f64)>,
}

impl PairedChi {
    pub fn new(sigma: &SignSequence) -> Self {
        let n0 = sigma.n0();
        let terms = sigma
            .paired_indices()
            .iter()
            .map(|p| ((n0 + 1 - p.index) as f64 / n0 as f64, 2.0 * f64::from(p.sign)))
            .collect();
        Self { n0, terms }
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Weight of the `c = 1` term (outermost pair), zero if that pair is mismatched.
    pub fn edge_weight(&self) -> f64 {
        self.terms
            .iter()
            .find(|(c, _)| *c == 1.0)
            .map_or(0.0, |&(_, w)| w)
    }

    /// `1 + sum_k w_k sqrt(1 - c_k^2 xi^2)`, so that `chi = xi g / n0`.
    pub fn g(&self, xi: f64) -> f64 {
        1.0 + self
            .terms
            .iter()
            .map(|&(c, w)| w * sqrt_clamped(1.0 - c * c * xi * xi))
            .sum::<f64>()
    }

    pub fn value(&self, xi: f64) -> f64 {
        xi / self.n0 as f64 * self.g(xi)
    }

    /// `dchi/dxi`; diverges at `xi = 1` when the outermost pair is matched.
    pub fn deriv(&self, xi: f64) -> f64 {
        let sum: f64 = self
            .terms
            .iter()
            .map(|&(c, w)| {
                let r2 = c * c * xi * xi;
                w * (1.0 - 2.0 * r2) / sqrt_clamped(1.0 - r2)
            })
            .sum();
        (1.0 + sum) / self.n0 as f64
    }

    pub fn h(&self, xi: f64) -> f64 {
        let sum: f64 = self
            .terms
            .iter()
            .map(|&(c, w)| w * c * c / sqrt_clamped(1.0 - c * c * xi * xi))
            .sum();
        sum / self.n0 as f64
    }

    /// Taylor coefficients `chi(x0 + t) = sum_m coef_m t^m` up to `order`.
    /// Returns `None` if some square root is singular at `x0`.
    pub fn taylor(&self, x0: f64, order: usize) -> Option<Vec<f64>> {
        let len = order + 1;
        let mut g = vec![0.0; len];
        g[0] = 1.0;
        for &(c, w) in &self.terms {
            // 1 - c^2 (x0 + t)^2
            let mut q = vec![0.0; len];
            q[0] = 1.0 - c * c * x0 * x0;
            if q[0] <= 0.0 {
                return None;
            }
            if len > 1 {
                q[1] = -2.0 * c * c * x0;
            }
            if len > 2 {
                q[2] = -c * c;
            }
            for (gm, sm) in g.iter_mut().zip(series_sqrt(&q)) {
                *gm += w * sm;
            }
        }
        // multiply by (x0 + t) / n0
        let n0 = self.n0 as f64;
        let mut out = vec![0.0; len];
        for m in 0..len {
            out[m] = x0 * g[m] / n0;
            if m > 0 {
                out[m] += g[m - 1] / n0;
            }
        }
        Some(out)
    }
}

fn sqrt_clamped(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

fn series_sqrt(a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; a.len()];
    b[0] = a[0].sqrt();
    for m in 1..a.len() {
        let cross: f64 = (1..m).map(|j| b[j] * b[m - j]).sum();
        b[m] = (a[m] - cross) / (2.0 * b[0]);
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

/// A local extremum of `chi^sigma` on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub xi: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

impl Extremum {
    /// Whether `|chi|` (rather than `chi`) has a local maximum here.
    pub fn is_abs_max(&self) -> bool {
        match self.kind {
            ExtremumKind::Max => self.value > 0.0,
            ExtremumKind::Min => self.value < 0.0,
        }
    }
}

/// `chi^sigma` together with its extrema and interior zeros on `(0, 1)`.
#[derive(Debug, Clone)]
pub struct ChiCurve {
    sigma: SignSequence,
    paired: PairedChi,
    extrema: Vec<Extremum>,
    zeros: Vec<f64>,
}

fn grid() -> impl Iterator<Item = f64> {
    (1..=GRID_POINTS).map(|j| j as f64 / (GRID_POINTS + 1) as f64)
}

/// Points in `(0, 1)` where `f` changes sign, each refined by bisection.
/// `end_sign` is the sign of `f` as `xi -> 1-`.
fn sign_changes<F: Fn(f64) -> f64>(f: &F, end_sign: f64, tol: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for x in grid() {
        let fx = f(x);
        if fx == 0.0 || !fx.is_finite() {
            continue;
        }
        if let Some((lx, lf)) = last {
            if (lf > 0.0) != (fx > 0.0) {
                out.push((bisect(f, lx, x, tol), lf));
            }
        }
        last = Some((x, fx));
    }
    if let Some((lx, lf)) = last {
        if end_sign != 0.0 && (lf > 0.0) != (end_sign > 0.0) {
            out.push((bisect(f, lx, 1.0, tol), lf));
        }
    }
    out
}

impl ChiCurve {
    pub fn new(sigma: &SignSequence) -> Self {
        Self::with_tol(sigma, DEFAULT_TOL)
    }

    pub fn with_tol(sigma: &SignSequence, tol: f64) -> Self {
        let paired = PairedChi::new(sigma);

        let edge = paired.edge_weight();
        let deriv_end = if edge != 0.0 { -edge.signum() } else { paired.deriv(1.0).signum() };
        let deriv = |x: f64| paired.deriv(x);
        let mut extrema = Vec::new();
        for (xi, sign_before) in sign_changes(&deriv, deriv_end, tol) {
            if xi >= 1.0 {
                continue;
            }
            let value = paired.value(xi);
            if value.abs() < ZERO_VALUE_TOL {
                continue;
            }
            let kind = if sign_before > 0.0 { ExtremumKind::Max } else { ExtremumKind::Min };
            extrema.push(Extremum { xi, value, kind });
        }

        let g = |x: f64| paired.g(x);
        let zeros = sign_changes(&g, paired.g(1.0).signum(), tol)
            .into_iter()
            .map(|(x, _)| x)
            .filter(|&x| x < 1.0)
            .collect();

        Self { sigma: sigma.clone(), paired, extrema, zeros }
    }

    pub fn sigma(&self) -> &SignSequence {
        &self.sigma
    }

    pub fn paired(&self) -> &PairedChi {
        &self.paired
    }

    pub fn value(&self, xi: f64) -> f64 {
        self.paired.value(xi)
    }

    pub fn deriv(&self, xi: f64) -> f64 {
        self.paired.deriv(xi)
    }

    pub fn h(&self, xi: f64) -> f64 {
        self.paired.h(xi)
    }

    pub fn extrema(&self) -> &[Extremum] {
        &self.extrema
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    /// Largest value of `|chi|` on `(0, 1]`.
    pub fn max_abs(&self) -> f64 {
        self.extrema
            .iter()
            .map(|e| e.value.abs())
            .fold(self.value(1.0).abs(), f64::max)
    }

    /// All `xi in (0, 1]` with `|chi(xi)| = beta`, ascending.
    pub fn roots(&self, beta: f64, tol: f64) -> Vec<f64> {
        let mut breaks: Vec<f64> = Vec::with_capacity(self.extrema.len() + self.zeros.len() + 2);
        breaks.push(0.0);
        breaks.extend(self.zeros.iter().copied());
        breaks.extend(self.extrema.iter().map(|e| e.xi));
        breaks.push(1.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let f = |x: f64| self.value(x).abs() - beta;
        let exact = 4.0 * f64::EPSILON * beta.max(1.0);
        let mut roots: Vec<f64> = Vec::new();
        for w in breaks.windows(2) {
            let (p, q) = (w[0], w[1]);
            let (fp, fq) = (f(p), f(q));
            if fq.abs() <= exact {
                roots.push(q);
            } else if fp.abs() > exact && (fp > 0.0) != (fq > 0.0) {
                roots.push(bisect(f, p, q, tol));
            }
        }
        roots.dedup_by(|a, b| (*a - *b).abs() <= tol.max(1e-15));
        roots
    }
}

/// Local extrema of `chi^sigma` on `(0, 1)`, located to `tol`.
pub fn chi_extrema(sigma: &SignSequence, tol: f64) -> Vec<Extremum> {
    ChiCurve::with_tol(sigma, tol).extrema
}

/// All `xi in (0, 1]` with `a/K = |chi^sigma(xi)|`.
pub fn solve_xi(sigma: &SignSequence, beta: f64, tol: f64) -> Result<Vec<f64>> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain { value: beta, domain: "a/K > 0" });
    }
    Ok(ChiCurve::with_tol(sigma, tol).roots(beta, tol))
}
