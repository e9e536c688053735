//! Privacy calibration for the three mechanisms.
//!
//! Randomized response is amplified by shuffling; the closed-form bound is
//! only valid for `eps0 ≤ ln(n / (8 ln(2/δ)) − 1)`. A numeric accountant over
//! the dominating pair of the shuffled mechanism is provided as well, since it
//! is both tighter and valid everywhere.

use alloc::format;
use alloc::vec::Vec;

use crate::math::{ceil, exp, expm1, floor, lgamma, ln, ln_1p, sqrt};
use crate::{Error, Result};

const EPS0_TOL: f64 = 1e-9;

/// Target `(ε, δ)` for edge differential privacy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    eps: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::param(format!("eps must be positive and finite, got {eps}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::param(format!("delta must lie in (0, 1], got {delta}")));
        }
        Ok(PrivacyBudget { eps, delta })
    }

    /// `δ = n⁻²`.
    pub fn with_default_delta(eps: f64, n: usize) -> Result<Self> {
        let n = n as f64;
        Self::new(eps, 1.0 / (n * n))
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Local randomized-response budget and the corresponding flip probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrLocalParams {
    eps0: f64,
    mu: f64,
}

impl RrLocalParams {
    pub fn from_eps0(eps0: f64) -> Result<Self> {
        Ok(RrLocalParams {
            eps0,
            mu: rr_mu_from_eps0(eps0)?,
        })
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Signal scale `1 − 2μ` of the perturbed adjacency.
    pub fn c(&self) -> f64 {
        1.0 - 2.0 * self.mu
    }

    /// Largest entry variance `μ(1 − μ)` of the perturbation.
    pub fn v_max(&self) -> f64 {
        self.mu * (1.0 - self.mu)
    }
}

/// `μ = 1/(e^{ε₀} + 1)`.
pub fn rr_mu_from_eps0(eps0: f64) -> Result<f64> {
    if !(eps0 >= 0.0) {
        return Err(Error::param(format!("eps0 must be nonnegative, got {eps0}")));
    }
    // written as e^{-ε₀}/(1 + e^{-ε₀}) so large ε₀ does not overflow
    let t = exp(-eps0);
    Ok(t / (1.0 + t))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

/// Upper end of the region where the closed-form amplification bound holds.
///
/// Returns `-inf` when the region is empty.
pub fn shuffle_validity_limit(n: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let inner = n as f64 / (8.0 * ln(2.0 / delta)) - 1.0;
    Ok(if inner > 0.0 { ln(inner) } else { f64::NEG_INFINITY })
}

/// The closed-form amplification bound, evaluated without the validity check.
pub fn shuffle_eps_bound_unchecked(eps0: f64, n: usize, delta: f64) -> f64 {
    let nf = n as f64;
    let a = expm1(eps0);
    let spread = 4.0 * sqrt(2.0 * ln(4.0 / delta)) / sqrt((exp(eps0) + 1.0) * nf) + 4.0 / nf;
    ln_1p(a * spread)
}

/// `ε` certified for shuffled RR with local budget `eps0` on `n` nodes.
pub fn shuffle_eps_bound(eps0: f64, n: usize, delta: f64) -> Result<f64> {
    if !(eps0 >= 0.0) {
        return Err(Error::param(format!("eps0 must be nonnegative, got {eps0}")));
    }
    if n < 2 {
        return Err(Error::param("shuffling needs at least two nodes"));
    }
    let limit = shuffle_validity_limit(n, delta)?;
    if eps0 > limit {
        return Err(Error::Calibration {
            reason: format!(
                "eps0 = {eps0} violates eps0 <= ln(n/(8 ln(2/delta)) - 1) = {limit} (n = {n}, delta = {delta})"
            ),
            max_achievable_eps: None,
        });
    }
    Ok(shuffle_eps_bound_unchecked(eps0, n, delta))
}

/// Largest `eps0` whose closed-form bound does not exceed `target.eps()`.
///
/// Bisection to `1e-9` in `eps0`; the result is re-checked forward.
pub fn invert_shuffle_bound(target: PrivacyBudget, n: usize) -> Result<RrLocalParams> {
    if n < 2 {
        return Err(Error::param("shuffling needs at least two nodes"));
    }
    let delta = target.delta();
    let limit = shuffle_validity_limit(n, delta)?;
    if limit < 0.0 {
        return Err(Error::Calibration {
            reason: format!("closed-form validity region is empty for n = {n}, delta = {delta}"),
            max_achievable_eps: None,
        });
    }
    let max_eps = shuffle_eps_bound_unchecked(limit, n, delta);
    if target.eps() > max_eps {
        return Err(Error::Calibration {
            reason: format!(
                "eps = {} exceeds what the closed-form bound certifies within its validity region (n = {n}, delta = {delta})",
                target.eps()
            ),
            max_achievable_eps: Some(max_eps),
        });
    }
    let (mut lo, mut hi) = (0.0, limit);
    while hi - lo > EPS0_TOL {
        let mid = 0.5 * (lo + hi);
        if shuffle_eps_bound_unchecked(mid, n, delta) <= target.eps() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if shuffle_eps_bound(lo, n, delta)? > target.eps() {
        return Err(Error::contract("bisection result failed forward verification"));
    }
    RrLocalParams::from_eps0(lo)
}

/// Dominating pair `(P0, P1)` for shuffled RR on `n` nodes.
///
/// With `C ~ Bin(n−2, 2/(e^{ε₀}+1))`, `A | C ~ Bin(C, 1/2)` and
/// `Δ ~ Bern(e^{ε₀}/(e^{ε₀}+1))`, `P0` is the law of `(A+Δ, C−A+1−Δ)` and
/// `P1` that of `(A+1−Δ, C−A+Δ)`. An outcome is determined by `(C, x)`.
#[derive(Debug, Clone)]
pub struct DominatingPair {
    n: usize,
    eps0: f64,
    ln_fact: Vec<f64>,
}

/// One outcome with its probability under each distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMass {
    pub x: usize,
    pub y: usize,
    pub p0: f64,
    pub p1: f64,
}

// Terms below e^-80 are skipped; their total is charged to δ explicitly.
const LOG_NEGLIGIBLE: f64 = -80.0;

impl DominatingPair {
    pub fn new(n: usize, eps0: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("dominating pair needs n >= 2"));
        }
        if !(eps0 >= 0.0 && eps0.is_finite()) {
            return Err(Error::param(format!("eps0 must be finite and nonnegative, got {eps0}")));
        }
        let mut ln_fact = Vec::with_capacity(n);
        ln_fact.push(0.0);
        for i in 1..n {
            ln_fact.push(if i < 64 {
                ln_fact[i - 1] + ln(i as f64)
            } else {
                lgamma(i as f64 + 1.0)
            });
        }
        Ok(DominatingPair { n, eps0, ln_fact })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    fn ln_choose(&self, m: usize, j: usize) -> f64 {
        self.ln_fact[m] - self.ln_fact[j] - self.ln_fact[m - j]
    }

    /// `ln Pr[Bin(m, p) = j]` given `ln p` and `ln(1−p)`.
    fn ln_binom(&self, m: usize, j: usize, ln_p: f64, ln_q: f64) -> f64 {
        let mut v = self.ln_choose(m, j);
        if j > 0 {
            v += j as f64 * ln_p;
        }
        if m > j {
            v += (m - j) as f64 * ln_q;
        }
        v
    }

    /// Visits every outcome `(C, x)` with non-negligible mass and returns an
    /// upper bound on the mass of the outcomes that were skipped.
    fn for_each_outcome(&self, mut f: impl FnMut(usize, usize, f64, f64)) -> f64 {
        let trials = self.n - 2;
        // Pr[C-coin] = 2/(e^ε₀+1) = 2μ, Pr[Δ = 1] = 1 − μ
        let ln_mu = -ln_1p(exp(self.eps0)); // ln μ
        let ln_one_minus_mu = -ln_1p(exp(-self.eps0));
        let ln_c_p = core::f64::consts::LN_2 + ln_mu;
        let ln_c_q = ln_1p(-2.0 * exp(ln_mu)); // ln(1 − 2μ) = ln tanh(ε₀/2)
        let (ln_d0, ln_d1) = (ln_mu, ln_one_minus_mu);
        let half = -core::f64::consts::LN_2;

        // Hoeffding: Pr[Bin(m, p) = j] ≤ exp(−2 (j − mp)² / m)
        let window = |m: usize, mean: f64| -> (usize, usize) {
            let w = sqrt(-LOG_NEGLIGIBLE * m as f64 / 2.0) + 1.0;
            let lo = floor(mean - w).max(0.0) as usize;
            let hi = (ceil(mean + w) as usize).min(m);
            (lo, hi)
        };
        let c_mean = trials as f64 * exp(ln_c_p);
        let (c_lo, c_hi) = if ln_c_q == f64::NEG_INFINITY {
            (trials, trials)
        } else {
            window(trials, c_mean)
        };
        let mut skipped_terms = (trials + 1 - (c_hi - c_lo + 1)) as f64;

        for c in c_lo..=c_hi {
            let ln_pc = if ln_c_q == f64::NEG_INFINITY {
                0.0
            } else {
                self.ln_binom(trials, c, ln_c_p, ln_c_q)
            };
            let (a_lo, a_hi) = window(c, c as f64 / 2.0);
            skipped_terms += (c + 1 - (a_hi - a_lo + 1)) as f64;
            // x ranges over a_lo..=a_hi+1 so both b(x) and b(x−1) are covered
            for x in a_lo..=(a_hi + 1) {
                let b_x = if x <= a_hi && x >= a_lo {
                    self.ln_binom(c, x, half, half)
                } else {
                    f64::NEG_INFINITY
                };
                let b_xm1 = if x > a_lo && x - 1 <= a_hi {
                    self.ln_binom(c, x - 1, half, half)
                } else {
                    f64::NEG_INFINITY
                };
                let lp0 = ln_pc + log_add(b_x + ln_d0, b_xm1 + ln_d1);
                let lp1 = ln_pc + log_add(b_xm1 + ln_d0, b_x + ln_d1);
                f(c, x, lp0, lp1);
            }
        }
        // each skipped (C, A) cell carries at most e^-80 mass under either law
        // (C tail: Hoeffding; A tail: same), counted twice for the Δ split
        2.0 * skipped_terms * exp(LOG_NEGLIGIBLE)
    }

    /// All outcomes with both probabilities; intended for small `n`.
    pub fn masses(&self) -> Vec<PairMass> {
        let mut out = Vec::new();
        self.for_each_outcome(|c, x, lp0, lp1| {
            out.push(PairMass {
                x,
                y: c + 1 - x,
                p0: exp(lp0),
                p1: exp(lp1),
            });
        });
        out
    }

    /// `H_α(P0 ‖ P1) = Σ [P0 − α P1]₊`, clamped to `[0, 1]`.
    pub fn hockey_stick_delta(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0) {
            return Err(Error::param(format!("alpha must be nonnegative, got {alpha}")));
        }
        if alpha == f64::INFINITY {
            return Ok(0.0);
        }
        let ln_alpha = ln(alpha);
        let mut total = 0.0;
        let slack = self.for_each_outcome(|_, _, lp0, lp1| {
            let shifted = lp1 + ln_alpha;
            if lp0 == f64::NEG_INFINITY || shifted >= lp0 {
                return;
            }
            // P0 · (1 − αP1/P0)
            total += -exp(lp0) * expm1(shifted - lp0);
        });
        Ok((total + slack).clamp(0.0, 1.0))
    }

    /// Smallest `ε` with `H_{e^ε} ≤ delta`, to within `1e-9`.
    pub fn eps_for_delta(&self, delta: f64) -> Result<f64> {
        check_delta(delta)?;
        if self.hockey_stick_delta(1.0)? <= delta {
            return Ok(0.0);
        }
        // the likelihood ratio never exceeds e^{ε₀}, so H_{e^{ε₀}} = 0
        let (mut lo, mut hi) = (0.0, self.eps0);
        while hi - lo > EPS0_TOL {
            let mid = 0.5 * (lo + hi);
            if self.hockey_stick_delta(exp(mid))? <= delta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + ln_1p(exp(lo - hi))
}

/// Which accountant certifies a randomized-response calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Accountant {
    /// Closed-form amplification bound, falling back to the local guarantee.
    #[default]
    ClosedForm,
    /// Numerical hockey-stick profile of the dominating pair.
    Numeric,
}

/// How a calibrated `eps0` is justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationRoute {
    /// Closed-form shuffle amplification.
    Amplified,
    /// Randomized response alone is `eps0`-DP; shuffling is post-processing.
    Local,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrCalibration {
    pub params: RrLocalParams,
    pub route: CalibrationRoute,
    /// The ε the route actually certifies (never above the target).
    pub certified_eps: f64,
}

/// Picks the least noisy `μ` that some accountant certifies for `budget`.
///
/// Closed form: inside the validity region the bound is inverted; beyond it,
/// the larger of the region's edge and the local budget `ε` is used.
pub fn calibrate_rr_shuffle(
    budget: PrivacyBudget,
    n: usize,
    accountant: Accountant,
) -> Result<RrCalibration> {
    match accountant {
        Accountant::ClosedForm => match invert_shuffle_bound(budget, n) {
            Ok(params) => Ok(RrCalibration {
                certified_eps: shuffle_eps_bound(params.eps0(), n, budget.delta())?,
                params,
                route: CalibrationRoute::Amplified,
            }),
            Err(Error::Calibration { .. }) => {
                let limit = shuffle_validity_limit(n, budget.delta())?;
                if limit > budget.eps() {
                    let certified = shuffle_eps_bound(limit, n, budget.delta())?;
                    Ok(RrCalibration {
                        params: RrLocalParams::from_eps0(limit)?,
                        route: CalibrationRoute::Amplified,
                        certified_eps: certified,
                    })
                } else {
                    Ok(RrCalibration {
                        params: RrLocalParams::from_eps0(budget.eps())?,
                        route: CalibrationRoute::Local,
                        certified_eps: budget.eps(),
                    })
                }
            }
            Err(e) => Err(e),
        },
        Accountant::Numeric => {
            let target = exp(budget.eps());
            let delta_at = |eps0: f64| -> Result<f64> {
                DominatingPair::new(n, eps0)?.hockey_stick_delta(target)
            };
            // ε₀ = ε is always certified; grow the bracket until it fails
            let mut lo = budget.eps();
            let mut hi = lo + 1.0;
            while delta_at(hi)? <= budget.delta() {
                lo = hi;
                hi = 2.0 * hi + 1.0;
                if hi > 700.0 {
                    break;
                }
            }
            while hi - lo > EPS0_TOL {
                let mid = 0.5 * (lo + hi);
                if delta_at(mid)? <= budget.delta() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(RrCalibration {
                params: RrLocalParams::from_eps0(lo)?,
                route: CalibrationRoute::Numeric,
                certified_eps: budget.eps(),
            })
        }
    }
}

/// Noise design for the projected Gaussian sketch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProjectionParams {
    pub m: usize,
    pub sigma_bar: f64,
    /// High-probability bound on the squared row norm of the projection.
    pub b: f64,
}

/// `B = 1 + 2√(ln(n/δ)/m) + (2/m) ln(n/δ)` and the minimal
/// `σ̄ = √B/ε · √(2(ε + ln(1/(2δ))))`.
pub fn gaussian_projection_sigma(
    budget: PrivacyBudget,
    n: usize,
    m: usize,
) -> Result<GaussianProjectionParams> {
    if m == 0 {
        return Err(Error::param("projection dimension m must be >= 1"));
    }
    if budget.delta() >= 1.0 {
        return Err(Error::param("delta must be < 1 for the Gaussian mechanism"));
    }
    let eps = budget.eps();
    let delta = budget.delta();
    let log_term = ln(n as f64 / delta);
    let mf = m as f64;
    let b = 1.0 + 2.0 * sqrt(log_term / mf) + 2.0 / mf * log_term;
    let inner = eps + ln(1.0 / (2.0 * delta));
    if inner <= 0.0 {
        // the noise design has no solution for this (ε, δ)
        return Err(Error::Calibration {
            reason: format!("eps + ln(1/(2 delta)) must be positive, got {inner}"),
            max_achievable_eps: None,
        });
    }
    Ok(GaussianProjectionParams {
        m,
        sigma_bar: sqrt(b) / eps * sqrt(2.0 * inner),
        b,
    })
}

/// Noise design for the noisy power method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMethodParams {
    pub iters: usize,
    /// Frobenius sensitivity of one multiply by the adjacency matrix.
    pub sensitivity: f64,
    pub sigma_bar: f64,
}

/// `σ̄ = √(4N ln(1/δ)) / ε` with unit sensitivity.
pub fn power_method_sigma(budget: PrivacyBudget, iters: usize) -> Result<PowerMethodParams> {
    if iters == 0 {
        return Err(Error::param("iteration count N must be >= 1"));
    }
    if budget.delta() >= 1.0 {
        return Err(Error::param("delta must be < 1 for the Gaussian mechanism"));
    }
    Ok(PowerMethodParams {
        iters,
        sensitivity: 1.0,
        sigma_bar: sqrt(4.0 * iters as f64 * ln(1.0 / budget.delta())) / budget.eps(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mu_examples() {
        assert_eq!(rr_mu_from_eps0(0.0).unwrap(), 0.5);
        let mu = rr_mu_from_eps0(2.2).unwrap();
        assert!((mu - 0.09975).abs() < 1e-5);
        assert!((mu - 0.1).abs() < 5e-4);
        assert!(rr_mu_from_eps0(50.0).unwrap() < 1e-20);
        assert!(rr_mu_from_eps0(-0.1).is_err());
        for &e in &[0.0, 0.3, 1.0, 2.2, 7.5] {
            let mu = rr_mu_from_eps0(e).unwrap();
            assert!((mu * (exp(e) + 1.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shuffle_bound_zero_at_zero() {
        assert_eq!(shuffle_eps_bound(0.0, 1000, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn shuffle_bound_monotone() {
        let delta = 1e-6;
        let mut prev = -1.0;
        for i in 0..=20 {
            let e = shuffle_eps_bound(0.05 * i as f64, 5000, delta).unwrap();
            assert!(e > prev);
            prev = e;
        }
        let mut prev = f64::INFINITY;
        for &n in &[1000, 2000, 5000, 10_000, 100_000] {
            let e = shuffle_eps_bound(0.5, n, delta).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn shuffle_bound_rejects_outside_region() {
        let err = shuffle_eps_bound(2.2, 1000, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Calibration { .. }));
        assert!(shuffle_eps_bound_unchecked(2.2, 1000, 1e-6).is_finite());
    }

    #[test]
    fn inversion_round_trip() {
        let n = 5000;
        let delta = 1e-6;
        let target = shuffle_eps_bound(1.0, n, delta).unwrap();
        let p = invert_shuffle_bound(PrivacyBudget::new(target, delta).unwrap(), n).unwrap();
        assert!((p.eps0() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn inversion_infeasible_for_tiny_graph() {
        let b = PrivacyBudget::new(0.01, 1e-6).unwrap();
        let err = invert_shuffle_bound(b, 20).unwrap_err();
        assert!(matches!(err, Error::Calibration { max_achievable_eps: None, .. }));
    }

    #[test]
    fn budget_validation() {
        assert!(PrivacyBudget::new(0.0, 0.1).is_err());
        assert!(PrivacyBudget::new(1.0, 0.0).is_err());
        assert!(PrivacyBudget::new(1.0, 1.5).is_err());
        assert!(PrivacyBudget::new(1.0, 1.0).is_ok());
        let b = PrivacyBudget::with_default_delta(1.0, 100).unwrap();
        assert_eq!(b.delta(), 1e-4);
    }

    /// Enumerates `(C, A, Δ)` directly with plain products.
    fn brute_force_delta(n: usize, eps0: f64, alpha: f64) -> f64 {
        let choose = |m: usize, j: usize| -> f64 {
            (1..=j).map(|i| (m + 1 - i) as f64 / i as f64).product()
        };
        let pc = 2.0 / (exp(eps0) + 1.0);
        let pd = exp(eps0) / (exp(eps0) + 1.0);
        let m = n - 2;
        let mut p0 = vec![vec![0.0; n + 1]; n + 1];
        let mut p1 = vec![vec![0.0; n + 1]; n + 1];
        for c in 0..=m {
            let wc = choose(m, c) * pc.powi(c as i32) * (1.0 - pc).powi((m - c) as i32);
            for a in 0..=c {
                let wa = choose(c, a) * 0.5f64.powi(c as i32);
                for d in 0..=1usize {
                    let wd = if d == 1 { pd } else { 1.0 - pd };
                    let w = wc * wa * wd;
                    p0[a + d][c - a + 1 - d] += w;
                    p1[a + 1 - d][c - a + d] += w;
                }
            }
        }
        let mut total = 0.0;
        for x in 0..=n {
            for y in 0..=n {
                total += (p0[x][y] - alpha * p1[x][y]).max(0.0);
            }
        }
        total
    }

    #[test]
    fn three_node_profile_matches_enumeration() {
        for &eps0 in &[0.0, 0.5, 1.0, 2.2] {
            let pair = DominatingPair::new(3, eps0).unwrap();
            for &alpha in &[0.0, 0.3, 1.0, 1.5, exp(0.5), exp(1.0), 5.0] {
                let got = pair.hockey_stick_delta(alpha).unwrap();
                let want = brute_force_delta(3, eps0, alpha);
                assert!((got - want).abs() <= 1e-12, "eps0 {eps0} alpha {alpha}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn small_pair_matches_enumeration() {
        for &n in &[4, 7, 12] {
            let pair = DominatingPair::new(n, 1.3).unwrap();
            for &alpha in &[1.0, 1.7, 3.0] {
                let got = pair.hockey_stick_delta(alpha).unwrap();
                assert!((got - brute_force_delta(n, 1.3, alpha)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn masses_sum_to_one() {
        for &(n, eps0) in &[(3, 1.0), (50, 0.5), (600, 2.2)] {
            let pair = DominatingPair::new(n, eps0).unwrap();
            let masses = pair.masses();
            let s0: f64 = masses.iter().map(|m| m.p0).sum();
            let s1: f64 = masses.iter().map(|m| m.p1).sum();
            assert!((s0 - 1.0).abs() < 1e-10 && (s1 - 1.0).abs() < 1e-10);
            assert!(masses.iter().all(|m| m.x + m.y <= n - 1));
        }
    }

    #[test]
    fn profile_endpoints_and_monotonicity() {
        let pair = DominatingPair::new(200, 1.0).unwrap();
        assert!((pair.hockey_stick_delta(0.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pair.hockey_stick_delta(f64::INFINITY).unwrap(), 0.0);
        assert!(pair.hockey_stick_delta(exp(1.0)).unwrap() < 1e-20);
        let mut prev = 1.0;
        for i in 0..40 {
            let d = pair.hockey_stick_delta(exp(0.025 * i as f64)).unwrap();
            assert!(d <= prev + 1e-15);
            prev = d;
        }
        assert!(pair.hockey_stick_delta(-1.0).is_err());
    }

    #[test]
    fn delta_at_one_is_total_variation() {
        let pair = DominatingPair::new(30, 1.5).unwrap();
        let tv: f64 = pair.masses().iter().map(|m| (m.p0 - m.p1).abs()).sum::<f64>() / 2.0;
        assert!((pair.hockey_stick_delta(1.0).unwrap() - tv).abs() < 1e-12);
    }

    #[test]
    fn numeric_accountant_is_tighter_than_closed_form() {
        let n = 2000;
        let delta = 1.0 / (n as f64 * n as f64);
        let eps0 = 1.0;
        let closed = shuffle_eps_bound(eps0, n, delta).unwrap();
        let numeric = DominatingPair::new(n, eps0).unwrap().eps_for_delta(delta).unwrap();
        assert!(numeric <= closed);
    }

    #[test]
    fn calibration_routes() {
        let n = 600;
        let delta = 1.0 / 360_000.0;
        // inside the region
        let c = calibrate_rr_shuffle(PrivacyBudget::new(0.5, delta).unwrap(), n, Accountant::ClosedForm)
            .unwrap();
        assert_eq!(c.route, CalibrationRoute::Amplified);
        assert!((c.certified_eps - 0.5).abs() < 1e-8);
        // between the certified maximum and the region edge
        let c = calibrate_rr_shuffle(PrivacyBudget::new(1.0, delta).unwrap(), n, Accountant::ClosedForm)
            .unwrap();
        assert_eq!(c.route, CalibrationRoute::Amplified);
        assert_eq!(c.params.eps0(), shuffle_validity_limit(n, delta).unwrap());
        assert!(c.certified_eps < 1.0);
        // beyond the region edge RR alone certifies the target
        let c = calibrate_rr_shuffle(PrivacyBudget::new(4.0, delta).unwrap(), n, Accountant::ClosedForm)
            .unwrap();
        assert_eq!(c.route, CalibrationRoute::Local);
        assert_eq!(c.params.eps0(), 4.0);
    }

    #[test]
    fn numeric_calibration_certifies_target() {
        let n = 300;
        let b = PrivacyBudget::with_default_delta(1.0, n).unwrap();
        let c = calibrate_rr_shuffle(b, n, Accountant::Numeric).unwrap();
        assert!(c.params.eps0() >= 1.0);
        let pair = DominatingPair::new(n, c.params.eps0()).unwrap();
        assert!(pair.hockey_stick_delta(exp(1.0)).unwrap() <= b.delta());
    }

    #[test]
    fn gaussian_sigma_limits_and_monotone() {
        let b = PrivacyBudget::new(1.0, 1e-5).unwrap();
        let p = gaussian_projection_sigma(b, 552, 50).unwrap();
        assert!((p.b - 2.907).abs() < 1e-3);
        // m → ∞ drives B to 1 and σ̄ to the plain Gaussian-mechanism scale
        let p = gaussian_projection_sigma(b, 552, usize::MAX / 4).unwrap();
        assert!((p.b - 1.0).abs() < 1e-8);
        let plain = sqrt(2.0 * (1.0 + ln(1.0 / 2e-5)));
        assert!((p.sigma_bar - plain).abs() < 1e-7);
        let mut prev = f64::INFINITY;
        for i in 1..20 {
            let s = gaussian_projection_sigma(PrivacyBudget::new(0.25 * i as f64, 1e-6).unwrap(), 600, 50)
                .unwrap()
                .sigma_bar;
            assert!(s < prev);
            prev = s;
        }
        assert!(gaussian_projection_sigma(PrivacyBudget::new(1.0, 1.0).unwrap(), 10, 5).is_err());
        assert!(gaussian_projection_sigma(b, 10, 0).is_err());
        // large δ with small ε leaves the noise design without a solution
        assert!(matches!(
            gaussian_projection_sigma(PrivacyBudget::new(0.05, 0.9).unwrap(), 10, 5),
            Err(Error::Calibration { .. })
        ));
    }

    #[test]
    fn power_sigma_examples() {
        let b = PrivacyBudget::new(2.0, exp(-1.0)).unwrap();
        assert!((power_method_sigma(b, 1).unwrap().sigma_bar - 1.0).abs() < 1e-15);
        let b = PrivacyBudget::new(1.0, 1e-6).unwrap();
        assert!((power_method_sigma(b, 5).unwrap().sigma_bar - 16.62).abs() < 5e-3);
        let s1 = power_method_sigma(b, 1).unwrap().sigma_bar;
        for n in [2usize, 5, 10, 50] {
            let s = power_method_sigma(b, n).unwrap().sigma_bar;
            assert!((s / s1 - sqrt(n as f64)).abs() < 1e-12);
        }
        assert!(power_method_sigma(b, 0).is_err());
    }
}
