//! Two-level sparsity: bounds and oracle for the per-profile compliance
//! `B^{L1,L2}(w)` of ℓ¹ by levels, and the optimal level weights.

use serde::Serialize;

use crate::error::{Error, Result};

/// Lower end `2√3 − 3` of the admissible range of the first-level share.
pub const A_TILDE: f64 = 0.464_101_615_137_754_6;

/// Positive weights of the two levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelsWeights {
    pub w1: f64,
    pub w2: f64,
}

impl LevelsWeights {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        if !(w1 > 0.0 && w2 > 0.0 && w1.is_finite() && w2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "level weights must be finite and positive, got ({w1}, {w2})"
            )));
        }
        Ok(Self { w1, w2 })
    }

    /// Shares `(ν1, ν2)` with `ν1 = 1/(1 + k2·w2²/(k1·w1²))` and `ν1 + ν2 = 1`.
    pub fn shares(&self, k1: usize, k2: usize) -> (f64, f64) {
        let r = (k2 as f64 * self.w2 * self.w2) / (k1 as f64 * self.w1 * self.w1);
        let nu1 = 1.0 / (1.0 + r);
        let nu2 = r / (1.0 + r);
        (nu1, nu2)
    }
}

/// `u / (a(u+1)² + 1)`.
pub fn g1(u: f64, a: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument(format!("g1 needs a in (0, 1], got {a}")));
    }
    if !(u >= 0.0) {
        return Err(Error::InvalidArgument(format!("g1 needs u >= 0, got {u}")));
    }
    Ok(g1_raw(u, a))
}

fn g1_raw(u: f64, a: f64) -> f64 {
    u / (a * (u + 1.0) * (u + 1.0) + 1.0)
}

/// Maximizer `√(1 + 1/a)` of `g1(·; a)` and the maximum `(√(1 + 1/a) − 1)/2`.
pub fn g1_peak(a: f64) -> Result<(f64, f64)> {
    g1(0.0, a)?;
    let u = (1.0 + 1.0 / a).sqrt();
    Ok((u, 0.5 * (u - 1.0)))
}

/// `u / ((a/(1−a))u² + 2)`; zero when the quadratic coefficient overflows.
pub fn g2(u: f64, a: f64) -> f64 {
    let c = a / (1.0 - a);
    let den = c * u * u + 2.0;
    if u == 0.0 || !den.is_finite() {
        0.0
    } else {
        u / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelsBound {
    pub lower: f64,
    pub upper: f64,
    /// The upper bound is attained.
    pub exact: bool,
}

fn check_profile(k1: usize, k2: usize, l1: usize, l2: usize) -> Result<()> {
    if k1 == 0 || k2 == 0 {
        return Err(Error::InvalidArgument("level sparsities must be positive".into()));
    }
    if l1 + l2 == 0 {
        return Err(Error::InvalidArgument("at least one of L1, L2 must be positive".into()));
    }
    Ok(())
}

/// Closed-form bracket `[lower, upper]` on `B^{L1,L2}(w)`.
pub fn b_levels_bound(w: LevelsWeights, k1: usize, k2: usize, l1: usize, l2: usize) -> Result<LevelsBound> {
    check_profile(k1, k2, l1, l2)?;
    let (nu1, nu2) = w.shares(k1, k2);
    let terms = [(l1 as f64 / k1 as f64, nu1), (l2 as f64 / k2 as f64, nu2)];
    let lower = terms.iter().map(|&(u, nu)| g2(u, nu)).fold(0.0, f64::max);
    let upper = terms.iter().map(|&(u, nu)| g1_raw(u, nu)).fold(0.0, f64::max);
    let exact = [(k1, l1, nu1), (k2, l2, nu2)]
        .iter()
        .all(|&(k, l, nu)| nu >= k as f64 / (k + l) as f64);
    Ok(LevelsBound { lower, upper, exact })
}

/// Direct evaluation of `B^{L1,L2}(w)`: the supremum of
/// `(L1β1² + L2β2²) / Σ kᵢ(αᵢ² + βᵢ²)` over `αᵢ ≥ βᵢ ≥ 0` with
/// `Σ kᵢwᵢαᵢ = Σ (kᵢ+Lᵢ)wᵢβᵢ`, sweeping `β1 = 1 − β2` over `grid` points and
/// minimizing over `α` exactly.
pub fn b_levels_oracle(w: LevelsWeights, k1: usize, k2: usize, l1: usize, l2: usize, grid: usize) -> Result<f64> {
    check_profile(k1, k2, l1, l2)?;
    if grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid must have at least 2 points, got {grid}"
        )));
    }
    let (k1f, k2f, l1f, l2f) = (k1 as f64, k2 as f64, l1 as f64, l2 as f64);
    let (w1, w2) = (w.w1, w.w2);
    let energy = k1f * w1 * w1 + k2f * w2 * w2;
    let mut best: f64 = 0.0;
    for i in 0..grid {
        let b1 = i as f64 / (grid - 1) as f64;
        let b2 = 1.0 - b1;
        let lambda = (k1f + l1f) * w1 * b1 + (k2f + l2f) * w2 * b2;
        let alpha_cost = min_alpha_cost(lambda, [k1f, k2f], [w1, w2], [b1, b2], energy);
        let num = l1f * b1 * b1 + l2f * b2 * b2;
        let den = k1f * b1 * b1 + k2f * b2 * b2 + alpha_cost;
        if den > 0.0 {
            best = best.max(num / den);
        }
    }
    Ok(best)
}

/// `min Σ kᵢαᵢ²` subject to `Σ kᵢwᵢαᵢ = λ`, `αᵢ ≥ βᵢ`.
fn min_alpha_cost(lambda: f64, k: [f64; 2], w: [f64; 2], beta: [f64; 2], energy: f64) -> f64 {
    // Unconstrained minimizer αᵢ ∝ wᵢ, feasible if it dominates β.
    let scale = lambda / energy;
    if scale * w[0] >= beta[0] && scale * w[1] >= beta[1] {
        return lambda * lambda / energy;
    }
    // One bound active: clamp αᵢ = βᵢ, the other level absorbs the rest.
    let mut best = f64::INFINITY;
    for (i, j) in [(0, 1), (1, 0)] {
        let aj = (lambda - k[i] * w[i] * beta[i]) / (k[j] * w[j]);
        if aj >= beta[j] * (1.0 - 1e-12) {
            best = best.min(k[i] * beta[i] * beta[i] + k[j] * aj * aj);
        }
    }
    best
}

fn check_regime(k1: usize, k2: usize, n1: usize, n2: usize) -> Result<()> {
    if k1 < 2 || k2 < 2 || n1 < 4 * k1 || n2 < 4 * k2 {
        return Err(Error::InvalidArgument(format!(
            "need k1, k2 >= 2 and n_i >= 4 k_i, got k=({k1},{k2}) n=({n1},{n2})"
        )));
    }
    Ok(())
}

/// Largest `g1(L/k; ν)` over the two integers bracketing `k√(1 + 1/ν)`.
fn best_profile_term(k: usize, n: usize, nu: f64) -> f64 {
    let kf = k as f64;
    let peak = kf * (1.0 + 1.0 / nu).sqrt();
    let cap = (n - 2 * k) as f64;
    [peak.floor(), peak.ceil()]
        .iter()
        .map(|&l| g1_raw(l.clamp(0.0, cap) / kf, nu))
        .fold(0.0, f64::max)
}

/// Worst-profile upper value `H1(a)` with first-level share `a`.
pub fn h1_envelope(a: f64, k1: usize, k2: usize, n1: usize, n2: usize) -> Result<f64> {
    check_regime(k1, k2, n1, n2)?;
    if !(A_TILDE - 1e-12..=1.0 - A_TILDE + 1e-12).contains(&a) {
        return Err(Error::InvalidArgument(format!(
            "share must lie in [{A_TILDE}, {}], got {a}",
            1.0 - A_TILDE
        )));
    }
    Ok(envelope(a, k1, k2, n1, n2))
}

fn envelope(a: f64, k1: usize, k2: usize, n1: usize, n2: usize) -> f64 {
    best_profile_term(k1, n1, a).max(best_profile_term(k2, n2, 1.0 - a))
}

/// Optimal two-level weights with diagnostics against the reference
/// weights `(1/√k1, 1/√k2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelsOptimum {
    pub k1: usize,
    pub k2: usize,
    pub n1: usize,
    pub n2: usize,
    pub nu1_star: f64,
    /// `w2*/w1*`.
    pub ratio: f64,
    pub b_value: f64,
    pub delta_nec: f64,
    /// `delta_nec` of the reference weights.
    pub delta_nec_reference: f64,
    /// `|1 − cos(w*, w_ref)|`.
    pub c1: f64,
    /// `|delta_nec(w*) − delta_nec(w_ref)|`.
    pub c2: f64,
    pub grid_size: usize,
}

/// Minimizes `H1` over a regular grid of `[ã, 1 − ã]`, keeping the lowest
/// share among ties.
pub fn optimal_weights(k1: usize, k2: usize, n1: usize, n2: usize, grid: usize) -> Result<LevelsOptimum> {
    check_regime(k1, k2, n1, n2)?;
    if grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid must have at least 2 points, got {grid}"
        )));
    }
    let hi = 1.0 - A_TILDE;
    let step = (hi - A_TILDE) / (grid - 1) as f64;
    let mut best = (f64::INFINITY, A_TILDE);
    for i in 0..grid {
        let a = if i + 1 == grid { hi } else { A_TILDE + i as f64 * step };
        let h = envelope(a, k1, k2, n1, n2);
        if h < best.0 {
            best = (h, a);
        }
    }
    let (b_value, nu1_star) = best;
    let ratio = ((k1 as f64 / k2 as f64) * (1.0 / nu1_star - 1.0)).sqrt();
    let delta_nec = 1.0 / (1.0 + 2.0 * b_value);

    let reference = LevelsWeights::new(1.0 / (k1 as f64).sqrt(), 1.0 / (k2 as f64).sqrt())?;
    let (nu_ref, _) = reference.shares(k1, k2);
    let delta_nec_reference = 1.0 / (1.0 + 2.0 * envelope(nu_ref, k1, k2, n1, n2));
    let dot = reference.w1 + ratio * reference.w2;
    let cos = dot / ((1.0 + ratio * ratio).sqrt() * (reference.w1.powi(2) + reference.w2.powi(2)).sqrt());
    Ok(LevelsOptimum {
        k1,
        k2,
        n1,
        n2,
        nu1_star,
        ratio,
        b_value,
        delta_nec,
        delta_nec_reference,
        c1: (1.0 - cos).abs(),
        c2: (delta_nec - delta_nec_reference).abs(),
        grid_size: grid,
    })
}

/// `optimal_weights` for every `kmin ≤ k1, k2 ≤ kmax` with `nᵢ = factor·kᵢ`,
/// in row-major `(k1, k2)` order.
pub fn sweep_levels(
    kmin: usize,
    kmax: usize,
    factor: usize,
    grid: usize,
    workers: usize,
) -> Result<Vec<LevelsOptimum>> {
    if kmin > kmax {
        return Err(Error::InvalidArgument(format!("empty range {kmin}..={kmax}")));
    }
    let pairs: Vec<(usize, usize)> = (kmin..=kmax).flat_map(|a| (kmin..=kmax).map(move |b| (a, b))).collect();
    crate::rng::map_items(&pairs, workers, |&(k1, k2)| {
        optimal_weights(k1, k2, factor * k1, factor * k2, grid)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_tilde_value() {
        assert!((A_TILDE - (2.0 * 3f64.sqrt() - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn g1_examples() {
        let (u, v) = g1_peak(0.5).unwrap();
        assert!((u - 3f64.sqrt()).abs() < 1e-15);
        assert!((v - (3f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((g1(u, 0.5).unwrap() - v).abs() < 1e-15);
        assert_eq!(g1(0.0, 0.3).unwrap(), 0.0);
        let s = 2f64.sqrt();
        assert!((g1(s, 1.0).unwrap() - (s - 1.0) / 2.0).abs() < 1e-15);
        assert!(g1(1.0, 0.0).is_err());
        assert!(g1(1.0, 1.5).is_err());
    }

    #[test]
    fn bound_examples() {
        let w = LevelsWeights::new(1.0, 1.0).unwrap();
        let b = b_levels_bound(w, 2, 2, 2, 2).unwrap();
        assert!((b.lower - 1.0 / 3.0).abs() < 1e-15 && (b.upper - 1.0 / 3.0).abs() < 1e-15);
        assert!(b.exact);
        let b = b_levels_bound(w, 2, 2, 3, 0).unwrap();
        assert!((b.upper - 4.0 / 11.0).abs() < 1e-15);
        assert!(b_levels_bound(w, 2, 2, 0, 0).is_err());
    }

    #[test]
    fn oracle_examples() {
        let w = LevelsWeights::new(1.0, 1.0).unwrap();
        let o = b_levels_oracle(w, 2, 2, 2, 2, 10_000).unwrap();
        assert!((o - 1.0 / 3.0).abs() < 1e-5);
        let a = b_levels_oracle(LevelsWeights::new(1.0, 2.0).unwrap(), 2, 3, 4, 1, 2001).unwrap();
        let b = b_levels_oracle(LevelsWeights::new(2.0, 1.0).unwrap(), 3, 2, 1, 4, 2001).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(b_levels_oracle(w, 2, 2, 1, 1, 1).is_err());
    }

    #[test]
    fn envelope_examples() {
        let h = h1_envelope(0.5, 2, 2, 8, 8).unwrap();
        assert!((h - 4.0 / 11.0).abs() < 1e-15);
        assert!(h <= (3f64.sqrt() - 1.0) / 2.0);
        for a in [0.47, 0.5, 0.52] {
            let x = h1_envelope(a, 3, 3, 12, 12).unwrap();
            let y = h1_envelope(1.0 - a, 3, 3, 12, 12).unwrap();
            assert!((x - y).abs() < 1e-15);
        }
        assert!(h1_envelope(0.3, 2, 2, 8, 8).is_err());
        assert!(h1_envelope(0.5, 1, 2, 8, 8).is_err());
    }

    #[test]
    fn outside_range_lower_profile_exceeds_half_peak() {
        let target = (3f64.sqrt() - 1.0) / 2.0;
        for a in [A_TILDE - 1e-3, 1.0 - A_TILDE + 1e-3] {
            let h2 = g2(2.0, a).max(g2(2.0, 1.0 - a));
            assert!(h2 > target);
        }
    }

    #[test]
    fn lower_bound_overflow_guard() {
        assert_eq!(g2(1.0, 1.0), 0.0);
    }

    #[test]
    fn optimum_for_equal_levels() {
        let o = optimal_weights(2, 2, 8, 8, 100_001).unwrap();
        assert!(o.c1 <= 1e-5, "{o:?}");
        assert!(o.c2 <= 5e-3, "{o:?}");
        assert!((o.delta_nec - 1.0 / (1.0 + 2.0 * o.b_value)).abs() < 1e-15);
        let back = ((2.0 / 2.0) * (1.0 / o.nu1_star - 1.0)).sqrt();
        assert_eq!(o.ratio, back);
    }

    #[test]
    fn optimum_beats_reference() {
        let o = optimal_weights(5, 20, 20, 80, 100_001).unwrap();
        assert!(o.delta_nec >= o.delta_nec_reference - 1e-12);
    }

    #[test]
    fn swapping_levels_inverts_ratio() {
        let a = optimal_weights(3, 5, 12, 20, 100_001).unwrap();
        let b = optimal_weights(5, 3, 20, 12, 100_001).unwrap();
        assert!((a.ratio * b.ratio - 1.0).abs() < 1e-3, "{} {}", a.ratio, b.ratio);
    }
}
