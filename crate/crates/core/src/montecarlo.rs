//! Monte Carlo estimates of the sphere fraction left outside descent cones.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::ModelSet;
use crate::point::Point;
use crate::regularizers::{descent_direction_test, in_descent_cone, Regularizer};
use crate::rng;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (low, high)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
    pub seed: u64,
}

impl VolumeEstimate {
    /// Estimate of `1 − hits/samples`.
    fn complement(hits: u64, samples: u64, seed: u64) -> Self {
        let (lo, hi) = wilson(hits, samples);
        VolumeEstimate {
            estimate: 1.0 - hits as f64 / samples as f64,
            ci_low: 1.0 - hi,
            ci_high: 1.0 - lo,
            samples,
            seed,
        }
    }

    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

fn check_exact(model: &ModelSet, reg: &Regularizer) -> Result<()> {
    reg.check_compatible(model)?;
    if !reg.has_exact_cone() {
        return Err(Error::Unsupported(format!(
            "volume estimates need an exact descent-cone test; {} has none",
            reg.name()
        )));
    }
    Ok(())
}

/// Counts sphere samples accepted by `accept`, chunked by the shared
/// stream layout.
fn count_sphere_hits<F>(model: &ModelSet, samples: u64, seed: u64, workers: usize, accept: F) -> Result<u64>
where
    F: Fn(&Point) -> Result<bool> + Sync,
{
    let counts = rng::map_chunks(samples, workers, |chunk, len| {
        let mut r = rng::stream(seed, chunk);
        let mut hits = 0u64;
        for _ in 0..len {
            if accept(&rng::sphere_point(&mut r, model))? {
                hits += 1;
            }
        }
        Ok(hits)
    })?;
    Ok(counts.into_iter().sum())
}

/// `1 − vol(T_R(Σ) ∩ S)/vol(S)` from uniform sphere samples.
pub fn estimate_au(
    model: &ModelSet,
    reg: &Regularizer,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<VolumeEstimate> {
    check_exact(model, reg)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let hits = count_sphere_hits(model, samples, seed, workers, |z| in_descent_cone(reg, model, z))?;
    Ok(VolumeEstimate::complement(hits, samples, seed))
}

/// Same estimate with acceptance replaced by membership in the secant set,
/// which every descent cone contains.
pub fn estimate_secant_fraction(model: &ModelSet, samples: u64, seed: u64, workers: usize) -> Result<VolumeEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let secant = model.secant();
    let hits = count_sphere_hits(model, samples, seed, workers, |z| secant.contains(z, 1e-12))?;
    Ok(VolumeEstimate::complement(hits, samples, seed))
}

/// Stream offset separating the model-point draws from the sphere draws.
const POINT_STREAM_BASE: u64 = 1 << 40;

/// `1 − sup_x vol(T_R(x) ∩ S)/vol(S)` with the supremum taken over
/// `x_samples` random unit model points, so the value is an upper bound.
/// The same sphere samples are reused for every `x`.
pub fn estimate_anu(
    model: &ModelSet,
    reg: &Regularizer,
    x_samples: u64,
    sphere_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<VolumeEstimate> {
    check_exact(model, reg)?;
    if x_samples == 0 || sphere_samples == 0 {
        return Err(Error::InvalidArgument(
            "x_samples and sphere_samples must be positive".into(),
        ));
    }
    let mut best = 0u64;
    for i in 0..x_samples {
        let mut r = rng::stream(seed, POINT_STREAM_BASE + i);
        let x = rng::model_point(&mut r, model, false)?;
        let x = x.scale(1.0 / x.norm());
        let hits = count_sphere_hits(model, sphere_samples, seed, workers, |z| {
            descent_direction_test(reg, &x, z)
        })?;
        best = best.max(hits);
    }
    Ok(VolumeEstimate::complement(best, sphere_samples, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    /// `w2/w1`.
    pub r2: f64,
    /// `w3/w1`.
    pub r3: f64,
    pub volume: VolumeEstimate,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment3d {
    /// Rows in input order; `rank` 1 is the largest estimate.
    pub rows: Vec<GridRow>,
    /// Input index of the top-ranked row.
    pub best: usize,
    /// Whether the top-ranked row has ratios `(1, 1)`.
    pub uniform_first: bool,
    /// z-score of the top row against the runner-up (independent-sample
    /// variance, hence conservative under common random numbers).
    pub margin_z: Option<f64>,
    /// Whether the `(1, 1)` interval is disjoint from the interval of every
    /// row at sup-distance at least 0.5 in ratio space. `None` without a
    /// `(1, 1)` row.
    pub separated: Option<bool>,
}

/// Ranks weighted ℓ¹ norms `(1, r2, r3)` on 1-sparse vectors of ℝ³ by their
/// estimated volume compliance. All rows share the same sphere samples.
pub fn experiment_3d_1sparse(grid: &[(f64, f64)], samples: u64, seed: u64, workers: usize) -> Result<Experiment3d> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("weight grid is empty".into()));
    }
    if grid
        .iter()
        .any(|&(a, b)| !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()))
    {
        return Err(Error::InvalidArgument(
            "weight ratios must be finite and positive".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let model = ModelSet::sparse(1, 3)?;
    let regs: Vec<Regularizer> = grid
        .iter()
        .map(|&(a, b)| Regularizer::WeightedL1 {
            weights: vec![1.0, a, b],
        })
        .collect();
    let per_chunk = rng::map_chunks(samples, workers, |chunk, len| {
        let mut r = rng::stream(seed, chunk);
        let mut hits = vec![0u64; regs.len()];
        for _ in 0..len {
            let z = rng::sphere_point(&mut r, &model);
            for (h, reg) in hits.iter_mut().zip(&regs) {
                if in_descent_cone(reg, &model, &z)? {
                    *h += 1;
                }
            }
        }
        Ok(hits)
    })?;
    let mut hits = vec![0u64; grid.len()];
    for chunk in per_chunk {
        for (total, h) in hits.iter_mut().zip(chunk) {
            *total += h;
        }
    }
    let volumes: Vec<VolumeEstimate> = hits
        .iter()
        .map(|&h| VolumeEstimate::complement(h, samples, seed))
        .collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    // Higher compliance first: fewer accepted samples. Ties keep input order.
    order.sort_by_key(|&i| hits[i]);
    let mut rows: Vec<GridRow> = grid
        .iter()
        .zip(&volumes)
        .map(|(&(r2, r3), &volume)| GridRow {
            r2,
            r3,
            volume,
            rank: 0,
        })
        .collect();
    for (rank, &i) in order.iter().enumerate() {
        rows[i].rank = rank + 1;
    }
    let best = order[0];
    let margin_z = order.get(1).map(|&j| {
        let n = samples as f64;
        let (p, q) = (hits[best] as f64 / n, hits[j] as f64 / n);
        let se = (p * (1.0 - p) / n + q * (1.0 - q) / n).sqrt();
        if se == 0.0 {
            f64::INFINITY
        } else {
            (q - p) / se
        }
    });
    let uniform = grid.iter().position(|&(a, b)| a == 1.0 && b == 1.0);
    let separated = uniform.map(|u| {
        let vu = volumes[u];
        grid.iter().zip(&volumes).all(|(&(a, b), v)| {
            let far = (a - 1.0).abs().max((b - 1.0).abs()) >= 0.5;
            !far || v.ci_high < vu.ci_low || v.ci_low > vu.ci_high
        })
    });
    Ok(Experiment3d {
        uniform_first: uniform == Some(best),
        rows,
        best,
        margin_z,
        separated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for (s, n) in [(0, 10), (10, 10), (3, 17), (500, 1000)] {
            let (lo, hi) = wilson(s, n);
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{s}/{n}: [{lo}, {hi}]");
        }
        let (lo, hi) = wilson(500, 1000);
        assert!((lo - 0.469).abs() < 1e-3 && (hi - 0.531).abs() < 1e-3);
    }

    #[test]
    fn full_secant_gives_zero() {
        let m = ModelSet::sparse(2, 3).unwrap();
        let e = estimate_au(&m, &Regularizer::l1(3), 1000, 1, 1).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let m = ModelSet::sparse(1, 3).unwrap();
        assert!(estimate_au(&m, &Regularizer::l1(3), 0, 1, 1).is_err());
        assert!(estimate_anu(&m, &Regularizer::l1(3), 0, 10, 1, 1).is_err());
        let atoms = vec![Point::vector(&[1.0, 0.0, 0.0])];
        assert!(estimate_au(&m, &Regularizer::FiniteAtomic { atoms }, 10, 1, 1).is_err());
        assert!(experiment_3d_1sparse(&[], 10, 1, 1).is_err());
    }

    #[test]
    fn deterministic_across_workers() {
        let m = ModelSet::sparse(1, 3).unwrap();
        let a = estimate_au(&m, &Regularizer::l1(3), 20_000, 9, 1).unwrap();
        let b = estimate_au(&m, &Regularizer::l1(3), 20_000, 9, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.estimate > 0.0 && a.estimate < 1.0);
    }

    #[test]
    fn non_uniform_is_at_least_uniform() {
        let m = ModelSet::sparse(1, 3).unwrap();
        let r = Regularizer::l1(3);
        let au = estimate_au(&m, &r, 20_000, 3, 1).unwrap();
        let anu = estimate_anu(&m, &r, 4, 20_000, 3, 1).unwrap();
        assert!(anu.estimate >= au.estimate - au.width() - anu.width());
    }

    #[test]
    fn secant_bounds_compliance() {
        let m = ModelSet::sparse(1, 3).unwrap();
        let au = estimate_au(&m, &Regularizer::l1(3), 20_000, 4, 1).unwrap();
        let sec = estimate_secant_fraction(&m, 20_000, 4, 1).unwrap();
        assert!(au.estimate <= sec.estimate + 2.0 * sec.width());
    }

    #[test]
    fn single_entry_grid() {
        let e = experiment_3d_1sparse(&[(2.0, 0.5)], 1000, 1, 1).unwrap();
        assert_eq!(e.best, 0);
        assert_eq!(e.rows[0].rank, 1);
        assert!(!e.uniform_first);
        assert!(e.separated.is_none());
    }

    #[test]
    fn duplicated_rows_agree() {
        let e = experiment_3d_1sparse(&[(1.0, 1.0), (1.0, 1.0)], 5000, 2, 1).unwrap();
        assert_eq!(e.rows[0].volume, e.rows[1].volume);
    }
}
