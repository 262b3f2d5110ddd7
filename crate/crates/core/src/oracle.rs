//! Brute-force references for the closed forms, and a validation suite that
//! compares them on random instances.

use itertools::Itertools;
use rand::Rng;
use serde::Serialize;

use crate::compliance::{gamma_nec_point, restricted_conditioning, LinearOperator};
use crate::error::{Error, Result};
use crate::levels::{b_levels_bound, b_levels_oracle, LevelsWeights};
use crate::models::{k_support_norm, ModelSet};
use crate::point::Point;
use crate::regularizers::gauge_lp;
use crate::rng;

/// Two-sided bracket on a norm value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBracket {
    /// Value of a feasible decomposition.
    pub upper: f64,
    /// Dual certificate.
    pub lower: f64,
    pub iterations: usize,
}

impl NormBracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.upper + self.lower)
    }
}

/// ℓ² norm of the `k` largest magnitudes: the dual of the model norm.
fn top_k_l2(v: &[f64], k: usize) -> f64 {
    let mut a: Vec<f64> = v.iter().map(|x| x * x).collect();
    a.sort_by(|x, y| y.partial_cmp(x).expect("finite"));
    a.iter().take(k).sum::<f64>().sqrt()
}

/// The model norm of `Sparse(k, n)` from its definition as the smallest
/// `Σ_S ‖v_S‖₂` over decompositions `z = Σ_S v_S` into pieces supported on
/// `k`-subsets, solved by ADMM with a dual certificate.
pub fn sigma_norm_bruteforce(z: &[f64], k: usize, rel_gap: f64, max_iter: usize) -> Result<NormBracket> {
    let n = z.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let scale = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(NormBracket {
            upper: 0.0,
            lower: 0.0,
            iterations: 0,
        });
    }
    let y: Vec<f64> = z.iter().map(|x| x / scale).collect();
    let supports: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    // Each coordinate lies in C(n-1, k-1) supports.
    let cover = supports.iter().filter(|s| s.contains(&0)).count() as f64;
    let m = supports.len() * k;
    let rho = 1.0;
    let (mut v, mut w, mut u) = (vec![0.0f64; m], vec![0.0f64; m], vec![0.0f64; m]);
    let mut best = NormBracket {
        upper: f64::INFINITY,
        lower: 0.0,
        iterations: 0,
    };

    let gather = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (s, sup) in supports.iter().enumerate() {
            for (j, &i) in sup.iter().enumerate() {
                out[i] += x[s * k + j];
            }
        }
        out
    };

    for it in 1..=max_iter {
        for s in 0..supports.len() {
            let block = s * k..(s + 1) * k;
            let norm = block.clone().map(|i| (w[i] - u[i]).powi(2)).sum::<f64>().sqrt();
            let shrink = if norm > 1.0 / rho {
                1.0 - 1.0 / (rho * norm)
            } else {
                0.0
            };
            for i in block {
                v[i] = shrink * (w[i] - u[i]);
            }
        }
        let p: Vec<f64> = v.iter().zip(&u).map(|(a, b)| a + b).collect();
        let ap = gather(&p);
        let r: Vec<f64> = ap.iter().zip(&y).map(|(a, b)| (a - b) / cover).collect();
        for (s, sup) in supports.iter().enumerate() {
            for (j, &i) in sup.iter().enumerate() {
                w[s * k + j] = p[s * k + j] - r[i];
            }
        }
        for i in 0..m {
            u[i] += v[i] - w[i];
        }
        if it % 10 == 0 || it == max_iter {
            let upper: f64 = (0..supports.len())
                .map(|s| w[s * k..(s + 1) * k].iter().map(|x| x * x).sum::<f64>().sqrt())
                .sum();
            let lambda: Vec<f64> = gather(&u).iter().map(|x| -rho * x / cover).collect();
            let dual = top_k_l2(&lambda, k);
            let lower = if dual > 0.0 {
                y.iter().zip(&lambda).map(|(a, b)| a * b).sum::<f64>().abs() / dual
            } else {
                0.0
            };
            best.upper = best.upper.min(upper);
            best.lower = best.lower.max(lower);
            best.iterations = it;
            if best.upper - best.lower <= rel_gap * best.upper {
                break;
            }
        }
    }
    Ok(NormBracket {
        upper: best.upper * scale,
        lower: best.lower * scale,
        iterations: best.iterations,
    })
}

/// Outcome of one family of randomized comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: u64,
    pub violations: u64,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }
}

/// Runs `cases` random comparisons, each reporting an error against a
/// tolerance; deterministic in `(seed, stream)`.
fn run_check<F>(
    name: &str,
    cases: u64,
    tolerance: f64,
    seed: u64,
    stream: u64,
    workers: usize,
    case: F,
) -> Result<CheckOutcome>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64> + Sync,
{
    let errors = rng::map_chunks(cases, workers, |chunk, len| {
        let mut r = rng::stream(seed ^ stream.rotate_left(32), chunk);
        (0..len).map(|_| case(&mut r)).collect::<Result<Vec<f64>>>()
    })?;
    let errors: Vec<f64> = errors.into_iter().flatten().collect();
    Ok(CheckOutcome {
        name: name.to_string(),
        cases,
        violations: errors.iter().filter(|e| !(**e <= tolerance)).count() as u64,
        max_error: errors.iter().cloned().fold(0.0, f64::max),
        tolerance,
    })
}

/// Error of the closed-form model norm against the decomposition oracle on
/// a random `z` with `n ≤ 6`, `k ≤ 3`.
pub fn sigma_norm_case<R: Rng>(r: &mut R) -> Result<f64> {
    let n = r.gen_range(1..=6);
    let k = r.gen_range(1..=n.min(3));
    let z = rng::gaussian_vec(r, n);
    let fast = k_support_norm(&z, k);
    let slow = sigma_norm_bruteforce(&z, k, 1e-10, 200_000)?;
    Ok((fast - slow.mid()).abs())
}

/// Relative error between the enumerated conditioning of `I − Π_z` and the
/// secant-projection closed form, net of the `O(ε·γ)` error that rounding the
/// entries of `I − Π_z` already puts into the enumerated value.
pub fn conditioning_case<R: Rng>(r: &mut R) -> Result<f64> {
    let k = r.gen_range(1..=2);
    let n = r.gen_range(2 * k + 1..=8);
    let model = ModelSet::sparse(k, n)?;
    let z = rng::gaussian_vec(r, n);
    let enumerated = restricted_conditioning(&model, &LinearOperator::orthogonal_complement(&z)?)?;
    let closed = gamma_nec_point(&model, &Point::Vector(z))?;
    let representation = 8.0 * f64::EPSILON * closed;
    Ok(((enumerated - closed).abs() / closed.max(1.0) - representation).max(0.0))
}

/// Distance of the levels oracle outside the closed-form bracket.
pub fn levels_sandwich_case<R: Rng>(r: &mut R, grid: usize) -> Result<f64> {
    let w = LevelsWeights::new(r.gen_range(0.1..10.0), r.gen_range(0.1..10.0))?;
    let (k1, k2) = (r.gen_range(1..=6), r.gen_range(1..=6));
    let (mut l1, l2) = (r.gen_range(0..=8), r.gen_range(0..=8));
    if l1 + l2 == 0 {
        l1 = 1;
    }
    let bound = b_levels_bound(w, k1, k2, l1, l2)?;
    let o = b_levels_oracle(w, k1, k2, l1, l2, grid)?;
    Ok((bound.lower - o).max(o - bound.upper).max(0.0))
}

/// Error of the atomic gauge with atoms `±eᵢ` against ℓ¹.
pub fn gauge_case<R: Rng>(r: &mut R) -> Result<f64> {
    let n = r.gen_range(1..=8);
    let x = rng::gaussian_vec(r, n);
    let mut atoms = Vec::with_capacity(2 * n);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            atoms.push(Point::Vector(e));
        }
    }
    let g = gauge_lp(&atoms, &Point::Vector(x.clone()))?;
    Ok((g.value - x.iter().map(|v| v.abs()).sum::<f64>()).abs())
}

/// Compares every closed form with its brute-force reference on `cases`
/// random instances per check.
pub fn run_validation(cases: u64, seed: u64, workers: usize) -> Result<ValidationReport> {
    let checks = vec![
        run_check(
            "model_norm_vs_decomposition",
            cases,
            1e-6,
            seed,
            1,
            workers,
            sigma_norm_case,
        )?,
        run_check(
            "conditioning_enumeration_vs_closed_form",
            cases,
            1e-10,
            seed,
            2,
            workers,
            conditioning_case,
        )?,
        run_check("levels_oracle_within_bounds", cases, 1e-6, seed, 3, workers, |r| {
            levels_sandwich_case(r, 10_000)
        })?,
        run_check("gauge_lp_vs_l1", cases, 1e-9, seed, 4, workers, gauge_case)?,
    ];
    Ok(ValidationReport { seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_contains_known_values() {
        let b = sigma_norm_bruteforce(&[1.0, 1.0], 1, 1e-10, 100_000).unwrap();
        assert!(b.lower <= 2.0 + 1e-9 && b.upper >= 2.0 - 1e-9);
        assert!(b.upper - b.lower < 1e-8);
        let b = sigma_norm_bruteforce(&[3.0, 1.0, 0.0], 2, 1e-10, 100_000).unwrap();
        assert!((b.mid() - 10f64.sqrt()).abs() < 1e-7, "{b:?}");
        let b = sigma_norm_bruteforce(&[0.0; 3], 2, 1e-10, 10).unwrap();
        assert_eq!(b.upper, 0.0);
    }

    #[test]
    fn small_suite_passes() {
        let report = run_validation(20, 3, 1).unwrap();
        for c in &report.checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
