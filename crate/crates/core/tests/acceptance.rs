//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::Rng;

use regcomp::compliance::b_sup_estimate;
use regcomp::compliance::{
    b_measure_value, b_star_sparse, compliance_report, d_profile, d_sup_structured, gamma_nec_point,
    restricted_conditioning, rip_rc_convert, witness_on, Conversion, EstimatorSettings,
};
use regcomp::levels::{b_levels_bound, b_levels_oracle, sweep_levels, LevelsWeights};
use regcomp::montecarlo::experiment_3d_1sparse;
use regcomp::oracle::sigma_norm_bruteforce;
use regcomp::{model_norm, rng, LinearOperator, ModelSet, Point, Regularizer};

const SEED: u64 = 20_240_611;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

type Criterion = fn() -> Result<Verdict, regcomp::Error>;

fn criterion_1() -> Result<Verdict, regcomp::Error> {
    let settings = EstimatorSettings::default();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for n in 3..=64 {
        for k in 1..n {
            if 2 * k >= n {
                break;
            }
            for model in [ModelSet::sparse(k, n)?, ModelSet::low_rank_sym(k, n)?] {
                let reg = Regularizer::canonical_for(&model);
                let report = compliance_report(&model, &reg, &settings)?;
                let err = report.delta_suff.map_or(f64::INFINITY, |d| (d - FRAC_1_SQRT_2).abs());
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    Ok(verdict(
        worst <= 1e-12,
        format!("{checked} (model, n) pairs, max |delta_suff - 1/sqrt2| = {worst:.1e}"),
    ))
}

/// Exhaustive maximum of the B measure over `-α 1_{H0} + 1_{H1}` for all
/// disjoint `|H0| = k`, `1 ≤ |H1| ≤ n − k`.
fn exhaustive_witness_max(k: usize, n: usize) -> Result<f64, regcomp::Error> {
    let model = ModelSet::sparse(k, n)?;
    let mut best = 0.0f64;
    for head in (0..n).combinations(k) {
        let rest: Vec<usize> = (0..n).filter(|i| !head.contains(i)).collect();
        for l in 1..=rest.len() {
            for tail in rest.iter().copied().combinations(l) {
                let z = witness_on(&model, &head, &tail)?;
                best = best.max(b_measure_value(&model, &z)?);
            }
        }
    }
    Ok(best)
}

fn sparse_grid() -> Vec<(usize, usize)> {
    (1..=3).flat_map(|k| (2 * k + 1..=12).map(move |n| (k, n))).collect()
}

fn criterion_2() -> Result<Verdict, regcomp::Error> {
    let mut exact_err = 0.0f64;
    let mut overshoot = f64::NEG_INFINITY;
    let mut gap_k1n5 = f64::NAN;
    for (k, n) in sparse_grid() {
        let star = b_star_sparse(k, n)?;
        exact_err = exact_err.max((exhaustive_witness_max(k, n)? - star.b).abs());
        let model = ModelSet::sparse(k, n)?;
        let est = b_sup_estimate(&model, &Regularizer::l1(n), 100_000, SEED, 0)?;
        overshoot = overshoot.max(est - star.b);
        if (k, n) == (1, 5) {
            gap_k1n5 = star.b - est;
        }
    }
    let passed = exact_err <= 1e-12 && overshoot <= 1e-12 && gap_k1n5 <= 5e-3;
    Ok(verdict(
        passed,
        format!(
            "witness max vs B* err {exact_err:.1e}; sampled - B* max {overshoot:.1e}; gap at k=1,n=5 {gap_k1n5:.2e}"
        ),
    ))
}

fn criterion_3() -> Result<Verdict, regcomp::Error> {
    let mut r = rng::stream(SEED, 3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = r.gen_range(1..=2);
        let n = r.gen_range(2 * k + 1..=8);
        let model = ModelSet::sparse(k, n)?;
        let z = rng::gaussian_vec(&mut r, n);
        let enumerated = restricted_conditioning(&model, &LinearOperator::orthogonal_complement(&z)?)?;
        let closed = gamma_nec_point(&model, &Point::Vector(z))?;
        worst = worst.max((enumerated - closed).abs() / closed.abs().max(1.0));
    }
    let gamma = (SQRT_2 + 1.0) / (SQRT_2 - 1.0);
    let forward = (rip_rc_convert(FRAC_1_SQRT_2, Conversion::RipToConditioning)? - gamma).abs();
    let backward = (rip_rc_convert(gamma, Conversion::ConditioningToRip)? - FRAC_1_SQRT_2).abs();
    let passed = worst <= 1e-10 && forward <= 1e-12 * gamma && backward <= 1e-12;
    Ok(verdict(
        passed,
        format!("1000 points, max relative err {worst:.1e}; conversion errs {forward:.1e}, {backward:.1e}"),
    ))
}

fn criterion_4() -> Result<Verdict, regcomp::Error> {
    let mut r = rng::stream(SEED, 4);
    let (mut oracle_err, mut on_model, mut l1_slack) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..1000 {
        let n = r.gen_range(1..=6);
        let k = r.gen_range(1..=n.min(3));
        let model = ModelSet::sparse(k, n)?;
        let z = rng::gaussian_vec(&mut r, n);
        let fast = model_norm(&model, &Point::Vector(z.clone()))?;
        let slow = sigma_norm_bruteforce(&z, k, 1e-10, 200_000)?;
        oracle_err = oracle_err.max((fast - slow.mid()).abs());

        let x = rng::model_point(&mut r, &model, false)?;
        on_model = on_model.max((model_norm(&model, &x)? - x.norm()).abs());

        let l1: f64 = z.iter().map(|v| v.abs()).sum();
        l1_slack = l1_slack.min(fast * fast - l1 * l1 / k as f64);
    }
    let passed = oracle_err <= 1e-6 && on_model <= 1e-9 && l1_slack >= -1e-9;
    Ok(verdict(
        passed,
        format!("oracle err {oracle_err:.1e}; on-model err {on_model:.1e}; min ||v||^2 - ||v||_1^2/k {l1_slack:.2e}"),
    ))
}

fn criterion_5() -> Result<Verdict, regcomp::Error> {
    let (mut sup_err, mut profile_err) = (0.0f64, 0.0f64);
    let mut check = |model: ModelSet, k: usize| -> Result<(), regcomp::Error> {
        let reg = Regularizer::canonical_for(&model);
        sup_err = sup_err.max((d_sup_structured(&model, &reg, usize::MAX)? - 1.0).abs());
        for (l, d) in d_profile(&model, usize::MAX)? {
            profile_err = profile_err.max((d - (l as f64 / k as f64).min(1.0)).abs());
        }
        Ok(())
    };
    for n in 3..=20 {
        for k in (1..n).take_while(|k| 2 * k < n) {
            check(ModelSet::sparse(k, n)?, k)?;
        }
    }
    for r in 1..=2 {
        for n in 2 * r + 1..=8 {
            check(ModelSet::low_rank_sym(r, n)?, r)?;
        }
    }
    let passed = sup_err <= 1e-9 && profile_err <= 1e-9;
    Ok(verdict(
        passed,
        format!("max |D - 1| {sup_err:.1e}; max profile err {profile_err:.1e}"),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SandwichCase {
    lower: f64,
    upper: f64,
    oracle: f64,
    exact: bool,
}

fn sandwich_cases(workers: usize) -> Result<Vec<SandwichCase>, regcomp::Error> {
    let per_chunk = rng::map_chunks(1000, workers, |chunk, len| {
        let mut r = rng::stream(SEED ^ 6, chunk);
        (0..len)
            .map(|_| {
                let w = LevelsWeights::new(r.gen_range(0.1..10.0), r.gen_range(0.1..10.0))?;
                let (k1, k2) = (r.gen_range(1..=6), r.gen_range(1..=6));
                let (mut l1, l2) = (r.gen_range(0..=8), r.gen_range(0..=8));
                if l1 + l2 == 0 {
                    l1 = 1;
                }
                let bound = b_levels_bound(w, k1, k2, l1, l2)?;
                let oracle = b_levels_oracle(w, k1, k2, l1, l2, 10_000)?;
                let (nu1, nu2) = w.shares(k1, k2);
                let exact = nu1 >= k1 as f64 / (k1 + l1) as f64 && nu2 >= k2 as f64 / (k2 + l2) as f64;
                Ok(SandwichCase {
                    lower: bound.lower,
                    upper: bound.upper,
                    oracle,
                    exact,
                })
            })
            .collect::<Result<Vec<_>, regcomp::Error>>()
    })?;
    Ok(per_chunk.into_iter().flatten().collect())
}

fn criterion_6() -> Result<Verdict, regcomp::Error> {
    let cases = sandwich_cases(0)?;
    let outside = cases
        .iter()
        .map(|c| (c.lower - c.oracle).max(c.oracle - c.upper).max(0.0))
        .fold(0.0, f64::max);
    let exact: Vec<&SandwichCase> = cases.iter().filter(|c| c.exact).collect();
    let tight = exact.iter().map(|c| (c.oracle - c.upper).abs()).fold(0.0, f64::max);
    let passed = outside <= 1e-6 && tight <= 1e-3;
    Ok(verdict(
        passed,
        format!(
            "1000 cases, max excursion {outside:.1e}; {} equality cases, max |oracle - upper| {tight:.1e}",
            exact.len()
        ),
    ))
}

fn criterion_7() -> Result<Verdict, regcomp::Error> {
    let rows = sweep_levels(2, 50, 4, 1_000_000, 0)?;
    let c1 = rows.iter().max_by(|a, b| a.c1.total_cmp(&b.c1)).expect("nonempty");
    let c2 = rows.iter().max_by(|a, b| a.c2.total_cmp(&b.c2)).expect("nonempty");
    let passed = c1.c1 <= 1e-5 && c2.c2 <= 5e-3;
    Ok(verdict(
        passed,
        format!(
            "{} pairs, max C1 {:.2e} at ({},{}), max C2 {:.2e} at ({},{})",
            rows.len(),
            c1.c1,
            c1.k1,
            c1.k2,
            c2.c2,
            c2.k1,
            c2.k2
        ),
    ))
}

fn ratio_grid() -> Vec<(f64, f64)> {
    let r = [0.5, 0.75, 1.0, 1.5, 2.0];
    r.iter().flat_map(|&a| r.iter().map(move |&b| (a, b))).collect()
}

fn criterion_8() -> Result<Verdict, regcomp::Error> {
    let exp = experiment_3d_1sparse(&ratio_grid(), 1_000_000, SEED, 0)?;
    let best = &exp.rows[exp.best];
    let passed = exp.uniform_first && exp.separated == Some(true);
    Ok(verdict(
        passed,
        format!(
            "top ratios ({}, {}) estimate {:.5} [{:.5}, {:.5}]; separated {:?}",
            best.r2, best.r3, best.volume.estimate, best.volume.ci_low, best.volume.ci_high, exp.separated
        ),
    ))
}

fn criterion_9() -> Result<Verdict, regcomp::Error> {
    let b = |workers| -> Result<Vec<u64>, regcomp::Error> {
        sparse_grid()
            .into_iter()
            .map(|(k, n)| {
                Ok(b_sup_estimate(&ModelSet::sparse(k, n)?, &Regularizer::l1(n), 100_000, SEED, workers)?.to_bits())
            })
            .collect()
    };
    let same_b = b(1)? == b(4)?;
    let same_sandwich = sandwich_cases(1)? == sandwich_cases(4)?;
    let exp = |workers| experiment_3d_1sparse(&ratio_grid(), 1_000_000, SEED, workers);
    let same_exp = exp(1)? == exp(4)?;
    Ok(verdict(
        same_b && same_sandwich && same_exp,
        format!("B estimates {same_b}, levels sandwich {same_sandwich}, 3D experiment {same_exp}"),
    ))
}

fn main() {
    let criteria: [(u32, &str, Criterion, Duration); 9] = [
        (1, "delta_suff closed form", criterion_1, Duration::from_secs(1)),
        (
            2,
            "delta_nec closed form vs witnesses",
            criterion_2,
            Duration::from_secs(30),
        ),
        (
            3,
            "conditioning vs RIP consistency",
            criterion_3,
            Duration::from_secs(60),
        ),
        (4, "model norm oracle", criterion_4, Duration::from_secs(60)),
        (5, "D measure profile", criterion_5, Duration::from_secs(10)),
        (6, "levels sandwich", criterion_6, Duration::from_secs(120)),
        (7, "optimal levels weights", criterion_7, Duration::from_secs(600)),
        (8, "3D 1-sparse optimality", criterion_8, Duration::from_secs(300)),
        (9, "determinism across workers", criterion_9, Duration::MAX),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failures = 0;
    for (id, name, run, budget) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(v) => (v.passed, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= budget;
        let status = if passed && in_time { "PASS" } else { "FAIL" };
        let over = if in_time {
            String::new()
        } else {
            format!(" (over budget {budget:?})")
        };
        println!(
            "criterion {id} [{name}]: {status} in {:.2}s{over}: {detail}",
            elapsed.as_secs_f64()
        );
        if status == "FAIL" {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
