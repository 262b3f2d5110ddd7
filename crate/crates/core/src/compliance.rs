//! RIP constants, restricted conditioning and the RIP-based compliance
//! measures `delta_nec` and `delta_suff`.

use itertools::Itertools;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::levels::{b_levels_oracle, LevelsWeights};
use crate::linalg::{eig_sym, extreme_eigenvalues, EIG_TOL};
use crate::models::ModelSet;
use crate::point::{Point, SymMatrix};
use crate::regularizers::{build_descent_vector, in_descent_cone, Regularizer};
use crate::rng;

/// Refuse exact enumeration above this many supports.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Serializes `f64` as a JSON number, or the string `"inf"` when infinite.
pub fn extended_real<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("nan")
    }
}

/// Dense `rows × cols` measurement operator, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearOperator {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LinearOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "operator needs at least one row and column".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::mismatch(
                format!("{} entries", rows * cols),
                format!("{}", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("operator entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("rows differ in length".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    /// `I − zzᵀ/‖z‖²`.
    pub fn orthogonal_complement(z: &[f64]) -> Result<Self> {
        let nz: f64 = z.iter().map(|x| x * x).sum();
        if !(nz > 0.0) {
            return Err(Error::Undefined("projection direction is zero".into()));
        }
        let n = z.len();
        let mut m = Self::identity(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] -= z[i] * z[j] / nz;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::mismatch(
                format!("vector of length {}", self.cols),
                format!("{}", x.len()),
            ));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.data[i * self.cols + j] * x[j]).sum())
            .collect())
    }

    /// `M_Tᵀ M_T` for the columns in `support`, dense row-major.
    fn restricted_gram(&self, support: &[usize]) -> Vec<f64> {
        let s = support.len();
        let mut g = vec![0.0; s * s];
        for (a, &ca) in support.iter().enumerate() {
            for (b, &cb) in support.iter().enumerate().skip(a) {
                let v: f64 = (0..self.rows)
                    .map(|r| self.data[r * self.cols + ca] * self.data[r * self.cols + cb])
                    .sum();
                g[a * s + b] = v;
                g[b * s + a] = v;
            }
        }
        g
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i + 1) as u128)
}

/// Supports of the secant set of a vector model, as column index lists.
fn secant_supports(model: &ModelSet) -> Result<Vec<Vec<usize>>> {
    let count = match model.secant() {
        ModelSet::Sparse { k, n } => binomial(n, k),
        ModelSet::Levels { k1, k2, n1, n2 } => binomial(n1, k1) * binomial(n2, k2),
        ModelSet::LowRankSym { .. } => {
            return Err(Error::Unsupported(
                "restricted constants of low-rank models have no finite support enumeration".into(),
            ))
        }
    };
    if count > ENUMERATION_CAP {
        return Err(Error::TooLarge(format!(
            "{count} secant supports exceed the enumeration cap of {ENUMERATION_CAP}"
        )));
    }
    Ok(match model.secant() {
        ModelSet::Sparse { k, n } => (0..n).combinations(k).collect(),
        ModelSet::Levels { k1, k2, n1, n2 } => (0..n1)
            .combinations(k1)
            .cartesian_product((n1..n1 + n2).combinations(k2).collect::<Vec<_>>())
            .map(|(a, b)| [a, b].concat())
            .collect(),
        ModelSet::LowRankSym { .. } => unreachable!(),
    })
}

/// Extreme values of `‖Mx‖²` over unit secant vectors.
fn restricted_extremes(model: &ModelSet, m: &LinearOperator) -> Result<(f64, f64)> {
    if m.cols != model.side() {
        return Err(Error::mismatch(
            format!("operator with {} columns", model.side()),
            format!("{} columns", m.cols),
        ));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for support in secant_supports(model)? {
        let (a, b) = extreme_eigenvalues(support.len(), &m.restricted_gram(&support))?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((lo.max(0.0), hi))
}

/// Restricted isometry constant of `m` on the secant set of `model`.
pub fn rip_constant(model: &ModelSet, m: &LinearOperator) -> Result<f64> {
    let (lo, hi) = restricted_extremes(model, m)?;
    Ok((hi - 1.0).abs().max((lo - 1.0).abs()))
}

/// Ratio of the extreme values of `‖Mx‖²` on the unit secant sphere; `+∞`
/// when the secant set meets the kernel.
pub fn restricted_conditioning(model: &ModelSet, m: &LinearOperator) -> Result<f64> {
    let (lo, hi) = restricted_extremes(model, m)?;
    if hi <= 0.0 || lo <= 1e-12 * hi {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    RipToConditioning,
    ConditioningToRip,
}

/// `γ = (1+δ)/(1−δ)` and its inverse `δ = (γ−1)/(γ+1)`.
pub fn rip_rc_convert(value: f64, direction: Conversion) -> Result<f64> {
    match direction {
        Conversion::RipToConditioning => {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::InvalidArgument(format!(
                    "RIP constant must lie in [0, 1), got {value}"
                )));
            }
            Ok((1.0 + value) / (1.0 - value))
        }
        Conversion::ConditioningToRip => {
            if !(value >= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "conditioning must be >= 1, got {value}"
                )));
            }
            if value.is_infinite() {
                return Ok(1.0);
            }
            Ok((value - 1.0) / (value + 1.0))
        }
    }
}

/// Secant projection split of `z`: `(‖z − P z‖², ‖P z‖²)`.
fn secant_split(model: &ModelSet, z: &Point) -> Result<(f64, f64)> {
    let p = model.secant().project(z)?;
    let tail = z.sub(&p)?.norm_sq();
    Ok((tail, p.norm_sq()))
}

/// Restricted conditioning of `I − Π_z` on the secant set, in closed form.
pub fn gamma_nec_point(model: &ModelSet, z: &Point) -> Result<f64> {
    model.check_point(z)?;
    let total = z.norm_sq();
    if total == 0.0 {
        return Err(Error::Undefined("z must be nonzero".into()));
    }
    let (tail, _) = secant_split(model, z)?;
    if tail <= 1e-12 * total {
        return Ok(f64::INFINITY);
    }
    Ok(total / tail)
}

/// Tail-to-head energy ratio of `z` against its secant projection.
pub fn b_measure_value(model: &ModelSet, z: &Point) -> Result<f64> {
    model.check_point(z)?;
    let (tail, head) = secant_split(model, z)?;
    if head == 0.0 {
        return Err(Error::Undefined("secant projection of z is zero".into()));
    }
    Ok(tail / head)
}

/// Worst-case witness profile for ℓ¹ on `Sparse(k, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BStar {
    pub b: f64,
    /// Smallest maximizing tail size.
    pub argmax_l: usize,
    pub delta_nec: f64,
}

fn check_regime(k: usize, n: usize) -> Result<()> {
    if k == 0 || 2 * k >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= k < n/2, got k={k}, n={n}")));
    }
    Ok(())
}

/// `max_{1 ≤ L ≤ n−2k} (L/k)/((L/k+1)² + 1)`, compared exactly in integers.
pub fn b_star_sparse(k: usize, n: usize) -> Result<BStar> {
    check_regime(k, n)?;
    // value(L) = Lk / ((L+k)² + k²)
    let frac = |l: usize| -> (u128, u128) {
        let (l, k) = (l as u128, k as u128);
        (l * k, (l + k) * (l + k) + k * k)
    };
    let mut best = 1;
    for l in 2..=n - 2 * k {
        let (a, b) = frac(l);
        let (c, d) = frac(best);
        if a * d > c * b {
            best = l;
        }
    }
    let (num, den) = frac(best);
    let b = num as f64 / den as f64;
    Ok(BStar {
        b,
        argmax_l: best,
        delta_nec: 1.0 / (1.0 + 2.0 * b),
    })
}

/// `(1 + D)^{-1/2}`.
pub fn delta_suff_from_d(d: f64) -> f64 {
    (1.0 + d).recip().sqrt()
}

/// `delta_suff` of ℓ¹ on `Sparse(k, n)`, equal to `1/√2`.
pub fn delta_suff_l1(k: usize, n: usize) -> Result<f64> {
    check_regime(k, n)?;
    Ok(delta_suff_from_d(1.0))
}

/// `delta_suff` of the nuclear norm on `LowRankSym(r, n)`, equal to `1/√2`.
pub fn delta_suff_nuclear(r: usize, n: usize) -> Result<f64> {
    check_regime(r, n)?;
    Ok(delta_suff_from_d(1.0))
}

/// Which projection splits `z` into head and tail in the D measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadProjection {
    /// Projection on the model set (top-k support).
    Model,
    /// Projection on the secant set (top-2k support).
    Secant,
}

/// `‖z − P z‖²_Σ / ‖P z‖²` with `P` the model projection.
pub fn d_measure_value(model: &ModelSet, z: &Point) -> Result<f64> {
    d_measure_with(model, z, HeadProjection::Model)
}

pub fn d_measure_with(model: &ModelSet, z: &Point, head: HeadProjection) -> Result<f64> {
    if matches!(model, ModelSet::Levels { .. }) {
        return Err(Error::Unsupported(
            "D measure needs the model norm, undefined for levels".into(),
        ));
    }
    let p = match head {
        HeadProjection::Model => model.project(z)?,
        HeadProjection::Secant => model.secant().project(z)?,
    };
    let h = p.norm_sq();
    if h == 0.0 {
        return Err(Error::Undefined("head of z is zero".into()));
    }
    let tail = z.sub(&p)?;
    Ok(model.norm(&tail)?.powi(2) / h)
}

/// `−α·1_{H0} + 1_{H1}` with `α = max(1, |H1|/k)`; diagonal for matrices.
pub fn witness_on(model: &ModelSet, head: &[usize], tail: &[usize]) -> Result<Point> {
    let (k, n) = match *model {
        ModelSet::Sparse { k, n } => (k, n),
        ModelSet::LowRankSym { r, n } => (r, n),
        ModelSet::Levels { .. } => return Err(Error::Unsupported("witnesses for levels models".into())),
    };
    if head.len() != k || tail.is_empty() || head.iter().chain(tail).any(|&i| i >= n) {
        return Err(Error::InvalidArgument(format!(
            "witness needs |H0| = {k}, |H1| >= 1 and indices below {n}"
        )));
    }
    if head.iter().any(|i| tail.contains(i)) {
        return Err(Error::InvalidArgument("witness supports must be disjoint".into()));
    }
    let alpha = (tail.len() as f64 / k as f64).max(1.0);
    let mut d = vec![0.0; n];
    for &i in head {
        d[i] = -alpha;
    }
    for &i in tail {
        d[i] = 1.0;
    }
    Ok(if model.is_matrix() {
        SymMatrix::from_diag(&d).into()
    } else {
        Point::Vector(d)
    })
}

/// Canonical witness with `H0 = {0..k}`, `H1 = {k..k+L}`.
pub fn witness(model: &ModelSet, l: usize) -> Result<Point> {
    let k = match *model {
        ModelSet::Sparse { k, .. } => k,
        ModelSet::LowRankSym { r, .. } => r,
        ModelSet::Levels { .. } => return Err(Error::Unsupported("witnesses for levels models".into())),
    };
    let head: Vec<usize> = (0..k).collect();
    let tail: Vec<usize> = (k..k + l).collect();
    witness_on(model, &head, &tail)
}

/// `(L, D value of the L-witness)` for `L = 1..=min(n−k, budget)`.
pub fn d_profile(model: &ModelSet, budget: usize) -> Result<Vec<(usize, f64)>> {
    let (k, n) = match *model {
        ModelSet::Sparse { k, n } => (k, n),
        ModelSet::LowRankSym { r, n } => (r, n),
        ModelSet::Levels { .. } => return Err(Error::Unsupported("D measure for levels models".into())),
    };
    (1..=(n - k).min(budget))
        .map(|l| Ok((l, d_measure_value(model, &witness(model, l)?)?)))
        .collect()
}

/// Maximum of the D measure over the structured witness family, for the
/// canonical regularizer of the model.
pub fn d_sup_structured(model: &ModelSet, reg: &Regularizer, budget: usize) -> Result<f64> {
    if !reg.is_canonical_for(model) {
        return Err(Error::Incompatible(format!(
            "structured D search needs the canonical regularizer of {model}, got {}",
            reg.name()
        )));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    let profile = d_profile(model, budget)?;
    profile
        .iter()
        .map(|&(_, d)| d)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))))
        .ok_or_else(|| Error::Undefined(format!("{model} admits no witness")))
}

/// A random model element `v0` and companion `v1`, sharing a basis for
/// matrices so that structured witnesses are reachable.
fn structured_pair<R: Rng>(rng: &mut R, model: &ModelSet) -> Result<(Point, Point)> {
    let flat0 = rng.gen::<bool>();
    let flat1 = rng.gen::<bool>();
    let companion = |len: usize, rng: &mut R| -> Vec<f64> {
        let size = rng.gen_range(1..=len);
        let mut v = vec![0.0; len];
        for i in rng::random_support(rng, len, size) {
            v[i] = if flat1 {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            } else {
                rng.sample(rand_distr::StandardNormal)
            };
        }
        v
    };
    match *model {
        ModelSet::LowRankSym { r, n } => {
            let basis = eig_sym(&rng::gaussian_sym(rng, n), EIG_TOL)?;
            let head = rng::model_point(rng, &ModelSet::Sparse { k: r, n }, flat0)?;
            let v1 = companion(n, rng);
            Ok((
                SymMatrix::from_spectrum(head.as_vector().expect("vector"), &basis.vectors).into(),
                SymMatrix::from_spectrum(&v1, &basis.vectors).into(),
            ))
        }
        _ => {
            let v0 = rng::model_point(rng, model, flat0)?;
            Ok((v0, Point::Vector(companion(model.side(), rng))))
        }
    }
}

/// Lower bound on the supremum of the B measure over the descent cone,
/// from `samples` draws: half built from random model points, half
/// rejection-sampled on the sphere. Independent of `workers`.
pub fn b_sup_estimate(model: &ModelSet, reg: &Regularizer, samples: u64, seed: u64, workers: usize) -> Result<f64> {
    reg.check_compatible(model)?;
    if !reg.has_exact_cone() {
        return Err(Error::Unsupported("sampling B needs an exact descent-cone test".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let per_chunk = rng::map_chunks(samples, workers, |chunk, len| {
        let mut rng = rng::stream(seed, chunk);
        let mut best: Option<f64> = None;
        for _ in 0..len {
            let z = if rng.gen::<bool>() {
                let (v0, v1) = structured_pair(&mut rng, model)?;
                build_descent_vector(reg, &v0, &v1)?
            } else {
                rng::sphere_point(&mut rng, model)
            };
            if z.is_zero() || !in_descent_cone(reg, model, &z)? {
                continue;
            }
            match b_measure_value(model, &z) {
                Ok(b) => best = Some(best.map_or(b, |m| m.max(b))),
                Err(Error::Undefined(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(best)
    })?;
    per_chunk
        .into_iter()
        .flatten()
        .reduce(f64::max)
        .ok_or_else(|| Error::Numerical("no sample landed in the descent cone".into()))
}

/// How a report's numbers were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    StructuredSearch,
    SampledLowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplianceReport {
    pub model: ModelSet,
    pub regularizer: Regularizer,
    /// Applies to `b_value`, `delta_nec` and `gamma_nec`.
    pub method: Method,
    pub delta_nec: f64,
    /// Only available when the D measure is known in closed form.
    pub delta_suff: Option<f64>,
    #[serde(serialize_with = "extended_real")]
    pub gamma_nec: f64,
    pub b_value: f64,
    pub d_value: Option<f64>,
    /// `[delta_suff, delta_nec]` when both ends are known.
    pub delta_sharp_interval: Option<[f64; 2]>,
    /// Maximizing tail size for closed forms.
    pub argmax_l: Option<usize>,
    /// Maximizing `(L1, L2)` for the levels search.
    pub argmax_levels: Option<[usize; 2]>,
}

/// Settings for estimators used when no closed form applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EstimatorSettings {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    /// β-grid of the levels oracle.
    pub levels_grid: usize,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            workers: 0,
            levels_grid: 10_000,
        }
    }
}

fn report_from_b(model: ModelSet, reg: Regularizer, method: Method, b: f64, d: Option<f64>) -> ComplianceReport {
    let delta_nec = 1.0 / (1.0 + 2.0 * b);
    let gamma_nec = if b == 0.0 {
        f64::INFINITY
    } else {
        (1.0 + delta_nec) / (1.0 - delta_nec)
    };
    let delta_suff = d.map(delta_suff_from_d);
    ComplianceReport {
        model,
        regularizer: reg,
        method,
        delta_nec,
        delta_suff,
        gamma_nec,
        b_value: b,
        d_value: d,
        delta_sharp_interval: delta_suff.map(|s| [s, delta_nec]),
        argmax_l: None,
        argmax_levels: None,
    }
}

/// Compliance of `reg` for `model`: closed forms for ℓ¹ on sparse vectors
/// and the nuclear norm on low-rank matrices, the exact profile search for
/// ℓ¹ by levels, and a sampled lower bound on B otherwise.
pub fn compliance_report(
    model: &ModelSet,
    reg: &Regularizer,
    settings: &EstimatorSettings,
) -> Result<ComplianceReport> {
    reg.check_compatible(model)?;
    if !model.recovery_regime() {
        return Err(Error::Undefined(format!(
            "the secant set of {model} fills the space; no operator with a kernel recovers it"
        )));
    }
    match (*model, reg) {
        (ModelSet::Sparse { k, n }, _) | (ModelSet::LowRankSym { r: k, n }, _) if reg.is_canonical_for(model) => {
            let star = b_star_sparse(k, n)?;
            let mut report = report_from_b(*model, reg.clone(), Method::ClosedForm, star.b, Some(1.0));
            report.argmax_l = Some(star.argmax_l);
            Ok(report)
        }
        (ModelSet::Levels { k1, k2, n1, n2 }, Regularizer::LevelsL1 { w1, w2, .. }) => {
            let w = LevelsWeights::new(*w1, *w2)?;
            let mut best = (f64::NEG_INFINITY, [0, 0]);
            for l1 in 0..=n1.saturating_sub(2 * k1) {
                for l2 in 0..=n2.saturating_sub(2 * k2) {
                    if l1 + l2 == 0 {
                        continue;
                    }
                    let b = b_levels_oracle(w, k1, k2, l1, l2, settings.levels_grid)?;
                    if b > best.0 {
                        best = (b, [l1, l2]);
                    }
                }
            }
            let mut report = report_from_b(*model, reg.clone(), Method::StructuredSearch, best.0, None);
            report.argmax_levels = Some(best.1);
            Ok(report)
        }
        _ => {
            let b = b_sup_estimate(model, reg, settings.samples, settings.seed, settings.workers)?;
            Ok(report_from_b(*model, reg.clone(), Method::SampledLowerBound, b, None))
        }
    }
}
