//! Regularizers, atomic gauges by linear programming, and descent-cone tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, eig_sym_dense, EIG_TOL};
use crate::models::{top_k_support, ModelSet};
use crate::point::{Point, SymMatrix};
use crate::simplex::{LpOutcome, StandardLp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Regularizer {
    /// `Σ wᵢ|xᵢ|`.
    WeightedL1 { weights: Vec<f64> },
    /// `w1‖x[..n1]‖₁ + w2‖x[n1..]‖₁`; `n1` is the length of the first level.
    LevelsL1 { w1: f64, w2: f64, n1: usize },
    /// Sum of absolute eigenvalues of a symmetric matrix.
    Nuclear,
    /// Gauge of the convex hull of a finite atom set.
    FiniteAtomic { atoms: Vec<Point> },
}

/// Result of the feasibility LP behind a finite atomic gauge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeCertificate {
    /// `+∞` when the point lies outside the cone spanned by the atoms.
    pub value: f64,
    /// Nonnegative weights, one per atom; empty when infeasible.
    pub coefficients: Vec<f64>,
}

impl GaugeCertificate {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Outcome of a descent-cone membership query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// Decided by an exact criterion.
    Exact(bool),
    /// A point of the model was found at which the direction descends.
    Witnessed,
    /// The search found no witness; membership is not excluded.
    NoWitnessFound,
}

impl Membership {
    /// Sound boolean reading: only exact or witnessed memberships count.
    pub fn accepted(self) -> bool {
        matches!(self, Membership::Exact(true) | Membership::Witnessed)
    }
}

/// Relative slack on derivative signs and value comparisons.
const SLACK: f64 = 1e-12;

impl Regularizer {
    /// Unweighted ℓ¹ on length `n`.
    pub fn l1(n: usize) -> Self {
        Regularizer::WeightedL1 { weights: vec![1.0; n] }
    }

    /// The regularizer the closed forms are stated for: ℓ¹, ℓ¹ by levels
    /// with unit weights, or the nuclear norm.
    pub fn canonical_for(model: &ModelSet) -> Self {
        match *model {
            ModelSet::Sparse { n, .. } => Regularizer::l1(n),
            ModelSet::Levels { n1, .. } => Regularizer::LevelsL1 { w1: 1.0, w2: 1.0, n1 },
            ModelSet::LowRankSym { .. } => Regularizer::Nuclear,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regularizer::WeightedL1 { .. } => "weighted_l1",
            Regularizer::LevelsL1 { .. } => "levels_l1",
            Regularizer::Nuclear => "nuclear",
            Regularizer::FiniteAtomic { .. } => "finite_atomic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Regularizer::WeightedL1 { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
                    return Err(Error::InvalidRegularizer(
                        "weights must be finite and strictly positive".into(),
                    ));
                }
            }
            Regularizer::LevelsL1 { w1, w2, .. } => {
                if !(*w1 > 0.0 && *w2 > 0.0 && w1.is_finite() && w2.is_finite()) {
                    return Err(Error::InvalidRegularizer(
                        "level weights must be finite and strictly positive".into(),
                    ));
                }
            }
            Regularizer::Nuclear => {}
            Regularizer::FiniteAtomic { atoms } => {
                let Some(first) = atoms.first() else {
                    return Err(Error::InvalidRegularizer("atom set is empty".into()));
                };
                for a in atoms {
                    if !a.same_shape(first) {
                        return Err(Error::InvalidRegularizer("atoms differ in shape".into()));
                    }
                    if a.is_zero() || !a.is_finite() {
                        return Err(Error::InvalidRegularizer("atoms must be finite and nonzero".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether cone membership is decided exactly (all variants but atomic).
    pub fn has_exact_cone(&self) -> bool {
        !matches!(self, Regularizer::FiniteAtomic { .. })
    }

    /// ℓ¹ with constant weights on a sparse model, or nuclear on a low-rank
    /// model: the pairs with closed-form compliance.
    pub fn is_canonical_for(&self, model: &ModelSet) -> bool {
        match (self, model) {
            (Regularizer::WeightedL1 { weights }, ModelSet::Sparse { n, .. }) => {
                weights.len() == *n && weights.iter().all(|w| *w == weights[0])
            }
            (Regularizer::Nuclear, ModelSet::LowRankSym { .. }) => true,
            _ => false,
        }
    }

    /// Checks that the regularizer lives on the ambient space of `model`.
    pub fn check_compatible(&self, model: &ModelSet) -> Result<()> {
        self.validate()?;
        let ok = match (self, model) {
            (Regularizer::WeightedL1 { weights }, ModelSet::Sparse { .. } | ModelSet::Levels { .. }) => {
                weights.len() == model.side()
            }
            (Regularizer::LevelsL1 { n1, .. }, ModelSet::Levels { n1: m1, .. }) => n1 == m1,
            (Regularizer::Nuclear, ModelSet::LowRankSym { .. }) => true,
            (Regularizer::FiniteAtomic { atoms }, _) => model.check_point(&atoms[0]).is_ok(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Incompatible(format!(
                "{} does not act on the space of {model}",
                self.name()
            )))
        }
    }

    /// Per-coordinate weights of a polyhedral regularizer on a vector of
    /// length `len`.
    fn coordinate_weights(&self, len: usize) -> Result<Vec<f64>> {
        match self {
            Regularizer::WeightedL1 { weights } => {
                if weights.len() != len {
                    return Err(Error::mismatch(
                        format!("vector of length {}", weights.len()),
                        format!("vector of length {len}"),
                    ));
                }
                Ok(weights.clone())
            }
            Regularizer::LevelsL1 { w1, w2, n1 } => {
                if *n1 > len {
                    return Err(Error::mismatch(
                        format!("vector of length at least {n1}"),
                        format!("vector of length {len}"),
                    ));
                }
                Ok((0..len).map(|i| if i < *n1 { *w1 } else { *w2 }).collect())
            }
            _ => Err(Error::Unsupported(format!(
                "{} is not coordinate-weighted",
                self.name()
            ))),
        }
    }

    fn vector_arg<'a>(&self, x: &'a Point) -> Result<&'a [f64]> {
        x.as_vector().ok_or_else(|| Error::mismatch("vector", x.describe()))
    }

    fn matrix_arg<'a>(&self, x: &'a Point) -> Result<&'a SymMatrix> {
        x.as_matrix()
            .ok_or_else(|| Error::mismatch("symmetric matrix", x.describe()))
    }

    /// `R(x)`; `+∞` for points outside the span of a finite atom set.
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        match self {
            Regularizer::WeightedL1 { .. } | Regularizer::LevelsL1 { .. } => {
                let v = self.vector_arg(x)?;
                let w = self.coordinate_weights(v.len())?;
                Ok(v.iter().zip(&w).map(|(a, b)| a.abs() * b).sum())
            }
            Regularizer::Nuclear => {
                let m = self.matrix_arg(x)?;
                Ok(eig_sym(m, EIG_TOL)?.values.iter().map(|v| v.abs()).sum())
            }
            Regularizer::FiniteAtomic { atoms } => Ok(gauge_lp(atoms, x)?.value),
        }
    }

    /// One-sided directional derivative `R'(x; d)`.
    pub fn directional_derivative(&self, x: &Point, d: &Point) -> Result<f64> {
        if !x.same_shape(d) {
            return Err(Error::mismatch(x.describe(), d.describe()));
        }
        match self {
            Regularizer::WeightedL1 { .. } | Regularizer::LevelsL1 { .. } => {
                let (xv, dv) = (self.vector_arg(x)?, self.vector_arg(d)?);
                let w = self.coordinate_weights(xv.len())?;
                Ok((0..xv.len())
                    .map(|i| {
                        if xv[i] != 0.0 {
                            w[i] * xv[i].signum() * dv[i]
                        } else {
                            w[i] * dv[i].abs()
                        }
                    })
                    .sum())
            }
            Regularizer::Nuclear => nuclear_derivative(self.matrix_arg(x)?, self.matrix_arg(d)?),
            Regularizer::FiniteAtomic { .. } => Err(Error::Unsupported(
                "directional derivative of a finite atomic gauge".into(),
            )),
        }
    }
}

/// `tr(U₊ᵀdU₊) − tr(U₋ᵀdU₋) + ‖U₀ᵀdU₀‖_*` with `U₊, U₋, U₀` the eigenvectors
/// of `x` for positive, negative and null eigenvalues.
fn nuclear_derivative(x: &SymMatrix, d: &SymMatrix) -> Result<f64> {
    if x.side() != d.side() {
        return Err(Error::mismatch(
            format!("symmetric matrix of side {}", x.side()),
            format!("symmetric matrix of side {}", d.side()),
        ));
    }
    let n = x.side();
    let e = eig_sym(x, EIG_TOL)?;
    let scale = e.values.first().map_or(0.0, |v| v.abs());
    let null_tol = 1e-10 * scale;
    let dd = d.to_dense();
    let quad = |a: usize, b: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            let ui = e.vectors[i * n + a];
            if ui == 0.0 {
                continue;
            }
            for j in 0..n {
                s += ui * dd[i * n + j] * e.vectors[j * n + b];
            }
        }
        s
    };
    let mut total = 0.0;
    let mut null = Vec::new();
    for (j, &lambda) in e.values.iter().enumerate() {
        if lambda > null_tol {
            total += quad(j, j);
        } else if lambda < -null_tol {
            total -= quad(j, j);
        } else {
            null.push(j);
        }
    }
    if !null.is_empty() {
        let m = null.len();
        let mut block = vec![0.0; m * m];
        for (a, &ja) in null.iter().enumerate() {
            for (b, &jb) in null.iter().enumerate() {
                block[a * m + b] = quad(ja, jb);
            }
        }
        total += eig_sym_dense(m, &block, EIG_TOL)?
            .values
            .iter()
            .map(|v| v.abs())
            .sum::<f64>();
    }
    Ok(total)
}

fn coordinates(p: &Point) -> &[f64] {
    match p {
        Point::Vector(v) => v,
        Point::SymMatrix(m) => m.upper(),
    }
}

/// Gauge of `conv(atoms)` at `x` by minimizing `Σμⱼ` subject to
/// `Σ μⱼ aⱼ = x`, `μ ≥ 0`.
pub fn gauge_lp(atoms: &[Point], x: &Point) -> Result<GaugeCertificate> {
    let Some(first) = atoms.first() else {
        return Err(Error::InvalidRegularizer("atom set is empty".into()));
    };
    for a in atoms {
        if !a.same_shape(x) {
            return Err(Error::mismatch(x.describe(), a.describe()));
        }
    }
    let rows = coordinates(first).len();
    let cols = atoms.len();
    let mut a = vec![0.0; rows * cols];
    for (j, atom) in atoms.iter().enumerate() {
        for (i, v) in coordinates(atom).iter().enumerate() {
            a[i * cols + j] = *v;
        }
    }
    let lp = StandardLp {
        rows,
        cols,
        a,
        b: coordinates(x).to_vec(),
        c: vec![1.0; cols],
    };
    match lp.solve()? {
        LpOutcome::Optimal { x: mu, objective } => Ok(GaugeCertificate {
            value: objective,
            coefficients: mu,
        }),
        LpOutcome::Infeasible => Ok(GaugeCertificate {
            value: f64::INFINITY,
            coefficients: Vec::new(),
        }),
        LpOutcome::Unbounded => Err(Error::Numerical(
            "gauge LP reported unbounded despite a nonnegative objective".into(),
        )),
    }
}

/// Weighted magnitudes split by the blocks of a vector model, with the
/// per-block sparsity.
fn blocks(model: &ModelSet) -> Vec<(usize, usize, usize)> {
    match *model {
        ModelSet::Sparse { k, n } => vec![(0, n, k)],
        ModelSet::Levels { k1, k2, n1, n2 } => vec![(0, n1, k1), (n1, n1 + n2, k2)],
        ModelSet::LowRankSym { r, n } => vec![(0, n, r)],
    }
}

/// `z ∈ T_R(Σ)` when the model-sized head of `mags` carries at least as
/// much mass as the rest.
/// Relative slack of the exact cone tests, so that boundary directions built
/// in floating point are not rejected by rounding.
const CONE_RTOL: f64 = 1e-12;

fn head_dominates(model: &ModelSet, mags: &[f64]) -> bool {
    let mut head = 0.0;
    let mut total = 0.0;
    for (lo, hi, k) in blocks(model) {
        let block = &mags[lo..hi];
        total += block.iter().sum::<f64>();
        head += top_k_support(block, k).iter().map(|&i| block[i]).sum::<f64>();
    }
    head >= total - head - CONE_RTOL * total
}

/// Exact or witnessed membership of `z` in the descent cone of `reg` at the
/// model set.
pub fn cone_membership(reg: &Regularizer, model: &ModelSet, z: &Point) -> Result<Membership> {
    reg.check_compatible(model)?;
    model.check_point(z)?;
    if z.is_zero() {
        return Ok(Membership::Exact(true));
    }
    match reg {
        Regularizer::WeightedL1 { .. } | Regularizer::LevelsL1 { .. } => {
            let v = z.as_vector().expect("checked shape");
            let w = reg.coordinate_weights(v.len())?;
            let mags: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a.abs() * b).collect();
            Ok(Membership::Exact(head_dominates(model, &mags)))
        }
        Regularizer::Nuclear => {
            let e = eig_sym(z.as_matrix().expect("checked shape"), EIG_TOL)?;
            let mags: Vec<f64> = e.values.iter().map(|v| v.abs()).collect();
            Ok(Membership::Exact(head_dominates(model, &mags)))
        }
        Regularizer::FiniteAtomic { atoms } => atomic_membership(reg, atoms, model, z),
    }
}

/// Number of random model points tried per atomic membership query.
const ATOMIC_PROBES: u64 = 64;
const ATOMIC_SEED: u64 = 0x5eed_a70b;

fn atomic_membership(reg: &Regularizer, atoms: &[Point], model: &ModelSet, z: &Point) -> Result<Membership> {
    let mut candidates = vec![model.project(z)?.scale(-1.0)];
    for a in atoms {
        if model.contains(a, 1e-9)? {
            candidates.push(a.clone());
        }
    }
    let mut rng = crate::rng::stream(ATOMIC_SEED, 0);
    for _ in 0..ATOMIC_PROBES {
        candidates.push(crate::rng::model_point(&mut rng, model, false)?);
    }
    for x in &candidates {
        if x.is_zero() || !reg.evaluate(x)?.is_finite() {
            continue;
        }
        if descent_direction_test(reg, x, z)? {
            return Ok(Membership::Witnessed);
        }
    }
    Ok(Membership::NoWitnessFound)
}

/// Boolean form of [`cone_membership`]; never reports a false positive.
pub fn in_descent_cone(reg: &Regularizer, model: &ModelSet, z: &Point) -> Result<bool> {
    Ok(cone_membership(reg, model, z)?.accepted())
}

/// Whether `R(x + tz) ≤ R(x)` for some `t ≠ 0`.
pub fn descent_direction_test(reg: &Regularizer, x: &Point, z: &Point) -> Result<bool> {
    reg.validate()?;
    if !x.same_shape(z) {
        return Err(Error::mismatch(x.describe(), z.describe()));
    }
    let rx = reg.evaluate(x)?;
    if !rx.is_finite() {
        return Err(Error::InvalidArgument("R(x) is not finite".into()));
    }
    if z.is_zero() {
        return Ok(true);
    }
    match reg {
        Regularizer::FiniteAtomic { .. } => {
            let tol = SLACK * rx.max(1.0);
            for e in 0..=4 {
                let t = 10f64.powi(-e);
                for s in [t, -t] {
                    if reg.evaluate(&x.axpy(s, z)?)? <= rx + tol {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        _ => {
            let mz = z.scale(-1.0);
            let forward = reg.directional_derivative(x, z)?;
            let backward = reg.directional_derivative(x, &mz)?;
            let scale = reg.directional_derivative(&x.zeros_like(), z)?;
            let tol = SLACK * scale;
            if forward < -tol || backward < -tol {
                return Ok(true);
            }
            if forward > tol && backward > tol {
                return Ok(false);
            }
            if !matches!(reg, Regularizer::Nuclear) {
                // Piecewise linear: a null one-sided slope means R is flat
                // on the first linear piece.
                return Ok(true);
            }
            // Flat first-order term of a curved norm: decide on small steps.
            // By convexity, descent at step t implies descent at every
            // smaller step, so a few moderate steps suffice.
            let probe_tol = 0.1 * SLACK * rx.max(scale);
            for e in 1..=4 {
                let t = 10f64.powi(-e);
                for (dir, slope) in [(z, forward), (&mz, backward)] {
                    if slope <= tol && reg.evaluate(&x.axpy(t, dir)?)? <= rx + probe_tol {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
    }
}

/// `v₁ − α v₀` with `α = max(R(v₁)/R(v₀), 1)`; lies in the descent cone at
/// `v₀` by construction.
pub fn build_descent_vector(reg: &Regularizer, v0: &Point, v1: &Point) -> Result<Point> {
    if !v0.same_shape(v1) {
        return Err(Error::mismatch(v0.describe(), v1.describe()));
    }
    let r0 = reg.evaluate(v0)?;
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "R(v0) must be positive and finite, got {r0}"
        )));
    }
    let r1 = reg.evaluate(v1)?;
    if !r1.is_finite() {
        return Err(Error::InvalidArgument("R(v1) is not finite".into()));
    }
    let alpha = (r1 / r0).max(1.0);
    v1.axpy(-alpha, v0)
}

/// Parses a regularizer for `model`: `l1`, `nuclear`, `wl1:1,1,4`,
/// `levels:w1=1,w2=2`, inline JSON (`{"type": ...}`), or `@file.json`.
pub fn parse_regularizer(spec: &str, model: &ModelSet) -> Result<Regularizer> {
    let spec = spec.trim();
    let reg = if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidRegularizer(format!("cannot read '{path}': {e}")))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidRegularizer(format!("'{path}': {e}")))?
    } else if spec.starts_with('{') {
        serde_json::from_str(spec).map_err(|e| Error::InvalidRegularizer(e.to_string()))?
    } else {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        match kind {
            "l1" => match model {
                ModelSet::LowRankSym { .. } => {
                    return Err(Error::Incompatible("l1 needs a vector model; use nuclear".into()))
                }
                _ => Regularizer::canonical_for(model),
            },
            "nuclear" => Regularizer::Nuclear,
            "wl1" => Regularizer::WeightedL1 {
                weights: rest
                    .split(',')
                    .map(|w| {
                        w.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidRegularizer(format!("bad weight '{w}'")))
                    })
                    .collect::<Result<_>>()?,
            },
            "levels" => {
                let ModelSet::Levels { n1, .. } = *model else {
                    return Err(Error::Incompatible("levels weights need a levels model".into()));
                };
                let mut w = (1.0, 1.0);
                for pair in rest.split(',').filter(|p| !p.is_empty()) {
                    let (k, v) = pair
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidRegularizer(format!("expected key=value, got '{pair}'")))?;
                    let v: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidRegularizer(format!("bad weight '{v}'")))?;
                    match k.trim() {
                        "w1" => w.0 = v,
                        "w2" => w.1 = v,
                        other => return Err(Error::InvalidRegularizer(format!("unexpected field '{other}'"))),
                    }
                }
                Regularizer::LevelsL1 { w1: w.0, w2: w.1, n1 }
            }
            other => return Err(Error::InvalidRegularizer(format!("unknown regularizer '{other}'"))),
        }
    };
    reg.check_compatible(model)?;
    Ok(reg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Point {
        Point::vector(x)
    }

    fn wl1(w: &[f64]) -> Regularizer {
        Regularizer::WeightedL1 { weights: w.to_vec() }
    }

    #[test]
    fn evaluation() {
        assert_eq!(wl1(&[1.0, 2.0, 1.0]).evaluate(&v(&[1.0, -1.0, 3.0])).unwrap(), 6.0);
        let nuc = Regularizer::Nuclear.evaluate(&SymMatrix::from_diag(&[3.0, -1.0]).into());
        assert!((nuc.unwrap() - 4.0).abs() < 1e-14);
        let lv = Regularizer::LevelsL1 {
            w1: 1.0,
            w2: 2.0,
            n1: 2,
        };
        assert_eq!(lv.evaluate(&v(&[1.0, 0.0, 1.0, 1.0])).unwrap(), 5.0);
        assert!(Regularizer::Nuclear.evaluate(&v(&[1.0])).is_err());
    }

    #[test]
    fn gauge_examples() {
        let e = |i: usize, s: f64| {
            let mut x = vec![0.0; 2];
            x[i] = s;
            Point::Vector(x)
        };
        let atoms = vec![e(0, 1.0), e(0, -1.0), e(1, 1.0), e(1, -1.0)];
        let g = gauge_lp(&atoms, &v(&[3.0, -4.0])).unwrap();
        assert!((g.value - 7.0).abs() < 1e-12);
        assert!((g.coefficients[0] - 3.0).abs() < 1e-12 && (g.coefficients[3] - 4.0).abs() < 1e-12);

        let atoms = vec![e(0, 1.0), e(0, -1.0), e(1, 2.0), e(1, -2.0)];
        assert!((gauge_lp(&atoms, &v(&[0.0, 1.0])).unwrap().value - 0.5).abs() < 1e-12);

        let g = gauge_lp(&[e(0, 1.0)], &v(&[-1.0, 0.0])).unwrap();
        assert!(g.value.is_infinite() && g.coefficients.is_empty());
    }

    #[test]
    fn sparse_cone_examples() {
        let m = ModelSet::sparse(1, 3).unwrap();
        let r = Regularizer::l1(3);
        assert!(in_descent_cone(&r, &m, &v(&[2.0, -1.0, -1.0])).unwrap());
        assert!(!in_descent_cone(&r, &m, &v(&[1.0, 1.0, 1.0])).unwrap());
        assert!(in_descent_cone(&r, &m, &v(&[0.0; 3])).unwrap());
    }

    #[test]
    fn levels_cone_example() {
        // T = {0} in level one and {2} in level two: head 2, tail 1.
        let m = ModelSet::levels(1, 1, 2, 2).unwrap();
        let r = Regularizer::LevelsL1 {
            w1: 1.0,
            w2: 1.0,
            n1: 2,
        };
        assert!(in_descent_cone(&r, &m, &v(&[1.0, -1.0, 1.0, 0.0])).unwrap());
        let m = ModelSet::levels(1, 1, 3, 3).unwrap();
        let r = Regularizer::LevelsL1 {
            w1: 1.0,
            w2: 1.0,
            n1: 3,
        };
        // Head 1 + 1 against tail 1 + 1 is on the boundary; one more unit of tail leaves.
        assert!(in_descent_cone(&r, &m, &v(&[1.0, -1.0, 0.0, 1.0, 1.0, 0.0])).unwrap());
        assert!(!in_descent_cone(&r, &m, &v(&[1.0, -1.0, 0.0, 1.0, 1.0, 1.0])).unwrap());
    }

    #[test]
    fn nuclear_cone_uses_spectrum() {
        let m = ModelSet::low_rank_sym(1, 3).unwrap();
        let z: Point = SymMatrix::from_diag(&[2.0, -1.0, -1.0]).into();
        assert_eq!(
            cone_membership(&Regularizer::Nuclear, &m, &z).unwrap(),
            Membership::Exact(true)
        );
        let z: Point = SymMatrix::from_diag(&[1.0, 1.0, 1.0]).into();
        assert!(!in_descent_cone(&Regularizer::Nuclear, &m, &z).unwrap());
    }

    #[test]
    fn incompatible_pairs() {
        let m = ModelSet::sparse(1, 3).unwrap();
        assert!(matches!(
            in_descent_cone(&Regularizer::Nuclear, &m, &v(&[1.0; 3])),
            Err(Error::Incompatible(_))
        ));
        assert!(in_descent_cone(&Regularizer::l1(4), &m, &v(&[1.0; 3])).is_err());
    }

    #[test]
    fn direction_tests() {
        let r = wl1(&[1.0, 1.0]);
        assert!(descent_direction_test(&r, &v(&[1.0, 0.0]), &v(&[-1.0, 1.0])).unwrap());
        assert!(!descent_direction_test(&r, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap());
        let r = wl1(&[2.0, 1.0]);
        assert!(descent_direction_test(&r, &v(&[1.0, 0.0]), &v(&[-1.0, 1.0])).unwrap());
    }

    #[test]
    fn nuclear_direction_tests() {
        let x: Point = SymMatrix::from_diag(&[1.0, 0.0]).into();
        let flat: Point = SymMatrix::from_diag(&[-1.0, 1.0]).into();
        assert!(descent_direction_test(&Regularizer::Nuclear, &x, &flat).unwrap());
        let up: Point = SymMatrix::from_diag(&[0.0, 1.0]).into();
        assert!(!descent_direction_test(&Regularizer::Nuclear, &x, &up).unwrap());
        // rotating the rank-one matrix keeps its trace-norm to first order
        // but increases it at second order
        let rot: Point = SymMatrix::new(2, vec![0.0, 1.0, 0.0]).unwrap().into();
        assert!(!descent_direction_test(&Regularizer::Nuclear, &x, &rot).unwrap());
    }

    #[test]
    fn atomic_direction_test_matches_l1() {
        let atoms = vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])];
        let r = Regularizer::FiniteAtomic { atoms };
        assert!(descent_direction_test(&r, &v(&[1.0, 0.0]), &v(&[-1.0, 1.0])).unwrap());
        assert!(!descent_direction_test(&r, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap());
        let m = ModelSet::sparse(1, 2).unwrap();
        assert_eq!(
            cone_membership(&r, &m, &v(&[1.0, -0.5])).unwrap(),
            Membership::Witnessed
        );
    }

    #[test]
    fn descent_vector_examples() {
        let r = Regularizer::l1(3);
        let z = build_descent_vector(&r, &v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 1.0])).unwrap();
        assert_eq!(z, v(&[-2.0, 1.0, 1.0]));
        let z = build_descent_vector(&r, &v(&[0.0, 3.0, 0.0]), &v(&[0.0; 3])).unwrap();
        assert_eq!(z, v(&[0.0, -3.0, 0.0]));
        let z = build_descent_vector(&r, &v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(z, v(&[-1.0, 1.0, 0.0]));
        assert!(build_descent_vector(&r, &v(&[0.0; 3]), &v(&[1.0; 3])).is_err());
    }

    #[test]
    fn parsing() {
        let m = ModelSet::sparse(1, 3).unwrap();
        assert_eq!(parse_regularizer("l1", &m).unwrap(), Regularizer::l1(3));
        assert_eq!(parse_regularizer("wl1:1,2,3", &m).unwrap(), wl1(&[1.0, 2.0, 3.0]));
        assert!(parse_regularizer("wl1:1,2", &m).is_err());
        assert!(parse_regularizer("wl1:1,0,1", &m).is_err());
        assert!(parse_regularizer("nuclear", &m).is_err());
        let json = r#"{"type":"weighted_l1","weights":[1,1,1]}"#;
        assert_eq!(parse_regularizer(json, &m).unwrap(), Regularizer::l1(3));
        let lv = ModelSet::levels(1, 1, 2, 3).unwrap();
        assert_eq!(
            parse_regularizer("levels:w1=1,w2=2.5", &lv).unwrap(),
            Regularizer::LevelsL1 {
                w1: 1.0,
                w2: 2.5,
                n1: 2
            }
        );
        let lr = ModelSet::low_rank_sym(1, 3).unwrap();
        assert!(parse_regularizer("l1", &lr).is_err());
        assert_eq!(
            serde_json::to_string(&Regularizer::Nuclear).unwrap(),
            r#"{"type":"nuclear"}"#
        );
    }
}
