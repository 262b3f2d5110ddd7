//! Model sets, their secant sets, projections and the model-induced norm.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, EIG_TOL};
use crate::point::{Point, SymMatrix};

/// A low-dimensional cone of signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSet {
    /// `k`-sparse vectors of length `n`.
    Sparse { k: usize, n: usize },
    /// Symmetric `n × n` matrices of rank at most `r`.
    LowRankSym { r: usize, n: usize },
    /// Vectors of length `n1 + n2` whose first block is `k1`-sparse and
    /// second block is `k2`-sparse.
    Levels { k1: usize, k2: usize, n1: usize, n2: usize },
}

impl ModelSet {
    pub fn sparse(k: usize, n: usize) -> Result<Self> {
        let m = ModelSet::Sparse { k, n };
        m.validate()?;
        Ok(m)
    }

    pub fn low_rank_sym(r: usize, n: usize) -> Result<Self> {
        let m = ModelSet::LowRankSym { r, n };
        m.validate()?;
        Ok(m)
    }

    pub fn levels(k1: usize, k2: usize, n1: usize, n2: usize) -> Result<Self> {
        let m = ModelSet::Levels { k1, k2, n1, n2 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ModelSet::Sparse { k, n } => k >= 1 && k <= n,
            ModelSet::LowRankSym { r, n } => r >= 1 && r <= n,
            ModelSet::Levels { k1, k2, n1, n2 } => k1 >= 1 && k1 <= n1 && k2 >= 1 && k2 <= n2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!(
                "{self}: sparsity must lie in 1..=dimension"
            )))
        }
    }

    /// Whether the secant set is a proper subset of the ambient space, i.e.
    /// whether uniform recovery with a non-invertible operator is possible.
    pub fn recovery_regime(&self) -> bool {
        match *self {
            ModelSet::Sparse { k, n } => 2 * k < n,
            ModelSet::LowRankSym { r, n } => 2 * r < n,
            ModelSet::Levels { k1, k2, n1, n2 } => 2 * k1 < n1 || 2 * k2 < n2,
        }
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self, ModelSet::LowRankSym { .. })
    }

    /// Vector length, or matrix side for `LowRankSym`.
    pub fn side(&self) -> usize {
        match *self {
            ModelSet::Sparse { n, .. } | ModelSet::LowRankSym { n, .. } => n,
            ModelSet::Levels { n1, n2, .. } => n1 + n2,
        }
    }

    pub fn zero_point(&self) -> Point {
        match *self {
            ModelSet::LowRankSym { n, .. } => SymMatrix::zeros(n).into(),
            _ => Point::Vector(vec![0.0; self.side()]),
        }
    }

    pub fn check_point(&self, z: &Point) -> Result<()> {
        let fits = match (self, z) {
            (ModelSet::LowRankSym { n, .. }, Point::SymMatrix(m)) => m.side() == *n,
            (ModelSet::LowRankSym { .. }, Point::Vector(_)) => false,
            (_, Point::Vector(v)) => v.len() == self.side(),
            (_, Point::SymMatrix(_)) => false,
        };
        if fits {
            Ok(())
        } else {
            let expected = if self.is_matrix() {
                format!("symmetric matrix of side {}", self.side())
            } else {
                format!("vector of length {}", self.side())
            };
            Err(Error::mismatch(expected, z.describe()))
        }
    }

    pub fn secant(&self) -> ModelSet {
        match *self {
            ModelSet::Sparse { k, n } => ModelSet::Sparse { k: (2 * k).min(n), n },
            ModelSet::LowRankSym { r, n } => ModelSet::LowRankSym { r: (2 * r).min(n), n },
            ModelSet::Levels { k1, k2, n1, n2 } => ModelSet::Levels {
                k1: (2 * k1).min(n1),
                k2: (2 * k2).min(n2),
                n1,
                n2,
            },
        }
    }

    /// Orthogonal projection onto the model set (lowest-index support on ties).
    pub fn project(&self, z: &Point) -> Result<Point> {
        self.check_point(z)?;
        match (*self, z) {
            (ModelSet::Sparse { k, .. }, Point::Vector(v)) => Ok(Point::Vector(keep_top(v, k))),
            (ModelSet::Levels { k1, k2, n1, .. }, Point::Vector(v)) => {
                let mut out = keep_top(&v[..n1], k1);
                out.extend(keep_top(&v[n1..], k2));
                Ok(Point::Vector(out))
            }
            (ModelSet::LowRankSym { r, .. }, Point::SymMatrix(m)) => {
                let e = eig_sym(m, EIG_TOL)?;
                let mut values = e.values.clone();
                for v in values.iter_mut().skip(r) {
                    *v = 0.0;
                }
                Ok(Point::SymMatrix(e.reconstruct_with(&values)))
            }
            _ => unreachable!("shape checked above"),
        }
    }

    /// Gauge of the convex hull of unit-norm model elements.
    pub fn norm(&self, z: &Point) -> Result<f64> {
        self.check_point(z)?;
        match (*self, z) {
            (ModelSet::Sparse { k, .. }, Point::Vector(v)) => Ok(k_support_norm(v, k)),
            (ModelSet::LowRankSym { r, .. }, Point::SymMatrix(m)) => {
                let e = eig_sym(m, EIG_TOL)?;
                Ok(k_support_norm(&e.values, r))
            }
            (ModelSet::Levels { .. }, _) => Err(Error::Unsupported(
                "model norm is not defined for the levels model".into(),
            )),
            _ => unreachable!("shape checked above"),
        }
    }

    /// Membership test; for matrices the rank is counted with a relative
    /// eigenvalue threshold `tol`.
    pub fn contains(&self, z: &Point, tol: f64) -> Result<bool> {
        self.check_point(z)?;
        let nnz = |v: &[f64]| v.iter().filter(|x| **x != 0.0).count();
        Ok(match (*self, z) {
            (ModelSet::Sparse { k, .. }, Point::Vector(v)) => nnz(v) <= k,
            (ModelSet::Levels { k1, k2, n1, .. }, Point::Vector(v)) => nnz(&v[..n1]) <= k1 && nnz(&v[n1..]) <= k2,
            (ModelSet::LowRankSym { r, .. }, Point::SymMatrix(m)) => {
                let e = eig_sym(m, EIG_TOL)?;
                let scale = e.values.first().map_or(0.0, |v| v.abs());
                e.values.iter().filter(|v| v.abs() > tol * scale).count() <= r
            }
            _ => unreachable!("shape checked above"),
        })
    }
}

impl fmt::Display for ModelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ModelSet::Sparse { k, n } => write!(f, "sparse:k={k},n={n}"),
            ModelSet::LowRankSym { r, n } => write!(f, "lowrank:r={r},n={n}"),
            ModelSet::Levels { k1, k2, n1, n2 } => {
                write!(f, "levels:k1={k1},k2={k2},n1={n1},n2={n2}")
            }
        }
    }
}

/// Parses `kind:key=value,...`, e.g. `sparse:k=2,n=10`, `lowrank:r=1,n=4`,
/// `levels:k1=2,k2=3,n1=8,n2=12`.
impl FromStr for ModelSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let fields = parse_fields(rest)?;
        let get = |key: &str| -> Result<usize> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::InvalidModel(format!("'{s}': missing field '{key}'")))
        };
        let kind = match kind.trim() {
            "sparse" => "sparse",
            "lowrank" | "low_rank_sym" | "low-rank" => "lowrank",
            "levels" => "levels",
            other => return Err(Error::InvalidModel(format!("unknown model kind '{other}'"))),
        };
        let allowed: &[&str] = match kind {
            "sparse" => &["k", "n"],
            "lowrank" => &["r", "n"],
            _ => &["k1", "k2", "n1", "n2"],
        };
        if let Some((k, _)) = fields.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidModel(format!("'{s}': unexpected field '{k}'")));
        }
        match kind {
            "sparse" => ModelSet::sparse(get("k")?, get("n")?),
            "lowrank" => ModelSet::low_rank_sym(get("r")?, get("n")?),
            _ => ModelSet::levels(get("k1")?, get("k2")?, get("n1")?, get("n2")?),
        }
    }
}

fn parse_fields(s: &str) -> Result<Vec<(String, usize)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidModel(format!("expected key=value, got '{pair}'")))?;
            let v = v
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidModel(format!("'{}' is not a non-negative integer", v.trim())))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Indices of the `k` largest magnitudes, ties broken by lowest index,
/// ordered by decreasing magnitude.
pub fn top_k_support(v: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| {
        v[b].abs()
            .partial_cmp(&v[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(k.min(v.len()));
    idx
}

fn keep_top(v: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for i in top_k_support(v, k) {
        out[i] = v[i];
    }
    out
}

/// The k-support norm of `v`: the gauge of the convex hull of unit-norm
/// `k`-sparse vectors.
pub fn k_support_norm(v: &[f64], k: usize) -> f64 {
    let mut a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    a.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    if k == 0 || a.is_empty() {
        return 0.0;
    }
    if k >= a.len() {
        return a.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    // Split index p = k - r - 1: entries before p keep their squares, the
    // tail from p on is averaged over r + 1 slots. Pick the split whose
    // average sits between a[p] and a[p - 1].
    let mut suffix = vec![0.0; a.len() + 1];
    for i in (0..a.len()).rev() {
        suffix[i] = suffix[i + 1] + a[i];
    }
    let mut head_sq = vec![0.0; k + 1];
    for i in 0..k {
        head_sq[i + 1] = head_sq[i] + a[i] * a[i];
    }
    let mut best = (f64::INFINITY, 0.0);
    for r in 0..k {
        let p = k - r - 1;
        let tail = suffix[p];
        let avg = tail / (r + 1) as f64;
        let above = if p == 0 { 0.0 } else { (avg - a[p - 1]).max(0.0) };
        let below = (a[p] - avg).max(0.0);
        let violation = above + below;
        let value = head_sq[p] + tail * tail / (r + 1) as f64;
        if violation == 0.0 {
            return value.sqrt();
        }
        if violation < best.0 {
            best = (violation, value);
        }
    }
    best.1.sqrt()
}

pub fn project_model(model: &ModelSet, z: &Point) -> Result<Point> {
    model.project(z)
}

pub fn secant_model(model: &ModelSet) -> ModelSet {
    model.secant()
}

pub fn model_norm(model: &ModelSet, z: &Point) -> Result<f64> {
    model.norm(z)
}
