//! Elements of the ambient Hilbert space: dense vectors (ℓ² geometry) and
//! symmetric matrices stored as a packed upper triangle (Frobenius geometry).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric `side × side` matrix, packed row-major upper triangle.
///
/// Entry `(i, j)` with `i <= j` lives at `i*side - i*(i-1)/2 + (j - i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    side: usize,
    upper: Vec<f64>,
}

pub(crate) fn packed_len(side: usize) -> usize {
    side * (side + 1) / 2
}

impl SymMatrix {
    pub fn new(side: usize, upper: Vec<f64>) -> Result<Self> {
        if upper.len() != packed_len(side) {
            return Err(Error::mismatch(
                format!("{} packed entries for side {side}", packed_len(side)),
                format!("{} entries", upper.len()),
            ));
        }
        Ok(Self { side, upper })
    }

    pub fn zeros(side: usize) -> Self {
        Self {
            side,
            upper: vec![0.0; packed_len(side)],
        }
    }

    pub fn identity(side: usize) -> Self {
        Self::from_diag(&vec![1.0; side])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from a dense row-major matrix, reading the upper triangle only.
    /// Fails if the lower triangle disagrees by more than `1e-12` relative.
    pub fn from_dense(side: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != side * side {
            return Err(Error::mismatch(
                format!("{} dense entries", side * side),
                format!("{}", dense.len()),
            ));
        }
        let scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut m = Self::zeros(side);
        for i in 0..side {
            for j in i..side {
                let a = dense[i * side + j];
                let b = dense[j * side + i];
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                m.set(i, j, a);
            }
        }
        Ok(m)
    }

    /// `Σ_j values[j] · v_j v_jᵀ` where `v_j` is column `j` of the row-major `vectors`.
    pub fn from_spectrum(values: &[f64], vectors: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n)
                    .map(|c| values[c] * vectors[i * n + c] * vectors[j * n + c])
                    .sum();
                m.set(i, j, s);
            }
        }
        m
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.side - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.index(i, j);
        self.upper[idx] = v;
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.side;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.get(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        d
    }

    pub fn trace(&self) -> f64 {
        (0..self.side).map(|i| self.get(i, i)).sum()
    }
}

/// A point of the ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Vector(Vec<f64>),
    SymMatrix(SymMatrix),
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::Vector(v)
    }
}

impl From<SymMatrix> for Point {
    fn from(m: SymMatrix) -> Self {
        Point::SymMatrix(m)
    }
}

impl Point {
    pub fn vector(entries: &[f64]) -> Self {
        Point::Vector(entries.to_vec())
    }

    pub fn describe(&self) -> String {
        match self {
            Point::Vector(v) => format!("vector of length {}", v.len()),
            Point::SymMatrix(m) => format!("symmetric matrix of side {}", m.side()),
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(v) => Some(v),
            Point::SymMatrix(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&SymMatrix> {
        match self {
            Point::SymMatrix(m) => Some(m),
            Point::Vector(_) => None,
        }
    }

    /// Hilbert inner product: ℓ² for vectors, Frobenius for matrices.
    pub fn dot(&self, other: &Point) -> Result<f64> {
        match (self, other) {
            (Point::Vector(a), Point::Vector(b)) if a.len() == b.len() => Ok(a.iter().zip(b).map(|(x, y)| x * y).sum()),
            (Point::SymMatrix(a), Point::SymMatrix(b)) if a.side == b.side => {
                let n = a.side;
                let mut s = 0.0;
                for i in 0..n {
                    for j in i..n {
                        let p = a.get(i, j) * b.get(i, j);
                        s += if i == j { p } else { 2.0 * p };
                    }
                }
                Ok(s)
            }
            _ => Err(Error::mismatch(self.describe(), other.describe())),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self).expect("same shape")
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn zip_with(&self, other: &Point, f: impl Fn(f64, f64) -> f64) -> Result<Point> {
        match (self, other) {
            (Point::Vector(a), Point::Vector(b)) if a.len() == b.len() => {
                Ok(Point::Vector(a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()))
            }
            (Point::SymMatrix(a), Point::SymMatrix(b)) if a.side == b.side => Ok(Point::SymMatrix(SymMatrix {
                side: a.side,
                upper: a.upper.iter().zip(&b.upper).map(|(&x, &y)| f(x, y)).collect(),
            })),
            _ => Err(Error::mismatch(self.describe(), other.describe())),
        }
    }

    pub fn add(&self, other: &Point) -> Result<Point> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + t * other`
    pub fn axpy(&self, t: f64, other: &Point) -> Result<Point> {
        self.zip_with(other, |a, b| a + t * b)
    }

    pub fn scale(&self, t: f64) -> Point {
        match self {
            Point::Vector(v) => Point::Vector(v.iter().map(|x| t * x).collect()),
            Point::SymMatrix(m) => Point::SymMatrix(SymMatrix {
                side: m.side,
                upper: m.upper.iter().map(|x| t * x).collect(),
            }),
        }
    }

    pub fn zeros_like(&self) -> Point {
        self.scale(0.0)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Point::Vector(v) => v.iter().all(|&x| x == 0.0),
            Point::SymMatrix(m) => m.upper.iter().all(|&x| x == 0.0),
        }
    }

    pub fn same_shape(&self, other: &Point) -> bool {
        match (self, other) {
            (Point::Vector(a), Point::Vector(b)) => a.len() == b.len(),
            (Point::SymMatrix(a), Point::SymMatrix(b)) => a.side == b.side,
            _ => false,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Point::Vector(v) => v.iter().all(|x| x.is_finite()),
            Point::SymMatrix(m) => m.upper.iter().all(|x| x.is_finite()),
        }
    }
}
