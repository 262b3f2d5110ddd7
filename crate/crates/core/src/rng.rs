//! Reproducible random streams and chunked parallel execution.
//!
//! Work is cut into fixed-size chunks; chunk `c` draws from the ChaCha8
//! stream `c` under the user seed. Results therefore depend only on
//! `(seed, samples)`, never on how many workers run the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, EIG_TOL};
use crate::models::ModelSet;
use crate::point::{Point, SymMatrix};

/// Samples per chunk.
pub const CHUNK: usize = 4096;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Symmetric matrix whose packed entries are isotropic in Frobenius geometry.
pub fn gaussian_sym<R: Rng>(rng: &mut R, n: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let g: f64 = rng.sample(StandardNormal);
            m.set(i, j, if i == j { g } else { g * std::f64::consts::FRAC_1_SQRT_2 });
        }
    }
    m
}

/// Standard Gaussian in the ambient space of `model`.
pub fn gaussian_point<R: Rng>(rng: &mut R, model: &ModelSet) -> Point {
    match *model {
        ModelSet::LowRankSym { n, .. } => gaussian_sym(rng, n).into(),
        _ => Point::Vector(gaussian_vec(rng, model.side())),
    }
}

/// Uniform point on the unit sphere of the ambient space.
pub fn sphere_point<R: Rng>(rng: &mut R, model: &ModelSet) -> Point {
    loop {
        let g = gaussian_point(rng, model);
        let norm = g.norm();
        if norm > 0.0 {
            return g.scale(1.0 / norm);
        }
    }
}

/// Random `size`-subset of `0..n` in increasing order.
pub fn random_support<R: Rng>(rng: &mut R, n: usize, size: usize) -> Vec<usize> {
    let mut s = rand::seq::index::sample(rng, n, size.min(n)).into_vec();
    s.sort_unstable();
    s
}

fn fill_support<R: Rng>(rng: &mut R, out: &mut [f64], offset: usize, support: &[usize], flat: bool) {
    for &i in support {
        out[offset + i] = if flat {
            if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        } else {
            rng.sample(StandardNormal)
        };
    }
}

/// Random element of the model set. With `flat`, nonzero entries (or
/// eigenvalues) are ±1; otherwise Gaussian.
pub fn model_point<R: Rng>(rng: &mut R, model: &ModelSet, flat: bool) -> Result<Point> {
    match *model {
        ModelSet::Sparse { k, n } => {
            let mut v = vec![0.0; n];
            let s = random_support(rng, n, k);
            fill_support(rng, &mut v, 0, &s, flat);
            Ok(Point::Vector(v))
        }
        ModelSet::Levels { k1, k2, n1, n2 } => {
            let mut v = vec![0.0; n1 + n2];
            let s1 = random_support(rng, n1, k1);
            let s2 = random_support(rng, n2, k2);
            fill_support(rng, &mut v, 0, &s1, flat);
            fill_support(rng, &mut v, n1, &s2, flat);
            Ok(Point::Vector(v))
        }
        ModelSet::LowRankSym { r, n } => {
            let mut values = vec![0.0; n];
            fill_support(rng, &mut values, 0, &(0..r).collect::<Vec<_>>(), flat);
            let basis = eig_sym(&gaussian_sym(rng, n), EIG_TOL)?;
            Ok(Point::SymMatrix(SymMatrix::from_spectrum(&values, &basis.vectors)))
        }
    }
}

/// `(chunk index, chunk length)` for `samples` items.
pub fn chunks(samples: u64) -> impl Iterator<Item = (u64, usize)> {
    let full = samples / CHUNK as u64;
    let rest = (samples % CHUNK as u64) as usize;
    (0..full).map(|c| (c, CHUNK)).chain((rest > 0).then_some((full, rest)))
}

pub fn resolve_workers(workers: usize) -> usize {
    if workers == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        workers
    }
}

/// Runs `job(chunk, len)` over every chunk on `workers` threads (0 = all
/// cores) and returns the per-chunk results in chunk order.
pub fn map_chunks<T, F>(samples: u64, workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, usize) -> Result<T> + Sync,
{
    let list: Vec<(u64, usize)> = chunks(samples).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(workers))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| list.par_iter().map(|&(c, len)| job(c, len)).collect())
}

/// Parallel map over an indexed list of independent jobs, results in order.
pub fn map_items<T, U, F>(items: &[T], workers: usize, job: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(workers))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&job).collect())
}
