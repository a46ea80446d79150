//! Seeded random frames and a derivative-free descent over orthonormal frames.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::linalg::orthonormalize;

/// Independent generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// A `d × k` matrix with orthonormal columns from a Gaussian draw.
pub fn random_frame(d: usize, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let q = orthonormalize(&gaussian_matrix(d, k, rng));
        if q.ncols() == k {
            return q;
        }
    }
}

/// `k`-subsets of coordinates as `d × k` frames, or `None` when there are more than `cap`.
pub fn coordinate_frames(d: usize, k: usize, cap: u64) -> Option<Vec<DMatrix<f64>>> {
    if k > d || super::polytope::binomial(d, k) > cap {
        return None;
    }
    let mut out = Vec::new();
    super::polytope::for_each_combination(d, k, |idx| {
        let mut m = DMatrix::zeros(d, k);
        for (j, &i) in idx.iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        out.push(m);
    });
    Some(out)
}

fn rotate(frame: &DMatrix<f64>, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut out = frame.clone();
    for col in 0..frame.ncols() {
        let a = frame[(i, col)];
        let b = frame[(j, col)];
        out[(i, col)] = c * a - s * b;
        out[(j, col)] = s * a + c * b;
    }
    out
}

/// Minimizes `objective` over `d × k` orthonormal frames by coordinate-plane
/// rotations with a shrinking angle. Evaluations returning `None` count as
/// infeasible. Returns the best frame and value.
pub fn rotation_descent<F>(start: DMatrix<f64>, start_value: f64, mut objective: F, max_evals: usize, tol: f64) -> (DMatrix<f64>, f64)
where
    F: FnMut(&DMatrix<f64>) -> Option<f64>,
{
    let d = start.nrows();
    let mut best = start;
    let mut best_val = start_value;
    if d < 2 || best.ncols() == 0 || best.ncols() == d {
        return (best, best_val);
    }
    let mut step = 0.4;
    let mut evals = 0;
    let floor = tol.clamp(1e-12, 1e-4);
    while step > floor && evals < max_evals {
        let mut improved = false;
        'planes: for i in 0..d {
            for j in i + 1..d {
                for sign in [1.0, -1.0] {
                    if evals >= max_evals {
                        break 'planes;
                    }
                    let cand = rotate(&best, i, j, sign * step);
                    evals += 1;
                    if let Some(v) = objective(&cand) {
                        if v < best_val - tol * best_val.abs() {
                            best = cand;
                            best_val = v;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_val)
}
