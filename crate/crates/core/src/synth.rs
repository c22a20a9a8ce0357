//! Seeded synthetic instances: dense Gaussian matrices and planted
//! low-rank structures used by the examples, tests and benchmarks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::Matrix;
use crate::rng::rng_from_seed;

/// m×n matrix with i.i.d. standard normal entries.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    Matrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng)).expect("non-empty shape")
}

/// Rank-`rank` signal `W·diag(s)·H` plus Gaussian noise whose Frobenius norm
/// is `noise` times that of the signal.
///
/// The spectrum decays geometrically (`s_j = 0.9^j`) and each column gets a
/// log-normal scale, so columns differ strongly in how much of the signal
/// they carry. Uniform sampling therefore does noticeably worse than a
/// careful choice.
pub fn planted_low_rank(m: usize, n: usize, rank: usize, noise: f64, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    let w: Vec<f64> = (0..m * rank).map(|_| StandardNormal.sample(&mut rng)).collect();
    let h: Vec<f64> = (0..rank * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let col_scale: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z.exp()
        })
        .collect();
    let signal = Matrix::from_fn(m, n, |i, j| {
        let mut acc = 0.0;
        for k in 0..rank {
            acc += w[k * m + i] * 0.9f64.powi(k as i32) * h[j * rank + k];
        }
        acc * col_scale[j]
    })
    .expect("non-empty shape");
    add_noise(signal, noise, &mut rng)
}

fn add_noise(signal: Matrix, level: f64, rng: &mut impl Rng) -> Matrix {
    let (m, n) = signal.shape();
    let raw: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(rng)).collect();
    let raw_norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let factor = if raw_norm > 0.0 { level * signal.frobenius() / raw_norm } else { 0.0 };
    let data = signal
        .as_slice()
        .iter()
        .zip(&raw)
        .map(|(s, e)| s + factor * e)
        .collect();
    Matrix::from_column_major(m, n, data).expect("same shape")
}

/// Instance whose representative columns all sit in one contiguous block.
///
/// Columns `0..generators` are independent Gaussian generator columns. Every
/// other column is a random Gaussian mixture of the generators, scaled so the
/// mixture has about `mix²` times the energy of one generator, plus
/// unit-variance isotropic noise. With a contiguous split the generators
/// all land in the first partition.
pub fn concentrated_generators(m: usize, n: usize, generators: usize, mix: f64, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    let gens: Vec<Vec<f64>> = (0..generators)
        .map(|_| (0..m).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let norm = (generators as f64).sqrt();
    let mut columns = gens.clone();
    for _ in generators..n {
        let weights: Vec<f64> = (0..generators)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mix * z / norm
            })
            .collect();
        let col: Vec<f64> = (0..m)
            .map(|i| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                gens.iter().zip(&weights).map(|(g, w)| g[i] * w).sum::<f64>() + noise
            })
            .collect();
        columns.push(col);
    }
    Matrix::from_columns(&columns).expect("non-empty shape")
}

/// Matrix of exact rank `rank` (generic random factors).
pub fn exact_low_rank(m: usize, n: usize, rank: usize, seed: u64) -> Matrix {
    let w = gaussian_matrix(m, rank, seed);
    let h = gaussian_matrix(rank, n, seed.wrapping_add(1));
    w.mul(&h).expect("conformant")
}
