//! Seeded random matrices. All randomness in the crate flows through here.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{decomp, ComplexMatrix};

/// Maximum number of draws made by [`random_invertible`].
pub const MAX_INVERTIBLE_ATTEMPTS: u32 = 64;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-independent child seed for index `index` under `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Standard complex normal sample, `E|z|² = 1`.
pub fn complex_normal(rng: &mut ChaCha20Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix_from(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let entries = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, entries).expect("normal samples are finite")
}

/// Matrix with i.i.d. standard complex normal entries.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    random_matrix_from(&mut rng(seed), rows, cols)
}

/// Random `n x n` matrix of rank exactly `rank` (generically), as a product
/// of `n x rank` and `rank x n` Gaussian factors. Rank zero gives the zero matrix.
pub fn random_rank(n: usize, rank: usize, seed: u64) -> ComplexMatrix {
    if rank == 0 {
        return ComplexMatrix::zeros(n, n);
    }
    let mut r = rng(seed);
    let left = random_matrix_from(&mut r, n, rank);
    let right = random_matrix_from(&mut r, rank, n);
    &left * &right
}

/// Outcome of [`random_invertible_with_info`].
#[derive(Debug, Clone)]
pub struct InvertibleDraw {
    pub matrix: ComplexMatrix,
    pub attempts: u32,
    pub condition: f64,
}

/// `λI − R` with `R` Gaussian and `λ = 2‖R‖₂`, so `σ_min ≥ ‖R‖₂` and the
/// condition number is at most 3. Re-draws with sub-seed `(seed, attempt)`
/// when the condition number exceeds `cond_max`, up to
/// [`MAX_INVERTIBLE_ATTEMPTS`] draws; the last draw is returned otherwise.
pub fn random_invertible_with_info(n: usize, seed: u64, cond_max: f64) -> InvertibleDraw {
    assert!(n >= 1, "random_invertible needs n >= 1");
    let mut last = None;
    for attempt in 0..MAX_INVERTIBLE_ATTEMPTS {
        let s = if attempt == 0 {
            seed
        } else {
            sub_seed(seed, attempt as u64)
        };
        let r = random_matrix(n, n, s);
        let norm = r.spectral_norm();
        let lambda = if norm > 0.0 { 2.0 * norm } else { 1.0 };
        let x = &ComplexMatrix::identity(n).scale_real(lambda) - &r;
        let sv = decomp::singular_values(&x);
        let condition = sv[0] / sv[n - 1];
        let draw = InvertibleDraw {
            matrix: x,
            attempts: attempt + 1,
            condition,
        };
        if condition <= cond_max {
            return draw;
        }
        last = Some(draw);
    }
    last.expect("at least one attempt")
}

pub fn random_invertible(n: usize, seed: u64, cond_max: f64) -> ComplexMatrix {
    random_invertible_with_info(n, seed, cond_max).matrix
}

/// Log-uniform nonzero real scalar in `[0.5, 2]`.
pub fn log_uniform_scalar(rng: &mut ChaCha20Rng) -> f64 {
    use rand::Rng;
    let t: f64 = rng.random_range(-1.0..=1.0);
    2f64.powf(t)
}
