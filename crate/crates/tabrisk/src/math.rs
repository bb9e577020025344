//! Small numeric helpers shared across modules: link functions, a dense
//! SPD solver for Newton steps, quantiles, and seeded RNG streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`sigmoid`]. Input must be in (0, 1).
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Two-sided p-value for a standard normal statistic.
pub fn two_sided_normal_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Upper tail of the chi-squared distribution with 1 degree of freedom.
pub fn chi_squared_1df_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        libm::erfc((x / 2.0).sqrt())
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` (row-major n×n)
/// via Cholesky. Returns `None` when a pivot is not positive.
pub fn solve_spd(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Penalized Newton fit of `P(y=1|x) = sigmoid(intercept + slope * x)`.
///
/// Returns `(intercept, slope)` of the best iterate. The ridge penalty
/// keeps the fit finite on separable inputs.
pub fn fit_scalar_logistic(
    x: &[f64],
    y: &[u8],
    l2: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mut a = 0.0_f64; // intercept
    let mut b = 0.0_f64; // slope

    let objective = |a: f64, b: f64| -> f64 {
        let mut nll = 0.0;
        for (&xi, &yi) in x.iter().zip(y) {
            let z = a + b * xi;
            // -log likelihood via a stable softplus(z) = ln(1 + e^z)
            nll += if z >= 0.0 { z + (1.0 + (-z).exp()).ln() } else { (1.0 + z.exp()).ln() };
            if yi == 1 {
                nll -= z;
            }
        }
        nll + 0.5 * l2 * (a * a + b * b)
    };

    let mut obj = objective(a, b);
    for _ in 0..max_iter {
        let (mut g0, mut g1) = (l2 * a, l2 * b);
        let (mut h00, mut h01, mut h11) = (l2, 0.0, l2);
        for (&xi, &yi) in x.iter().zip(y) {
            let p = sigmoid(a + b * xi);
            let r = p - yi as f64;
            let w = (p * (1.0 - p)).max(1e-12);
            g0 += r;
            g1 += r * xi;
            h00 += w;
            h01 += w * xi;
            h11 += w * xi * xi;
        }
        if (g0 * g0 + g1 * g1).sqrt() <= tol * n.max(1.0) {
            break;
        }
        let det = h00 * h11 - h01 * h01;
        if det.abs() < 1e-300 {
            break;
        }
        let da = (h11 * g0 - h01 * g1) / det;
        let db = (h00 * g1 - h01 * g0) / det;
        // damped step: halve until the penalized objective stops increasing
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (na, nb) = (a - step * da, b - step * db);
            let nobj = objective(na, nb);
            if nobj <= obj + 1e-12 {
                a = na;
                b = nb;
                obj = nobj;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (a, b)
}

/// Linear-interpolation quantile (the common "type 7" convention) of an
/// already sorted slice. `q` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Deterministic ChaCha stream derived from a master seed and a stream
/// index, so per-item randomness is independent of scheduling order.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    // fixed tweak bytes keep (seed, stream) and (stream, seed) collisions apart
    key[16..24].copy_from_slice(&0x9e37_79b9_7f4a_7c15_u64.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Kahan compensated accumulator; keeps long sums accurate to a few ulps.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Splits `a / b` into a rounded head plus an exact-residual tail, so
/// `q + r` carries the quotient to roughly twice f64 precision. Both
/// inputs must themselves be exact (integer counts qualify).
pub fn split_quotient(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    let r = f64::mul_add(-q, b, a) / b;
    (q, r)
}

/// Two-float accumulator: the head carries the running sum, the tail the
/// rounding errors, for about 106 bits together. The final fold back to
/// one f64 is then the only rounding that matters for sums of a few
/// hundred exactly-characterized terms, which is what it takes for a
/// result like 1/2 + 1/3 to land on the correctly rounded 5/6 instead of
/// losing a round-to-even tie one ulp short.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtendedSum {
    hi: f64,
    lo: f64,
}

impl ExtendedSum {
    pub fn add(&mut self, v: f64) {
        let s = self.hi + v;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (v - bb);
        self.hi = s;
        self.lo += err;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}
