use statrs::function::beta::beta_reg;

use crate::error::{invalid, Result};

/// `P(Binomial(n, q) ≤ k)` through the regularized incomplete beta function.
fn binom_cdf(k: u64, n: u64, q: f64) -> f64 {
    if k >= n || q <= 0.0 {
        return 1.0;
    }
    if q >= 1.0 {
        return 0.0;
    }
    beta_reg((n - k) as f64, (k + 1) as f64, 1.0 - q)
}

/// Exact (Clopper–Pearson) one-sided upper confidence limit for a binomial
/// proportion: the smallest `q` with `P(Binomial(trials, q) ≤ hits) ≤ 1 − level`.
pub fn binomial_upper_ci(hits: u64, trials: u64, level: f64) -> Result<f64> {
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    if hits > trials {
        return Err(invalid(format!("hits ({hits}) exceed trials ({trials})")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if hits == trials {
        return Ok(1.0);
    }
    let target = 1.0 - level;
    let (mut lo, mut hi) = (hits as f64 / trials as f64, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binom_cdf(hits, trials, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}
