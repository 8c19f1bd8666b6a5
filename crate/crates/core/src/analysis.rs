//! Gaussian-approximation density evolution and theoretical node FER limits.
//!
//! LLRs on a binary-input AWGN channel are modeled as Gaussian with variance
//! twice the mean, so tracking the mean suffices. The check-branch mean
//! transfer uses the standard two-regime approximation of the phi function
//! (coefficients 0.4527, 0.86, 0.0218 below 10; the asymptotic tail form
//! above), inverted by bisection.

use libm::erfc;
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Mean-transfer phi function, two-regime approximation.
pub fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).exp().min(1.0)
    } else {
        (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
    }
}

/// Inverse of `phi` on (0, 1), via bisection over log-spaced arguments.
pub fn phi_inv(target: f64) -> f64 {
    debug_assert!(target > 0.0 && target < 1.0);
    let mut lo = -40.0f64; // ln x
    let mut hi = 16.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid.exp()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Check-branch (upper child) mean update.
pub fn check_update(mu: f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    let p = phi(mu);
    // 1 - (1 - phi)^2, in product form for accuracy near phi -> 0
    let target = p * (2.0 - p);
    if target >= 1.0 {
        return 0.0;
    }
    phi_inv(target)
}

/// Density-evolution result over the full transform tree.
#[derive(Debug, Clone)]
pub struct GaResult {
    /// Per-leaf LLR means, indexed in natural (u-domain) order.
    pub leaf_means: Vec<f64>,
}

/// Evolve the all-same channel mean down to the N leaves.
pub fn ga_evolve(n: usize, mu_ch: f64) -> Result<GaResult> {
    if !n.is_power_of_two() || n == 0 {
        return Err(Error::InvalidInput(format!("block length {n} is not a power of two")));
    }
    if mu_ch <= 0.0 {
        return Err(Error::InvalidInput("design mean must be positive".into()));
    }
    let mut means = vec![mu_ch];
    while means.len() < n {
        let mut next = Vec::with_capacity(means.len() * 2);
        for &mu in &means {
            next.push(check_update(mu));
            next.push(2.0 * mu);
        }
        means = next;
    }
    Ok(GaResult { leaf_means: means })
}

/// Mean at the leftmost descendant `levels` stages below a node of mean `mu`
/// (repeated check-branch degradation).
pub fn leftmost_descendant_mean(mu: f64, levels: usize) -> f64 {
    let mut m = mu;
    for _ in 0..levels {
        m = check_update(m);
    }
    m
}

/// Bit error probability of a Gaussian LLR with mean mu, variance 2 mu.
pub fn q_of(mu: f64) -> f64 {
    0.5 * erfc(mu.sqrt() / 2.0)
}

/// Standard normal tail probability.
fn q_norm(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn ln_choose(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Binomial probability of exactly k successes out of n at probability p.
fn binom_pmf(n: usize, k: usize, p: f64) -> f64 {
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

/// Frame error rate of plain SC given per-leaf means and the non-frozen set.
pub fn fer_sc(leaf_means: &[f64], info_set: &[usize]) -> f64 {
    let mut log_ok = 0.0;
    for &i in info_set {
        log_ok += (-q_of(leaf_means[i])).ln_1p();
    }
    -log_ok.exp_m1()
}

/// Exact Rate-1 node FER limit at error order omega.
pub fn fer_rate1(node_size: usize, mu: f64, omega: usize) -> Result<f64> {
    if omega > node_size {
        return Err(Error::InvalidInput(format!(
            "error order {omega} exceeds node size {node_size}"
        )));
    }
    let p = q_of(mu);
    let mut ok = 0.0;
    for i in 0..=omega {
        ok += binom_pmf(node_size, i, p);
    }
    Ok((1.0 - ok).clamp(0.0, 1.0))
}

/// Search-span-reduced Rate-1 limit: the node is replaced by its leftmost
/// descendant of size delta. A span smaller than the error order cannot
/// cover the errors, so decoding is guaranteed to fail.
pub fn fer_rate1_approx(node_size: usize, mu: f64, omega: usize, delta: usize) -> Result<f64> {
    if delta > node_size || !delta.is_power_of_two() {
        return Err(Error::InvalidInput(format!("invalid search span {delta}")));
    }
    if delta < omega {
        return Ok(1.0);
    }
    let levels = node_size.trailing_zeros() - delta.trailing_zeros();
    let mu_star = leftmost_descendant_mean(mu, levels as usize);
    fer_rate1(delta, mu_star, omega)
}

/// Adaptive Simpson quadrature with absolute tolerance.
fn simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureTolerance { est: delta.abs() / 15.0, tol });
    }
    let l = simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, err)?;
    let r = simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, err)?;
    Ok(l + r)
}

fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if a >= b {
        return Ok((0.0, 0.0));
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut err = 0.0;
    let v = simpson(f, a, b, fa, fm, fb, whole, tol, 50, &mut err)?;
    Ok((v, err))
}

pub const QUAD_TOL: f64 = 1e-12;

/// Probability that, with `order2w` errors already corrected, the one
/// remaining error sits at the minimum-magnitude index and is removed by the
/// parity fix: the "naturally corrected" odd-error event of an SPC node.
pub fn pr_natural_correction(node_size: usize, mu: f64, sigma: f64, order2w: usize) -> Result<f64> {
    Ok(pr_natural_correction_with_err(node_size, mu, sigma, order2w)?.0)
}

/// As [`pr_natural_correction`], also returning the quadrature error
/// estimate (including the domain-truncation bound).
pub fn pr_natural_correction_with_err(
    node_size: usize,
    mu: f64,
    sigma: f64,
    order2w: usize,
) -> Result<(f64, f64)> {
    if node_size <= order2w + 1 {
        return Err(Error::InvalidInput(format!(
            "node size {node_size} too small for {order2w} corrected errors"
        )));
    }
    let rest = node_size - order2w - 1;
    let ln_c = (node_size as f64).ln() + ln_choose(node_size - 1, order2w);
    let f = move |x: f64| {
        let pdf = (-0.5 * ((x - mu) / sigma).powi(2)).exp()
            / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let tail = q_norm((mu - x) / sigma);
        let inner = 1.0 - q_norm((mu + x) / sigma);
        let ln_terms = if order2w > 0 {
            if tail <= 0.0 {
                return 0.0;
            }
            order2w as f64 * tail.ln()
        } else {
            0.0
        };
        let ln_inner = if rest > 0 {
            if inner <= 0.0 {
                return 0.0;
            }
            rest as f64 * inner.ln()
        } else {
            0.0
        };
        ln_c.exp() * pdf * (ln_terms + ln_inner).exp()
    };
    let lower = (mu - 12.0 * sigma).min(0.0);
    let (v, mut err) = integrate(&f, lower, 0.0, QUAD_TOL)?;
    // truncation bound: everything below the cutoff is inside the Gaussian tail
    err += node_size as f64 * q_norm((mu - lower) / sigma);
    Ok((v.max(0.0), err))
}

/// Exact SPC node FER limit at error order omega.
pub fn fer_spc(node_size: usize, mu: f64, omega: usize) -> Result<f64> {
    if node_size <= 2 * omega + 1 {
        return Err(Error::InvalidInput(format!(
            "node size {node_size} too small for order {omega}"
        )));
    }
    let p = q_of(mu);
    let sigma = (2.0 * mu).sqrt();
    let mut ok = 0.0;
    for i in 0..=2 * omega {
        ok += binom_pmf(node_size, i, p);
    }
    ok += pr_natural_correction(node_size, mu, sigma, 2 * omega)?;
    Ok((1.0 - ok).clamp(0.0, 1.0))
}

/// Search-span-reduced SPC limit. Spans below max(2, 2 omega + 1) cannot
/// hold the required flip pairs, so decoding is guaranteed to fail.
pub fn fer_spc_approx(node_size: usize, mu: f64, omega: usize, delta: usize) -> Result<f64> {
    if delta > node_size || !delta.is_power_of_two() {
        return Err(Error::InvalidInput(format!("invalid search span {delta}")));
    }
    if delta < (2 * omega + 1).max(2) {
        return Ok(1.0);
    }
    let levels = node_size.trailing_zeros() - delta.trailing_zeros();
    let mu_star = leftmost_descendant_mean(mu, levels as usize);
    fer_spc(delta, mu_star, omega)
}
