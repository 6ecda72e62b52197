//! Checks for the rate bounds and monotonicity properties of the PMM(k)
//! family and of the interpolating constraint. Each returns the first
//! violated index.

use serde::{Deserialize, Serialize};

use super::interp::RateKernel;
use super::pmm::{c_k, r_k};
use crate::genbinom::gen_binom;
use crate::lattice::{Configuration, View};

/// Slack for floating-point comparisons.
pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub index: usize,
    pub value: f64,
    pub bound: f64,
}

impl Violation {
    fn new(check: &str, index: usize, value: f64, bound: f64) -> Self {
        Self {
            check: check.to_string(),
            index,
            value,
            bound,
        }
    }
}

pub type Check = std::result::Result<(), Violation>;

/// `sum_{n=1}^{ell} r^(k)(tau_n eta) <= 2 (ell + k)` for `ell >= k`.
///
/// `index` reports the first partial sum that exceeds the bound of its own length.
pub fn check_up_speed(cfg: &Configuration, k: usize, ell: usize) -> Check {
    assert!(ell >= k && k >= 1);
    let bound = 2.0 * (ell + k) as f64;
    let mut sum = 0u64;
    for n in 1..=ell {
        sum += r_k(&cfg.view(n as i64), k) as u64;
    }
    if sum as f64 > bound {
        return Err(Violation::new("up_speed", ell, sum as f64, bound));
    }
    Ok(())
}

/// `c^(k-1)(eta) / k` non-increasing in `k = 1..=k_max`, checked in integers.
pub fn check_r_seq(v: &View<'_>, k_max: usize) -> Check {
    let mut prev = c_k(v, 0) as u64;
    for k in 2..=k_max {
        let cur = c_k(v, k - 1) as u64;
        // cur / k <= prev / (k - 1)
        if cur * (k as u64 - 1) > prev * k as u64 {
            return Err(Violation::new(
                "r_seq",
                k,
                cur as f64 / k as f64,
                prev as f64 / (k - 1) as f64,
            ));
        }
        prev = cur;
    }
    Ok(())
}

/// `|binom(m,k)| c^(k-1)(eta-bar)`, `k >= 2`, non-increasing up to the first
/// `k` where the constraint vanishes.
pub fn check_m_mono(v: &View<'_>, m: f64, ell: usize) -> Check {
    let f = v.flipped();
    let mut prev: Option<f64> = None;
    for k in 2..=ell {
        let c = c_k(&f, k - 1);
        let cur = gen_binom(m, k).abs() * c as f64;
        if let Some(p) = prev {
            if cur > p + SLACK {
                return Err(Violation::new("m_mono", k, cur, p));
            }
        }
        if c == 0 {
            break;
        }
        prev = Some(cur);
    }
    Ok(())
}

/// `c_N^(m-1)(eta) / m` non-increasing along an ascending grid of `m`.
pub fn check_m_mono2(v: &View<'_>, m_grid: &[f64], ell: usize) -> Check {
    let f = v.flipped();
    let counts: Vec<f64> = (1..=ell).map(|k| c_k(&f, k - 1) as f64).collect();
    let mut prev: Option<f64> = None;
    for (i, &m) in m_grid.iter().enumerate() {
        let cur = scaled_constraint(m, &counts);
        if let Some(p) = prev {
            if cur > p + SLACK {
                return Err(Violation::new("m_mono2", i, cur, p));
            }
        }
        prev = Some(cur);
    }
    Ok(())
}

/// `c_N^(m-1) / m` from the constraint counts `c^(k-1)(eta-bar)`, `k = 1..`;
/// uses `binom(m,k) / m = binom(m-1,k-1) / k`.
fn scaled_constraint(m: f64, counts: &[f64]) -> f64 {
    let mut b = 1.0;
    let mut sum = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let k = i + 1;
        if k > 1 {
            b *= (m - 1.0 - (k - 2) as f64) / (k - 1) as f64;
        }
        // binom(m-1, k-1) (-1)^(k-1) / k
        let term = b * c / k as f64;
        sum += if k % 2 == 1 { term } else { -term };
    }
    sum
}

/// Upper and lower rate bounds for the regime of `m`:
///
/// * `m < 1`: `m a <= r <= sum_k |binom(m,k)| k`
/// * `1 < m < 2`: `m delta a + binom(m,2) r^(1) <= r <= m a`
/// * `m = 1`: `r = a`; `m = 2`: `r = r^(1)`
///
/// together with non-negativity.
pub fn check_bounds(cfg: &Configuration, edge: usize, kernel: &RateKernel) -> Check {
    let m = kernel.m();
    let v = cfg.view(edge as i64);
    let a = v.exclusion_factor() as f64;
    let r = kernel.rate_raw(cfg.occupations(), edge);
    if r < 0.0 {
        return Err(Violation::new("nonnegative", edge, r, 0.0));
    }
    let (lo, hi) = if m < 1.0 {
        (m * a, kernel.table().max_weighted_sum())
    } else if m == 1.0 {
        (a, a)
    } else if m < 2.0 {
        let delta = kernel.table().delta().value().unwrap_or(0.0);
        (
            m * delta * a + gen_binom(m, 2) * r_k(&v, 1) as f64,
            m * a,
        )
    } else {
        let r1 = r_k(&v, 1) as f64;
        (r1, r1)
    };
    if r < lo - SLACK {
        return Err(Violation::new("lower_bound", edge, r, lo));
    }
    if r > hi + SLACK {
        return Err(Violation::new("upper_bound", edge, r, hi));
    }
    Ok(())
}

/// Ascending grid of `count` points spanning `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}
