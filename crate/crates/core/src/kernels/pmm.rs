//! Integer porous-medium constraints PMM(k) in edge-local coordinates.
//!
//! Products run over window sites that do not wrap onto the edge `{0, 1}`;
//! on a torus shorter than the window, sites repeat and the edge is never read.

use crate::error::{Error, Result};
use crate::lattice::View;

/// `s_j^(k)`: product of `eta(i)` over `i` in `[j-(k+1), j]` minus the edge.
pub fn s_j(v: &View<'_>, k: usize, j: usize) -> u8 {
    debug_assert!((1..=k + 1).contains(&j), "j = {j} out of range for k = {k}");
    let lo = j as i64 - (k as i64 + 1);
    let hi = j as i64;
    for i in lo..=hi {
        if !v.is_edge_site(i) && v.at(i) == 0 {
            return 0;
        }
    }
    1
}

/// `c^(k) = sum_{j=1}^{k+1} s_j^(k)`, in `0..=k+1`; `c^(0) = 1`.
pub fn c_k(v: &View<'_>, k: usize) -> u32 {
    (1..=k + 1).map(|j| s_j(v, k, j) as u32).sum()
}

/// PMM(k) exchange rate `r^(k) = c^(k) a`.
pub fn r_k(v: &View<'_>, k: usize) -> u32 {
    if v.exclusion_factor() == 0 {
        0
    } else {
        c_k(v, k)
    }
}

/// Number of admissible `j` for `c^(k)` of the flipped configuration when
/// the nearest particles around the edge sit at `-x0` and `x1`
/// (see [`crate::lattice::GapPair`]).
pub fn c_k_from_gaps(k: usize, x0: usize, x1: usize) -> u32 {
    let hi = (k as i64 + 1).min(x1 as i64 - 1);
    let lo = 1i64.max(k as i64 + 2 - x0 as i64);
    (hi - lo + 1).max(0) as u32
}

/// Which of the two equivalent expressions of `h^(k)` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HForm {
    /// Difference of two sums of products.
    Sum,
    /// Telescoped expression built from the `s_j^(k)` of shifted windows.
    Telescoped,
}

fn product(v: &View<'_>, lo: i64, hi: i64, skip_origin: bool) -> i64 {
    for i in lo..=hi {
        if skip_origin && v.is_origin(i) {
            continue;
        }
        if v.at(i) == 0 {
            return 0;
        }
    }
    1
}

/// Local function `h^(k)` with `c^(k)(eta) (eta(1) - eta(0)) = h^(k)(tau_1 eta) - h^(k)(eta)`.
///
/// Needs the sites `[-k, k]` to be distinct on the torus.
pub fn h_k(v: &View<'_>, k: usize, form: HForm) -> Result<i64> {
    if v.n() < 2 * k + 1 {
        return Err(Error::WindowTooSmall {
            needed: 2 * k + 1,
            available: v.n(),
        });
    }
    let k1 = k as i64 + 1;
    let value = match form {
        HForm::Sum => {
            let first: i64 = (1..=k1).map(|j| product(v, j - k1, j - 1, false)).sum();
            let second: i64 = (1..k1).map(|j| product(v, j - k1, j, true)).sum();
            first - second
        }
        HForm::Telescoped => {
            let mut h = product(v, 0, k as i64, false);
            for i in 0..k as i64 {
                let grad = v.at(i) as i64 - v.at(i + 1) as i64;
                if grad == 0 {
                    continue;
                }
                let shifted = v.shifted(i);
                let inner: i64 = (1..=(k - i as usize))
                    .map(|j| s_j(&shifted, k, j) as i64)
                    .sum();
                h += grad * inner;
            }
            h
        }
    };
    Ok(value)
}
