//! Interpolating constraint `c_N^(m-1)(eta) = sum_{k=1}^{ell} binom(m,k) (-1)^(k-1) c^(k-1)(eta-bar)`
//! and the rate, gradient function and gap table derived from it.

use serde::{Deserialize, Serialize};

use super::pmm::{c_k, c_k_from_gaps, h_k, HForm};
use super::EdgeRates;
use crate::error::{Error, Result};
use crate::genbinom::BinomialTable;
use crate::lattice::{scan_gaps, Configuration, View};

/// Values within this distance below zero are rounding noise and read as 0.
pub const NEGATIVE_RATE_TOLERANCE: f64 = 1e-12;

/// Rate evaluator for fixed `(m, ell, n)`.
///
/// The constraint depends on the configuration only through the gap class
/// of the edge, so it is tabulated once over left and right distances in
/// `1..=ell+1`; larger distances read the last row or column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateKernel {
    n: usize,
    table: BinomialTable,
    cap: usize,
    // indexed by (left distance - 1) * cap + (right distance - 1)
    gap: Vec<f64>,
}

impl RateKernel {
    /// Kernel for `m` in `(0, 2]`, `2 <= ell <= n`.
    pub fn new(m: f64, ell: usize, n: usize) -> Result<Self> {
        if !(m > 0.0 && m <= 2.0) {
            return Err(Error::InvalidExponent(m));
        }
        Self::from_table(BinomialTable::new(m, ell)?, n)
    }

    /// Kernel that also accepts `m` in `(2, 3)`, where rates can be negative.
    pub fn diagnostic(m: f64, ell: usize, n: usize) -> Result<Self> {
        if !(m > 0.0 && m < 3.0) {
            return Err(Error::InvalidExponent(m));
        }
        Self::from_table(BinomialTable::new(m, ell)?, n)
    }

    /// Kernel built from an arbitrary coefficient table.
    pub fn from_table(table: BinomialTable, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidLatticeSize(n));
        }
        let ell = table.ell();
        if ell > n {
            return Err(Error::TruncationExceedsLattice { ell, n });
        }
        let cap = ell + 1;
        let mut gap = vec![0.0; cap * cap];
        for d0 in 1..=cap {
            for d1 in 1..=cap {
                let v: f64 = (1..=ell)
                    .map(|k| table.weight(k) * c_k_from_gaps(k - 1, d0, d1 + 1) as f64)
                    .sum();
                gap[(d0 - 1) * cap + (d1 - 1)] = clean(v);
            }
        }
        Ok(Self { n, table, cap, gap })
    }

    pub fn m(&self) -> f64 {
        self.table.m()
    }

    pub fn ell(&self) -> usize {
        self.table.ell()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &BinomialTable {
        &self.table
    }

    /// Saturation distance used by gap scans.
    pub fn cap(&self) -> usize {
        self.cap
    }

    /// `c~_N(x0, x1, m)`: constraint on the class with particles at `-x0`
    /// and `x1` (`x0 >= 1`, `x1 >= 2`) and empty sites between them.
    pub fn gap_value(&self, x0: usize, x1: usize) -> f64 {
        assert!(x0 >= 1 && x1 >= 2, "invalid gap class ({x0}, {x1})");
        let d0 = x0.min(self.cap);
        let d1 = (x1 - 1).min(self.cap);
        self.gap[(d0 - 1) * self.cap + (d1 - 1)]
    }

    /// Gap table over `x0 in 1..=size`, `x1 in 2..=size+1`, row-major in `x0`.
    pub fn build_gap_table(&self, size: usize) -> GapTable {
        let values = (1..=size)
            .map(|x0| (2..=size + 1).map(|x1| self.gap_value(x0, x1)).collect())
            .collect();
        GapTable {
            m: self.m(),
            ell: self.ell(),
            values,
        }
    }

    fn check_len(&self, cfg: &Configuration) {
        assert_eq!(cfg.n(), self.n, "configuration size does not match kernel");
    }

    /// Constraint at edge `{edge, edge+1}` read from the gap table, without
    /// the sign check.
    #[inline]
    pub fn constraint_raw(&self, occ: &[u8], edge: usize) -> f64 {
        let g = scan_gaps(occ, edge, self.cap);
        self.gap[(g.x0 - 1) * self.cap + (g.x1 - 2)]
    }

    /// Rate `r_N^(m-1)(tau_edge eta)` from raw occupations.
    #[inline]
    pub fn rate_raw(&self, occ: &[u8], edge: usize) -> f64 {
        let n = occ.len();
        let e = edge % n;
        let e1 = if e + 1 == n { 0 } else { e + 1 };
        if occ[e] == occ[e1] {
            0.0
        } else {
            self.constraint_raw(occ, e)
        }
    }

    /// `c_N^(m-1)(tau_edge eta)`, rejecting negative values.
    pub fn interp_constraint(&self, cfg: &Configuration, edge: usize) -> Result<f64> {
        self.check_len(cfg);
        let v = self.constraint_raw(cfg.occupations(), edge);
        if v < 0.0 {
            return Err(Error::NegativeRate { edge, value: v });
        }
        Ok(v)
    }

    /// `r_N^(m-1)(tau_edge eta) = c_N^(m-1)(tau_edge eta) a_{edge,edge+1}(eta)`.
    pub fn interp_rate(&self, cfg: &Configuration, edge: usize) -> Result<f64> {
        self.check_len(cfg);
        if cfg.exclusion_factor(edge) == 0 {
            return Ok(0.0);
        }
        self.interp_constraint(cfg, edge)
    }

    /// Constraint summed order by order from the PMM(k) constraints of the
    /// flipped view; independent of the gap table.
    pub fn constraint_direct(&self, v: &View<'_>) -> f64 {
        let f = v.flipped();
        (1..=self.ell())
            .map(|k| self.table.weight(k) * c_k(&f, k - 1) as f64)
            .sum()
    }

    /// `h_N^(m-1)(tau_edge eta) = sum_{k=1}^{ell} binom(m,k) (-1)^k h^(k-1)(eta-bar)`.
    pub fn h_interp(&self, cfg: &Configuration, edge: usize) -> Result<f64> {
        self.check_len(cfg);
        let f = cfg.view(edge as i64).flipped();
        let mut sum = 0.0;
        for k in 1..=self.ell() {
            let h = h_k(&f, k - 1, HForm::Telescoped)?;
            sum -= self.table.weight(k) * h as f64;
        }
        Ok(sum)
    }
}

fn clean(v: f64) -> f64 {
    if v < 0.0 && v > -NEGATIVE_RATE_TOLERANCE {
        0.0
    } else {
        v
    }
}

impl EdgeRates for RateKernel {
    fn rate(&self, cfg: &Configuration, x: usize) -> f64 {
        self.rate_raw(cfg.occupations(), x)
    }
}

/// Constraint values on gap classes, as exported to CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub m: f64,
    pub ell: usize,
    /// `values[x0 - 1][x1 - 2]`.
    pub values: Vec<Vec<f64>>,
}

impl GapTable {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, x0: usize, x1: usize) -> f64 {
        self.values[x0 - 1][x1 - 2]
    }

    /// CSV with header `x0,x1,m,ell,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x0,x1,m,ell,value\n");
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.push_str(&format!("{},{},{},{},{}\n", i + 1, j + 2, self.m, self.ell, v));
            }
        }
        out
    }
}
