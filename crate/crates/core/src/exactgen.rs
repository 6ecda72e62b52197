//! Exact generator action on small tori and the enumeration oracles built
//! on it: stationarity of product measures, irreducibility of the particle
//! hyperplanes, expectations of constraints.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genbinom::{gen_binom, truncated_diffusion};
use crate::kernels::{c_k, EdgeRates, FlippedPmm, RateKernel, Ssep};
use crate::lattice::Configuration;

/// Largest lattice for which the exhaustive sums are allowed.
pub const MAX_EXHAUSTIVE_N: usize = 20;

/// Bernoulli product measure with site densities `rho_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMeasure {
    density: Vec<f64>,
}

impl ProductMeasure {
    pub fn constant(rho: f64, n: usize) -> Result<Self> {
        Self::from_densities(vec![rho; n])
    }

    /// Local-equilibrium measure `rho_x = profile(x / n)`.
    pub fn from_profile(profile: impl Fn(f64) -> f64, n: usize) -> Result<Self> {
        Self::from_densities((0..n).map(|x| profile(x as f64 / n as f64)).collect())
    }

    pub fn from_densities(density: Vec<f64>) -> Result<Self> {
        if density.len() < 4 {
            return Err(Error::InvalidLatticeSize(density.len()));
        }
        if let Some(p) = density.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProfile(format!("density {p} outside [0, 1]")));
        }
        Ok(Self { density })
    }

    pub fn n(&self) -> usize {
        self.density.len()
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    /// `nu(eta) = prod_x rho_x^eta(x) (1 - rho_x)^(1 - eta(x))`.
    pub fn weight(&self, cfg: &Configuration) -> f64 {
        assert_eq!(cfg.n(), self.n());
        cfg.occupations()
            .iter()
            .zip(&self.density)
            .map(|(&v, &p)| if v == 1 { p } else { 1.0 - p })
            .product()
    }

    pub fn mask_weight(&self, mask: u64) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(x, &p)| if (mask >> x) & 1 == 1 { p } else { 1.0 - p })
            .product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        Configuration::sample(&self.density, rng).expect("validated densities")
    }
}

fn check_exhaustive(n: usize) {
    assert!(
        n <= MAX_EXHAUSTIVE_N,
        "exhaustive enumeration limited to n <= {MAX_EXHAUSTIVE_N}, got {n}"
    );
}

/// Every configuration of the torus of size `n`, in mask order.
pub fn all_configurations(n: usize) -> impl Iterator<Item = Configuration> {
    check_exhaustive(n);
    (0..1u64 << n).map(move |mask| Configuration::from_mask(mask, n).expect("n >= 4"))
}

/// `(L f)(eta) = sum_x r_x(eta) (f(eta^{x,x+1}) - f(eta))`.
pub fn apply_generator<R, F>(rates: &R, f: F, cfg: &Configuration) -> f64
where
    R: EdgeRates + ?Sized,
    F: Fn(&Configuration) -> f64,
{
    let f0 = f(cfg);
    let mut out = 0.0;
    for x in 0..cfg.n() {
        let r = rates.rate(cfg, x);
        if r != 0.0 {
            out += r * (f(&cfg.exchange(x)) - f0);
        }
    }
    out
}

/// Rates `r_x + bias` on the right jumps of a single edge. The
/// perturbation breaks exchange symmetry, so product measures stop being
/// invariant; used to check that the stationarity oracle can fail.
#[derive(Debug, Clone)]
pub struct EdgeDefect<R> {
    pub inner: R,
    pub edge: usize,
    pub bias: f64,
}

impl<R: EdgeRates> EdgeRates for EdgeDefect<R> {
    fn rate(&self, cfg: &Configuration, x: usize) -> f64 {
        let base = self.inner.rate(cfg, x);
        let n = cfg.n();
        if x == self.edge % n && cfg.get(x as i64) == 1 && cfg.get(x as i64 + 1) == 0 {
            base + self.bias
        } else {
            base
        }
    }
}

/// Multilinear local function `sum_t coef_t prod_{(x, s) in t} [eta(x) = s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalFunction {
    pub terms: Vec<(f64, Vec<(usize, bool)>)>,
}

impl LocalFunction {
    pub fn eval(&self, cfg: &Configuration) -> f64 {
        self.eval_mask(cfg.to_mask())
    }

    pub fn eval_mask(&self, mask: u64) -> f64 {
        self.terms
            .iter()
            .filter(|(_, sites)| sites.iter().all(|&(x, s)| ((mask >> x) & 1 == 1) == s))
            .map(|(c, _)| c)
            .sum()
    }

    /// Indicator of `eta(x) = a, eta(y) = b`.
    pub fn indicator(x: usize, a: bool, y: usize, b: bool) -> Self {
        Self {
            terms: vec![(1.0, vec![(x, a), (y, b)])],
        }
    }

    /// Random polynomial in the occupations of at most four random sites.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let vars = rng.random_range(1..=4usize.min(n));
        let mut sites: Vec<usize> = Vec::with_capacity(vars);
        while sites.len() < vars {
            let x = rng.random_range(0..n);
            if !sites.contains(&x) {
                sites.push(x);
            }
        }
        // one coefficient per monomial over the chosen sites
        let terms = (1..1u32 << vars)
            .map(|subset| {
                let coef = rng.random_range(-1.0..1.0);
                let mono = sites
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (subset >> i) & 1 == 1)
                    .map(|(_, &x)| (x, true))
                    .collect();
                (coef, mono)
            })
            .collect();
        Self { terms }
    }
}

/// `count` random polynomials followed by all two-site indicators.
pub fn test_suite<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<LocalFunction> {
    let mut out: Vec<LocalFunction> = (0..count).map(|_| LocalFunction::random(n, rng)).collect();
    for x in 0..n {
        for y in x + 1..n {
            for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
                out.push(LocalFunction::indicator(x, a, y, b));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    /// `|sum_eta nu(eta) (L f)(eta)|` for each function of the suite.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Residuals `|E_nu[L f]|` over the suite by exhaustive enumeration.
pub fn check_stationarity<R: EdgeRates + ?Sized>(
    measure: &ProductMeasure,
    rates: &R,
    suite: &[LocalFunction],
) -> StationarityReport {
    let n = measure.n();
    check_exhaustive(n);
    let mut sums = vec![0.0; suite.len()];
    let mut edge_rates = vec![0.0; n];
    for mask in 0..1u64 << n {
        let w = measure.mask_weight(mask);
        if w == 0.0 {
            continue;
        }
        let cfg = Configuration::from_mask(mask, n).expect("n >= 4");
        for (x, r) in edge_rates.iter_mut().enumerate() {
            *r = rates.rate(&cfg, x);
        }
        for (f, sum) in suite.iter().zip(sums.iter_mut()) {
            let f0 = f.eval_mask(mask);
            let mut lf = 0.0;
            for (x, &r) in edge_rates.iter().enumerate() {
                if r != 0.0 {
                    let y = (x + 1) % n;
                    let swapped = mask ^ ((1 << x) | (1 << y));
                    lf += r * (f.eval_mask(swapped) - f0);
                }
            }
            *sum += w * lf;
        }
    }
    let residuals: Vec<f64> = sums.iter().map(|s| s.abs()).collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    StationarityReport {
        residuals,
        max_residual,
    }
}

/// Number of configurations with `k` particles reachable from the leftmost
/// packed one through exchanges of positive rate.
pub fn reachable_states<R: EdgeRates + ?Sized>(n: usize, k: usize, rates: &R) -> usize {
    check_exhaustive(n);
    assert!(k <= n);
    let start: u64 = (1u64 << k) - 1;
    let mut seen = vec![false; 1 << n];
    seen[start as usize] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(mask) = queue.pop_front() {
        let cfg = Configuration::from_mask(mask, n).expect("n >= 4");
        for x in 0..n {
            if rates.rate(&cfg, x) <= 0.0 {
                continue;
            }
            let next = mask ^ ((1 << x) | (1 << ((x + 1) % n)));
            if !seen[next as usize] {
                seen[next as usize] = true;
                count += 1;
                queue.push_back(next);
            }
        }
    }
    count
}

/// Whether the hyperplane of `k` particles is a single communicating class.
pub fn check_irreducibility<R: EdgeRates + ?Sized>(n: usize, k: usize, rates: &R) -> bool {
    reachable_states(n, k, rates) == binomial_count(n, k)
}

/// Configurations with `k` particles on which every rate vanishes.
pub fn frozen_states<R: EdgeRates + ?Sized>(n: usize, k: usize, rates: &R) -> Vec<Configuration> {
    all_configurations(n)
        .filter(|c| c.particle_count() == k)
        .filter(|c| (0..n).all(|x| rates.rate(c, x) <= 0.0))
        .collect()
}

fn binomial_count(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn expect<F: Fn(&Configuration) -> f64>(measure: &ProductMeasure, f: F) -> f64 {
    check_exhaustive(measure.n());
    all_configurations(measure.n())
        .map(|c| {
            let w = measure.weight(&c);
            if w == 0.0 {
                0.0
            } else {
                w * f(&c)
            }
        })
        .sum()
}

/// `E_nu[c^(k)(eta)]` at edge `{0, 1}` by enumeration.
pub fn expect_constraint(measure: &ProductMeasure, k: usize) -> f64 {
    expect(measure, |c| c_k(&c.view(0), k) as f64)
}

/// `E_nu[c_N^(m-1)(eta)]` at edge `{0, 1}` by enumeration.
pub fn expect_interp_constraint(measure: &ProductMeasure, kernel: &RateKernel) -> f64 {
    expect(measure, |c| kernel.constraint_raw(c.occupations(), 0))
}

/// `E_{nu_rho}[c^(k)] = (k + 1) rho^k`.
pub fn constraint_mean(rho: f64, k: usize) -> f64 {
    (k + 1) as f64 * rho.powi(k as i32)
}

/// `E_{nu_rho}[c_N^(m-1)]`, the truncated diffusion coefficient.
pub fn interp_constraint_mean(m: f64, ell: usize, rho: f64) -> f64 {
    truncated_diffusion(m, ell, rho)
}

/// Monte Carlo estimate `(mean, standard error)` of `E_{nu_rho}[c^(k)]`
/// from `samples` independent windows.
pub fn sample_constraint<R: Rng + ?Sized>(rho: f64, k: usize, samples: usize, rng: &mut R) -> (f64, f64) {
    let n = (2 * k + 4).max(4);
    let density = vec![rho; n];
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..samples {
        let c = Configuration::sample(&density, rng).expect("n >= 4");
        let v = c_k(&c.view(0), k) as f64;
        sum += v;
        sq += v * v;
    }
    let s = samples as f64;
    let mean = sum / s;
    let var = (sq / s - mean * mean).max(0.0) * s / (s - 1.0);
    (mean, (var / s).sqrt())
}

/// `L(eta(x)) - grad^-(c_N^(m-1)(tau_x eta) grad^+ eta(x))`.
pub fn current_identity_residual(kernel: &RateKernel, cfg: &Configuration, x: usize) -> f64 {
    let n = cfg.n();
    let lhs = apply_generator(kernel, |c| c.get(x as i64) as f64, cfg);
    let flux = |y: usize| {
        let c = kernel.constraint_raw(cfg.occupations(), y);
        c * (cfg.get(y as i64 + 1) as f64 - cfg.get(y as i64) as f64)
    };
    lhs - (flux(x) - flux((x + n - 1) % n))
}

/// `L f` minus its decomposition `m L^SSEP - sign(m-1) sum_{k>=2} |binom(m,k)| L^{flipped PMM(k-1)}`.
pub fn decomposition_residual<F>(kernel: &RateKernel, f: F, cfg: &Configuration) -> f64
where
    F: Fn(&Configuration) -> f64 + Copy,
{
    let m = kernel.m();
    let sign = if m > 1.0 {
        1.0
    } else if m < 1.0 {
        -1.0
    } else {
        0.0
    };
    let mut parts = m * apply_generator(&Ssep, f, cfg);
    for k in 2..=kernel.ell() {
        parts -= sign * gen_binom(m, k).abs() * apply_generator(&FlippedPmm(k - 1), f, cfg);
    }
    apply_generator(kernel, f, cfg) - parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Pmm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_sum_to_one() {
        let m = ProductMeasure::from_profile(|u| 0.5 + 0.3 * (std::f64::consts::TAU * u).cos(), 12).unwrap();
        let total: f64 = all_configurations(12).map(|c| m.weight(&c)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_densities() {
        assert!(matches!(
            ProductMeasure::constant(1.2, 8),
            Err(Error::InvalidProfile(_))
        ));
    }

    #[test]
    fn particle_count_is_conserved() {
        let kern = RateKernel::new(1.5, 4, 8).unwrap();
        for c in all_configurations(8) {
            let lf = apply_generator(&kern, |c| c.particle_count() as f64, &c);
            assert_eq!(lf, 0.0);
        }
    }

    #[test]
    fn indicator_generator_by_hand() {
        // N = 6, SSEP, f = 1{eta = 110000}: from 101000 the only way in is
        // the exchange at edge 1, from 010001 the one at edge 5; from 110000 itself two edges move away
        let kern = RateKernel::new(1.0, 4, 6).unwrap();
        let target: Configuration = "110000".parse().unwrap();
        let f = |c: &Configuration| (*c == target) as u8 as f64;
        assert_eq!(apply_generator(&kern, f, &"101000".parse().unwrap()), 1.0);
        assert_eq!(apply_generator(&kern, f, &"010001".parse().unwrap()), 1.0);
        assert_eq!(apply_generator(&kern, f, &"011000".parse().unwrap()), 0.0);
        assert_eq!(apply_generator(&kern, f, &target), -2.0);

        // same at m = 2: from 101000 the jump at edge 1 needs eta(0) or eta(3)
        let kern = RateKernel::new(2.0, 4, 6).unwrap();
        assert_eq!(apply_generator(&kern, f, &"101000".parse().unwrap()), 1.0);
        assert_eq!(apply_generator(&kern, f, &target), -2.0);
    }

    #[test]
    fn current_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &m in &[0.3, 1.0, 1.6, 2.0] {
            let kern = RateKernel::new(m, 6, 16).unwrap();
            for _ in 0..100 {
                let c = Configuration::sample(&[0.5; 16], &mut rng).unwrap();
                for x in 0..16 {
                    assert!(current_identity_residual(&kern, &c, x).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn stationarity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let suite = test_suite(8, 20, &mut rng);
        for &(m, ell, rho) in &[(1.5, 4, 0.3), (0.5, 8, 0.7)] {
            let kern = RateKernel::new(m, ell, 8).unwrap();
            let rep = check_stationarity(&ProductMeasure::constant(rho, 8).unwrap(), &kern, &suite);
            assert!(rep.max_residual <= 1e-12, "{}", rep.max_residual);
        }
    }

    #[test]
    fn degenerate_measures_are_fixed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let suite = test_suite(8, 5, &mut rng);
        let kern = RateKernel::new(0.5, 4, 8).unwrap();
        for rho in [0.0, 1.0] {
            let rep = check_stationarity(&ProductMeasure::constant(rho, 8).unwrap(), &kern, &suite);
            assert_eq!(rep.max_residual, 0.0);
        }
    }

    #[test]
    fn edge_defect_breaks_stationarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let suite = test_suite(8, 20, &mut rng);
        let kern = RateKernel::new(1.5, 4, 8).unwrap();
        let leaky = EdgeDefect {
            inner: kern,
            edge: 0,
            bias: 0.5,
        };
        let rep = check_stationarity(&ProductMeasure::constant(0.3, 8).unwrap(), &leaky, &suite);
        assert!(rep.max_residual > 1e-3);
    }

    #[test]
    fn irreducibility() {
        let kern = RateKernel::new(1.5, 4, 8).unwrap();
        assert!(check_irreducibility(8, 3, &kern));
        assert!(check_irreducibility(8, 0, &kern));
        assert_eq!(reachable_states(8, 0, &kern), 1);
        // pure PMM(1) freezes particles at mutual distance >= 3; three
        // particles on eight sites cannot all be that far apart
        assert!(check_irreducibility(8, 3, &Pmm(1)));
        assert!(frozen_states(8, 3, &Pmm(1)).is_empty());
        assert!(!check_irreducibility(8, 2, &Pmm(1)));
        assert_eq!(frozen_states(8, 2, &Pmm(1)).len(), 4 + 8);
        assert!(check_irreducibility(8, 2, &kern));
        assert!(frozen_states(8, 2, &kern).is_empty());
        assert_eq!(reachable_states(8, 1, &Pmm(1)), 1);
    }

    #[test]
    fn constraint_expectations() {
        let half = ProductMeasure::constant(0.5, 8).unwrap();
        assert!((expect_constraint(&half, 1) - 1.0).abs() < 1e-12);
        assert!((expect_constraint(&half, 0) - 1.0).abs() < 1e-12);
        let m = ProductMeasure::constant(0.4, 12).unwrap();
        for k in 0..=5 {
            assert!((expect_constraint(&m, k) - constraint_mean(0.4, k)).abs() < 1e-12);
        }
        let kern = RateKernel::new(1.5, 6, 12).unwrap();
        let exact = expect_interp_constraint(&m, &kern);
        assert!((exact - interp_constraint_mean(1.5, 6, 0.4)).abs() < 1e-12);
    }

    #[test]
    fn constraint_sampling_within_three_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for k in [1, 3] {
            let (mean, se) = sample_constraint(0.6, k, 100_000, &mut rng);
            assert!((mean - constraint_mean(0.6, k)).abs() <= 3.0 * se, "k={k}");
        }
    }

    #[test]
    fn decomposition_matches_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for &m in &[0.25, 0.75, 1.0, 1.5, 2.0] {
            let kern = RateKernel::new(m, 5, 10).unwrap();
            for _ in 0..20 {
                let f = LocalFunction::random(10, &mut rng);
                let c = Configuration::sample(&[0.5; 10], &mut rng).unwrap();
                let r = decomposition_residual(&kern, |c| f.eval(c), &c);
                assert!(r.abs() < 1e-12, "m={m} residual={r}");
            }
        }
    }
}
