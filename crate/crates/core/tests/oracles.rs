//! Worked examples checked against brute-force evaluations written out here,
//! independent of the library's own fast paths.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use binex_core::exactgen::{
    check_irreducibility, current_identity_residual, expect_constraint, frozen_states, ProductMeasure,
};
use binex_core::genbinom::{gen_binom, tail_mass_bounds, truncated_diffusion};
use binex_core::harness::{figure1_export, Ensemble};
use binex_core::kernels::{c_k, c_k_from_gaps, s_j, Pmm};
use binex_core::kmc::{box_width, replica_rng};
use binex_core::pde::{self, Mode, PdeGrid};
use binex_core::{BinomialTable, Configuration, Profile, RateKernel, SimState};

/// Configuration of size `n` with particles at the given edge-local sites
/// around edge `{0, 1}`.
fn local(n: usize, occupied: &[i64]) -> Configuration {
    let mut c = Configuration::empty(n).unwrap();
    for &i in occupied {
        c.set(i, true);
    }
    c
}

#[test]
fn binomial_coefficient_by_direct_product() {
    let direct = 1.5 * 0.5 * -0.5 * -1.5 / 24.0;
    assert!((gen_binom(1.5, 4) - direct).abs() < 1e-15);
    assert_eq!(direct, 0.0234375);
}

#[test]
fn tail_mass_within_sandwich() {
    let delta = BinomialTable::new(1.5, 64).unwrap().delta().value().unwrap();
    let (lo, hi) = tail_mass_bounds(1.5, 64);
    assert!(lo <= delta && delta <= hi, "{lo} <= {delta} <= {hi}");
    // direct tail sum, truncated far out; the terms decay like k^-1.5
    let mut b = 1.0f64;
    let mut tail = 0.0;
    for k in 1..2_000_000usize {
        b *= (0.5 - (k - 1) as f64) / k as f64;
        if k >= 64 {
            tail += b.abs();
        }
    }
    // remainder of sum_{k >= K} c k^-1.5 is about 2c / sqrt(K)
    assert!((delta - tail).abs() < 1e-3, "{delta} vs {tail}");
}

#[test]
fn long_truncation_approaches_power_law() {
    let v = truncated_diffusion(0.5, 10_000, 0.5);
    let direct = 0.5 * 0.5f64.powf(-0.5);
    assert!((v - direct).abs() < 1e-3, "{v} vs {direct}");
}

#[test]
fn gap_pairs_of_worked_configurations() {
    let c = local(16, &[-2, 4]);
    let g = c.scan_gaps(0, 10);
    assert_eq!((g.x0, g.x1), (2, 4));
    let c = local(16, &[-1, 2]);
    let g = c.scan_gaps(0, 10);
    assert_eq!((g.x0, g.x1), (1, 2));
}

#[test]
fn small_constraints_by_hand() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let occ: Vec<u8> = (0..12).map(|_| rng.random_bool(0.5) as u8).collect();
        let c = Configuration::from_occupations(occ.clone()).unwrap();
        let v = c.view(0);
        let at = |i: i64| occ[i.rem_euclid(12) as usize];
        // PMM(2), j = 2: window [-1, 2] minus the edge
        assert_eq!(s_j(&v, 2, 2), at(-1) * at(2));
        assert_eq!(c_k(&v, 0), 1);
        assert_eq!(c_k(&v, 1) as u8, at(-1) + at(2));
    }
    assert_eq!(c_k(&local(12, &[-1, 2]).view(0), 1), 2);
}

#[test]
fn flipped_constraint_from_gaps() {
    assert_eq!(c_k_from_gaps(1, 1, 2), 0);
    assert_eq!(c_k_from_gaps(1, 2, 2), 1);
    // enumerate the sites outside the gap for k = 4, gaps in [1, 6]^2
    let n = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for x0 in 1..=6usize {
        for x1 in 2..=7usize {
            for _ in 0..20 {
                let mut occ: Vec<u8> = (0..n).map(|_| rng.random_bool(0.5) as u8).collect();
                for i in -(x0 as i64) + 1..x1 as i64 {
                    if i != 0 && i != 1 {
                        occ[i.rem_euclid(n as i64) as usize] = 0;
                    }
                }
                occ[(n - x0) % n] = 1;
                occ[x1] = 1;
                let c = Configuration::from_occupations(occ).unwrap();
                assert_eq!(
                    c_k(&c.view(0).flipped(), 4),
                    c_k_from_gaps(4, x0, x1),
                    "x0={x0} x1={x1} eta={c}"
                );
            }
        }
    }
}

#[test]
fn interpolating_constraint_at_the_endpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let one = RateKernel::new(1.0, 8, 32).unwrap();
    let two = RateKernel::new(2.0, 8, 32).unwrap();
    for _ in 0..500 {
        let occ: Vec<u8> = (0..32).map(|_| rng.random_bool(0.4) as u8).collect();
        assert_eq!(one.constraint_raw(&occ, 0), 1.0);
        assert_eq!(two.constraint_raw(&occ, 0), (occ[31] + occ[2]) as f64);
    }
}

#[test]
fn fully_empty_window_attains_the_maximum_below_one() {
    for m in [0.2, 0.5, 0.9] {
        let ell = 12;
        let k = RateKernel::new(m, ell, 40).unwrap();
        let c = local(40, &[0]);
        let expected: f64 = (1..=ell).map(|j| gen_binom(m, j).abs() * j as f64).sum();
        assert!((k.interp_rate(&c, 0).unwrap() - expected).abs() < 1e-12);
        assert!((k.table().max_weighted_sum() - expected).abs() < 1e-12);
    }
}

/// `(x0, x1, value)` rows of an exported table.
type Rows = Vec<(usize, usize, f64)>;

fn read_table(path: &std::path::Path) -> Rows {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect()
}

#[test]
fn exported_rate_tables() {
    let dir = tempfile::tempdir().unwrap();
    let paths = figure1_export(dir.path(), 40).unwrap();
    assert_eq!(paths.len(), 8);
    let tables: Vec<(f64, Rows)> = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
        .iter()
        .zip(&paths)
        .map(|(&m, p)| (m, read_table(p)))
        .collect();
    for (m, t) in &tables {
        assert_eq!(t.len(), 1600, "m={m}");
    }

    assert!(tables[3].1.iter().all(|&(_, _, v)| v == 1.0));

    // m = 2: c^(1) of the configuration with particles at -x0 and x1
    for &(x0, x1, v) in &tables[7].1 {
        let expected = (x0 == 1) as u8 + (x1 == 2) as u8;
        assert_eq!(v, expected as f64, "({x0},{x1})");
    }

    let half = &tables[1].1;
    let at = |x0: usize, x1: usize| half[(x0 - 1) * 40 + (x1 - 2)].2;
    for x0 in 1..=40 {
        for x1 in 2..=41 {
            if x0 < 40 {
                assert!(at(x0 + 1, x1) >= at(x0, x1) - 1e-12);
            }
            if x1 < 41 {
                assert!(at(x0, x1 + 1) >= at(x0, x1) - 1e-12);
            }
        }
    }

    // value / m non-increasing in m at every class
    for w in tables.windows(2) {
        let ((m0, a), (m1, b)) = (&w[0], &w[1]);
        for (p, q) in a.iter().zip(b) {
            assert!(q.2 / m1 <= p.2 / m0 + 1e-12, "({},{}): m={m0} -> {m1}", p.0, p.1);
        }
    }
}

#[test]
fn diffusion_coefficient_of_pmm1_at_half_density() {
    let nu = ProductMeasure::constant(0.5, 10).unwrap();
    assert!((expect_constraint(&nu, 1) - 1.0).abs() < 1e-12);
}

#[test]
fn interpolating_expectation_matches_closed_form() {
    let nu = ProductMeasure::constant(0.4, 12).unwrap();
    let k = RateKernel::new(1.5, 6, 12).unwrap();
    let mut total = 0.0;
    for mask in 0..1u64 << 12 {
        total += nu.mask_weight(mask) * k.constraint_raw(Configuration::from_mask(mask, 12).unwrap().occupations(), 0);
    }
    assert!((total - truncated_diffusion(1.5, 6, 0.4)).abs() < 1e-12);
}

#[test]
fn current_of_a_single_site() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in [0.5, 1.5] {
        let k = RateKernel::new(m, 5, 16).unwrap();
        for _ in 0..50 {
            let c = Configuration::from_occupations((0..16).map(|_| rng.random_bool(0.5) as u8).collect()).unwrap();
            let x = rng.random_range(0..16);
            assert!(current_identity_residual(&k, &c, x).abs() < 1e-12);
        }
    }
}

#[test]
fn irreducible_with_exclusion_part_frozen_without() {
    let k = RateKernel::new(1.5, 4, 8).unwrap();
    assert!(check_irreducibility(8, 3, &k));

    // PMM(1) moves a particle across {x, x+1} only if site x-1 or x+2 holds
    // another one; two particles at distance >= 3 on both sides are stuck
    let mut frozen = HashSet::new();
    for a in 0..8usize {
        for b in a + 1..8 {
            let d = b - a;
            if d >= 3 && 8 - d >= 3 {
                frozen.insert((a, b));
            }
        }
    }
    assert_eq!(frozen.len(), 12);
    let found: HashSet<(usize, usize)> = frozen_states(8, 2, &Pmm(1))
        .iter()
        .map(|c| {
            let s: Vec<usize> = (0..8).filter(|&x| c.get(x as i64) == 1).collect();
            (s[0], s[1])
        })
        .collect();
    assert_eq!(found, frozen);
    assert!(!check_irreducibility(8, 2, &Pmm(1)));
}

#[test]
fn sampled_initial_profile_follows_density() {
    let n = 256;
    let profile = Profile::default();
    let kernel = Arc::new(RateKernel::new(1.5, 8, n).unwrap());
    let a = SimState::init(&profile, kernel.clone(), replica_rng(5, 0)).unwrap();
    let b = SimState::init(&profile, kernel, replica_rng(5, 0)).unwrap();
    assert_eq!(a.configuration(), b.configuration());
    let w = n / 16;
    for start in (0..n).step_by(w) {
        let count: u32 = (start..start + w).map(|x| a.configuration().get(x as i64) as u32).sum();
        let expected: f64 = (start..start + w).map(|x| profile.eval(x as f64 / n as f64)).sum();
        let diff = (count as f64 - expected).abs() / w as f64;
        assert!(diff <= 4.0 / (n as f64).sqrt(), "box {start}: {diff}");
    }
}

#[test]
fn exclusion_process_flattens_to_equilibrium() {
    let n = 64;
    let kernel = Arc::new(RateKernel::new(1.0, 6, n).unwrap());
    let mut s = SimState::init(&Profile::default(), kernel, replica_rng(6, 0)).unwrap();
    let k = s.configuration().particle_count();
    s.advance_to(2.0);
    assert_eq!(s.configuration().particle_count(), k);
    let rho = k as f64 / n as f64;
    let w = 16;
    let sd = (rho * (1.0 - rho) / w as f64 * (n - w) as f64 / (n - 1) as f64).sqrt();
    for start in (0..n).step_by(w) {
        let count: u32 = (start..start + w).map(|x| s.configuration().get(x as i64) as u32).sum();
        let z = (count as f64 / w as f64 - rho).abs() / sd;
        assert!(z <= 3.0, "box {start}: {z:.2} sd");
    }
}

#[test]
fn truncation_error_of_the_pde() {
    let profile = Profile::default();
    let exact = pde::solve(PdeGrid::from_profile(&profile, 1.5, Mode::Exact, 128).unwrap(), &[0.05]).unwrap();
    let cut = pde::solve(PdeGrid::from_profile(&profile, 1.5, Mode::Truncated(40), 128).unwrap(), &[0.05]).unwrap();
    let delta = BinomialTable::new(1.5, 40).unwrap().delta().value().unwrap();
    let sup = exact
        .last()
        .iter()
        .zip(cut.last())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(sup > 0.0 && sup <= delta, "{sup} vs {delta}");
}

fn mean_distance(m: f64, n: usize, times: &[f64], replicas: usize) -> Vec<f64> {
    let profile = Profile::default();
    let eps = 1.0 / 32.0;
    let ell = binex_core::harness::default_ell(n);
    let out = Ensemble {
        kernel: Arc::new(RateKernel::new(m, ell, n).unwrap()),
        profile: &profile,
        times,
        eps,
        replicas,
        seed: 0,
        stream_base: 0,
    }
    .run(None)
    .unwrap();
    let w = box_width(n, eps).unwrap() as f64;
    let traj = pde::solve(PdeGrid::from_profile(&profile, m, Mode::Truncated(ell), 256).unwrap(), times).unwrap();
    times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let state = &traj.states[traj.times.iter().position(|&s| s == t).unwrap()];
            (0..n)
                .map(|x| {
                    let mean: f64 = out.iter().map(|o| o.snapshots[j].density.values[x]).sum::<f64>() / replicas as f64;
                    (mean - pde::interpolate(state, (x as f64 + (w - 1.0) / 2.0) / n as f64)).abs()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

#[test]
fn exclusion_process_approaches_heat_equation() {
    let times = [0.01, 0.05];
    let coarse = mean_distance(1.0, 256, &times, 8);
    let fine = mean_distance(1.0, 512, &times, 8);
    for j in 0..2 {
        // expected ratio 2^-1/2 with sampling noise
        let ratio = fine[j] / coarse[j];
        assert!(ratio < 0.95 && ratio > 0.45, "t={}: {} -> {}", times[j], coarse[j], fine[j]);
    }
}

#[test]
fn initial_distance_is_sampling_noise() {
    let n = 1024;
    let d = mean_distance(1.5, n, &[0.0], 1)[0];
    let bound = 3.0 * (0.25 / (n as f64 / 32.0)).sqrt();
    assert!(d <= bound, "{d} > {bound}");
}
