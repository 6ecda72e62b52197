//! Occupation configurations on the discrete torus and the elementary maps
//! acting on them.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary occupation array `eta` on the torus `Z / nZ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    occ: Vec<u8>,
}

impl Configuration {
    pub fn empty(n: usize) -> Result<Self> {
        Self::from_occupations(vec![0; n])
    }

    pub fn from_occupations(occ: Vec<u8>) -> Result<Self> {
        if occ.len() < 4 {
            return Err(Error::InvalidLatticeSize(occ.len()));
        }
        if let Some(v) = occ.iter().find(|&&v| v > 1) {
            return Err(Error::Parse(format!("occupation {v} is not 0 or 1")));
        }
        Ok(Self { occ })
    }

    /// Configuration whose site `x` is bit `x` of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Result<Self> {
        Self::from_occupations((0..n).map(|x| ((mask >> x) & 1) as u8).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.occ
            .iter()
            .enumerate()
            .fold(0u64, |acc, (x, &v)| acc | ((v as u64) << x))
    }

    /// Independent Bernoulli draws with `P(eta(x) = 1) = density[x]`.
    pub fn sample<R: Rng + ?Sized>(density: &[f64], rng: &mut R) -> Result<Self> {
        Self::from_occupations(
            density
                .iter()
                .map(|&p| u8::from(rng.random::<f64>() < p))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.occ.len()
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occ
    }

    /// Occupation at `x`, read cyclically.
    #[inline]
    pub fn get(&self, x: i64) -> u8 {
        self.occ[x.rem_euclid(self.occ.len() as i64) as usize]
    }

    pub fn set(&mut self, x: i64, value: bool) {
        let n = self.occ.len() as i64;
        self.occ[x.rem_euclid(n) as usize] = value as u8;
    }

    pub fn particle_count(&self) -> usize {
        self.occ.iter().map(|&v| v as usize).sum()
    }

    /// `a_{x,x+1}(eta)`: 1 when exactly one of `x, x+1` is occupied.
    #[inline]
    pub fn exclusion_factor(&self, x: usize) -> u8 {
        let n = self.occ.len();
        self.occ[x % n] ^ self.occ[(x + 1) % n]
    }

    /// Swaps the occupations of `x` and `x+1` in place.
    pub fn exchange_in_place(&mut self, x: usize) {
        let n = self.occ.len();
        self.occ.swap(x % n, (x + 1) % n);
    }

    /// `eta^{x,x+1}`.
    pub fn exchange(&self, x: usize) -> Self {
        let mut c = self.clone();
        c.exchange_in_place(x);
        c
    }

    /// `eta-bar(x) = 1 - eta(x)`.
    pub fn flip(&self) -> Self {
        Self {
            occ: self.occ.iter().map(|&v| 1 - v).collect(),
        }
    }

    /// `(tau_x eta)(y) = eta(x + y)`.
    pub fn translate(&self, x: i64) -> Self {
        let n = self.occ.len() as i64;
        Self {
            occ: (0..n).map(|y| self.get(x + y)).collect(),
        }
    }

    /// Local view re-centred so that edge `{x, x+1}` becomes `{0, 1}`.
    pub fn view(&self, x: i64) -> View<'_> {
        View {
            occ: &self.occ,
            origin: x.rem_euclid(self.occ.len() as i64),
            flipped: false,
        }
    }

    /// Scans the gaps around edge `{edge, edge+1}`; see [`GapPair`].
    pub fn scan_gaps(&self, edge: usize, cap: usize) -> GapPair {
        scan_gaps(&self.occ, edge, cap)
    }

    /// Like [`Configuration::scan_gaps`], but reports a lattice with no
    /// particle outside the edge as an error when the scan covers the torus.
    pub fn try_scan_gaps(&self, edge: usize, cap: usize) -> Result<GapPair> {
        let g = self.scan_gaps(edge, cap);
        if cap >= self.n() && g.left_saturated() && g.right_saturated() {
            return Err(Error::EmptyLattice { edge });
        }
        Ok(g)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.occ {
            f.write_str(if v == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let occ = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_occupations(occ)
    }
}

/// Borrowed, translated and optionally flipped view of a configuration in
/// edge-local coordinates: index 0 and 1 are the edge sites.
#[derive(Debug, Clone, Copy)]
pub struct View<'a> {
    occ: &'a [u8],
    origin: i64,
    flipped: bool,
}

impl<'a> View<'a> {
    pub fn n(&self) -> usize {
        self.occ.len()
    }

    /// Occupation at edge-local site `i`.
    #[inline]
    pub fn at(&self, i: i64) -> u8 {
        let n = self.occ.len() as i64;
        let v = self.occ[(self.origin + i).rem_euclid(n) as usize];
        if self.flipped {
            1 - v
        } else {
            v
        }
    }

    /// Whether `i` lands on one of the edge sites once wrapped on the torus.
    #[inline]
    pub fn is_edge_site(&self, i: i64) -> bool {
        let r = i.rem_euclid(self.occ.len() as i64);
        r == 0 || r == 1
    }

    /// Whether `i` lands on site 0 once wrapped on the torus.
    #[inline]
    pub fn is_origin(&self, i: i64) -> bool {
        i.rem_euclid(self.occ.len() as i64) == 0
    }

    pub fn flipped(self) -> Self {
        Self {
            flipped: !self.flipped,
            ..self
        }
    }

    /// View of `tau_d` applied to this view.
    pub fn shifted(self, d: i64) -> Self {
        Self {
            origin: (self.origin + d).rem_euclid(self.occ.len() as i64),
            ..self
        }
    }

    /// `a(eta) = eta(0)(1 - eta(1)) + eta(1)(1 - eta(0))`.
    #[inline]
    pub fn exclusion_factor(&self) -> u8 {
        self.at(0) ^ self.at(1)
    }
}

/// Gap description of the neighbourhood of an edge in edge-local coordinates.
///
/// `x0` is the distance from site 0 to the nearest particle on its left, so
/// `eta(-x0) = 1`; `x1` is the site of the nearest particle to the right of
/// site 1, so `eta(x1) = 1` and `x1 >= 2`. Sites that wrap back onto the edge
/// itself count as empty. Distances saturate at `cap`: `x0 <= cap` and
/// `x1 - 1 <= cap`, a saturated value meaning "at least that far".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GapPair {
    pub x0: usize,
    pub x1: usize,
    pub cap: usize,
}

impl GapPair {
    pub fn left_distance(&self) -> usize {
        self.x0
    }

    pub fn right_distance(&self) -> usize {
        self.x1 - 1
    }

    pub fn left_saturated(&self) -> bool {
        self.x0 >= self.cap
    }

    pub fn right_saturated(&self) -> bool {
        self.x1 > self.cap
    }
}

pub(crate) fn scan_gaps(occ: &[u8], edge: usize, cap: usize) -> GapPair {
    let n = occ.len();
    let e0 = edge % n;
    let e1 = (edge + 1) % n;
    let mut x0 = cap;
    let mut site = e0;
    for d in 1..cap {
        site = if site == 0 { n - 1 } else { site - 1 };
        if site != e0 && site != e1 && occ[site] == 1 {
            x0 = d;
            break;
        }
    }
    let mut right = cap;
    let mut site = e1;
    for d in 1..cap {
        site = if site + 1 == n { 0 } else { site + 1 };
        if site != e0 && site != e1 && occ[site] == 1 {
            right = d;
            break;
        }
    }
    GapPair {
        x0,
        x1: right + 1,
        cap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(s: &str) -> Configuration {
        s.parse().unwrap()
    }

    /// Places edge-local sites into a torus of size `n` with the edge at 0.
    fn edge_local(n: usize, occupied: &[i64]) -> Configuration {
        let mut c = Configuration::empty(n).unwrap();
        for &i in occupied {
            c.set(i, true);
        }
        c
    }

    #[test]
    fn exchange_examples() {
        assert_eq!(cfg("1010").exchange(0), cfg("0110"));
        assert_eq!(cfg("1100").exchange(0), cfg("1100"));
        assert_eq!(cfg("1001").exchange(3), cfg("1001"));
        assert_eq!(cfg("1000").exchange(3), cfg("0001"));
    }

    #[test]
    fn flip_examples() {
        assert_eq!(cfg("1011").flip(), cfg("0100"));
        assert_eq!(cfg("11111").flip(), cfg("00000"));
    }

    #[test]
    fn translate_examples() {
        assert_eq!(cfg("1000").translate(1), cfg("0001"));
        let c = cfg("110100");
        assert_eq!(c.translate(0), c);
        assert_eq!(c.translate(6), c);
        assert_eq!(c.translate(-1), c.translate(5));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!("01x1".parse::<Configuration>(), Err(Error::Parse(_))));
        assert_eq!(
            "010".parse::<Configuration>(),
            Err(Error::InvalidLatticeSize(3))
        );
        assert_eq!(cfg("0110101").to_string(), "0110101");
    }

    #[test]
    fn gap_examples() {
        let c = edge_local(16, &[-2, 4]);
        let g = c.scan_gaps(0, 10);
        assert_eq!((g.x0, g.x1), (2, 4));

        let c = edge_local(16, &[-1, 2, 5, -7]);
        let g = c.scan_gaps(0, 10);
        assert_eq!((g.x0, g.x1), (1, 2));

        // edge sites themselves are not part of the window
        let c = edge_local(16, &[0, 1]);
        let g = c.scan_gaps(0, 5);
        assert_eq!((g.x0, g.x1), (5, 6));
        assert!(g.left_saturated() && g.right_saturated());
    }

    #[test]
    fn empty_window_reported() {
        let c = edge_local(8, &[0]);
        assert_eq!(c.try_scan_gaps(0, 8), Err(Error::EmptyLattice { edge: 0 }));
        assert!(c.try_scan_gaps(0, 4).is_ok());
        let c = edge_local(8, &[3]);
        let g = c.try_scan_gaps(0, 8).unwrap();
        // the single particle is seen from both sides
        assert_eq!((g.x0, g.x1), (5, 3));
    }

    #[test]
    fn group_action_on_small_torus() {
        let n = 6;
        for mask in 0..(1u64 << n) {
            let c = Configuration::from_mask(mask, n).unwrap();
            assert_eq!(c.flip().flip(), c);
            for x in 0..n {
                assert_eq!(c.exchange(x).exchange(x), c);
                assert_eq!(c.exchange(x).particle_count(), c.particle_count());
                // tau_x commutes with flip, and conjugates exchanges
                assert_eq!(c.translate(x as i64).flip(), c.flip().translate(x as i64));
                assert_eq!(
                    c.exchange(x).translate(x as i64),
                    c.translate(x as i64).exchange(0)
                );
                for y in 0..n {
                    assert_eq!(
                        c.translate(x as i64).translate(y as i64),
                        c.translate((x + y) as i64)
                    );
                }
            }
        }
    }

    #[test]
    fn random_involutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.random_range(4..40);
            let c = Configuration::sample(&vec![0.5; n], &mut rng).unwrap();
            let x = rng.random_range(0..n);
            assert_eq!(c.exchange(x).exchange(x), c);
            assert_eq!(c.flip().flip(), c);
        }
    }

    proptest! {
        #[test]
        fn gaps_commute_with_translation(
            occ in prop::collection::vec(0u8..2, 4..64),
            x in 0usize..64,
            cap in 1usize..20,
        ) {
            let c = Configuration::from_occupations(occ).unwrap();
            let x = x % c.n();
            prop_assert_eq!(c.translate(x as i64).scan_gaps(0, cap), c.scan_gaps(x, cap));
        }

        #[test]
        fn gaps_ignore_exchange_at_edge(
            occ in prop::collection::vec(0u8..2, 4..64),
            x in 0usize..64,
            cap in 1usize..20,
        ) {
            let c = Configuration::from_occupations(occ).unwrap();
            let x = x % c.n();
            prop_assert_eq!(c.exchange(x).scan_gaps(x, cap), c.scan_gaps(x, cap));
        }

        #[test]
        fn text_round_trip(occ in prop::collection::vec(0u8..2, 4..64)) {
            let c = Configuration::from_occupations(occ).unwrap();
            prop_assert_eq!(c.to_string().parse::<Configuration>().unwrap(), c);
        }
    }
}
