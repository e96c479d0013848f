//! Fixed-`(N↑, N↓)` occupation basis.
//!
//! A basis word packs `2N` mode occupations: bit `k < N` is the spin-up
//! orbital at Jordan-Wigner position `k`, bit `N + k` the spin-down one.
//! States are sorted by numeric word value, and `index_of` ranks a word with
//! the combinatorial number system instead of a hash lookup.

use crate::error::{Error, Result};

/// Binomial coefficient table `c[n][k]` for `n, k <= 64`.
fn binomial_table() -> &'static [[u64; 65]; 65] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Box<[[u64; 65]; 65]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut c = Box::new([[0u64; 65]; 65]);
        for n in 0..=64 {
            c[n][0] = 1;
            for k in 1..=n {
                c[n][k] = c[n - 1][k - 1].saturating_add(c[n - 1][k]);
            }
        }
        c
    })
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n || n > 64 {
        return 0;
    }
    binomial_table()[n][k]
}

/// Rank of `word` among words with the same popcount, in ascending numeric order.
fn colex_rank(mut word: u64) -> u64 {
    let c = binomial_table();
    let mut rank = 0;
    let mut k = 1;
    while word != 0 {
        let pos = word.trailing_zeros() as usize;
        rank += c[pos][k];
        k += 1;
        word &= word - 1;
    }
    rank
}

/// All `n`-bit words with popcount `k`, ascending.
fn fixed_popcount_words(n: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::with_capacity(binomial(n, k) as usize);
    let mut w: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while w < limit {
        out.push(w);
        // Gosper's hack: next word with the same popcount.
        let c = w & w.wrapping_neg();
        let r = w + c;
        w = (((r ^ w) >> 2) / c) | r;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    n_sites: usize,
    n_up: usize,
    n_dn: usize,
    states: Vec<u64>,
    up_count: usize,
}

impl SectorBasis {
    /// Enumerates all words with `n_up` spin-up and `n_dn` spin-down electrons.
    pub fn enumerate(n_sites: usize, n_up: usize, n_dn: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > 31 || n_up > n_sites || n_dn > n_sites {
            return Err(Error::InvalidSector { n_sites, n_up, n_dn });
        }
        let ups = fixed_popcount_words(n_sites, n_up);
        let dns = fixed_popcount_words(n_sites, n_dn);
        let mut states = Vec::with_capacity(ups.len() * dns.len());
        for &d in &dns {
            for &u in &ups {
                states.push(u | (d << n_sites));
            }
        }
        Ok(SectorBasis {
            n_sites,
            n_up,
            n_dn,
            states,
            up_count: ups.len(),
        })
    }

    /// Half filling with `S_z = twice_sz / 2`.
    pub fn half_filling(n_sites: usize, twice_sz: usize) -> Result<Self> {
        if twice_sz > n_sites || (n_sites + twice_sz) % 2 != 0 {
            return Err(Error::InvalidSector {
                n_sites,
                n_up: (n_sites + twice_sz) / 2,
                n_dn: n_sites.saturating_sub(twice_sz) / 2,
            });
        }
        Self::enumerate(n_sites, (n_sites + twice_sz) / 2, (n_sites - twice_sz) / 2)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn n_dn(&self) -> usize {
        self.n_dn
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn word(&self, index: usize) -> u64 {
        self.states[index]
    }

    /// Dense index of `word`, or `None` if it lies outside the sector.
    pub fn index_of(&self, word: u64) -> Option<usize> {
        let n = self.n_sites;
        if word >> (2 * n) != 0 {
            return None;
        }
        let mask = (1u64 << n) - 1;
        let up = word & mask;
        let dn = word >> n;
        if up.count_ones() as usize != self.n_up || dn.count_ones() as usize != self.n_dn {
            return None;
        }
        Some((colex_rank(dn) as usize) * self.up_count + colex_rank(up) as usize)
    }

    /// Spin-up mode index of orbital `k`.
    pub fn up_mode(&self, k: usize) -> usize {
        k
    }

    /// Spin-down mode index of orbital `k`.
    pub fn dn_mode(&self, k: usize) -> usize {
        self.n_sites + k
    }
}

/// `(-1)` to the number of occupied modes strictly between `mode_a` and `mode_b`.
pub fn jw_parity(word: u64, mode_a: usize, mode_b: usize) -> f64 {
    debug_assert!(mode_a < mode_b);
    let below_b = if mode_b >= 64 { u64::MAX } else { (1u64 << mode_b) - 1 };
    let upto_a = (1u64 << (mode_a + 1)) - 1;
    if (word & below_b & !upto_a).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies `c†_p c_q` to `word`.
///
/// Annihilation acts first; each operator contributes `(-1)` to the number of
/// occupied modes below it in the word it acts on.
pub fn hop(word: u64, p: usize, q: usize) -> Option<(u64, f64)> {
    let bq = 1u64 << q;
    if word & bq == 0 {
        return None;
    }
    let mid = word ^ bq;
    let bp = 1u64 << p;
    if mid & bp != 0 {
        return None;
    }
    let parity = (mid & (bq - 1)).count_ones() + (mid & (bp - 1)).count_ones();
    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
    Some((mid | bp, sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        assert_eq!(SectorBasis::enumerate(8, 4, 4).unwrap().dim(), 4900);
        assert_eq!(SectorBasis::enumerate(2, 1, 1).unwrap().dim(), 4);
        assert_eq!(SectorBasis::enumerate(10, 5, 5).unwrap().dim(), 63504);
        assert_eq!(SectorBasis::enumerate(3, 0, 0).unwrap().dim(), 1);
    }

    #[test]
    fn invalid_sector() {
        assert!(matches!(SectorBasis::enumerate(4, 5, 0), Err(Error::InvalidSector { .. })));
        assert!(SectorBasis::half_filling(4, 1).is_err());
        assert!(SectorBasis::half_filling(4, 6).is_err());
    }

    #[test]
    fn sorted_and_indexed() {
        let b = SectorBasis::enumerate(6, 2, 3).unwrap();
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        for (k, &w) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(w), Some(k));
            assert_eq!((w & 0x3f).count_ones(), 2);
            assert_eq!((w >> 6).count_ones(), 3);
        }
        assert_eq!(b.index_of(0b111), None);
        assert_eq!(b.index_of(1 << 20), None);
    }

    #[test]
    fn adjacent_parity_is_trivial() {
        for w in 0..(1u64 << 10) {
            for a in 0..9 {
                assert_eq!(jw_parity(w, a, a + 1), 1.0);
            }
        }
    }

    #[test]
    fn hop_sign_matches_parity() {
        for w in 0..(1u64 << 8) {
            for p in 0..8 {
                for q in 0..8 {
                    if p == q {
                        continue;
                    }
                    if let Some((w2, s)) = hop(w, p, q) {
                        assert_eq!(w2.count_ones(), w.count_ones());
                        assert_eq!(s, jw_parity(w, p.min(q), p.max(q)));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn dimension_is_binomial_product(n in 1usize..=12, a in 0usize..=12, b in 0usize..=12) {
            let (a, b) = (a % (n + 1), b % (n + 1));
            let basis = SectorBasis::enumerate(n, a, b).unwrap();
            prop_assert_eq!(basis.dim() as u64, binomial(n, a) * binomial(n, b));
        }

        #[test]
        fn parity_matches_loop_count(word in 0u64..(1 << 12), a in 0usize..12, b in 0usize..12) {
            prop_assume!(a < b);
            let between = (a + 1..b).filter(|&k| word >> k & 1 == 1).count();
            let expected = if between % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(jw_parity(word, a, b), expected);
        }
    }
}
