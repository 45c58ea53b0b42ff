//! Monomial enumeration and multiplication tables for one block of four
//! variables. The same tables serve the x-block and the ẋ-block of a jet.
//!
//! Monomials are enumerated in graded order, so the monomials of degree ≤ d
//! always form a prefix of the list. Triples `(i, j, k)` with
//! `m_i + m_j = m_k` are sorted by `k`; the triples whose result has degree
//! ≤ d are therefore also a prefix.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Largest total degree supported per block.
pub const MAX_DEGREE: usize = 10;

pub(crate) const NONE: u32 = u32::MAX;

pub(crate) struct Tables {
    pub monomials: Vec<[u8; 4]>,
    /// `upto[d]` = number of monomials of degree ≤ d.
    pub upto: Vec<usize>,
    pub triples: Vec<[u32; 3]>,
    /// `group_start[k]..group_start[k + 1]` are the triples with result `k`.
    pub group_start: Vec<usize>,
    /// `raise[i][var]` = index of `m_i + e_var`, or `NONE` past `MAX_DEGREE`.
    pub raise: Vec<[u32; 4]>,
    /// `sum[i * n + j]` = index of `m_i + m_j`, or `NONE`.
    pub sum: Vec<u32>,
    lookup: HashMap<[u8; 4], u32>,
}

impl Tables {
    fn build() -> Self {
        let mut monomials = Vec::new();
        let mut upto = Vec::with_capacity(MAX_DEGREE + 1);
        for d in 0..=MAX_DEGREE {
            // lexicographically descending within a degree
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    for c in (0..=d - a - b).rev() {
                        let e = d - a - b - c;
                        monomials.push([a as u8, b as u8, c as u8, e as u8]);
                    }
                }
            }
            upto.push(monomials.len());
        }
        let lookup: HashMap<[u8; 4], u32> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (*m, i as u32))
            .collect();

        let n = monomials.len();
        let mut triples = Vec::new();
        let mut group_start = Vec::with_capacity(n + 1);
        for (k, mk) in monomials.iter().enumerate() {
            group_start.push(triples.len());
            for (i, mi) in monomials.iter().enumerate().take(k + 1) {
                if (0..4).all(|t| mi[t] <= mk[t]) {
                    let mj = [mk[0] - mi[0], mk[1] - mi[1], mk[2] - mi[2], mk[3] - mi[3]];
                    let j = lookup[&mj];
                    triples.push([i as u32, j, k as u32]);
                }
            }
        }
        group_start.push(triples.len());

        let raise = monomials
            .iter()
            .map(|m| {
                let mut out = [NONE; 4];
                for (var, slot) in out.iter_mut().enumerate() {
                    let mut r = *m;
                    r[var] += 1;
                    if let Some(&idx) = lookup.get(&r) {
                        *slot = idx;
                    }
                }
                out
            })
            .collect();

        let mut sum = vec![NONE; n * n];
        for (i, mi) in monomials.iter().enumerate() {
            for (j, mj) in monomials.iter().enumerate() {
                let s = [mi[0] + mj[0], mi[1] + mj[1], mi[2] + mj[2], mi[3] + mj[3]];
                if let Some(&idx) = lookup.get(&s) {
                    sum[i * n + j] = idx;
                }
            }
        }

        Tables {
            monomials,
            upto,
            triples,
            group_start,
            raise,
            sum,
            lookup,
        }
    }

    pub fn index_of(&self, m: &[u8; 4]) -> Option<usize> {
        self.lookup.get(m).map(|&i| i as usize)
    }

    /// Triples whose result index is below `count(degree)`.
    pub fn triples_upto(&self, degree: usize) -> &[[u32; 3]] {
        &self.triples[..self.group_start[self.upto[degree]]]
    }

    pub fn group(&self, k: usize) -> &[[u32; 3]] {
        &self.triples[self.group_start[k]..self.group_start[k + 1]]
    }

    pub fn n_monomials(&self) -> usize {
        self.monomials.len()
    }
}

pub(crate) fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(Tables::build)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn counts_match_binomials() {
        let t = tables();
        for d in 0..=MAX_DEGREE {
            assert_eq!(t.upto[d], binom(d + 4, 4));
        }
        // pairs of monomials with total degree <= d in 4 vars = monomials in 8 vars
        for d in 0..=MAX_DEGREE {
            assert_eq!(t.triples_upto(d).len(), binom(d + 8, 8));
        }
    }

    #[test]
    fn graded_prefix_property() {
        let t = tables();
        for (i, m) in t.monomials.iter().enumerate() {
            let deg: u8 = m.iter().sum();
            assert!(i < t.upto[deg as usize]);
            if deg > 0 {
                assert!(i >= t.upto[deg as usize - 1]);
            }
        }
    }
}
