//! Brute-force local rank for the formulas `⟨x, c⟩ = λ`.
//!
//! The universe is the weak closure of a padded copy of the structure (two
//! extra children at every branching point), so a domain never runs out of
//! fresh witnesses at the requested split width. Partial types are stored
//! as their realization sets, one bit per universe element.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::structures::Seed;

use super::{Provenance, TypeDef, WeakClosure};

/// Conditions `⟨x, p_j⟩ = λ` on parameters of a [`DeltaTypeSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeltaType {
    pub conditions: Vec<(usize, Scalar)>,
}

#[derive(Debug, Clone)]
pub struct DeltaTypeSpace {
    closure: WeakClosure,
    values: BTreeSet<Scalar>,
    /// `table[u][p] = ⟨u, p⟩`
    table: Vec<Vec<Scalar>>,
    basic: Vec<u128>,
}

impl DeltaTypeSpace {
    /// Universe and parameters: the closure of the padded type.
    pub fn padded(typedef: &TypeDef) -> Result<Self> {
        Self::over(WeakClosure::new(&typedef.padded()?)?)
    }

    pub fn over(closure: WeakClosure) -> Result<Self> {
        let n = closure.len();
        if n > 128 {
            return Err(Error::InvalidArgument(format!(
                "universe of {n} elements exceeds 128"
            )));
        }
        let table: Vec<Vec<Scalar>> = (0..n)
            .map(|u| (0..n).map(|p| closure.vector(u).inner_unchecked(closure.vector(p))).collect())
            .collect();
        let values: BTreeSet<Scalar> = table.iter().flatten().cloned().collect();
        let mut basic = BTreeSet::new();
        for p in 0..n {
            for lambda in &values {
                let m = mask_where(n, |u| table[u][p] == *lambda);
                if m != 0 {
                    basic.insert(m);
                }
            }
        }
        Ok(DeltaTypeSpace {
            closure,
            values,
            table,
            basic: basic.into_iter().collect(),
        })
    }

    pub fn closure(&self) -> &WeakClosure {
        &self.closure
    }

    pub fn values(&self) -> &BTreeSet<Scalar> {
        &self.values
    }

    pub fn universe_len(&self) -> usize {
        self.table.len()
    }

    pub fn realizations(&self, q: &DeltaType) -> u128 {
        let n = self.universe_len();
        mask_where(n, |u| q.conditions.iter().all(|(p, l)| self.table[u][*p] == *l))
    }

    /// The type of the element tagged `a` over the bounded closure of
    /// `seeds`: its values on every parameter lying in that subspace.
    pub fn type_over(&self, a: &Provenance, seeds: &[Seed]) -> Result<DeltaType> {
        let c = &self.closure;
        let i = c
            .position_of_tag(a)
            .ok_or_else(|| Error::NotInClosure(a.to_string()))?;
        let d = c.domain(seeds)?;
        let mut conditions = Vec::new();
        for p in 0..c.len() {
            if d.subspace.contains(c.vector(p))? {
                conditions.push((p, self.table[i][p].clone()));
            }
        }
        Ok(DeltaType { conditions })
    }
}

fn mask_where(n: usize, f: impl Fn(usize) -> bool) -> u128 {
    (0..n).filter(|&u| f(u)).fold(0u128, |m, u| m | 1u128 << u)
}

/// Memoized rank computation for one split width.
pub struct ShelahRanker<'a> {
    space: &'a DeltaTypeSpace,
    split_width: usize,
    memo: HashMap<u128, i64>,
}

impl<'a> ShelahRanker<'a> {
    pub fn new(space: &'a DeltaTypeSpace, split_width: usize) -> Result<Self> {
        if split_width < 2 {
            return Err(Error::InvalidArgument("split width must be at least 2".into()));
        }
        Ok(ShelahRanker {
            space,
            split_width,
            memo: HashMap::new(),
        })
    }

    /// `-1` for an inconsistent type.
    pub fn rank(&mut self, q: &DeltaType) -> i64 {
        self.rank_of_set(self.space.realizations(q))
    }

    pub fn rank_of_set(&mut self, d: u128) -> i64 {
        if d == 0 {
            return -1;
        }
        if let Some(&r) = self.memo.get(&d) {
            return r;
        }
        let cands = self.extensions(d);
        let ranked: Vec<(u128, i64)> = cands.into_iter().map(|c| (c, self.rank_of_set(c))).collect();
        let top = ranked.iter().map(|&(_, r)| r).max().unwrap_or(-1);
        let mut r = 0;
        for alpha in (0..=top).rev() {
            let sets: Vec<u128> = ranked.iter().filter(|&&(_, r)| r >= alpha).map(|&(c, _)| c).collect();
            if has_disjoint(&sets, self.split_width) {
                r = alpha + 1;
                break;
            }
        }
        self.memo.insert(d, r);
        r
    }

    /// Proper consistent strengthenings of `d` by finitely many formulas.
    fn extensions(&self, d: u128) -> Vec<u128> {
        let mut seen: HashSet<u128> = HashSet::new();
        let mut out: Vec<u128> = Vec::new();
        for &b in &self.space.basic {
            let c = b & d;
            if c != 0 && c != d && seen.insert(c) {
                out.push(c);
            }
        }
        let mut i = 0;
        while i < out.len() {
            for j in 0..i {
                let c = out[i] & out[j];
                if c != 0 && seen.insert(c) {
                    out.push(c);
                }
            }
            i += 1;
        }
        out.sort_unstable();
        out
    }
}

/// Whether `k` pairwise disjoint sets can be chosen from `sets`.
fn has_disjoint(sets: &[u128], k: usize) -> bool {
    // Shrinking a set keeps disjointness, so inclusion-minimal ones suffice.
    let mut minimal: Vec<u128> = sets
        .iter()
        .copied()
        .filter(|&s| !sets.iter().any(|&t| t != s && t & s == t))
        .collect();
    minimal.sort_by_key(|s| s.count_ones());
    fn go(sets: &[u128], used: u128, k: usize) -> bool {
        if k == 0 {
            return true;
        }
        for (i, &s) in sets.iter().enumerate() {
            if s & used == 0 && go(&sets[i + 1..], used | s, k - 1) {
                return true;
            }
        }
        false
    }
    go(&minimal, 0, k)
}
