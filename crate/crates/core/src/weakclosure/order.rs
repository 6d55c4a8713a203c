//! The projection order `≤_𝒫`, its mirror `≤₁`, foundation ranks and
//! chain lengths.

use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::subspaces::Subspace;

use super::WeakClosure;

/// A strict partial order on `0..n`; `lt[i][j]` means `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    lt: Vec<Vec<bool>>,
}

impl Poset {
    /// Checks that `lt` is square, irreflexive and transitive.
    pub fn new(lt: Vec<Vec<bool>>) -> Result<Self> {
        let n = lt.len();
        if lt.iter().any(|r| r.len() != n) {
            return Err(Error::MalformedPoset("relation is not square".into()));
        }
        for i in 0..n {
            if lt[i][i] {
                return Err(Error::MalformedPoset(format!("{i} < {i}")));
            }
            for j in 0..n {
                if !lt[i][j] {
                    continue;
                }
                for k in 0..n {
                    if lt[j][k] && !lt[i][k] {
                        return Err(Error::MalformedPoset(format!(
                            "{i} < {j} < {k} but not {i} < {k}"
                        )));
                    }
                }
            }
        }
        Ok(Poset { lt })
    }

    /// Transitive closure of a relation; cycles are rejected.
    pub fn generated_by(mut rel: Vec<Vec<bool>>) -> Result<Self> {
        let n = rel.len();
        if rel.iter().any(|r| r.len() != n) {
            return Err(Error::MalformedPoset("relation is not square".into()));
        }
        for k in 0..n {
            for i in 0..n {
                if rel[i][k] {
                    for j in 0..n {
                        if rel[k][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
        }
        Self::new(rel)
    }

    pub fn len(&self) -> usize {
        self.lt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lt.is_empty()
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        self.lt[i][j]
    }

    pub fn relation(&self) -> &[Vec<bool>] {
        &self.lt
    }

    pub fn transpose(&self) -> Poset {
        let n = self.len();
        Poset {
            lt: (0..n).map(|i| (0..n).map(|j| self.lt[j][i]).collect()).collect(),
        }
    }

    /// Strict pairs `(i, j)` with `i < j`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.lt[i][j])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMap {
    ranks: Vec<usize>,
    top: usize,
}

impl RankMap {
    pub fn rank(&self, i: usize) -> usize {
        self.ranks[i]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn top(&self) -> usize {
        self.top
    }
}

/// `rank(x) = 0` on minimal elements, else one more than the largest rank
/// strictly below.
pub fn foundation_rank(p: &Poset) -> Result<RankMap> {
    let n = p.len();
    // Fewer predecessors first: in a strict order every predecessor of x
    // has strictly fewer predecessors than x.
    let preds: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| p.lt(j, i)).count()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| preds[i]);
    let mut ranks = vec![0; n];
    for &i in &idx {
        ranks[i] = (0..n)
            .filter(|&j| p.lt(j, i))
            .map(|j| ranks[j] + 1)
            .max()
            .unwrap_or(0);
    }
    let top = ranks.iter().copied().max().unwrap_or(0);
    Ok(RankMap { ranks, top })
}

/// Number of elements in a longest strict chain.
pub fn chain_probe(p: &Poset) -> Result<usize> {
    if p.is_empty() {
        return Ok(0);
    }
    Ok(foundation_rank(p)?.top() + 1)
}

fn project_into(c: &WeakClosure, v: &Vector, onto: &Subspace) -> Result<usize> {
    c.require(&onto.project(v)?)
}

/// `v <_𝒫 u` iff `v ≠ u` is reached from `u` by finitely many projections
/// onto bounded closures of single closure elements.
pub fn order_p(c: &WeakClosure) -> Result<Poset> {
    let n = c.len();
    let domains: Vec<Subspace> = (0..n)
        .map(|i| Ok(c.element_domain(i)?.subspace))
        .collect::<Result<_>>()?;
    let mut step = vec![vec![false; n]; n];
    for u in 0..n {
        for d in &domains {
            let v = project_into(c, c.vector(u), d)?;
            if v != u {
                step[v][u] = true;
            }
        }
    }
    // Breadth-first reachability from every element.
    let mut lt = vec![vec![false; n]; n];
    for u in 0..n {
        let mut frontier = vec![u];
        while let Some(w) = frontier.pop() {
            for v in 0..n {
                if step[v][w] && !lt[v][u] {
                    lt[v][u] = true;
                    frontier.push(v);
                }
            }
        }
    }
    Poset::new(lt)
}

/// `L₁(b, c)`: projecting `b` onto the bounded closure of `c` gives `c`.
pub fn l1(c: &WeakClosure, b: usize, target: usize) -> Result<bool> {
    let d = c.element_domain(target)?;
    Ok(d.subspace.project(c.vector(b))? == *c.vector(target))
}

/// Transitive closure of `L₁` without its diagonal; `b <₁ c` when
/// `L₁(b, c)`.
pub fn order_1(c: &WeakClosure) -> Result<Poset> {
    let n = c.len();
    let mut rel = vec![vec![false; n]; n];
    for t in 0..n {
        let d = c.element_domain(t)?;
        for b in 0..n {
            if b != t && d.subspace.project(c.vector(b))? == *c.vector(t) {
                rel[b][t] = true;
            }
        }
    }
    Poset::generated_by(rel)
}

/// Whether the nonforking extension of `r1` restricts to `r2`, each type
/// given by its canonical base and domain.
pub fn l2_check(r1: (&Vector, &Subspace), r2: (&Vector, &Subspace)) -> Result<bool> {
    for (b, d) in [r1, r2] {
        if !d.contains(b)? {
            return Err(Error::BaseNotInDomain);
        }
    }
    Ok(r2.1.project(r1.0)? == *r2.0)
}
