//! One-basedness, asymptotic freeness and scatteredness probes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::hilbert::{InnerSpace, Vector};
use crate::scalar::Scalar;
use crate::subspaces::{angled_lines, commute_check, Subspace};

use super::{TypeDef, WeakClosure};

/// What the one-basedness check needs: labelled test vectors and labelled
/// subspaces of one space.
pub trait ClosureView {
    fn vectors(&self) -> Vec<(String, Vector)>;
    fn subspaces(&self) -> Result<Vec<(String, Subspace)>>;
}

impl ClosureView for WeakClosure {
    fn vectors(&self) -> Vec<(String, Vector)> {
        self.elements()
            .iter()
            .map(|e| (e.tag.to_string(), e.vector.clone()))
            .collect()
    }

    fn subspaces(&self) -> Result<Vec<(String, Subspace)>> {
        Ok(self
            .domains()?
            .iter()
            .map(|d| (d.label.clone(), d.subspace.clone()))
            .collect())
    }
}

/// Hand-made vectors and subspaces posing as a closure.
#[derive(Debug, Clone)]
pub struct SyntheticClosure {
    pub space: Arc<InnerSpace>,
    pub vectors: Vec<(String, Vector)>,
    pub subspaces: Vec<(String, Subspace)>,
}

impl SyntheticClosure {
    /// The two lines at `cos θ = 3/5` with the unit vector on the first.
    pub fn angled_lines() -> Self {
        let l = angled_lines();
        SyntheticClosure {
            space: l.space,
            vectors: vec![("v".into(), l.v)],
            subspaces: vec![("A".into(), l.a), ("B".into(), l.b)],
        }
    }
}

impl ClosureView for SyntheticClosure {
    fn vectors(&self) -> Vec<(String, Vector)> {
        self.vectors.clone()
    }

    fn subspaces(&self) -> Result<Vec<(String, Subspace)>> {
        Ok(self.subspaces.clone())
    }
}

#[derive(Debug, Clone)]
pub struct OneBasedFailure {
    pub a: String,
    pub b: String,
    pub vector: String,
    pub ab: Vector,
    pub ba: Vector,
    pub meet: Vector,
}

#[derive(Debug, Clone)]
pub struct OneBasedReport {
    pub holds: bool,
    pub pairs_checked: usize,
    pub failures: Vec<OneBasedFailure>,
}

/// Commuting projections on every pair of enumerated subspaces, tested on
/// every vector.
pub fn one_based_check(view: &impl ClosureView) -> Result<OneBasedReport> {
    let labelled = view.vectors();
    let tests: Vec<Vector> = labelled.iter().map(|(_, v)| v.clone()).collect();
    let subs = view.subspaces()?;
    let mut failures = Vec::new();
    let mut pairs_checked = 0;
    for i in 0..subs.len() {
        for j in i + 1..subs.len() {
            pairs_checked += 1;
            let report = commute_check(&subs[i].1, &subs[j].1, &tests)?;
            for f in report.failures {
                let k = tests.iter().position(|t| *t == f.vector).expect("a test vector");
                failures.push(OneBasedFailure {
                    a: subs[i].0.clone(),
                    b: subs[j].0.clone(),
                    vector: labelled[k].0.clone(),
                    ab: f.ab,
                    ba: f.ba,
                    meet: f.meet,
                });
            }
        }
    }
    Ok(OneBasedReport {
        holds: failures.is_empty(),
        pairs_checked,
        failures,
    })
}

#[derive(Debug, Clone)]
pub struct AsymFreeReport {
    pub holds: bool,
    pub pairs_checked: usize,
    pub violations: Vec<(String, String)>,
}

/// For realizations `a ≠ b`: `⟨a, b⟩ = 0` or `a ∈ bdd(b)`.
pub fn asym_free_check(c: &WeakClosure) -> Result<AsymFreeReport> {
    let real = c.realizations();
    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    for &b in &real {
        let dom = c.element_domain(b)?;
        for &a in &real {
            if a == b {
                continue;
            }
            pairs_checked += 1;
            if !c.vector(a).inner(c.vector(b))?.is_zero() && !dom.subspace.contains(c.vector(a))? {
                violations.push((c.tag(a).to_string(), c.tag(b).to_string()));
            }
        }
    }
    Ok(AsymFreeReport {
        holds: violations.is_empty(),
        pairs_checked,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatterRow {
    pub depth: usize,
    pub branching: usize,
    pub tag: String,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct ScatterReport {
    pub eps: Scalar,
    pub rows: Vec<ScatterRow>,
    /// `(depth, tag)` whose neighbourhood count strictly grows with the
    /// branching at that depth.
    pub flagged: Vec<(usize, String)>,
}

/// Counts closure elements within `eps` of each element, for every
/// `(depth, branching)` in `params`.
pub fn scattered_probe(t: &TypeDef, eps: &Scalar, params: &[(usize, usize)]) -> Result<ScatterReport> {
    if *eps <= Scalar::zero() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let eps_sq = eps * eps;
    let mut sorted: Vec<(usize, usize)> = params.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::new();
    for &(n, b) in &sorted {
        let c = WeakClosure::new(&t.with_params(n, b)?)?;
        for i in 0..c.len() {
            let count = (0..c.len())
                .filter(|&j| (c.vector(i) - c.vector(j)).norm_sq() <= eps_sq)
                .count();
            rows.push(ScatterRow {
                depth: n,
                branching: b,
                tag: c.tag(i).to_string(),
                count,
            });
        }
    }
    let mut flagged = Vec::new();
    let depths: BTreeSet<usize> = sorted.iter().map(|&(n, _)| n).collect();
    for n in depths {
        let bs: Vec<usize> = sorted.iter().filter(|p| p.0 == n).map(|p| p.1).collect();
        if bs.len() < 2 {
            continue;
        }
        let mut series: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for r in rows.iter().filter(|r| r.depth == n) {
            series.entry(&r.tag).or_default().push(r.count);
        }
        for (tag, counts) in series {
            if counts.len() == bs.len() && counts.windows(2).all(|w| w[0] < w[1]) {
                flagged.push((n, tag.to_owned()));
            }
        }
    }
    Ok(ScatterReport {
        eps: eps.clone(),
        rows,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};
    use crate::structures::LayeredStructure;
    use crate::weakclosure::TypeKind;

    fn closure(s: LayeredStructure) -> WeakClosure {
        WeakClosure::new(&TypeDef::points_of(s)).unwrap()
    }

    #[test]
    fn one_basedness() {
        assert!(one_based_check(&closure(LayeredStructure::pure_set(4).unwrap())).unwrap().holds);
        assert!(one_based_check(&closure(LayeredStructure::refining(2, 2, 1).unwrap())).unwrap().holds);
        let r = one_based_check(&SyntheticClosure::angled_lines()).unwrap();
        assert!(!r.holds);
        assert_eq!(r.failures[0].vector, "v");
    }

    #[test]
    fn asymptotic_freeness() {
        assert!(asym_free_check(&closure(LayeredStructure::pure_set(3).unwrap())).unwrap().holds);
        let r = asym_free_check(&closure(LayeredStructure::refining(1, 2, 1).unwrap())).unwrap();
        assert!(!r.holds);
        assert_eq!(r.violations.len(), 2);
        let single = asym_free_check(&closure(LayeredStructure::refining(0, 2, 1).unwrap())).unwrap();
        assert!(single.holds && single.pairs_checked == 0);
    }

    #[test]
    fn scatter_counts() {
        let atoms = TypeDef::points_of(LayeredStructure::pure_set(2).unwrap());
        let r = scattered_probe(&atoms, &ratio(1, 2), &[(0, 2), (0, 3), (0, 4)]).unwrap();
        assert!(r.rows.iter().all(|row| row.count == 1));
        assert!(r.flagged.is_empty());

        let big = scattered_probe(&atoms, &int(10), &[(0, 3)]).unwrap();
        assert!(big.rows.iter().all(|row| row.count == 4));

        let tails = TypeDef::points_of(LayeredStructure::coarsening(3, 2).unwrap());
        let r = scattered_probe(&tails, &ratio(1, 4), &[(3, 2), (3, 3), (3, 4)]).unwrap();
        assert_eq!(r.flagged, [(3, "tail3(x[0.0.0])".to_owned())]);
        let minimal: Vec<usize> = r
            .rows
            .iter()
            .filter(|row| row.tag == "tail3(x[0.0.0])")
            .map(|row| row.count)
            .collect();
        assert_eq!(minimal, [3, 4, 5]);
        assert!(scattered_probe(&tails, &int(0), &[(1, 2)]).is_err());

        let sums = TypeDef::new(LayeredStructure::subset_sums(1).unwrap(), TypeKind::SubsetSum);
        assert!(sums.is_ok());
    }
}
