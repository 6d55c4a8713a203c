//! Finite truncations of the weak closure of a type, and everything built
//! on it: canonical bases, the projection order and its mirror, ranks and
//! the structural probes.

mod order;
mod probes;
mod shelah;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertModel, InnerSpace, Vector};
use crate::scalar::{half_pow, Scalar};
use crate::structures::{ClassId, Family, LayeredStructure, PointId, Seed};
use crate::subspaces::Subspace;

pub use order::{chain_probe, foundation_rank, l1, l2_check, order_1, order_p, Poset, RankMap};
pub use probes::{
    asym_free_check, one_based_check, scattered_probe, AsymFreeReport, ClosureView,
    OneBasedFailure, OneBasedReport, ScatterReport, ScatterRow, SyntheticClosure,
};
pub use shelah::{DeltaType, DeltaTypeSpace, ShelahRanker};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeKind {
    /// Every embedded point (the piece `X` for a pure set).
    AllEmbeddedPoints,
    /// The complete type of `Σ e_n / 2^n` over designated atoms
    /// `e_0..e_N` of a pure set.
    SubsetSum,
    /// All points of a mixed-kernel structure.
    PieceS,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDef {
    structure: LayeredStructure,
    kind: TypeKind,
}

impl TypeDef {
    pub fn new(structure: LayeredStructure, kind: TypeKind) -> Result<Self> {
        let ok = matches!(
            (kind, structure.family()),
            (
                TypeKind::AllEmbeddedPoints,
                Family::Refining | Family::Coarsening | Family::PureSet
            ) | (TypeKind::SubsetSum, Family::PureSet)
                | (TypeKind::PieceS, Family::MixedKernel)
        );
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "type kind {kind:?} does not fit the {} family",
                structure.family()
            )));
        }
        Ok(TypeDef { structure, kind })
    }

    /// The natural type of a structure: subset sums are not chosen here.
    pub fn points_of(structure: LayeredStructure) -> Self {
        let kind = match structure.family() {
            Family::MixedKernel => TypeKind::PieceS,
            _ => TypeKind::AllEmbeddedPoints,
        };
        TypeDef { structure, kind }
    }

    pub fn structure(&self) -> &LayeredStructure {
        &self.structure
    }

    pub fn kind(&self) -> TypeKind {
        self.kind
    }

    /// Same kind on the structure with new depth and branching.
    pub fn with_params(&self, depth: usize, branching: usize) -> Result<Self> {
        TypeDef::new(self.structure.with_params(depth, branching)?, self.kind)
    }

    /// Same kind with two extra children at every branching point.
    pub fn padded(&self) -> Result<Self> {
        let s = &self.structure;
        let depth = match s.family() {
            Family::MixedKernel => s.class_count(),
            _ => s.depth(),
        };
        self.with_params(depth, s.branching() + 2)
    }
}

/// How a closure element arises. Classes are named through their
/// lexicographically first point so tags agree across branchings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Provenance {
    FullPoint(PointId),
    Truncation(PointId, usize),
    Tail(PointId, usize),
    SubsetSum(Vec<usize>),
    Zero,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::FullPoint(x) => write!(f, "h({x})"),
            Provenance::Truncation(x, m) => write!(f, "t{m}({x})"),
            Provenance::Tail(x, m) => write!(f, "tail{m}({x})"),
            Provenance::SubsetSum(j) => {
                let j: Vec<String> = j.iter().map(usize::to_string).collect();
                write!(f, "sum{{{}}}", j.join(","))
            }
            Provenance::Zero => f.write_str("0"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Element {
    pub tag: Provenance,
    pub vector: Vector,
}

/// A bounded-closure subspace together with the seeds that generate it.
#[derive(Debug, Clone)]
pub struct Domain {
    pub label: String,
    pub seeds: Vec<Seed>,
    pub basis: BTreeSet<ClassId>,
    pub subspace: Subspace,
}

/// Weak-limit families that the structures instantiate for every branching.
#[derive(Debug, Clone)]
pub enum LimitSpec {
    Constant(Vector),
    /// Distinct points of a class pairwise meeting exactly at its level.
    DistinctInClass(ClassId),
    /// Pairwise distinct atoms of a pure set.
    DistinctAtoms,
}

#[derive(Debug, Clone)]
pub struct WeakClosure {
    typedef: TypeDef,
    model: HilbertModel,
    elements: Vec<Element>,
    domains: OnceLock<Arc<Vec<Domain>>>,
    orders: OnceLock<Arc<(Poset, Poset)>>,
}

impl WeakClosure {
    pub fn new(typedef: &TypeDef) -> Result<Self> {
        let s = typedef.structure();
        let model = HilbertModel::new(s)?;
        let mut raw: Vec<(Provenance, Vector)> = Vec::new();
        match (typedef.kind(), s.family()) {
            (TypeKind::SubsetSum, _) => {
                let n = s.depth() + 1;
                for mask in 0u64..(1 << n) {
                    let j: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                    let v = subset_sum_vector(&model, &j)?;
                    raw.push((Provenance::SubsetSum(j), v));
                }
            }
            (_, Family::Refining) => {
                push_points(&model, &mut raw)?;
                for m in (0..s.depth()).rev() {
                    for c in s.classes_at(m)? {
                        let x = s.representative(&c)?;
                        let v = model.truncation(&x, m)?;
                        raw.push((Provenance::Truncation(x, m), v));
                    }
                }
            }
            (_, Family::Coarsening) => {
                push_points(&model, &mut raw)?;
                for m in 1..=s.depth() {
                    for c in s.classes_at(m)? {
                        let x = s.representative(&c)?;
                        let v = model.tail(&x, m)?;
                        raw.push((Provenance::Tail(x, m), v));
                    }
                }
            }
            (_, Family::PureSet) => {
                push_points(&model, &mut raw)?;
                raw.push((Provenance::Zero, model.space().zero()));
            }
            (_, Family::MixedKernel) => {
                push_points(&model, &mut raw)?;
                for k in (1..s.class_count()).rev() {
                    for c in s.classes_at(k)? {
                        if c.path[0] > k {
                            let x = s.representative(&c)?;
                            let v = model.class_vector(&c)?;
                            raw.push((Provenance::Truncation(x, k), v));
                        }
                    }
                }
                raw.push((Provenance::Zero, model.space().zero()));
            }
        }
        let mut elements: Vec<Element> = Vec::with_capacity(raw.len());
        for (tag, vector) in raw {
            if !elements.iter().any(|e| e.vector == vector) {
                elements.push(Element { tag, vector });
            }
        }
        Ok(WeakClosure {
            typedef: typedef.clone(),
            model,
            elements,
            domains: OnceLock::new(),
            orders: OnceLock::new(),
        })
    }

    pub fn typedef(&self) -> &TypeDef {
        &self.typedef
    }

    pub fn structure(&self) -> &LayeredStructure {
        self.typedef.structure()
    }

    pub fn model(&self) -> &HilbertModel {
        &self.model
    }

    pub fn space(&self) -> &Arc<InnerSpace> {
        self.model.space()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn vector(&self, i: usize) -> &Vector {
        &self.elements[i].vector
    }

    pub fn tag(&self, i: usize) -> &Provenance {
        &self.elements[i].tag
    }

    pub fn position(&self, v: &Vector) -> Option<usize> {
        self.elements.iter().position(|e| e.vector == *v)
    }

    pub fn position_of_tag(&self, tag: &Provenance) -> Option<usize> {
        self.elements.iter().position(|e| e.tag == *tag)
    }

    pub fn require(&self, v: &Vector) -> Result<usize> {
        self.position(v)
            .ok_or_else(|| Error::NotInClosure(v.to_string()))
    }

    /// Indices of elements realizing the type itself.
    pub fn realizations(&self) -> Vec<usize> {
        let full = self.structure().depth() + 1;
        (0..self.len())
            .filter(|&i| match self.tag(i) {
                Provenance::FullPoint(_) => true,
                Provenance::SubsetSum(j) => j.len() == full,
                _ => false,
            })
            .collect()
    }

    /// Seeds whose bounded closure is the least one containing the element.
    pub fn seeds(&self, i: usize) -> Result<Vec<Seed>> {
        let s = self.structure();
        Ok(match self.tag(i) {
            Provenance::FullPoint(x) => vec![Seed::Point(x.clone())],
            Provenance::Truncation(x, m) | Provenance::Tail(x, m) => {
                vec![Seed::Class(s.class_of(x, *m)?)]
            }
            Provenance::SubsetSum(j) => j.iter().map(|&n| Seed::Point(PointId::new([n]))).collect(),
            Provenance::Zero => Vec::new(),
        })
    }

    pub fn domain(&self, seeds: &[Seed]) -> Result<Domain> {
        let basis = self.structure().bdd_basis(seeds)?;
        let subspace = self.model.bdd_subspace(seeds)?;
        let label = if seeds.is_empty() {
            "bdd()".to_owned()
        } else {
            let names: Vec<String> = seeds
                .iter()
                .map(|s| match s {
                    Seed::Point(x) => x.to_string(),
                    Seed::Class(c) => c.to_string(),
                })
                .collect();
            format!("bdd({})", names.join(","))
        };
        Ok(Domain {
            label,
            seeds: seeds.to_vec(),
            basis,
            subspace,
        })
    }

    /// `bdd` of a single element.
    pub fn element_domain(&self, i: usize) -> Result<Domain> {
        self.domain(&self.seeds(i)?)
    }

    /// Bounded-closure subspaces generated by at most two closure elements,
    /// deduplicated by generator set, in enumeration order.
    pub fn domains(&self) -> Result<Arc<Vec<Domain>>> {
        if let Some(d) = self.domains.get() {
            return Ok(Arc::clone(d));
        }
        let seeds: Vec<Vec<Seed>> = (0..self.len())
            .map(|i| self.seeds(i))
            .collect::<Result<_>>()?;
        let mut sets: Vec<Vec<Seed>> = vec![Vec::new()];
        for i in 0..seeds.len() {
            for j in i..seeds.len() {
                let mut u = seeds[i].clone();
                for s in &seeds[j] {
                    if !u.contains(s) {
                        u.push(s.clone());
                    }
                }
                sets.push(u);
            }
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for set in sets {
            let basis = self.structure().bdd_basis(&set)?;
            if seen.insert(basis) {
                out.push(self.domain(&set)?);
            }
        }
        let out = Arc::new(out);
        Ok(Arc::clone(self.domains.get_or_init(|| out)))
    }

    /// `P_A a`, which must itself be a closure element.
    pub fn canonical_base(&self, a: &Vector, domain: &Subspace) -> Result<usize> {
        self.require(&domain.project(a)?)
    }

    /// `(≤_𝒫, ≤₁)`, computed once.
    pub fn orders(&self) -> Result<Arc<(Poset, Poset)>> {
        if let Some(o) = self.orders.get() {
            return Ok(Arc::clone(o));
        }
        let o = Arc::new((order_p(self)?, order_1(self)?));
        Ok(Arc::clone(self.orders.get_or_init(|| o)))
    }

    /// Forking rank of the type of `a` over `domain`: the foundation rank of
    /// its canonical base in `≤₁`.
    pub fn v_rank(&self, a: &Vector, domain: &Subspace) -> Result<usize> {
        let b = self.canonical_base(a, domain)?;
        let orders = self.orders()?;
        Ok(foundation_rank(&orders.1)?.rank(b))
    }

    /// The weak limit of an idealized sequence, validated on the explicit
    /// instance given by one point per child.
    pub fn weak_limit(&self, spec: &LimitSpec) -> Result<Vector> {
        let s = self.structure();
        let not = |why: String| Err(Error::NotInstantiable(why));
        let (limit, members) = match spec {
            LimitSpec::Constant(v) => return Ok(v.clone()),
            LimitSpec::DistinctAtoms => {
                if s.family() != Family::PureSet {
                    return not(format!("distinct atoms in the {} family", s.family()));
                }
                let members = s
                    .points()
                    .iter()
                    .map(|x| self.model.point_vector(x))
                    .collect::<Result<Vec<_>>>()?;
                (self.space().zero(), members)
            }
            LimitSpec::DistinctInClass(c) => {
                if !s.contains_class(c) {
                    return Err(Error::UnknownClass(c.to_string()));
                }
                let x = s.representative(c)?;
                let limit = match s.family() {
                    Family::Refining if c.level < s.depth() => self.model.truncation(&x, c.level)?,
                    Family::Coarsening if c.level > 0 => self.model.tail(&x, c.level)?,
                    Family::MixedKernel if c.level < c.path[0] => self.model.class_vector(c)?,
                    _ => return not(format!("no two points of {c} meet exactly at its level")),
                };
                let members = self
                    .children_representatives(c)?
                    .iter()
                    .map(|x| self.model.point_vector(x))
                    .collect::<Result<Vec<_>>>()?;
                (limit, members)
            }
        };
        for g in 0..self.space().dim() {
            let u = self.space().unit(g);
            let want = limit.inner(&u)?;
            let misses = members
                .iter()
                .filter(|a| a.inner_unchecked(&u) != want)
                .count();
            if misses > 1 {
                return Err(Error::NotInstantiable(format!(
                    "members disagree with the limit on {}",
                    self.space().generators()[g]
                )));
            }
        }
        Ok(limit)
    }

    /// One point from each child class of `c`.
    fn children_representatives(&self, c: &ClassId) -> Result<Vec<PointId>> {
        let s = self.structure();
        let child_level = match s.family() {
            Family::Coarsening => c.level - 1,
            _ => c.level + 1,
        };
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for x in s.points_in(c)? {
            let child = s.class_of(&x, child_level)?;
            if seen.insert(child) {
                out.push(x);
            }
        }
        Ok(out)
    }
}

fn push_points(model: &HilbertModel, raw: &mut Vec<(Provenance, Vector)>) -> Result<()> {
    for x in model.structure().points() {
        let v = model.point_vector(&x)?;
        raw.push((Provenance::FullPoint(x), v));
    }
    Ok(())
}

fn subset_sum_vector(model: &HilbertModel, j: &[usize]) -> Result<Vector> {
    let terms = j
        .iter()
        .map(|&n| {
            Ok((
                crate::hilbert::GeneratorId::Atom(PointId::new([n])),
                half_pow(n),
            ))
        })
        .collect::<Result<Vec<(_, Scalar)>>>()?;
    model.space().vector(terms)
}
