//! Exact-rational inner-product spaces presented by labelled generators.
//!
//! A space is either free (the generators are orthonormal) or carries an
//! explicit Gram matrix, certified positive semidefinite on construction.
//! Vectors are sparse rational combinations of generators. Equality of
//! vectors is equality in the space, i.e. `‖u - v‖² = 0`, which matters for
//! Gram spaces with a non-trivial kernel.

mod psd;

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{format_scalar, half_pow, ratio, Scalar};
use crate::structures::{ClassId, CommonLevel, Family, LayeredStructure, PointId, Seed};
use crate::subspaces::Subspace;

pub use psd::{psd_check, PsdVerdict};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeneratorId {
    Class(ClassId),
    Atom(PointId),
    Formal(String),
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorId::Class(c) => c.fmt(f),
            GeneratorId::Atom(x) => x.fmt(f),
            GeneratorId::Formal(s) => f.write_str(s),
        }
    }
}

#[derive(Debug)]
enum Gram {
    Identity,
    Dense(Matrix),
}

#[derive(Debug)]
pub struct InnerSpace {
    generators: Vec<GeneratorId>,
    index: HashMap<GeneratorId, usize>,
    gram: Gram,
}

impl InnerSpace {
    /// Orthonormal generators.
    pub fn free(generators: Vec<GeneratorId>) -> Result<Arc<Self>> {
        let index = Self::index(&generators)?;
        Ok(Arc::new(InnerSpace {
            generators,
            index,
            gram: Gram::Identity,
        }))
    }

    /// Generators with the given Gram matrix; rejected unless symmetric and
    /// positive semidefinite.
    pub fn with_gram(generators: Vec<GeneratorId>, gram: Matrix) -> Result<Arc<Self>> {
        if gram.rows() != generators.len() || !gram.is_square() {
            return Err(Error::Shape(format!(
                "{} generators but a {}x{} Gram matrix",
                generators.len(),
                gram.rows(),
                gram.cols()
            )));
        }
        if !psd_check(&gram)?.is_psd() {
            return Err(Error::NotPsd);
        }
        let index = Self::index(&generators)?;
        Ok(Arc::new(InnerSpace {
            generators,
            index,
            gram: Gram::Dense(gram),
        }))
    }

    fn index(generators: &[GeneratorId]) -> Result<HashMap<GeneratorId, usize>> {
        let mut index = HashMap::with_capacity(generators.len());
        for (i, g) in generators.iter().enumerate() {
            if index.insert(g.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate generator {g}")));
            }
        }
        Ok(index)
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn is_free(&self) -> bool {
        matches!(self.gram, Gram::Identity)
    }

    pub fn generators(&self) -> &[GeneratorId] {
        &self.generators
    }

    pub fn index_of(&self, g: &GeneratorId) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn gram_entry(&self, i: usize, j: usize) -> Cow<'_, Scalar> {
        match &self.gram {
            Gram::Identity if i == j => Cow::Owned(Scalar::one()),
            Gram::Identity => Cow::Owned(Scalar::zero()),
            Gram::Dense(m) => Cow::Borrowed(&m[(i, j)]),
        }
    }

    pub fn gram_matrix(&self) -> Matrix {
        match &self.gram {
            Gram::Identity => Matrix::identity(self.dim()),
            Gram::Dense(m) => m.clone(),
        }
    }

    pub fn zero(self: &Arc<Self>) -> Vector {
        Vector {
            space: Arc::clone(self),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn unit(self: &Arc<Self>, i: usize) -> Vector {
        assert!(i < self.dim());
        Vector {
            space: Arc::clone(self),
            coeffs: BTreeMap::from([(i, Scalar::one())]),
        }
    }

    pub fn generator(self: &Arc<Self>, g: &GeneratorId) -> Result<Vector> {
        let i = self
            .index_of(g)
            .ok_or_else(|| Error::UnknownGenerator(g.to_string()))?;
        Ok(self.unit(i))
    }

    /// Builds a vector from labelled coefficients; repeated labels add up.
    pub fn vector<I>(self: &Arc<Self>, coeffs: I) -> Result<Vector>
    where
        I: IntoIterator<Item = (GeneratorId, Scalar)>,
    {
        let mut v = self.zero();
        for (g, c) in coeffs {
            let i = self
                .index_of(&g)
                .ok_or_else(|| Error::UnknownGenerator(g.to_string()))?;
            v.add_term(i, c);
        }
        Ok(v)
    }
}

#[derive(Clone)]
pub struct Vector {
    space: Arc<InnerSpace>,
    coeffs: BTreeMap<usize, Scalar>,
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vector({self})")
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&i, c)| format!("{}*{}", format_scalar(c), self.space.generators[i]))
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

impl PartialEq for Vector {
    fn eq(&self, other: &Self) -> bool {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return false;
        }
        if self.space.is_free() {
            return self.coeffs == other.coeffs;
        }
        (self - other).norm_sq().is_zero()
    }
}

impl Vector {
    pub fn space(&self) -> &Arc<InnerSpace> {
        &self.space
    }

    pub fn same_space(&self, other: &Vector) -> bool {
        Arc::ptr_eq(&self.space, &other.space)
    }

    /// Non-zero coefficients keyed by generator index.
    pub fn coeffs(&self) -> &BTreeMap<usize, Scalar> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(&i).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn coeff_of(&self, g: &GeneratorId) -> Scalar {
        self.space
            .index_of(g)
            .map_or_else(Scalar::zero, |i| self.coeff(i))
    }

    /// Coefficients as `label -> "p/q"`.
    pub fn coeff_strings(&self) -> BTreeMap<String, String> {
        self.coeffs
            .iter()
            .map(|(&i, c)| (self.space.generators[i].to_string(), format_scalar(c)))
            .collect()
    }

    /// Coefficients on the zero-free support; zero in the space is not the
    /// same as an empty support for Gram spaces.
    pub fn has_empty_support(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() || self.norm_sq().is_zero()
    }

    fn add_term(&mut self, i: usize, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(i).or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    pub fn scaled(&self, k: &Scalar) -> Vector {
        if k.is_zero() {
            return self.space.zero();
        }
        Vector {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().map(|(&i, c)| (i, c * k)).collect(),
        }
    }

    /// `self + k · other`. Panics when the spaces differ.
    pub fn axpy(&self, k: &Scalar, other: &Vector) -> Vector {
        assert!(self.same_space(other), "vectors from different spaces");
        let mut out = self.clone();
        for (&i, c) in &other.coeffs {
            out.add_term(i, k * c);
        }
        out
    }

    /// `⟨self, other⟩ = selfᵀ G other`.
    pub fn inner(&self, other: &Vector) -> Result<Scalar> {
        if !self.same_space(other) {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Vector) -> Scalar {
        match &self.space.gram {
            Gram::Identity => {
                let (small, large) = if self.coeffs.len() <= other.coeffs.len() {
                    (self, other)
                } else {
                    (other, self)
                };
                small
                    .coeffs
                    .iter()
                    .filter_map(|(i, a)| large.coeffs.get(i).map(|b| a * b))
                    .fold(Scalar::zero(), |acc, x| acc + x)
            }
            Gram::Dense(g) => {
                let mut acc = Scalar::zero();
                for (&i, a) in &self.coeffs {
                    let mut row = Scalar::zero();
                    for (&j, b) in &other.coeffs {
                        let gij = &g[(i, j)];
                        if !gij.is_zero() {
                            row += gij * b;
                        }
                    }
                    if !row.is_zero() {
                        acc += a * row;
                    }
                }
                acc
            }
        }
    }

    pub fn norm_sq(&self) -> Scalar {
        self.inner_unchecked(self)
    }

    /// `‖self - other‖²`
    pub fn dist_sq(&self, other: &Vector) -> Result<Scalar> {
        if !self.same_space(other) {
            return Err(Error::SpaceMismatch);
        }
        Ok((self - other).norm_sq())
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        self.axpy(&Scalar::one(), rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        self.axpy(&-Scalar::one(), rhs)
    }
}

impl Neg for &Vector {
    type Output = Vector;

    fn neg(self) -> Vector {
        self.scaled(&-Scalar::one())
    }
}

/// Exact matrix of pairwise inner products.
pub fn gram(vs: &[Vector]) -> Result<Matrix> {
    if let Some(first) = vs.first() {
        if vs.iter().any(|v| !v.same_space(first)) {
            return Err(Error::SpaceMismatch);
        }
    }
    Ok(Matrix::symmetric_from_fn(vs.len(), |i, j| {
        vs[i].inner_unchecked(&vs[j])
    }))
}

/// `(m-1)/m + 1/(m(m+1-k))`; equals 1 at `k = m`.
pub fn kernel_value(m: usize, k: usize) -> Scalar {
    assert!(1 <= k && k <= m);
    let (m, k) = (m as i64, k as i64);
    ratio(m - 1, m) + ratio(1, m * (m + 1 - k))
}

/// The mixed-depth kernel on pairs of points.
pub fn kernel_f(s: &LayeredStructure, x: &PointId, y: &PointId) -> Result<Scalar> {
    if s.family() != Family::MixedKernel {
        return Err(Error::UnsupportedFamily {
            op: "kernel_f",
            family: s.family(),
        });
    }
    Ok(match s.common_level(x, y)? {
        CommonLevel::Never => Scalar::zero(),
        CommonLevel::Always => Scalar::one(),
        CommonLevel::At(level) => {
            let m = x.address()[0];
            kernel_value(m, level.min(m))
        }
    })
}

/// A structure together with the inner-product space it is embedded in.
///
/// * Refining and coarsening: the free space on all classes, with points
///   sent to `Σ_n 2^-n · class_of(x, n)`.
/// * Pure set: the free space on the atoms.
/// * Mixed kernel: a Gram space on the points (Gram entries `kernel_f`)
///   extended by one formal generator per non-finest class, standing for
///   the weak limit of points spread across that class.
#[derive(Debug, Clone)]
pub struct HilbertModel {
    structure: LayeredStructure,
    space: Arc<InnerSpace>,
}

impl HilbertModel {
    pub fn new(structure: &LayeredStructure) -> Result<Self> {
        let space = match structure.family() {
            Family::Refining | Family::Coarsening => InnerSpace::free(
                structure.classes().into_iter().map(GeneratorId::Class).collect(),
            )?,
            Family::PureSet => InnerSpace::free(
                structure.points().into_iter().map(GeneratorId::Atom).collect(),
            )?,
            Family::MixedKernel => mixed_kernel_space(structure)?,
        };
        Ok(HilbertModel {
            structure: structure.clone(),
            space,
        })
    }

    pub fn structure(&self) -> &LayeredStructure {
        &self.structure
    }

    pub fn space(&self) -> &Arc<InnerSpace> {
        &self.space
    }

    /// `h(x) = Σ_{n=0}^{N} 2^-n · class_of(x, n)`; a pure-set point maps to
    /// its atom. Mixed kernels have no explicit embedding.
    pub fn embed(&self, x: &PointId) -> Result<Vector> {
        match self.structure.family() {
            Family::Refining | Family::Coarsening => self.partial_sum(x, 0..=self.structure.depth()),
            Family::PureSet => {
                if !self.structure.contains_point(x) {
                    return Err(Error::UnknownPoint(x.to_string()));
                }
                self.space.generator(&GeneratorId::Atom(x.clone()))
            }
            Family::MixedKernel => Err(Error::UnsupportedFamily {
                op: "embed",
                family: Family::MixedKernel,
            }),
        }
    }

    /// The vector of a realized point in any family.
    pub fn point_vector(&self, x: &PointId) -> Result<Vector> {
        match self.structure.family() {
            Family::MixedKernel => {
                if !self.structure.contains_point(x) {
                    return Err(Error::UnknownPoint(x.to_string()));
                }
                self.space.generator(&GeneratorId::Atom(x.clone()))
            }
            _ => self.embed(x),
        }
    }

    /// `Σ_{n ≤ m} 2^-n · class_of(x, n)` in a refining structure.
    pub fn truncation(&self, x: &PointId, m: usize) -> Result<Vector> {
        self.require(Family::Refining, "truncation")?;
        self.partial_sum(x, 0..=m)
    }

    /// `Σ_{n ≥ m} 2^-n · class_of(x, n)` in a coarsening structure.
    pub fn tail(&self, x: &PointId, m: usize) -> Result<Vector> {
        self.require(Family::Coarsening, "tail")?;
        self.partial_sum(x, m..=self.structure.depth())
    }

    fn partial_sum(&self, x: &PointId, levels: std::ops::RangeInclusive<usize>) -> Result<Vector> {
        let terms = levels
            .map(|n| {
                Ok((
                    GeneratorId::Class(self.structure.class_of(x, n)?),
                    half_pow(n),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        self.space.vector(terms)
    }

    fn require(&self, family: Family, op: &'static str) -> Result<()> {
        if self.structure.family() == family {
            Ok(())
        } else {
            Err(Error::UnsupportedFamily {
                op,
                family: self.structure.family(),
            })
        }
    }

    /// The generator standing for a class in bounded-closure subspaces.
    /// Mixed-kernel finest classes are represented by their first point.
    pub fn class_vector(&self, c: &ClassId) -> Result<Vector> {
        if !self.structure.contains_class(c) {
            return Err(Error::UnknownClass(c.to_string()));
        }
        let g = match self.structure.family() {
            Family::Refining | Family::Coarsening => GeneratorId::Class(c.clone()),
            Family::PureSet => GeneratorId::Atom(PointId(c.path.clone())),
            Family::MixedKernel => {
                if c.level < c.path[0] {
                    GeneratorId::Formal(formal_label(c))
                } else {
                    GeneratorId::Atom(self.structure.representative(c)?)
                }
            }
        };
        self.space.generator(&g)
    }

    /// Closed span of the bounded closure of `seeds`.
    pub fn bdd_subspace(&self, seeds: &[Seed]) -> Result<Subspace> {
        let vs = self
            .structure
            .bdd_basis(seeds)?
            .iter()
            .map(|c| self.class_vector(c))
            .collect::<Result<Vec<_>>>()?;
        Subspace::span(&self.space, vs)
    }
}

fn formal_label(c: &ClassId) -> String {
    format!("t{c}")
}

/// Ultrametric Gram on points and class limits: two nodes of `A_m` whose
/// paths agree on their first `c - 1` coordinates below `m` pair to
/// `kernel_value(m, c)`; nodes in different `E_1`-classes are orthogonal.
fn mixed_kernel_space(s: &LayeredStructure) -> Result<Arc<InnerSpace>> {
    struct Node {
        m: usize,
        path: Vec<usize>,
    }
    let mut generators = Vec::new();
    let mut nodes = Vec::new();
    for x in s.points() {
        let m = x.address()[0];
        nodes.push(Node {
            m,
            path: x.address()[1..m].to_vec(),
        });
        generators.push(GeneratorId::Atom(x));
    }
    for c in s.classes() {
        let m = c.path[0];
        if c.level < m {
            nodes.push(Node {
                m,
                path: c.path[1..].to_vec(),
            });
            generators.push(GeneratorId::Formal(formal_label(&c)));
        }
    }
    let g = Matrix::symmetric_from_fn(nodes.len(), |i, j| {
        let (a, b) = (&nodes[i], &nodes[j]);
        if a.m != b.m {
            return Scalar::zero();
        }
        let cp = a.path.iter().zip(&b.path).take_while(|(x, y)| x == y).count();
        kernel_value(a.m, cp + 1)
    });
    InnerSpace::with_gram(generators, g)
}
