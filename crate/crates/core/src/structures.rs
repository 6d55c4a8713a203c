//! Finite truncations of layered equivalence-relation structures.
//!
//! Four families are supported:
//!
//! * [`Family::Refining`]: `E_0` is trivial and every `E_n`-class splits into
//!   `branching` classes of `E_{n+1}`, down to `depth`. Finest classes hold
//!   `leaf_multiplicity` points.
//! * [`Family::Coarsening`]: `E_0` is equality and every `E_{n+1}`-class is the
//!   union of `branching` classes of `E_n`, up to a single class at `depth`.
//! * [`Family::PureSet`]: `branching` atoms and nothing else. `depth` only
//!   names the length of the designated atom sequence `e_0..e_depth` used by
//!   subset-sum types.
//! * [`Family::MixedKernel`]: `E_1` has `class_count` classes `A_1..A_m`;
//!   on `A_m` the relations refine `branching`-fold for levels `1..m` and
//!   are constant afterwards. Finest classes hold `class_size` points.
//!
//! Point addresses carry one index per branching step, followed by a leaf
//! index only when the finest classes hold more than one point. Mixed-kernel
//! addresses are prefixed by the 1-based index `m` of their `E_1`-class.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[serde(alias = "Refining")]
    Refining,
    #[serde(alias = "Coarsening")]
    Coarsening,
    #[serde(alias = "PureSet", alias = "pure-set")]
    PureSet,
    #[serde(alias = "MixedKernel", alias = "mixed-kernel")]
    MixedKernel,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Refining => "refining",
            Family::Coarsening => "coarsening",
            Family::PureSet => "pure_set",
            Family::MixedKernel => "mixed_kernel",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointId(pub Vec<usize>);

impl PointId {
    pub fn new(address: impl Into<Vec<usize>>) -> Self {
        PointId(address.into())
    }

    pub fn address(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x[{}]", join(&self.0))
    }
}

/// An `E_level`-class, named by the address prefix shared by its points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassId {
    pub level: usize,
    pub path: Vec<usize>,
}

impl ClassId {
    pub fn new(level: usize, path: impl Into<Vec<usize>>) -> Self {
        ClassId {
            level,
            path: path.into(),
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}[{}]", self.level, join(&self.path))
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
}

/// Result of [`LayeredStructure::common_level`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CommonLevel {
    At(usize),
    /// Equivalent at every level.
    Always,
    /// Equivalent at no level.
    Never,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Seed {
    Point(PointId),
    Class(ClassId),
}

/// JSON form of a structure. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDescriptor {
    pub family: Family,
    #[serde(default)]
    pub depth: usize,
    #[serde(default = "default_branching")]
    pub branching: usize,
    #[serde(default = "default_one")]
    pub leaf_multiplicity: usize,
    #[serde(default = "default_one")]
    pub class_count: usize,
    #[serde(default = "default_one")]
    pub class_size: usize,
}

fn default_branching() -> usize {
    2
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LayeredStructure {
    family: Family,
    depth: usize,
    branching: usize,
    leaf_multiplicity: usize,
    class_count: usize,
    class_size: usize,
}

impl LayeredStructure {
    pub fn refining(depth: usize, branching: usize, leaf_multiplicity: usize) -> Result<Self> {
        Self::from_descriptor(&StructureDescriptor {
            family: Family::Refining,
            depth,
            branching,
            leaf_multiplicity,
            class_count: 1,
            class_size: 1,
        })
    }

    pub fn coarsening(depth: usize, branching: usize) -> Result<Self> {
        Self::from_descriptor(&StructureDescriptor {
            family: Family::Coarsening,
            depth,
            branching,
            leaf_multiplicity: 1,
            class_count: 1,
            class_size: 1,
        })
    }

    /// A pure set with `atoms` elements.
    pub fn pure_set(atoms: usize) -> Result<Self> {
        Self::from_descriptor(&StructureDescriptor {
            family: Family::PureSet,
            depth: 0,
            branching: atoms,
            leaf_multiplicity: 1,
            class_count: 1,
            class_size: 1,
        })
    }

    /// The smallest pure set carrying the designated atoms `e_0..e_depth`.
    pub fn subset_sums(depth: usize) -> Result<Self> {
        Self::from_descriptor(&StructureDescriptor {
            family: Family::PureSet,
            depth,
            branching: (depth + 1).max(2),
            leaf_multiplicity: 1,
            class_count: 1,
            class_size: 1,
        })
    }

    pub fn mixed_kernel(class_count: usize, branching: usize, class_size: usize) -> Result<Self> {
        Self::from_descriptor(&StructureDescriptor {
            family: Family::MixedKernel,
            depth: class_count,
            branching,
            leaf_multiplicity: 1,
            class_count,
            class_size,
        })
    }

    pub fn from_descriptor(d: &StructureDescriptor) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidStructure(msg));
        if d.branching < 2 {
            return bad(format!("branching must be at least 2, got {}", d.branching));
        }
        if d.leaf_multiplicity == 0 || d.class_size == 0 {
            return bad("leaf_multiplicity and class_size must be positive".into());
        }
        match d.family {
            Family::Coarsening if d.leaf_multiplicity != 1 => {
                return bad("coarsening structures have singleton E_0-classes".into())
            }
            Family::PureSet if d.branching < d.depth + 1 => {
                return bad(format!(
                    "pure set with {} atoms cannot carry e_0..e_{}",
                    d.branching, d.depth
                ))
            }
            Family::MixedKernel if d.class_count == 0 => {
                return bad("mixed kernel needs at least one E_1-class".into())
            }
            _ => {}
        }
        let mut s = LayeredStructure {
            family: d.family,
            depth: d.depth,
            branching: d.branching,
            leaf_multiplicity: d.leaf_multiplicity,
            class_count: d.class_count,
            class_size: d.class_size,
        };
        if s.family == Family::MixedKernel {
            s.depth = s.class_count;
        }
        Ok(s)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let d: StructureDescriptor = serde_json::from_str(json)?;
        Self::from_descriptor(&d)
    }

    pub fn descriptor(&self) -> StructureDescriptor {
        StructureDescriptor {
            family: self.family,
            depth: self.depth,
            branching: self.branching,
            leaf_multiplicity: self.leaf_multiplicity,
            class_count: self.class_count,
            class_size: self.class_size,
        }
    }

    /// Same family and multiplicities with new depth and branching. For
    /// mixed kernels `depth` is read as the class count.
    pub fn with_params(&self, depth: usize, branching: usize) -> Result<Self> {
        let mut d = self.descriptor();
        d.depth = depth;
        d.branching = branching;
        if self.family == Family::MixedKernel {
            d.class_count = depth;
        }
        Self::from_descriptor(&d)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn leaf_multiplicity(&self) -> usize {
        self.leaf_multiplicity
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn class_size(&self) -> usize {
        self.class_size
    }

    /// Lowest and highest meaningful level.
    fn level_range(&self) -> (usize, usize) {
        match self.family {
            Family::Refining | Family::Coarsening => (0, self.depth),
            Family::PureSet => (0, 0),
            Family::MixedKernel => (1, self.class_count),
        }
    }

    /// All materialized points in lexicographic address order.
    pub fn points(&self) -> Vec<PointId> {
        let b = self.branching;
        let mut out = Vec::new();
        match self.family {
            Family::Refining => {
                let leaf = (self.leaf_multiplicity > 1).then_some(self.leaf_multiplicity);
                for path in words(b, self.depth) {
                    push_with_leaf(&mut out, Vec::new(), path, leaf);
                }
            }
            Family::Coarsening => out.extend(words(b, self.depth).into_iter().map(PointId)),
            Family::PureSet => out.extend((0..b).map(|i| PointId(vec![i]))),
            Family::MixedKernel => {
                let leaf = (self.class_size > 1).then_some(self.class_size);
                for m in 1..=self.class_count {
                    for path in words(b, m - 1) {
                        push_with_leaf(&mut out, vec![m], path, leaf);
                    }
                }
            }
        }
        out
    }

    pub fn point_count(&self) -> usize {
        self.points().len()
    }

    /// All classes at one level, lexicographically.
    pub fn classes_at(&self, level: usize) -> Result<Vec<ClassId>> {
        self.check_level(level)?;
        let b = self.branching;
        Ok(match self.family {
            Family::Refining => words(b, level)
                .into_iter()
                .map(|p| ClassId::new(level, p))
                .collect(),
            Family::Coarsening => words(b, self.depth - level)
                .into_iter()
                .map(|p| ClassId::new(level, p))
                .collect(),
            Family::PureSet => (0..b).map(|i| ClassId::new(0, vec![i])).collect(),
            Family::MixedKernel => (level..=self.class_count)
                .flat_map(|m| {
                    words(b, level - 1).into_iter().map(move |p| {
                        let mut path = vec![m];
                        path.extend(p);
                        ClassId::new(level, path)
                    })
                })
                .collect(),
        })
    }

    /// Every class of the structure, by level and then lexicographically.
    /// Mixed-kernel classes are listed once, at their canonical level.
    pub fn classes(&self) -> Vec<ClassId> {
        let (lo, hi) = self.level_range();
        (lo..=hi)
            .flat_map(|n| self.classes_at(n).expect("level in range"))
            .collect()
    }

    fn check_level(&self, level: usize) -> Result<()> {
        let (lo, hi) = self.level_range();
        if level < lo || level > hi {
            return Err(Error::LevelOutOfRange {
                level,
                depth: self.depth,
            });
        }
        Ok(())
    }

    pub fn contains_point(&self, x: &PointId) -> bool {
        let a = x.address();
        let b = self.branching;
        match self.family {
            Family::Refining => {
                let n = self.depth + usize::from(self.leaf_multiplicity > 1);
                a.len() == n
                    && a[..self.depth].iter().all(|&i| i < b)
                    && a[self.depth..].iter().all(|&i| i < self.leaf_multiplicity)
            }
            Family::Coarsening => a.len() == self.depth && a.iter().all(|&i| i < b),
            Family::PureSet => a.len() == 1 && a[0] < b,
            Family::MixedKernel => {
                let Some(&m) = a.first() else { return false };
                if m == 0 || m > self.class_count {
                    return false;
                }
                let n = m + usize::from(self.class_size > 1);
                a.len() == n
                    && a[1..m].iter().all(|&i| i < b)
                    && a[m..].iter().all(|&i| i < self.class_size)
            }
        }
    }

    pub fn contains_class(&self, c: &ClassId) -> bool {
        if self.check_level(c.level).is_err() {
            return false;
        }
        let b = self.branching;
        let p = &c.path;
        match self.family {
            Family::Refining => p.len() == c.level && p.iter().all(|&i| i < b),
            Family::Coarsening => p.len() == self.depth - c.level && p.iter().all(|&i| i < b),
            Family::PureSet => p.len() == 1 && p[0] < b,
            Family::MixedKernel => {
                let Some(&m) = p.first() else { return false };
                m >= c.level
                    && m <= self.class_count
                    && p.len() == c.level
                    && p[1..].iter().all(|&i| i < b)
            }
        }
    }

    fn require_point(&self, x: &PointId) -> Result<()> {
        if self.contains_point(x) {
            Ok(())
        } else {
            Err(Error::UnknownPoint(x.to_string()))
        }
    }

    fn require_class(&self, c: &ClassId) -> Result<()> {
        if self.contains_class(c) {
            Ok(())
        } else {
            Err(Error::UnknownClass(c.to_string()))
        }
    }

    /// The `E_n`-class of `x`. Mixed-kernel classes are returned at their
    /// canonical level: on `A_m`, levels above `m` collapse onto level `m`.
    pub fn class_of(&self, x: &PointId, n: usize) -> Result<ClassId> {
        self.require_point(x)?;
        self.check_level(n)?;
        let a = x.address();
        Ok(match self.family {
            Family::Refining => ClassId::new(n, &a[..n]),
            Family::Coarsening => ClassId::new(n, &a[..self.depth - n]),
            Family::PureSet => ClassId::new(0, a),
            Family::MixedKernel => {
                let m = a[0];
                let k = n.min(m);
                ClassId::new(k, &a[..k])
            }
        })
    }

    /// For refining and mixed-kernel structures, the largest level at which
    /// `x` and `y` are equivalent; for coarsening structures, the smallest.
    pub fn common_level(&self, x: &PointId, y: &PointId) -> Result<CommonLevel> {
        self.require_point(x)?;
        self.require_point(y)?;
        if x == y {
            return Ok(CommonLevel::Always);
        }
        let (a, b) = (x.address(), y.address());
        Ok(match self.family {
            Family::Refining => {
                let cp = prefix_len(&a[..self.depth], &b[..self.depth]);
                if cp == self.depth {
                    CommonLevel::Always
                } else {
                    CommonLevel::At(cp)
                }
            }
            Family::Coarsening => CommonLevel::At(self.depth - prefix_len(a, b)),
            Family::PureSet => CommonLevel::Never,
            Family::MixedKernel => {
                let m = a[0];
                if b[0] != m {
                    CommonLevel::Never
                } else {
                    let cp = prefix_len(&a[1..m], &b[1..m]);
                    if cp == m - 1 {
                        CommonLevel::Always
                    } else {
                        CommonLevel::At(cp + 1)
                    }
                }
            }
        })
    }

    /// Points of a class, lexicographically.
    pub fn points_in(&self, c: &ClassId) -> Result<Vec<PointId>> {
        self.require_class(c)?;
        let mut out = Vec::new();
        for x in self.points() {
            if self.class_of(&x, c.level)? == *c {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// The lexicographically first point of a class.
    pub fn representative(&self, c: &ClassId) -> Result<PointId> {
        self.require_class(c)?;
        let mut a = c.path.clone();
        match self.family {
            Family::Refining => {
                a.resize(self.depth, 0);
                if self.leaf_multiplicity > 1 {
                    a.push(0);
                }
            }
            Family::Coarsening => a.resize(self.depth, 0),
            Family::PureSet => {}
            Family::MixedKernel => {
                let m = a[0];
                a.resize(m, 0);
                if self.class_size > 1 {
                    a.push(0);
                }
            }
        }
        Ok(PointId(a))
    }

    /// Class generators with finite orbit under automorphisms of the
    /// idealized structure that fix every seed.
    ///
    /// Refining: the root plus the ancestor chains of the seeds.
    /// Coarsening: the top class plus the chains of coarser classes above
    /// the seeds.
    /// Pure set: the seed atoms, as singleton level-0 classes.
    /// Mixed kernel: ancestor chains from level 1; `E_1`-classes are not
    /// fixed by the empty seed set.
    pub fn bdd_basis(&self, seeds: &[Seed]) -> Result<BTreeSet<ClassId>> {
        let mut out = BTreeSet::new();
        match self.family {
            Family::Refining => {
                out.insert(ClassId::new(0, Vec::new()));
            }
            Family::Coarsening => {
                out.insert(ClassId::new(self.depth, Vec::new()));
            }
            _ => {}
        }
        for seed in seeds {
            let finest = match seed {
                Seed::Point(x) => {
                    self.require_point(x)?;
                    self.finest_class(x)
                }
                Seed::Class(c) => {
                    self.require_class(c)?;
                    c.clone()
                }
            };
            out.extend(self.chain_from(&finest));
        }
        Ok(out)
    }

    fn finest_class(&self, x: &PointId) -> ClassId {
        let n = match self.family {
            Family::Refining => self.depth,
            Family::Coarsening | Family::PureSet => 0,
            Family::MixedKernel => x.address()[0],
        };
        self.class_of(x, n).expect("point already validated")
    }

    /// The class itself together with every class it determines.
    fn chain_from(&self, c: &ClassId) -> Vec<ClassId> {
        match self.family {
            Family::Refining => (0..=c.level).map(|j| ClassId::new(j, &c.path[..j])).collect(),
            Family::Coarsening => (c.level..=self.depth)
                .map(|j| ClassId::new(j, &c.path[..self.depth - j]))
                .collect(),
            Family::PureSet => vec![c.clone()],
            Family::MixedKernel => (1..=c.level)
                .map(|j| ClassId::new(j, &c.path[..j]))
                .collect(),
        }
    }
}

fn prefix_len(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// All words of length `len` over `0..b`, lexicographically.
fn words(b: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..b).map(move |i| {
                    let mut w = w.clone();
                    w.push(i);
                    w
                })
            })
            .collect();
    }
    out
}

fn push_with_leaf(out: &mut Vec<PointId>, prefix: Vec<usize>, path: Vec<usize>, leaf: Option<usize>) {
    let mut base = prefix;
    base.extend(path);
    match leaf {
        None => out.push(PointId(base)),
        Some(c) => {
            for l in 0..c {
                let mut a = base.clone();
                a.push(l);
                out.push(PointId(a));
            }
        }
    }
}
