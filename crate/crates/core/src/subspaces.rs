//! Finitely spanned subspaces with exact orthogonal projection.
//!
//! Projections come from the normal equations on an independent subset of
//! the spanning list, so everything stays rational.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{gram, GeneratorId, InnerSpace, Vector};
use crate::matrix::Matrix;
use crate::scalar::{format_scalar, int, Scalar};

pub const DEFAULT_MAX_ITER: usize = 64;

#[derive(Clone)]
pub struct Subspace {
    space: Arc<InnerSpace>,
    spanning: Vec<Vector>,
    gram: Matrix,
    basis: Vec<usize>,
    inv: Matrix,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace")
            .field("rank", &self.rank())
            .field("spanning", &self.spanning)
            .finish()
    }
}

impl Subspace {
    pub fn span(space: &Arc<InnerSpace>, vs: Vec<Vector>) -> Result<Self> {
        if vs.iter().any(|v| !Arc::ptr_eq(v.space(), space)) {
            return Err(Error::SpaceMismatch);
        }
        let g = gram(&vs)?;
        let basis = g.pivot_columns();
        let inv = g
            .select(&basis)
            .inverse()
            .expect("pivot columns of a PSD Gram matrix give an invertible block");
        Ok(Subspace {
            space: Arc::clone(space),
            spanning: vs,
            gram: g,
            basis,
            inv,
        })
    }

    pub fn zero(space: &Arc<InnerSpace>) -> Self {
        Self::span(space, Vec::new()).expect("empty span")
    }

    pub fn space(&self) -> &Arc<InnerSpace> {
        &self.space
    }

    pub fn spanning(&self) -> &[Vector] {
        &self.spanning
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// An independent subset of the spanning list.
    pub fn basis(&self) -> Vec<Vector> {
        self.basis.iter().map(|&i| self.spanning[i].clone()).collect()
    }

    fn check(&self, v: &Vector) -> Result<()> {
        if Arc::ptr_eq(v.space(), &self.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn project(&self, v: &Vector) -> Result<Vector> {
        self.check(v)?;
        let rhs: Vec<Scalar> = self
            .basis
            .iter()
            .map(|&i| self.spanning[i].inner_unchecked(v))
            .collect();
        if rhs.iter().all(Zero::is_zero) {
            return Ok(self.space.zero());
        }
        let c = self.inv.mul_vec(&rhs);
        let mut out = self.space.zero();
        for (k, &i) in self.basis.iter().enumerate() {
            if !c[k].is_zero() {
                out = out.axpy(&c[k], &self.spanning[i]);
            }
        }
        Ok(out)
    }

    pub fn contains(&self, v: &Vector) -> Result<bool> {
        Ok(self.project(v)? == *v)
    }

    /// Same projector.
    pub fn same_as(&self, other: &Subspace) -> Result<bool> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        if self.rank() != other.rank() {
            return Ok(false);
        }
        for v in other.basis() {
            if !self.contains(&v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Combinations `Σ αᵢ aᵢ` of `self`'s basis that also lie in `other`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        let a = self.basis();
        let mut joint = a.clone();
        joint.extend(other.basis());
        let kernel = gram(&joint)?.null_space();
        let mut vs = Vec::with_capacity(kernel.len());
        for n in kernel {
            let mut w = self.space.zero();
            for (ai, c) in a.iter().zip(&n) {
                if !c.is_zero() {
                    w = w.axpy(c, ai);
                }
            }
            if !w.is_zero() {
                vs.push(w);
            }
        }
        Subspace::span(&self.space, vs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AlternationStatus {
    /// `v_k = v_{k+1} = v_{k+2}` first holds at this step.
    FixedPoint(usize),
    Unconverged,
}

#[derive(Debug, Clone)]
pub struct Alternation {
    pub trace: Vec<Vector>,
    pub status: AlternationStatus,
}

#[derive(Debug, Serialize)]
struct TraceStep {
    step: usize,
    coeffs: std::collections::BTreeMap<String, String>,
    norm_squared: String,
}

impl Alternation {
    pub fn norms_sq(&self) -> Vec<Scalar> {
        self.trace.iter().map(Vector::norm_sq).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<TraceStep> = self
            .trace
            .iter()
            .enumerate()
            .map(|(step, v)| TraceStep {
                step,
                coeffs: v.coeff_strings(),
                norm_squared: format_scalar(&v.norm_sq()),
            })
            .collect();
        serde_json::to_value(steps).expect("trace serializes")
    }
}

/// The sequence `v, P_B v, P_A P_B v, ...` with at most `max_iter`
/// projections.
pub fn alternate(v: &Vector, a: &Subspace, b: &Subspace, max_iter: usize) -> Result<Alternation> {
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if !Arc::ptr_eq(a.space(), b.space()) {
        return Err(Error::SpaceMismatch);
    }
    let mut trace = vec![v.clone()];
    for i in 0..max_iter {
        let target = if i % 2 == 0 { b } else { a };
        let next = target.project(trace.last().expect("non-empty"))?;
        trace.push(next);
        let n = trace.len();
        if n >= 3 && trace[n - 1] == trace[n - 2] && trace[n - 2] == trace[n - 3] {
            return Ok(Alternation {
                trace,
                status: AlternationStatus::FixedPoint(n - 3),
            });
        }
    }
    Ok(Alternation {
        trace,
        status: AlternationStatus::Unconverged,
    })
}

#[derive(Debug, Clone)]
pub struct CommuteFailure {
    pub vector: Vector,
    pub ab: Vector,
    pub ba: Vector,
    pub meet: Vector,
}

#[derive(Debug, Clone)]
pub struct CommuteReport {
    pub holds: bool,
    pub failures: Vec<CommuteFailure>,
}

/// Checks `P_A P_B v = P_B P_A v = P_{A∩B} v` on every test vector.
pub fn commute_check(a: &Subspace, b: &Subspace, tests: &[Vector]) -> Result<CommuteReport> {
    let meet = a.intersect(b)?;
    let mut failures = Vec::new();
    for v in tests {
        let ab = a.project(&b.project(v)?)?;
        let ba = b.project(&a.project(v)?)?;
        let m = meet.project(v)?;
        if ab != ba || ab != m {
            failures.push(CommuteFailure {
                vector: v.clone(),
                ab,
                ba,
                meet: m,
            });
        }
    }
    Ok(CommuteReport {
        holds: failures.is_empty(),
        failures,
    })
}

/// Names of the projection laws that fail for `s` on the test pair
/// `(u, v)`: idempotence, self-adjointness, norm bound, orthogonal
/// residual, Pythagoras, and invariance under respanning by `alt`.
pub fn projection_law_failures(
    s: &Subspace,
    alt: &Subspace,
    u: &Vector,
    v: &Vector,
) -> Result<Vec<&'static str>> {
    let mut bad = Vec::new();
    let pu = s.project(u)?;
    let pv = s.project(v)?;
    if s.project(&pu)? != pu {
        bad.push("idempotent");
    }
    if pu.inner(v)? != u.inner(&pv)? {
        bad.push("self_adjoint");
    }
    if pu.norm_sq() > u.norm_sq() {
        bad.push("norm_bound");
    }
    let r = u - &pu;
    for w in s.spanning() {
        if !r.inner(w)?.is_zero() {
            bad.push("orthogonal_residual");
            break;
        }
    }
    if u.norm_sq() != pu.norm_sq() + r.norm_sq() {
        bad.push("pythagoras");
    }
    if alt.project(u)? != pu {
        bad.push("respan_invariant");
    }
    Ok(bad)
}

/// Two lines in a free 2-space meeting at angle `cos θ = 3/5`.
#[derive(Debug, Clone)]
pub struct AngledLines {
    pub space: Arc<InnerSpace>,
    pub a: Subspace,
    pub b: Subspace,
    /// Unit vector on the first line.
    pub v: Vector,
}

pub fn angled_lines() -> AngledLines {
    let g1 = GeneratorId::Formal("g1".into());
    let g2 = GeneratorId::Formal("g2".into());
    let space = InnerSpace::free(vec![g1.clone(), g2.clone()]).expect("distinct labels");
    let v = space.generator(&g1).expect("g1");
    let w = space
        .vector([(g1, int(3)), (g2, int(4))])
        .expect("known generators");
    let a = Subspace::span(&space, vec![v.clone()]).expect("same space");
    let b = Subspace::span(&space, vec![w]).expect("same space");
    AngledLines { space, a, b, v }
}
