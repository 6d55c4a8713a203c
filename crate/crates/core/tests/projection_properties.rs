//! Property tests for projections, alternation and the exact scalar layer,
//! run on bounded-closure subspaces of every family.

use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, RngSeed};

use ihs_lab::hilbert::gram;
use ihs_lab::scalar::{format_scalar, parse_scalar, ratio};
use ihs_lab::subspaces::{projection_law_failures, AlternationStatus};
use ihs_lab::{alternate, psd_check, LayeredStructure, Scalar, Subspace, TypeDef, TypeKind, Vector, WeakClosure};

const CASES: u32 = 256;

fn config() -> Config {
    Config {
        cases: CASES,
        rng_algorithm: RngAlgorithm::ChaCha,
        rng_seed: RngSeed::Fixed(0x1f5_2024),
        failure_persistence: None,
        ..Config::default()
    }
}

struct Family {
    closure: WeakClosure,
}

fn family(name: &str) -> &'static Family {
    static CELLS: OnceLock<Vec<(&'static str, Family)>> = OnceLock::new();
    let cells = CELLS.get_or_init(|| {
        let pts = |s: LayeredStructure| TypeDef::points_of(s);
        let build = |t: TypeDef| {
            let closure = WeakClosure::new(&t).unwrap();
            closure.domains().unwrap();
            Family { closure }
        };
        vec![
            ("refining", build(pts(LayeredStructure::refining(2, 3, 1).unwrap()))),
            ("coarsening", build(pts(LayeredStructure::coarsening(2, 3).unwrap()))),
            ("pure-set", build(pts(LayeredStructure::pure_set(5).unwrap()))),
            ("subset-sums", build(TypeDef::new(LayeredStructure::subset_sums(3).unwrap(), TypeKind::SubsetSum).unwrap())),
            ("mixed-kernel", build(pts(LayeredStructure::mixed_kernel(3, 2, 2).unwrap()))),
        ]
    });
    &cells.iter().find(|(n, _)| *n == name).unwrap().1
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

/// Coefficients for a vector in a space of dimension `dim`, mostly sparse.
fn coeffs(dim: usize) -> impl Strategy<Value = Vec<(usize, Scalar)>> {
    prop::collection::vec((0..dim, scalar()), 0..=4)
}

fn vector(f: &Family, terms: &[(usize, Scalar)]) -> Vector {
    let space = f.closure.space();
    terms.iter().fold(space.zero(), |v, (i, c)| v.axpy(c, &space.unit(*i)))
}

fn subspace(f: &Family, pick: usize) -> Subspace {
    let doms = f.closure.domains().unwrap();
    doms[pick % doms.len()].subspace.clone()
}

/// The same subspace spanned by a reversed, rescaled and redundant list.
fn respanned(s: &Subspace, k: &Scalar) -> Subspace {
    let mut alt: Vec<Vector> = s.spanning().iter().rev().cloned().collect();
    alt.extend(s.spanning().iter().map(|v| v.scaled(k)));
    Subspace::span(s.space(), alt).unwrap()
}

fn laws(name: &str, pick: usize, k: &Scalar, u: &[(usize, Scalar)], v: &[(usize, Scalar)]) -> Result<(), TestCaseError> {
    let f = family(name);
    let s = subspace(f, pick);
    let bad = projection_law_failures(&s, &respanned(&s, k), &vector(f, u), &vector(f, v)).unwrap();
    prop_assert!(bad.is_empty(), "{name}: {bad:?}");
    Ok(())
}

fn commuting(name: &str, i: usize, j: usize, v: &[(usize, Scalar)]) -> Result<(), TestCaseError> {
    let f = family(name);
    let (a, b) = (subspace(f, i), subspace(f, j));
    let v = vector(f, v);
    let ab = a.project(&b.project(&v).unwrap()).unwrap();
    let ba = b.project(&a.project(&v).unwrap()).unwrap();
    let meet = a.intersect(&b).unwrap().project(&v).unwrap();
    prop_assert_eq!(&ab, &ba);
    prop_assert_eq!(&ab, &meet);
    let run = alternate(&v, &a, &b, 8).unwrap();
    prop_assert!(matches!(run.status, AlternationStatus::FixedPoint(k) if k <= 2));
    Ok(())
}

macro_rules! family_props {
    ($module:ident, $name:literal) => {
        mod $module {
            use super::*;

            proptest! {
                #![proptest_config(config())]

                #[test]
                fn projection_laws(pick in 0usize..64, k in scalar(), u in coeffs(family($name).closure.space().dim()), v in coeffs(family($name).closure.space().dim())) {
                    laws($name, pick, &k, &u, &v)?;
                }

                #[test]
                fn projections_commute(i in 0usize..64, j in 0usize..64, v in coeffs(family($name).closure.space().dim())) {
                    commuting($name, i, j, &v)?;
                }
            }
        }
    };
}

family_props!(refining, "refining");
family_props!(coarsening, "coarsening");
family_props!(pure_set, "pure-set");
family_props!(subset_sums, "subset-sums");
family_props!(mixed_kernel, "mixed-kernel");

proptest! {
    #![proptest_config(config())]

    #[test]
    fn scalar_text_round_trip(x in scalar()) {
        let text = format_scalar(&x);
        prop_assert!(text.contains('/'));
        prop_assert_eq!(parse_scalar(&text).unwrap(), x);
    }

    #[test]
    fn gram_of_vectors_is_psd(vs in prop::collection::vec(coeffs(11), 1..=5)) {
        let f = family("mixed-kernel");
        let dim = f.closure.space().dim();
        let vs: Vec<Vector> = vs
            .iter()
            .map(|t| t.iter().map(|(i, c)| (i % dim, c.clone())).collect::<Vec<_>>())
            .map(|t| vector(f, &t))
            .collect();
        prop_assert!(psd_check(&gram(&vs).unwrap()).unwrap().is_psd());
    }

    #[test]
    fn inner_product_is_symmetric_and_bilinear(u in coeffs(11), v in coeffs(11), w in coeffs(11), k in scalar()) {
        let f = family("mixed-kernel");
        let dim = f.closure.space().dim();
        let wrap = |t: &[(usize, Scalar)]| vector(f, &t.iter().map(|(i, c)| (i % dim, c.clone())).collect::<Vec<_>>());
        let (u, v, w) = (wrap(&u), wrap(&v), wrap(&w));
        prop_assert_eq!(u.inner(&v).unwrap(), v.inner(&u).unwrap());
        let lhs = u.axpy(&k, &w).inner(&v).unwrap();
        let rhs = u.inner(&v).unwrap() + &k * w.inner(&v).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
