//! Canonical bases of types over boundedly closed sets, and weak limits of
//! sequences of distinct points.

use ihs_lab::weakclosure::LimitSpec;
use ihs_lab::{ClassId, LayeredStructure, PointId, Seed, TypeDef, WeakClosure};

fn main() -> ihs_lab::Result<()> {
    let c = WeakClosure::new(&TypeDef::points_of(LayeredStructure::refining(2, 3, 1)?))?;
    let x = PointId::new([1, 2]);
    let a = c.model().point_vector(&x)?;

    for seeds in [vec![], vec![Seed::Class(ClassId::new(1, [1]))], vec![Seed::Point(PointId::new([1, 0]))]] {
        let d = c.domain(&seeds)?;
        let b = c.canonical_base(&a, &d.subspace)?;
        println!("{x} over {:<16} base {:<12} V-rank {}", d.label, c.tag(b).to_string(), c.v_rank(&a, &d.subspace)?);
    }

    let lim = c.weak_limit(&LimitSpec::DistinctInClass(ClassId::new(1, [1])))?;
    println!("weak limit of distinct points of class [1]: {}", c.tag(c.require(&lim)?));

    let atoms = WeakClosure::new(&TypeDef::points_of(LayeredStructure::pure_set(4)?))?;
    let zero = atoms.weak_limit(&LimitSpec::DistinctAtoms)?;
    println!("weak limit of distinct atoms: {} (zero: {})", atoms.tag(atoms.require(&zero)?), zero.is_zero());
    Ok(())
}
