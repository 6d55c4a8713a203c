//! Compares the V-rank computed from the projection order with a brute-force
//! Shelah Δ-rank over a padded finite model.

use ihs_lab::weakclosure::{DeltaTypeSpace, ShelahRanker};
use ihs_lab::{LayeredStructure, TypeDef, WeakClosure};

fn main() -> ihs_lab::Result<()> {
    let cells = [
        LayeredStructure::refining(1, 3, 1)?,
        LayeredStructure::refining(2, 2, 1)?,
        LayeredStructure::coarsening(2, 2)?,
        LayeredStructure::pure_set(3)?,
    ];
    for s in cells {
        let t = TypeDef::points_of(s);
        let c = WeakClosure::new(&t)?;
        let space = DeltaTypeSpace::padded(&t)?;
        let mut ranker = ShelahRanker::new(&space, t.structure().branching())?;
        let (mut agree, mut total) = (0, 0);
        for d in c.domains()?.iter() {
            for i in 0..c.len() {
                let v = c.v_rank(c.vector(i), &d.subspace)? as i64;
                let r = ranker.rank(&space.type_over(c.tag(i), &d.seeds)?);
                total += 1;
                if v == r {
                    agree += 1;
                } else {
                    println!("  {} over {}: V={v} R={r}", c.tag(i), d.label);
                }
            }
        }
        let s = t.structure();
        println!(
            "{:?} N={} b={}: universe {}, {agree}/{total} agree",
            s.family(),
            s.depth(),
            s.branching(),
            space.universe_len()
        );
    }
    Ok(())
}
