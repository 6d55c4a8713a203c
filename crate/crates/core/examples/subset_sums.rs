//! The subset-sum type: 2^(N+1) closure elements ordered by inclusion of
//! index sets.

use ihs_lab::weakclosure::{chain_probe, one_based_check};
use ihs_lab::{LayeredStructure, TypeDef, TypeKind, WeakClosure};

fn main() -> ihs_lab::Result<()> {
    for n in 0..=3 {
        let t = TypeDef::new(LayeredStructure::subset_sums(n)?, TypeKind::SubsetSum)?;
        let c = WeakClosure::new(&t)?;
        let one_based = one_based_check(&c)?;
        println!(
            "N={n}: {:>2} elements, longest chain {}, one-based {} ({} pairs)",
            c.len(),
            chain_probe(&c.orders()?.0)?,
            one_based.holds,
            one_based.pairs_checked
        );
    }

    let c = WeakClosure::new(&TypeDef::new(LayeredStructure::subset_sums(2)?, TypeKind::SubsetSum)?)?;
    let order = &c.orders()?.0;
    println!("covering pairs of the projection order at N=2:");
    for (lo, hi) in order.pairs() {
        let covered = (0..c.len()).any(|k| order.lt(lo, k) && order.lt(k, hi));
        if !covered {
            println!("  {} < {}", c.tag(lo), c.tag(hi));
        }
    }
    Ok(())
}
