//! Weak closure of the points of a refining structure, with its projection
//! order and foundation ranks.
//!
//! cargo run --example refining_closure -- [N] [b]

use ihs_lab::weakclosure::{chain_probe, foundation_rank};
use ihs_lab::{LayeredStructure, TypeDef, WeakClosure};

fn main() -> ihs_lab::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, b) = (args.first().copied().unwrap_or(2), args.get(1).copied().unwrap_or(2));

    let c = WeakClosure::new(&TypeDef::points_of(LayeredStructure::refining(n, b, 1)?))?;
    let orders = c.orders()?;
    let ranks = foundation_rank(&orders.0)?;

    println!("refining N={n} b={b}: {} closure elements", c.len());
    for (i, e) in c.elements().iter().enumerate() {
        let coeffs: Vec<String> = e.vector.coeff_strings().into_iter().map(|(g, q)| format!("{q}·{g}")).collect();
        println!("  {:<14} rank {}  = {}", e.tag.to_string(), ranks.rank(i), coeffs.join(" + "));
    }
    println!("top rank {}, longest chain {}", ranks.top(), chain_probe(&orders.0)?);
    Ok(())
}
