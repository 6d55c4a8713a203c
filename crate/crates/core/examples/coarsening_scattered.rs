//! Counts close neighbours of each coarsening tail as the branching grows.
//! Only the minimal tail collects more and more neighbours.

use ihs_lab::scalar::ratio;
use ihs_lab::weakclosure::scattered_probe;
use ihs_lab::{LayeredStructure, TypeDef};

fn main() -> ihs_lab::Result<()> {
    let t = TypeDef::points_of(LayeredStructure::coarsening(3, 2)?);
    let eps = ratio(1, 4);
    let r = scattered_probe(&t, &eps, &[(3, 2), (3, 3), (3, 4), (3, 5)])?;

    println!("eps = {eps}");
    let mut tags: Vec<&str> = r.rows.iter().filter(|row| row.branching == 2).map(|row| row.tag.as_str()).collect();
    tags.truncate(6);
    for tag in tags {
        let counts: Vec<String> = r
            .rows
            .iter()
            .filter(|row| row.tag == tag)
            .map(|row| format!("b={}:{}", row.branching, row.count))
            .collect();
        println!("  {tag:<18} {}", counts.join("  "));
    }
    for (n, tag) in &r.flagged {
        println!("growing at N={n}: {tag}");
    }
    Ok(())
}
