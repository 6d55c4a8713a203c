//! Two lines at cos θ = 3/5. Their projections do not commute, and
//! alternating between them shrinks the norm geometrically without ever
//! reaching the meet.

use ihs_lab::subspaces::angled_lines;
use ihs_lab::{alternate, commute_check};

fn main() -> ihs_lab::Result<()> {
    let l = angled_lines();
    let report = commute_check(&l.a, &l.b, std::slice::from_ref(&l.v))?;
    println!("projections commute: {}", report.holds);
    if let Some(f) = report.failures.first() {
        println!("  P_A P_B v = {:?}", f.ab.coeff_strings());
        println!("  P_B P_A v = {:?}", f.ba.coeff_strings());
        println!("  P_(A∩B) v = {:?}", f.meet.coeff_strings());
    }

    let run = alternate(&l.v, &l.a, &l.b, 8)?;
    let norms = run.norms_sq();
    for (k, n) in norms.iter().enumerate() {
        let step = if k == 0 { String::new() } else { format!("  ratio {}", n / &norms[k - 1]) };
        println!("step {k}: |v|² = {n}{step}");
    }
    println!("status: {:?}", run.status);
    Ok(())
}
