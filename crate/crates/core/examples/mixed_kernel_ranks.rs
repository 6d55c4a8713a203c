//! The mixed-depth kernel: an exact PSD certificate for its Gram matrix and
//! points of A_m sitting at foundation rank m.

use std::collections::BTreeMap;

use ihs_lab::hilbert::kernel_f;
use ihs_lab::weakclosure::foundation_rank;
use ihs_lab::{psd_check, LayeredStructure, Matrix, Provenance, PsdVerdict, TypeDef, WeakClosure};

fn main() -> ihs_lab::Result<()> {
    for m_max in 1..=5 {
        let s = LayeredStructure::mixed_kernel(m_max, 2, 2)?;
        let pts = s.points();
        let g = Matrix::symmetric_from_fn(pts.len(), |i, j| kernel_f(&s, &pts[i], &pts[j]).expect("points of s"));
        let rank = match psd_check(&g)? {
            PsdVerdict::Psd { rank, .. } => rank,
            PsdVerdict::NotPsd { value, .. } => panic!("not PSD: witness value {value}"),
        };

        let c = WeakClosure::new(&TypeDef::points_of(s))?;
        let ranks = foundation_rank(&c.orders()?.0)?;
        let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..c.len() {
            if let Provenance::FullPoint(x) = c.tag(i) {
                by_class.entry(x.address()[0]).or_default().push(ranks.rank(i));
            }
        }
        let summary: Vec<String> = by_class
            .iter()
            .map(|(m, r)| format!("A{m}→{}", r.iter().max().unwrap()))
            .collect();
        println!(
            "m_max={m_max}: {} points, Gram rank {rank}, closure {}, top {}  [{}]",
            pts.len(),
            c.len(),
            ranks.top(),
            summary.join(" ")
        );
    }
    Ok(())
}
