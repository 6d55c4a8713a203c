//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ihs_lab::hilbert::{kernel_f, GeneratorId};
use ihs_lab::runner::{self, canonical_base_failures, order_failures, random_vector, ExperimentConfig};
use ihs_lab::scalar::{half_pow, ratio};
use ihs_lab::subspaces::{angled_lines, projection_law_failures, AlternationStatus};
use ihs_lab::weakclosure::{
    foundation_rank, one_based_check, scattered_probe, DeltaTypeSpace, Provenance, ShelahRanker,
    SyntheticClosure,
};
use ihs_lab::{
    alternate, psd_check, LayeredStructure, Matrix, PsdVerdict, Subspace, TypeDef,
    TypeKind, Vector, WeakClosure,
};

type Outcome = Result<String, String>;

fn points(s: LayeredStructure) -> TypeDef {
    TypeDef::points_of(s)
}

fn sums(n: usize) -> TypeDef {
    TypeDef::new(LayeredStructure::subset_sums(n).unwrap(), TypeKind::SubsetSum).unwrap()
}

/// Refining (N ≤ 2, b ≤ 3), pure sets (|X| ≤ 5) and subset sums (N ≤ 3).
fn one_based_instances() -> Vec<TypeDef> {
    let mut out = Vec::new();
    for n in 0..=2 {
        for b in 2..=3 {
            out.push(points(LayeredStructure::refining(n, b, 1).unwrap()));
        }
    }
    for x in 2..=5 {
        out.push(points(LayeredStructure::pure_set(x).unwrap()));
    }
    for n in 0..=3 {
        out.push(sums(n));
    }
    out
}

/// The one-based instances plus coarsening and small mixed kernels.
fn all_instances() -> Vec<TypeDef> {
    let mut out = one_based_instances();
    for n in 1..=2 {
        for b in 2..=3 {
            out.push(points(LayeredStructure::coarsening(n, b).unwrap()));
        }
    }
    for m in 1..=3 {
        out.push(points(LayeredStructure::mixed_kernel(m, 2, 2).unwrap()));
    }
    out
}

fn label(t: &TypeDef) -> String {
    let s = t.structure();
    format!("{:?}/{:?}(N={}, b={})", s.family(), t.kind(), s.depth(), s.branching())
}

fn psd_certification() -> Outcome {
    for m in 1..=5 {
        let s = LayeredStructure::mixed_kernel(m, 2, 2).unwrap();
        let pts = s.points();
        let g = Matrix::symmetric_from_fn(pts.len(), |i, j| kernel_f(&s, &pts[i], &pts[j]).unwrap());
        if let v @ PsdVerdict::NotPsd { .. } = psd_check(&g).unwrap() {
            return Err(format!("m_max={m}: {v:?}"));
        }
        if ihs_lab::HilbertModel::new(&s).is_err() {
            return Err(format!("m_max={m}: extended Gram space rejected"));
        }
    }
    Ok("kernel Gram exactly PSD for m_max = 1..5".into())
}

fn rank_profile() -> Outcome {
    let c = WeakClosure::new(&points(LayeredStructure::mixed_kernel(5, 2, 2).unwrap())).unwrap();
    let ranks = foundation_rank(&c.orders().unwrap().0).unwrap();
    for i in 0..c.len() {
        if let Provenance::FullPoint(x) = c.tag(i) {
            let m = x.address()[0];
            if ranks.rank(i) != m {
                return Err(format!("{} has rank {} in A_{m}", c.tag(i), ranks.rank(i)));
            }
        }
    }
    let mut tops = Vec::new();
    for m in 1..=5 {
        let c = WeakClosure::new(&points(LayeredStructure::mixed_kernel(m, 2, 2).unwrap())).unwrap();
        tops.push(foundation_rank(&c.orders().unwrap().0).unwrap().top());
    }
    if !tops.windows(2).all(|w| w[0] < w[1]) {
        return Err(format!("top ranks {tops:?} not strictly increasing"));
    }
    Ok(format!("A_m points have rank m for m = 1..5; top ranks {tops:?}"))
}

fn one_basedness() -> Outcome {
    let mut pairs = 0;
    for t in one_based_instances() {
        let c = WeakClosure::new(&t).unwrap();
        let r = one_based_check(&c).unwrap();
        if !r.holds {
            let f = &r.failures[0];
            return Err(format!("{}: {} vs {} on {}", label(&t), f.a, f.b, f.vector));
        }
        pairs += r.pairs_checked;
    }
    if one_based_check(&SyntheticClosure::angled_lines()).unwrap().holds {
        return Err("angled lines passed the commuting check".into());
    }
    Ok(format!("{pairs} subspace pairs commute; angled lines fail as expected"))
}

fn canonical_bases() -> Outcome {
    let mut checked = 0;
    for t in all_instances() {
        let c = WeakClosure::new(&t).unwrap();
        let f = canonical_base_failures(&c).unwrap();
        if let Some((a, d, why)) = f.first() {
            return Err(format!("{}: {a} over {d}: {why}", label(&t)));
        }
        checked += c.len() * c.domains().unwrap().len();
    }
    Ok(format!("{checked} (element, domain) pairs have a unique base"))
}

fn orders() -> Outcome {
    let mut n = 0;
    for t in all_instances() {
        let c = WeakClosure::new(&t).unwrap();
        let f = order_failures(&c).unwrap();
        if let Some(first) = f.first() {
            return Err(format!("{}: {first}", label(&t)));
        }
        n += c.len() * c.len();
    }
    Ok(format!("order_1 is the transpose of order_P and L2 = L1 on {n} pairs"))
}

fn rank_bridge() -> Outcome {
    let mut cells = Vec::new();
    for n in 0..=2 {
        for b in 2..=3 {
            cells.push(points(LayeredStructure::refining(n, b, 1).unwrap()));
            if n >= 1 {
                cells.push(points(LayeredStructure::coarsening(n, b).unwrap()));
            }
        }
    }
    for b in 2..=3 {
        cells.push(points(LayeredStructure::pure_set(b).unwrap()));
    }
    let mut checked = 0;
    let mut slowest = 0.0f64;
    for t in cells {
        let start = Instant::now();
        let c = WeakClosure::new(&t).unwrap();
        let space = DeltaTypeSpace::padded(&t).unwrap();
        let mut ranker = ShelahRanker::new(&space, t.structure().branching()).unwrap();
        for d in c.domains().unwrap().iter() {
            for i in 0..c.len() {
                let v = c.v_rank(c.vector(i), &d.subspace).unwrap() as i64;
                let r = ranker.rank(&space.type_over(c.tag(i), &d.seeds).unwrap());
                if v != r {
                    return Err(format!("{}: {} over {}: V = {v}, R = {r}", label(&t), c.tag(i), d.label));
                }
                checked += 1;
            }
        }
        slowest = slowest.max(start.elapsed().as_secs_f64());
    }
    Ok(format!("V = R_Δ on {checked} instances (slowest cell {slowest:.2}s)"))
}

fn class_sum(c: &WeakClosure, x: &ihs_lab::PointId, levels: impl Iterator<Item = usize>) -> Vector {
    let s = c.structure();
    let terms: Vec<(GeneratorId, ihs_lab::Scalar)> = levels
        .map(|n| (GeneratorId::Class(s.class_of(x, n).unwrap()), half_pow(n)))
        .collect();
    c.space().vector(terms).unwrap()
}

fn closure_shapes() -> Outcome {
    // Refining: points and truncations Σ_{n ≤ m} 2^-n class_of(x, n).
    for n in 0..=3 {
        for b in 2..=3 {
            let s = LayeredStructure::refining(n, b, 1).unwrap();
            let c = WeakClosure::new(&points(s.clone())).unwrap();
            let mut want: Vec<Vector> = Vec::new();
            for x in s.points() {
                for m in 0..=n {
                    let v = class_sum(&c, &x, 0..=m);
                    if !want.contains(&v) {
                        want.push(v);
                    }
                }
            }
            let expected: usize = (0..=n).map(|m| b.pow(m as u32)).sum();
            if want.len() != expected || c.len() != expected || !want.iter().all(|v| c.position(v).is_some()) {
                return Err(format!("refining N={n} b={b}: closure differs from the closed form"));
            }
        }
    }
    // Coarsening: tails, with growth flagged only at the minimal tail.
    let t = points(LayeredStructure::coarsening(3, 2).unwrap());
    let r = scattered_probe(&t, &ratio(1, 4), &[(3, 2), (3, 3), (3, 4)]).unwrap();
    let minimal = Provenance::Tail(ihs_lab::PointId::new([0, 0, 0]), 3).to_string();
    if r.flagged != [(3, minimal.clone())] {
        return Err(format!("coarsening flags {:?}", r.flagged));
    }
    let s = LayeredStructure::coarsening(3, 3).unwrap();
    let c = WeakClosure::new(&points(s.clone())).unwrap();
    for x in s.points() {
        for m in 1..=3 {
            if c.position(&class_sum(&c, &x, m..=3)).is_none() {
                return Err(format!("tail {m} of {x} missing"));
            }
        }
    }
    if c.len() != 27 + 9 + 3 + 1 {
        return Err(format!("coarsening closure has {} elements", c.len()));
    }
    // Subset sums: exactly 2^{N+1} of them.
    for n in 0..=3 {
        let c = WeakClosure::new(&sums(n)).unwrap();
        if c.len() != 1 << (n + 1) {
            return Err(format!("subset sums N={n}: {} elements", c.len()));
        }
        for mask in 0u32..(1 << (n + 1)) {
            let terms: Vec<(GeneratorId, ihs_lab::Scalar)> = (0..=n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| (GeneratorId::Atom(ihs_lab::PointId::new([i])), half_pow(i)))
                .collect();
            if c.position(&c.space().vector(terms).unwrap()).is_none() {
                return Err(format!("subset sum {mask:b} missing at N={n}"));
            }
        }
    }
    Ok(format!("refining, coarsening ({minimal} flagged) and subset-sum closures match"))
}

fn alternating_projections() -> Outcome {
    let mut runs = 0;
    for t in one_based_instances() {
        let c = WeakClosure::new(&t).unwrap();
        let doms = c.domains().unwrap();
        for a in doms.iter() {
            for b in doms.iter() {
                for e in c.elements() {
                    let run = alternate(&e.vector, &a.subspace, &b.subspace, 8).unwrap();
                    match run.status {
                        AlternationStatus::FixedPoint(k) if k <= 2 => runs += 1,
                        s => return Err(format!("{}: {} with {} / {}: {s:?}", label(&t), e.tag, a.label, b.label)),
                    }
                }
            }
        }
    }
    let l = angled_lines();
    let run = alternate(&l.v, &l.a, &l.b, 20).unwrap();
    if run.status != AlternationStatus::Unconverged {
        return Err("angled lines converged".into());
    }
    let n = run.norms_sq();
    let per_step = ratio(9, 25);
    if let Some(k) = (0..n.len() - 1).find(|&k| &n[k + 1] / &n[k] != per_step) {
        return Err(format!("step {k}: ratio {}", &n[k + 1] / &n[k]));
    }
    let per_trip = ratio(81, 625);
    for k in 0..10 {
        if &n[2 * k + 2] / &n[2 * k] != per_trip {
            return Err(format!("round trip {k}: ratio {}", &n[2 * k + 2] / &n[2 * k]));
        }
    }
    Ok(format!("{runs} runs fix within 2 steps; angled lines scale the norm by 9/25 per round trip"))
}

fn projection_properties() -> Outcome {
    let families: Vec<(&str, TypeDef)> = vec![
        ("refining", points(LayeredStructure::refining(2, 3, 1).unwrap())),
        ("coarsening", points(LayeredStructure::coarsening(2, 3).unwrap())),
        ("pure-set", points(LayeredStructure::pure_set(5).unwrap())),
        ("subset-sums", sums(3)),
        ("mixed-kernel", points(LayeredStructure::mixed_kernel(3, 2, 2).unwrap())),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(runner::DEFAULT_SEED);
    let cases = 200;
    for (name, t) in &families {
        let c = WeakClosure::new(t).unwrap();
        let doms = c.domains().unwrap();
        for case in 0..cases {
            let s = &doms[rng.random_range(0..doms.len())].subspace;
            let mut alt: Vec<Vector> = s.spanning().iter().rev().cloned().collect();
            alt.extend(s.spanning().iter().map(|v| v.scaled(&ratio(-3, 2))));
            let alt = Subspace::span(c.space(), alt).unwrap();
            let u = random_vector(c.space(), &mut rng);
            let v = random_vector(c.space(), &mut rng);
            let bad = projection_law_failures(s, &alt, &u, &v).unwrap();
            if !bad.is_empty() {
                return Err(format!("{name} case {case}: {bad:?}"));
            }
        }
    }
    Ok(format!("{cases} cases per family x {} families, no failures", families.len()))
}

fn determinism() -> Outcome {
    let configs = [
        r#"{"scenario": "refining", "params": {"N": 2, "b": 2}, "ops": ["build", "closure", "one-based-check", "asym-free-check", "canonical-base-check", "order-check", "foundation-rank", "v-rank", "shelah-rank", "chain-probe", "scattered-probe", "alternate", "projection-properties"]}"#,
        r#"{"scenario": "coarsening", "params": {"N": 2, "b": 2}, "ops": ["closure", "foundation-rank", "scattered-probe", "shelah-rank"]}"#,
        r#"{"scenario": "subset-sums", "params": {"N": 2}, "ops": ["closure", "one-based-check", "chain-probe"]}"#,
        r#"{"scenario": "pure-set", "params": {"atoms": 4}, "ops": ["closure", "v-rank", "shelah-rank"]}"#,
        r#"{"scenario": "mixed-kernel", "params": {"m_max": 3, "class_size": 2}, "ops": ["psd-check", "closure", "foundation-rank"]}"#,
        r#"{"scenario": "angled-lines", "ops": ["closure", "one-based-check", "commute-check", "alternate"]}"#,
    ];
    for text in configs {
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let a = runner::run(&cfg).unwrap().rendered;
        let b = runner::run(&cfg).unwrap().rendered;
        if a != b {
            return Err(format!("{} differs between runs", cfg.scenario.name()));
        }
    }
    let sweep = ExperimentConfig::from_json(r#"{"scenario": "mixed-kernel", "grid": {"m_max": [1, 2, 3, 4]}, "output": {"format": "csv"}}"#).unwrap();
    if runner::sweep(&sweep).unwrap().rendered != runner::sweep(&sweep).unwrap().rendered {
        return Err("sweep differs between runs".into());
    }
    Ok(format!("{} scenarios and a sweep are byte-identical across runs", configs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("PSD certification", psd_certification),
        ("rank profile", rank_profile),
        ("one-basedness and commuting projections", one_basedness),
        ("canonical bases", canonical_bases),
        ("order anti-isomorphism and L2 = L1", orders),
        ("V = R_Δ", rank_bridge),
        ("weak-closure shapes", closure_shapes),
        ("alternating projections", alternating_projections),
        ("projection algebra properties", projection_properties),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
