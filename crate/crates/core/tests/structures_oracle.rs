//! Enumeration and orbit oracles for the layered structures.
//!
//! Automorphisms of the finite trees are enumerated outright (one
//! permutation of children per internal node), and the bounded closure is
//! recomputed as the set of classes every seed-fixing automorphism fixes.
//! Orbits are taken in a copy with one extra child per node, so that a
//! class is never pinned just because all its siblings are seeds.

use std::collections::{BTreeMap, BTreeSet};

use ihs_lab::{ClassId, CommonLevel, Family, LayeredStructure, PointId, Seed};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every automorphism of the full `b`-ary tree of depth `depth`, as a map
/// on address prefixes of every length.
fn tree_automorphisms(depth: usize, b: usize) -> Vec<BTreeMap<Vec<usize>, Vec<usize>>> {
    let mut internal: Vec<Vec<usize>> = vec![vec![]];
    for len in 0..depth.saturating_sub(1) {
        let next: Vec<Vec<usize>> = internal
            .iter()
            .filter(|p| p.len() == len)
            .flat_map(|p| (0..b).map(move |i| [p.clone(), vec![i]].concat()))
            .collect();
        internal.extend(next);
    }
    if depth == 0 {
        internal.clear();
    }
    let perms = permutations(b);
    let mut out = Vec::new();
    let mut choice = vec![0usize; internal.len()];
    loop {
        let sigma: BTreeMap<&Vec<usize>, &Vec<usize>> =
            internal.iter().zip(choice.iter().map(|&k| &perms[k])).collect();
        let mut map = BTreeMap::new();
        map.insert(vec![], vec![]);
        let mut frontier = vec![vec![]];
        for _ in 0..depth {
            let mut next = Vec::new();
            for p in frontier {
                let image: Vec<usize> = map[&p].clone();
                for i in 0..b {
                    let child = [p.clone(), vec![i]].concat();
                    map.insert(child.clone(), [image.clone(), vec![sigma[&p][i]]].concat());
                    next.push(child);
                }
            }
            frontier = next;
        }
        out.push(map);
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < perms.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            return out;
        }
    }
}

fn image_class(f: &BTreeMap<Vec<usize>, Vec<usize>>, c: &ClassId) -> ClassId {
    ClassId::new(c.level, f[&c.path].clone())
}

fn fixes(f: &BTreeMap<Vec<usize>, Vec<usize>>, s: &Seed) -> bool {
    match s {
        Seed::Point(x) => f[&x.0] == x.0,
        Seed::Class(c) => image_class(f, c) == *c,
    }
}

fn orbit_bdd(s: &LayeredStructure, autos: &[BTreeMap<Vec<usize>, Vec<usize>>], seeds: &[Seed]) -> BTreeSet<ClassId> {
    let fixing: Vec<_> = autos.iter().filter(|f| seeds.iter().all(|x| fixes(f, x))).collect();
    s.classes()
        .into_iter()
        .filter(|c| fixing.iter().all(|f| image_class(f, c) == *c))
        .collect()
}

fn seeds_of(s: &LayeredStructure) -> Vec<Seed> {
    let mut out: Vec<Seed> = s.points().into_iter().map(Seed::Point).collect();
    out.extend(s.classes().into_iter().map(Seed::Class));
    out
}

fn check_orbits(s: &LayeredStructure) {
    let autos = tree_automorphisms(s.depth(), s.branching() + 1);
    let seeds = seeds_of(s);
    assert_eq!(s.bdd_basis(&[]).unwrap(), orbit_bdd(s, &autos, &[]));
    for (i, a) in seeds.iter().enumerate() {
        for b in &seeds[i..] {
            let pair = [a.clone(), b.clone()];
            assert_eq!(s.bdd_basis(&pair).unwrap(), orbit_bdd(s, &autos, &pair), "{pair:?}");
        }
    }
}

#[test]
fn automorphism_counts() {
    // |Aut| of the b-ary tree of depth N is (b!)^(number of internal nodes).
    assert_eq!(tree_automorphisms(0, 3).len(), 1);
    assert_eq!(tree_automorphisms(1, 3).len(), 6);
    assert_eq!(tree_automorphisms(2, 3).len(), 6usize.pow(4));
    assert_eq!(tree_automorphisms(2, 2).len(), 8);
}

#[test]
fn refining_bdd_matches_orbits() {
    for (n, b) in [(0, 3), (1, 2), (1, 3), (2, 2)] {
        check_orbits(&LayeredStructure::refining(n, b, 1).unwrap());
    }
}

#[test]
fn coarsening_bdd_matches_orbits() {
    for (n, b) in [(1, 2), (1, 3), (2, 2)] {
        check_orbits(&LayeredStructure::coarsening(n, b).unwrap());
    }
}

#[test]
fn pure_set_bdd_matches_orbits() {
    let s = LayeredStructure::pure_set(4).unwrap();
    let autos: Vec<BTreeMap<Vec<usize>, Vec<usize>>> = permutations(5)
        .into_iter()
        .map(|p| {
            let mut m: BTreeMap<Vec<usize>, Vec<usize>> = (0..5).map(|i| (vec![i], vec![p[i]])).collect();
            m.insert(vec![], vec![]);
            m
        })
        .collect();
    let seeds = seeds_of(&s);
    assert!(orbit_bdd(&s, &autos, &[]).is_empty());
    for a in &seeds {
        for b in &seeds {
            let pair = [a.clone(), b.clone()];
            assert_eq!(s.bdd_basis(&pair).unwrap(), orbit_bdd(&s, &autos, &pair));
        }
    }
}

#[test]
fn point_and_class_counts() {
    for n in 0..=3 {
        for b in 2..=4 {
            for c in 1..=2 {
                let s = LayeredStructure::refining(n, b, c).unwrap();
                assert_eq!(s.point_count(), b.pow(n as u32) * c);
                for level in 0..=n {
                    assert_eq!(s.classes_at(level).unwrap().len(), b.pow(level as u32));
                }
            }
            if n >= 1 {
                let s = LayeredStructure::coarsening(n, b).unwrap();
                assert_eq!(s.point_count(), b.pow(n as u32));
                for level in 0..=n {
                    assert_eq!(s.classes_at(level).unwrap().len(), b.pow((n - level) as u32));
                }
            }
        }
    }
    for m in 1..=4 {
        for sz in 1..=3 {
            let s = LayeredStructure::mixed_kernel(m, 2, sz).unwrap();
            let want: usize = (1..=m).map(|k| 2usize.pow(k as u32 - 1) * sz).sum();
            assert_eq!(s.point_count(), want);
        }
    }
    assert_eq!(LayeredStructure::pure_set(5).unwrap().point_count(), 5);
    assert_eq!(LayeredStructure::subset_sums(3).unwrap().family(), Family::PureSet);
}

#[test]
fn classes_partition_and_nest() {
    let cases = [
        LayeredStructure::refining(3, 2, 2).unwrap(),
        LayeredStructure::coarsening(3, 3).unwrap(),
        LayeredStructure::mixed_kernel(4, 2, 2).unwrap(),
    ];
    for s in &cases {
        let pts = s.points();
        for level in 0..=s.depth().max(s.class_count()) {
            let Ok(classes) = s.classes_at(level) else { continue };
            let mut covered: Vec<PointId> = Vec::new();
            for c in &classes {
                covered.extend(s.points_in(c).unwrap());
                assert!(s.points_in(c).unwrap().contains(&s.representative(c).unwrap()));
            }
            covered.sort();
            let mut all = pts.clone();
            all.sort();
            if s.family() != Family::MixedKernel {
                assert_eq!(covered, all, "{:?} level {level}", s.family());
            }
        }
        for x in &pts {
            for y in &pts {
                assert_eq!(s.common_level(x, y).unwrap(), s.common_level(y, x).unwrap());
                if let CommonLevel::At(l) = s.common_level(x, y).unwrap() {
                    assert_eq!(s.class_of(x, l).unwrap(), s.class_of(y, l).unwrap());
                }
            }
        }
    }
    let r = &cases[0];
    for x in r.points() {
        for n in 0..3 {
            let fine = r.points_in(&r.class_of(&x, n + 1).unwrap()).unwrap();
            let coarse = r.points_in(&r.class_of(&x, n).unwrap()).unwrap();
            assert!(fine.iter().all(|y| coarse.contains(y)));
        }
    }
    let c = &cases[1];
    for x in c.points() {
        for n in 0..3 {
            let fine = c.points_in(&c.class_of(&x, n).unwrap()).unwrap();
            let coarse = c.points_in(&c.class_of(&x, n + 1).unwrap()).unwrap();
            assert!(fine.iter().all(|y| coarse.contains(y)));
        }
    }
}
