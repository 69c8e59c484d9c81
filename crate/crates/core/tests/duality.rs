mod common;

use common::*;
use mtlforest::construct::{direct_product, ordinal_sum, LabeledForest};
use mtlforest::duality::*;
use mtlforest::kconstruct::{check_components_product, check_root_sum, verify_k_iso};
use mtlforest::mtl::{enumerate_chains, find_isomorphism, find_morphisms, AlgMorphism, FiniteMtl};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_algebras() -> Vec<FiniteMtl> {
    let b = FiniteMtl::boolean();
    let l3 = FiniteMtl::lukasiewicz(3);
    let g3 = FiniteMtl::goedel(3);
    let mut v: Vec<FiniteMtl> = (2..=4).flat_map(enumerate_chains).collect();
    v.push(direct_product(&[b.clone(), b.clone()]).unwrap());
    v.push(direct_product(&[b.clone(), l3.clone()]).unwrap());
    v.push(direct_product(&[b.clone(), g3.clone()]).unwrap());
    v.push(ordinal_sum(&[b.clone(), direct_product(&[b.clone(), b.clone()]).unwrap()]).unwrap());
    v.push(ordinal_sum(&[l3.clone(), direct_product(&[b.clone(), b]).unwrap()]).unwrap());
    v
}

type Pair = (usize, usize, usize, AlgMorphism, AlgMorphism);

/// Composable pairs `f: A -> B`, `g: B -> C` among the small algebras on
/// which `G` is defined for `f`, `g` and `g∘f`, shuffled by `seed`; also
/// the number of pairs left out.
fn composable_pairs(count: usize, seed: u64) -> (Vec<Pair>, usize) {
    let algs = small_algebras();
    let gs: Vec<Decomposition> = algs.iter().map(|a| functor_g(a).unwrap()).collect();
    let n = algs.len();
    let mut homs = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            homs[i][j] = find_morphisms(&algs[i], &algs[j], 6);
        }
    }
    let defined = |a: usize, b: usize, f: &AlgMorphism| functor_g_mor(f, &algs[a], &algs[b], &gs[a], &gs[b]).is_ok();
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for f in &homs[a][b] {
                    for g in &homs[b][c] {
                        if defined(a, b, f) && defined(b, c, g) && defined(a, c, &f.then(g)) {
                            pairs.push((a, b, c, f.clone(), g.clone()));
                        } else {
                            skipped += 1;
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    pairs.truncate(count);
    (pairs, skipped)
}

#[test]
fn g_is_contravariant_and_h_respects_composition() {
    let algs = small_algebras();
    let gs: Vec<Decomposition> = algs.iter().map(|a| functor_g(a).unwrap()).collect();
    let (pairs, _) = composable_pairs(40, 7);
    assert!(pairs.len() >= 20);
    let mut nontrivial = 0;
    for (a, b, c, f, g) in pairs {
        let gf = f.then(&g);
        let g_f = functor_g_mor(&f, &algs[a], &algs[b], &gs[a], &gs[b]).unwrap();
        let g_g = functor_g_mor(&g, &algs[b], &algs[c], &gs[b], &gs[c]).unwrap();
        let g_gf = functor_g_mor(&gf, &algs[a], &algs[c], &gs[a], &gs[c]).unwrap();
        assert_eq!(g_gf, g_g.then(&g_f));
        if !f.is_bijective() || !g.is_bijective() {
            nontrivial += 1;
        }

        // H on the labeled-forest morphisms G(g): G(C) -> G(B), G(f): G(B) -> G(A)
        let (la, lb, lc) = (&gs[a].labeled, &gs[b].labeled, &gs[c].labeled);
        let (ha, hb, hc) = (functor_h(la).unwrap(), functor_h(lb).unwrap(), functor_h(lc).unwrap());
        let h_gg = functor_h_mor(lc, lb, &g_g, &hc, &hb).unwrap();
        let h_gf = functor_h_mor(lb, la, &g_f, &hb, &ha).unwrap();
        let h_comp = functor_h_mor(lc, la, &g_g.then(&g_f), &hc, &ha).unwrap();
        assert_eq!(h_comp.composite, h_gf.composite.then(&h_gg.composite));
    }
    assert!(nontrivial > 0);
}

#[test]
fn g_fails_only_where_f_star_collapses_a_cover() {
    let algs = small_algebras();
    let gs: Vec<Decomposition> = algs.iter().map(|a| functor_g(a).unwrap()).collect();
    let mut failures = 0;
    for a in 0..algs.len() {
        for b in 0..algs.len() {
            for f in find_morphisms(&algs[a], &algs[b], 50) {
                if let Err(e) = functor_g_mor(&f, &algs[a], &algs[b], &gs[a], &gs[b]) {
                    assert!(matches!(e, DualityError::NotAMorphism(_)), "{e}");
                    assert!(collapsed_node(&f, &algs[a], &algs[b], &gs[a], &gs[b]).unwrap().is_some());
                    failures += 1;
                }
            }
        }
    }
    assert!(failures > 0);
}

#[test]
fn skipping_the_seam_has_no_label_map() {
    // Ł3 into Ł3 ⊕ 2, missing the idempotent at the seam
    let l3 = FiniteMtl::lukasiewicz(3);
    let n = ordinal_sum(&[l3.clone(), FiniteMtl::boolean()]).unwrap();
    let f = AlgMorphism::check(vec![0, 1, 3], &l3, &n).unwrap();
    let (gm, gn) = (functor_g(&l3).unwrap(), functor_g(&n).unwrap());
    assert_eq!(pullback(&f, &l3, &n, &gm, &gn).unwrap(), vec![0, 0]);
    assert_eq!(collapsed_node(&f, &l3, &n, &gm, &gn).unwrap(), Some(1));
    assert!(functor_g_mor(&f, &l3, &n, &gm, &gn).is_err());
    // no map Ł3 -> 2 at all, so no choice of label map could work
    assert!(find_morphisms(&l3, &FiniteMtl::boolean(), 10).is_empty());
}

#[test]
fn identities_go_to_identities() {
    for a in small_algebras() {
        let g = functor_g(&a).unwrap();
        let id = functor_g_mor(&AlgMorphism::identity(&a), &a, &a, &g, &g).unwrap();
        assert_eq!(id, LabeledForestMorphism::identity(&g.labeled));
        let h = functor_h(&g.labeled).unwrap();
        let hid = functor_h_mor(&g.labeled, &g.labeled, &id, &h, &h).unwrap();
        assert_eq!(hid.composite, AlgMorphism::identity(h.algebra()));
    }
}

#[test]
fn counit_on_small_algebras() {
    for a in small_algebras() {
        let rep = representability(&a);
        assert!(rep.conditions_agree());
        match counit(&a) {
            Ok(c) => {
                assert!(rep.representable);
                assert!(c.map.is_bijective());
            }
            Err(DualityError::NotRepresentable { .. }) => assert!(!rep.representable),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn w_reports() {
    let r = roundtrip(&FiniteMtl::non_representable_w()).unwrap();
    assert_eq!((r.representable, r.witness, r.size, r.reconstructed_size, r.iso), (false, Some((2, 1)), 4, 3, false));
    assert_eq!(r.counit_iso, None);
}

#[test]
fn w_matches_a_counted_reconstruction() {
    // independent: count sections of G(W)'s labeled forest by definition
    let w = FiniteMtl::non_representable_w();
    let g = functor_g(&w).unwrap();
    let sections = all_functions(&g.labeled).into_iter().filter(|h| is_section(&g.labeled, h)).count();
    assert_eq!(sections, 3);
    assert!(find_isomorphism(&w, functor_h(&g.labeled).unwrap().algebra()).is_none());
}

#[test]
fn example_k_plan() {
    let v = verify_k_iso(&example8()).unwrap();
    assert_eq!(v.plan, "[l(a)⊕(l(c)⊕(l(g)×l(h)))]×[l(b)⊕(l(d)×l(e)×l(f))]");
    assert_eq!((v.k_size, v.p_size), (54, 54));
    assert!(v.ok());
}

#[test]
fn archimedean_registry_has_no_duplicates() {
    let r = enumerate_archimedean_chains(6).unwrap();
    for (i, a) in r.chains().iter().enumerate() {
        assert!(a.is_archimedean().unwrap());
        for b in &r.chains()[i + 1..] {
            assert!(find_isomorphism(a, b).is_none());
        }
    }
    // every Łukasiewicz chain is present
    for k in 2..=6 {
        assert!(r.find(&FiniteMtl::lukasiewicz(k)).is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unit_is_an_isomorphism(l in labeled_strategy(5, 3)) {
        let u = unit(&l).unwrap();
        prop_assert!(u.is_isomorphism(&l));
    }

    #[test]
    fn k_matches_forest_product(l in labeled_strategy(6, 3)) {
        let v = verify_k_iso(&l).unwrap();
        prop_assert!(v.ok(), "{} vs {}", v.k_size, v.p_size);
        prop_assert!(check_components_product(&l).unwrap());
        for t in l.forest().component_trees() {
            let (sub, _) = l.induced(t.forest.nodes().iter().map(|i| t.nodes[i]).collect());
            prop_assert_eq!(check_root_sum(&sub).unwrap(), Some(true));
        }
    }

    #[test]
    fn forest_products_roundtrip(l in labeled_strategy(5, 3)) {
        let p = functor_h(&l).unwrap();
        let rep = representability(p.algebra());
        if rep.representable {
            let c = counit(p.algebra()).unwrap();
            prop_assert!(c.map.is_bijective());
        }
        let g = functor_g(p.algebra()).unwrap();
        prop_assert!(g.labeled.forest().isomorphism(l.forest()).is_some());
        let _: &LabeledForest = &g.labeled;
    }
}
