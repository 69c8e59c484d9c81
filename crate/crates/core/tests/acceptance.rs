//! One PASS/FAIL line per acceptance criterion. Runs without the test
//! harness so the report is always printed.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use mtlforest::construct::{ForestProduct, LabeledForest};
use mtlforest::corpus::{all_forests, build_corpus, Corpus, CorpusConfig};
use mtlforest::duality::*;
use mtlforest::kconstruct::verify_k_iso;
use mtlforest::mtl::{enumerate_chains, find_morphisms, AlgMorphism, FiniteMtl};
use mtlforest::poset::DEFAULT_DOWNSET_CAP;
use mtlforest::sheaf::sheaf_check;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// runtime targets
const C1_BUDGET: Duration = Duration::from_secs(60);
const C5_BUDGET: Duration = Duration::from_secs(300);
const SUITE_BUDGET: Duration = Duration::from_secs(600);

const MIN_MUTATIONS: usize = 50;
const MIN_PAIRS: usize = 20;
const SHEAF_ARITY: usize = 3;

struct Line {
    ok: bool,
}

fn line(n: usize, name: &str, ok: bool, detail: String) -> Line {
    println!("criterion {n} {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    Line { ok }
}

fn corpus() -> Corpus {
    build_corpus(&CorpusConfig::default(), None).unwrap()
}

fn axiom_suite(c: &Corpus) -> Line {
    let start = Instant::now();
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut check = |name: &str, a: &FiniteMtl| {
        checked += 1;
        if let Err(e) = FiniteMtl::validate(&a.tables()) {
            bad.push(format!("{name}: {e}"));
        }
    };
    let mut family: Vec<(String, FiniteMtl)> =
        c.algebras.iter().map(|a| (a.name.clone(), a.algebra.clone())).collect();
    for (k, l) in c.labeled.iter().enumerate() {
        family.push((format!("P(labeled {k})"), ForestProduct::new(l).unwrap().into_algebra()));
    }
    for (name, a) in &family {
        check(name, a);
        for f in a.filters() {
            check(&format!("{name}/{}", f.generator), &a.quotient(&f).unwrap().algebra);
            check(&format!("{name} up {}", f.generator), &a.upset_algebra(f.generator).unwrap().algebra);
        }
    }

    // single-entry mutations on every corpus chain up to 4 elements
    let mut mutations = 0;
    let mut accepted = 0;
    for a in c.chains.iter().filter(|a| (3..=4).contains(&a.len())) {
        let t = a.tables();
        for x in 0..t.n {
            for y in 0..t.n {
                let mut m = t.clone();
                m.imp[x][y] = (m.imp[x][y] + 1) % t.n;
                mutations += 1;
                accepted += FiniteMtl::validate(&m).is_ok() as usize;
                if x != y {
                    let mut m = t.clone();
                    m.mul[x][y] = (m.mul[x][y] + 1) % t.n;
                    mutations += 1;
                    accepted += FiniteMtl::validate(&m).is_ok() as usize;
                }
            }
        }
    }
    let took = start.elapsed();
    let ok = bad.is_empty() && accepted == 0 && mutations >= MIN_MUTATIONS && took < C1_BUDGET;
    for b in bad.iter().take(5) {
        println!("  {b}");
    }
    line(
        1,
        "axiom suite",
        ok,
        format!(
            "{checked} algebras valid, {} invalid; {mutations} mutations, {accepted} accepted; {:.1}s < {}s",
            bad.len(),
            took.as_secs_f64(),
            C1_BUDGET.as_secs()
        ),
    )
}

fn archimedean(c: &Corpus) -> Line {
    let mut chains: Vec<FiniteMtl> = (1..=6).flat_map(enumerate_chains).collect();
    chains.sort_by_key(|a| a.len());
    let disagreements = chains
        .iter()
        .filter(|a| !a.archimedean_report().unwrap().consistent(!a.is_trivial()))
        .count();
    let ok = disagreements == 0 && chains.len() == c.chains.len();
    line(2, "archimedean equivalence", ok, format!("{} chains n <= 6, {disagreements} disagreements", chains.len()))
}

fn spectrum(c: &Corpus) -> Line {
    let mut failures = 0;
    for a in &c.algebras {
        let spec = a.algebra.spectrum();
        let s = a.algebra.idempotent_structure();
        if spec.order.opposite().isomorphism(&s.order).is_none() || !s.order.is_forest() {
            failures += 1;
        }
    }
    line(3, "spectrum dual", failures == 0, format!("{} algebras, {failures} failures", c.algebras.len()))
}

fn chain_criterion() -> Line {
    let mut cases = 0;
    let mut counterexamples = 0;
    let mut failures = Vec::new();
    for n in 1..=5 {
        for f in all_forests(n) {
            for bits in 0u32..(1 << n) {
                cases += 1;
                let labels = (0..n).map(|i| FiniteMtl::lukasiewicz(2 + ((bits >> i) & 1) as usize)).collect();
                let l = LabeledForest::new(f.clone(), labels).unwrap();
                let p = ForestProduct::new(&l).unwrap();
                let a = p.algebra();
                let total = f.is_total();
                if a.is_chain() != total {
                    failures.push(format!("{f:?}: chain {} vs total {total}", a.is_chain()));
                    continue;
                }
                if total {
                    continue;
                }
                let Some((g, h)) = p.chain_counterexample(&l) else {
                    failures.push(format!("{f:?}: no counterexample"));
                    continue;
                };
                counterexamples += 1;
                // g is 0 above some node, 1 elsewhere; h likewise at an incomparable node
                let shape = |k: usize| {
                    let v = p.section(k);
                    let zeros: Vec<usize> = (0..n).filter(|&i| v[i] == 0).collect();
                    let root = *zeros.first()?;
                    let upset = (0..n).all(|i| (v[i] == 0) == f.leq(root, i));
                    let ones = (0..n).all(|i| v[i] == 0 || v[i] as usize == l.label(i).top());
                    (upset && ones).then_some(root)
                };
                let ok = match (shape(g), shape(h)) {
                    (Some(x), Some(y)) => {
                        !f.comparable(x, y)
                            && !a.leq(g, h)
                            && !a.leq(h, g)
                            && a.join(g, h) == a.top()
                    }
                    _ => false,
                };
                if !ok {
                    failures.push(format!("{f:?}: counterexample {g}, {h} has the wrong form"));
                }
            }
        }
    }
    for fl in failures.iter().take(5) {
        println!("  {fl}");
    }
    line(
        4,
        "chain criterion",
        failures.is_empty(),
        format!("{cases} labeled forests, {counterexamples} counterexamples checked, {} failures", failures.len()),
    )
}

fn sheaf_suite(c: &Corpus) -> Line {
    let start = Instant::now();
    let mut inputs: Vec<LabeledForest> =
        (1..=6).flat_map(all_forests).map(LabeledForest::boolean).collect();
    inputs.extend(c.labeled.iter().filter(|l| l.len() <= 6).cloned());
    let (mut families, mut covers, mut failures) = (0, 0, 0);
    for l in &inputs {
        let r = sheaf_check(l, DEFAULT_DOWNSET_CAP, SHEAF_ARITY).unwrap();
        families += r.families;
        covers += r.covers;
        if !r.ok() {
            failures += 1;
        }
    }
    let took = start.elapsed();
    line(
        5,
        "sheaf suite",
        failures == 0 && took < C5_BUDGET,
        format!(
            "{} labeled forests, {covers} covers, {families} families, {failures} failing; {:.1}s < {}s",
            inputs.len(),
            took.as_secs_f64(),
            C5_BUDGET.as_secs()
        ),
    )
}

fn k_iso(c: &Corpus) -> Line {
    let failures = c.labeled.iter().filter(|l| !verify_k_iso(l).unwrap().ok()).count();
    let v = verify_k_iso(&example8()).unwrap();
    let plan_ok = v.plan == "[l(a)⊕(l(c)⊕(l(g)×l(h)))]×[l(b)⊕(l(d)×l(e)×l(f))]";
    let ok = failures == 0 && v.ok() && (v.k_size, v.p_size) == (54, 54) && plan_ok;
    line(
        6,
        "K iso P",
        ok,
        format!(
            "{} corpus forests, {failures} failures; example {}/{} elements, plan {}",
            c.labeled.len(),
            v.k_size,
            v.p_size,
            v.plan
        ),
    )
}

fn duality(c: &Corpus) -> Line {
    let unit_failures = c.labeled.iter().filter(|l| !unit(l).unwrap().is_isomorphism(l)).count();
    let mut representable = 0;
    let mut counit_failures = 0;
    for a in &c.algebras {
        if representability(&a.algebra).representable {
            representable += 1;
            if !counit(&a.algebra).map(|k| k.map.is_bijective()).unwrap_or(false) {
                counit_failures += 1;
            }
        }
    }
    let w = roundtrip(&FiniteMtl::non_representable_w()).unwrap();
    let w_ok = !w.representable && w.witness == Some((2, 1)) && w.size == 4 && w.reconstructed_size == 3;
    line(
        7,
        "duality",
        unit_failures == 0 && counit_failures == 0 && w_ok,
        format!(
            "{} units, {unit_failures} failures; {representable} counits, {counit_failures} failures; W witness {:?}, |H(G(W))| = {}",
            c.labeled.len(),
            w.witness,
            w.reconstructed_size
        ),
    )
}

fn functoriality(c: &Corpus) -> Line {
    let algs: Vec<&FiniteMtl> = c.algebras.iter().map(|a| &a.algebra).filter(|a| a.len() <= 8).collect();
    let gs: Vec<Decomposition> = algs.iter().map(|a| functor_g(a).unwrap()).collect();
    let n = algs.len();
    let homs: Vec<Vec<Vec<AlgMorphism>>> =
        (0..n).map(|i| (0..n).map(|j| find_morphisms(algs[i], algs[j], 4)).collect()).collect();
    let defined = |a: usize, b: usize, f: &AlgMorphism| functor_g_mor(f, algs[a], algs[b], &gs[a], &gs[b]).is_ok();
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for f in &homs[a][b] {
                    for g in &homs[b][cc] {
                        if defined(a, b, f) && defined(b, cc, g) && defined(a, cc, &f.then(g)) {
                            pairs.push((a, b, cc, f, g));
                        } else {
                            skipped += 1;
                        }
                    }
                }
            }
        }
    }
    let total = pairs.len();
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(c.seed));
    pairs.truncate(64);
    let mut failures = 0;
    for &(a, b, cc, f, g) in &pairs {
        let g_f = functor_g_mor(f, algs[a], algs[b], &gs[a], &gs[b]).unwrap();
        let g_g = functor_g_mor(g, algs[b], algs[cc], &gs[b], &gs[cc]).unwrap();
        let g_gf = functor_g_mor(&f.then(g), algs[a], algs[cc], &gs[a], &gs[cc]).unwrap();
        let (la, lb, lc) = (&gs[a].labeled, &gs[b].labeled, &gs[cc].labeled);
        let (ha, hb, hc) = (functor_h(la).unwrap(), functor_h(lb).unwrap(), functor_h(lc).unwrap());
        let h_gg = functor_h_mor(lc, lb, &g_g, &hc, &hb).unwrap();
        let h_gf = functor_h_mor(lb, la, &g_f, &hb, &ha).unwrap();
        let h_comp = functor_h_mor(lc, la, &g_g.then(&g_f), &hc, &ha).unwrap();
        if g_gf != g_g.then(&g_f) || h_comp.composite != h_gf.composite.then(&h_gg.composite) {
            failures += 1;
        }
    }
    line(
        8,
        "functoriality",
        failures == 0 && pairs.len() >= MIN_PAIRS,
        format!(
            "{} pairs sampled from {total} with G defined, {skipped} excluded where G is undefined; {failures} failures",
            pairs.len()
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let c = corpus();
    let lines = [
        axiom_suite(&c),
        archimedean(&c),
        spectrum(&c),
        chain_criterion(),
        sheaf_suite(&c),
        k_iso(&c),
        duality(&c),
        functoriality(&c),
    ];
    let took = start.elapsed();
    println!("suite: {:.1}s < {}s", took.as_secs_f64(), SUITE_BUDGET.as_secs());
    let failed = lines.iter().filter(|l| !l.ok).count();
    if failed == 0 && took < SUITE_BUDGET {
        println!("acceptance: all {} criteria PASS", lines.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria FAIL");
        ExitCode::FAILURE
    }
}
