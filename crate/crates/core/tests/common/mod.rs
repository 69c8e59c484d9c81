#![allow(dead_code)]

use mtlforest::construct::LabeledForest;
use mtlforest::mtl::FiniteMtl;
use mtlforest::poset::{Forest, Poset};
use proptest::prelude::*;

/// The 8-node forest of the worked example: `a < c < g, h` and `b < d, e, f`.
pub fn example8() -> LabeledForest {
    let mut f = Forest::from_covers(8, &[(0, 2), (2, 6), (2, 7), (1, 3), (1, 4), (1, 5)]).unwrap();
    for (i, n) in ["a", "b", "c", "d", "e", "f", "g", "h"].iter().enumerate() {
        f.set_name(i, *n);
    }
    LabeledForest::boolean(f)
}

pub fn forest_from_parents(parents: &[Option<usize>]) -> Forest {
    let edges: Vec<(usize, usize)> =
        parents.iter().enumerate().filter_map(|(i, p)| p.map(|j| (j, i))).collect();
    Forest::from_covers(parents.len(), &edges).unwrap()
}

pub fn labeled(parents: &[Option<usize>], sizes: &[usize]) -> LabeledForest {
    let labels = sizes.iter().map(|&k| FiniteMtl::lukasiewicz(k)).collect();
    LabeledForest::new(forest_from_parents(parents), labels).unwrap()
}

/// Parent arrays where every node's parent has a smaller index.
pub fn parents_strategy(max_nodes: usize) -> impl Strategy<Value = Vec<Option<usize>>> {
    (1..=max_nodes).prop_flat_map(|n| {
        (0..n)
            .map(|i| if i == 0 { Just(None).boxed() } else { proptest::option::of(0..i).boxed() })
            .collect::<Vec<_>>()
    })
}

pub fn labeled_strategy(max_nodes: usize, max_label: usize) -> impl Strategy<Value = LabeledForest> {
    parents_strategy(max_nodes).prop_flat_map(move |p| {
        let n = p.len();
        proptest::collection::vec(2..=max_label, n).prop_map(move |sizes| labeled(&p, &sizes))
    })
}

/// Every function `h` with `h(i) ∈ l(i)`, in odometer order.
pub fn all_functions(l: &LabeledForest) -> Vec<Vec<u16>> {
    let mut out = vec![Vec::new()];
    for i in 0..l.len() {
        let k = l.label(i).len();
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..k).map(move |x| {
                    let mut w = v.clone();
                    w.push(x as u16);
                    w
                })
            })
            .collect();
    }
    out
}

/// Membership straight from the definition: whenever `h(i) != 0`, `h` is
/// `1` at every node strictly below `i`.
pub fn is_section(l: &LabeledForest, h: &[u16]) -> bool {
    let f = l.forest();
    (0..l.len()).all(|i| {
        h[i] as usize == l.label(i).bot()
            || (0..l.len()).filter(|&j| f.lt(j, i)).all(|j| h[j] as usize == l.label(j).top())
    })
}

/// Residual on sections: pointwise where `h <= g` strictly below, else 0.
pub fn section_imp(l: &LabeledForest, h: &[u16], g: &[u16]) -> Vec<u16> {
    let f = l.forest();
    (0..l.len())
        .map(|i| {
            let below_ok = (0..l.len()).filter(|&j| f.lt(j, i)).all(|j| l.label(j).leq(h[j] as usize, g[j] as usize));
            if below_ok {
                l.label(i).imp(h[i] as usize, g[i] as usize) as u16
            } else {
                l.label(i).bot() as u16
            }
        })
        .collect()
}

pub fn section_mul(l: &LabeledForest, h: &[u16], g: &[u16]) -> Vec<u16> {
    (0..l.len()).map(|i| l.label(i).mul(h[i] as usize, g[i] as usize) as u16).collect()
}

/// Non-isomorphic forests on `n` nodes by brute force over parent arrays.
pub fn brute_forest_count(n: usize) -> usize {
    let mut reps: Vec<Poset> = Vec::new();
    let mut parents = vec![None; n];
    fn rec(i: usize, parents: &mut Vec<Option<usize>>, reps: &mut Vec<Poset>) {
        if i == parents.len() {
            let f = forest_from_parents(parents);
            if !reps.iter().any(|r| r.isomorphism(f.poset()).is_some()) {
                reps.push(f.poset().clone());
            }
            return;
        }
        parents[i] = None;
        rec(i + 1, parents, reps);
        for p in 0..i {
            parents[i] = Some(p);
            rec(i + 1, parents, reps);
        }
    }
    rec(0, &mut parents, &mut reps);
    reps.len()
}
