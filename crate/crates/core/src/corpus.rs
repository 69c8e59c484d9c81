//! Deterministic test corpus: chains, forests, labeled forests and a mix
//! of composite algebras, driven by a checked-in TOML config and a seed.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construct::{direct_product, forest_product_size, ordinal_sum, ForestProduct, LabeledForest};
use crate::mtl::{enumerate_chains, FiniteMtl};
use crate::poset::{Forest, NodeSet};
use crate::Error;

const DEFAULT_CONFIG: &str = include_str!("../corpus.toml");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    pub chains: ChainConfig,
    pub forests: ForestConfig,
    pub algebras: AlgebraConfig,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub max_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub max_nodes: usize,
    pub label_sizes: Vec<usize>,
    pub assignments_per_forest: usize,
    pub max_product_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraConfig {
    pub products: usize,
    pub ordinal_sums: usize,
    pub forest_products: usize,
    pub max_size: usize,
}

impl CorpusConfig {
    pub fn from_toml(text: &str) -> Result<CorpusConfig, Error> {
        let cfg: CorpusConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.forests.label_sizes.iter().any(|&k| k < 2) {
            return Err(Error::Config("label sizes must be at least 2".into()));
        }
        if cfg.chains.max_size == 0 || cfg.forests.label_sizes.is_empty() {
            return Err(Error::Config("empty chain or label pool".into()));
        }
        Ok(cfg)
    }
}

impl Default for CorpusConfig {
    fn default() -> CorpusConfig {
        CorpusConfig::from_toml(DEFAULT_CONFIG).expect("bundled corpus config parses")
    }
}

#[derive(Clone, Debug)]
pub struct NamedAlgebra {
    pub name: String,
    pub algebra: FiniteMtl,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub seed: u64,
    pub chains: Vec<FiniteMtl>,
    pub forests: Vec<Forest>,
    pub labeled: Vec<LabeledForest>,
    pub algebras: Vec<NamedAlgebra>,
}

// parent array, roots have `None`
type Parents = Vec<Option<usize>>;

/// Every forest on `n` nodes, one per isomorphism class.
///
/// A tree on `k` nodes is a root placed under a forest on `k - 1` nodes; a
/// forest is a multiset of trees, generated in non-increasing order of
/// (size, index) so each multiset appears once.
pub fn all_forests(n: usize) -> Vec<Forest> {
    let mut trees: Vec<Vec<Parents>> = vec![Vec::new()];
    let mut forests: Vec<Vec<Parents>> = vec![vec![Vec::new()]];
    for k in 1..=n {
        trees.push(forests[k - 1].iter().map(|f| lift(f)).collect());
        let mut out = Vec::new();
        multisets(&trees, k, (k, usize::MAX), &mut Vec::new(), &mut out);
        forests.push(out);
    }
    forests[n].iter().map(|p| to_forest(p)).collect()
}

fn lift(f: &Parents) -> Parents {
    let mut p = vec![None];
    p.extend(f.iter().map(|q| Some(q.map_or(0, |j| j + 1))));
    p
}

fn multisets(
    trees: &[Vec<Parents>],
    remaining: usize,
    bound: (usize, usize),
    picked: &mut Vec<(usize, usize)>,
    out: &mut Vec<Parents>,
) {
    if remaining == 0 {
        let mut p = Vec::new();
        for &(size, idx) in picked.iter() {
            let off = p.len();
            p.extend(trees[size][idx].iter().map(|q| q.map(|j| j + off)));
        }
        out.push(p);
        return;
    }
    for size in (1..=remaining.min(bound.0)).rev() {
        let top = if size == bound.0 { bound.1.min(trees[size].len().saturating_sub(1)) } else { trees[size].len() - 1 };
        for idx in (0..=top).rev() {
            picked.push((size, idx));
            multisets(trees, remaining - size, (size, idx), picked, out);
            picked.pop();
        }
    }
}

fn to_forest(p: &Parents) -> Forest {
    let edges: Vec<(usize, usize)> = p.iter().enumerate().filter_map(|(i, q)| q.map(|j| (j, i))).collect();
    Forest::from_covers(p.len(), &edges).expect("parent arrays describe forests")
}

/// Builds the corpus; `seed` overrides the configured one.
pub fn build_corpus(cfg: &CorpusConfig, seed: Option<u64>) -> Result<Corpus, Error> {
    let seed = seed.unwrap_or(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let chains: Vec<FiniteMtl> = (1..=cfg.chains.max_size).flat_map(enumerate_chains).collect();
    let forests: Vec<Forest> = (1..=cfg.forests.max_nodes).flat_map(all_forests).collect();

    let mut labeled = Vec::new();
    for f in &forests {
        let mut seen = HashSet::new();
        let mut candidates = vec![vec![2; f.len()]];
        for _ in 0..cfg.forests.assignments_per_forest {
            candidates.push((0..f.len()).map(|_| *cfg.forests.label_sizes.choose(&mut rng).unwrap()).collect());
        }
        for sizes in candidates {
            if !seen.insert(sizes.clone()) {
                continue;
            }
            let labels = sizes.iter().map(|&k| FiniteMtl::lukasiewicz(k)).collect();
            let lf = LabeledForest::new(f.clone(), labels)?;
            if forest_product_size(&lf, NodeSet::full(lf.len())) <= cfg.forests.max_product_size as u128 {
                labeled.push(lf);
            }
        }
    }

    let mut algebras = vec![NamedAlgebra { name: "W".into(), algebra: FiniteMtl::non_representable_w() }];
    for (k, c) in chains.iter().enumerate() {
        algebras.push(NamedAlgebra { name: format!("chain{}-{k}", c.len()), algebra: c.clone() });
    }
    let nontrivial: Vec<&FiniteMtl> = chains.iter().filter(|c| !c.is_trivial()).collect();
    let max = cfg.algebras.max_size;
    let mut tries = 0;
    let mut made = 0;
    while made < cfg.algebras.products && tries < 50 * cfg.algebras.products.max(1) {
        tries += 1;
        let a = *nontrivial.choose(&mut rng).unwrap();
        let b = *nontrivial.choose(&mut rng).unwrap();
        if a.len() * b.len() > max {
            continue;
        }
        algebras.push(NamedAlgebra { name: format!("product{made}"), algebra: direct_product(&[a.clone(), b.clone()])? });
        made += 1;
    }
    tries = 0;
    made = 0;
    while made < cfg.algebras.ordinal_sums && tries < 50 * cfg.algebras.ordinal_sums.max(1) {
        tries += 1;
        let a = *nontrivial.choose(&mut rng).unwrap();
        let b = *nontrivial.choose(&mut rng).unwrap();
        let c = *nontrivial.choose(&mut rng).unwrap();
        // the upper part is a product so the sum is not a chain
        let upper = direct_product(&[b.clone(), c.clone()])?;
        if a.len() + upper.len() - 1 > max {
            continue;
        }
        algebras.push(NamedAlgebra { name: format!("sum{made}"), algebra: ordinal_sum(&[a.clone(), upper])? });
        made += 1;
    }
    let mut pool: Vec<&LabeledForest> = labeled
        .iter()
        .filter(|l| l.len() > 1 && forest_product_size(l, NodeSet::full(l.len())) <= max as u128)
        .collect();
    pool.shuffle(&mut rng);
    for (k, l) in pool.into_iter().take(cfg.algebras.forest_products).enumerate() {
        algebras.push(NamedAlgebra { name: format!("forest{k}"), algebra: ForestProduct::new(l)?.into_algebra() });
    }
    Ok(Corpus { seed, chains, forests, labeled, algebras })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forest_counts() {
        let counts: Vec<usize> = (1..=7).map(|n| all_forests(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 9, 20, 48, 115]);
    }

    #[test]
    fn deterministic() {
        let cfg = CorpusConfig::default();
        let a = build_corpus(&cfg, None).unwrap();
        let b = build_corpus(&cfg, None).unwrap();
        assert_eq!(a.labeled, b.labeled);
        let names: Vec<_> = a.algebras.iter().map(|x| (&x.name, &x.algebra)).collect();
        let names2: Vec<_> = b.algebras.iter().map(|x| (&x.name, &x.algebra)).collect();
        assert_eq!(names, names2);
        assert!(a.algebras.iter().all(|x| x.algebra.len() <= cfg.algebras.max_size));
    }

    #[test]
    fn bad_config() {
        assert!(CorpusConfig::from_toml("seed = 1").is_err());
    }
}
