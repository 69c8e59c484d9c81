//! Ordinal sums, direct products and forest products.

use std::collections::HashMap;

use thiserror::Error;

use crate::mtl::{AlgMorphism, Filter, FiniteMtl, MtlError, Op, SubAlgebra};
use crate::poset::{Forest, NodeSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("empty family")]
    EmptyFamily,
    #[error("summand {index} is not a chain; only the last summand may be")]
    NonChainSummand { index: usize },
    #[error("result would have {size} elements, cap is {cap}")]
    CapExceeded { size: u128, cap: usize },
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("label of node {node} is trivial")]
    TrivialLabel { node: usize },
    #[error("label of node {node} is not a chain")]
    LabelNotChain { node: usize },
    #[error("label of node {node} is not archimedean")]
    LabelNotArchimedean { node: usize },
    #[error("{0:?} is not a downset")]
    NotADownset(NodeSet),
    #[error("{0:?} is not contained in the support")]
    NotInSupport(NodeSet),
    #[error("operation {op} leaves the product at ({x}, {y})")]
    NotClosed { op: &'static str, x: usize, y: usize },
    #[error(transparent)]
    Mtl(#[from] MtlError),
}

/// Ordinal sum of `parts` in list order, tops identified. Every part but
/// the last must be a chain.
pub fn ordinal_sum(parts: &[FiniteMtl]) -> Result<FiniteMtl, ConstructError> {
    if parts.is_empty() {
        return Err(ConstructError::EmptyFamily);
    }
    if let Some(index) = parts[..parts.len() - 1].iter().position(|p| !p.is_chain()) {
        return Err(ConstructError::NonChainSummand { index });
    }
    let parts: Vec<FiniteMtl> = parts.iter().map(|p| p.canonicalize().0).collect();
    // (part, local) for every non-top element, then the shared top
    let mut owner = Vec::new();
    let mut offset = Vec::with_capacity(parts.len());
    for (p, a) in parts.iter().enumerate() {
        offset.push(owner.len());
        owner.extend((0..a.len() - 1).map(|x| (p, x)));
    }
    let n = owner.len() + 1;
    let top = n - 1;
    if n > crate::size_cap() {
        return Err(ConstructError::CapExceeded { size: n as u128, cap: crate::size_cap() });
    }
    let global = |p: usize, x: usize| if x == parts[p].top() { top } else { offset[p] + x };
    Ok(FiniteMtl::from_fns(n, 0, top, |op, x, y| {
        if x == top || y == top {
            return match op {
                Op::Mul | Op::Meet => {
                    if x == top {
                        y
                    } else {
                        x
                    }
                }
                Op::Join => top,
                Op::Imp => {
                    if y == top {
                        top
                    } else {
                        y
                    }
                }
            };
        }
        let (px, lx) = owner[x];
        let (py, ly) = owner[y];
        if px == py {
            return global(px, parts[px].op(op, lx, ly));
        }
        let (low, high) = if px < py { (x, y) } else { (y, x) };
        match op {
            Op::Mul | Op::Meet => low,
            Op::Join => high,
            Op::Imp => {
                if px < py {
                    top
                } else {
                    y
                }
            }
        }
    }))
}

/// Componentwise product; element index is mixed radix with the first
/// factor most significant.
pub fn direct_product(parts: &[FiniteMtl]) -> Result<FiniteMtl, ConstructError> {
    if parts.is_empty() {
        return Err(ConstructError::EmptyFamily);
    }
    let parts: Vec<FiniteMtl> = parts.iter().map(|p| p.canonicalize().0).collect();
    let size = parts.iter().fold(1u128, |acc, p| acc.saturating_mul(p.len() as u128));
    if size > crate::size_cap() as u128 {
        return Err(ConstructError::CapExceeded { size, cap: crate::size_cap() });
    }
    let n = size as usize;
    let mut strides = vec![1; parts.len()];
    for k in (0..parts.len() - 1).rev() {
        strides[k] = strides[k + 1] * parts[k + 1].len();
    }
    let digits: Vec<Vec<usize>> = (0..n)
        .map(|x| parts.iter().zip(&strides).map(|(p, &s)| (x / s) % p.len()).collect())
        .collect();
    Ok(FiniteMtl::from_fns(n, 0, n - 1, |op, x, y| {
        parts
            .iter()
            .enumerate()
            .map(|(k, p)| p.op(op, digits[x][k], digits[y][k]) * strides[k])
            .sum()
    }))
}

/// A forest with a nontrivial archimedean chain at every node. Labels are
/// stored in canonical encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledForest {
    forest: Forest,
    labels: Vec<FiniteMtl>,
}

impl LabeledForest {
    pub fn new(forest: Forest, labels: Vec<FiniteMtl>) -> Result<LabeledForest, ConstructError> {
        if labels.len() != forest.len() {
            return Err(ConstructError::LabelCount { expected: forest.len(), got: labels.len() });
        }
        let mut canon = Vec::with_capacity(labels.len());
        for (node, l) in labels.into_iter().enumerate() {
            check_label(node, &l)?;
            canon.push(l.canonicalize().0);
        }
        Ok(LabeledForest { forest, labels: canon })
    }

    /// Every node labelled with the two-element chain.
    pub fn boolean(forest: Forest) -> LabeledForest {
        let labels = vec![FiniteMtl::boolean(); forest.len()];
        LabeledForest { forest, labels }
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn labels(&self) -> &[FiniteMtl] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &FiniteMtl {
        &self.labels[i]
    }

    pub fn len(&self) -> usize {
        self.forest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forest.is_empty()
    }

    /// The labeled forest induced on `set`, with the node map.
    pub fn induced(&self, set: NodeSet) -> (LabeledForest, Vec<usize>) {
        let (forest, nodes) = self.forest.induced(set);
        let labels = nodes.iter().map(|&i| self.labels[i].clone()).collect();
        (LabeledForest { forest, labels }, nodes)
    }
}

fn check_label(node: usize, l: &FiniteMtl) -> Result<(), ConstructError> {
    if l.is_trivial() {
        return Err(ConstructError::TrivialLabel { node });
    }
    if !l.is_chain() {
        return Err(ConstructError::LabelNotChain { node });
    }
    if !l.is_archimedean()? {
        return Err(ConstructError::LabelNotArchimedean { node });
    }
    Ok(())
}

/// Number of sections of the forest product over `support`: a root `r`
/// contributes `(|l(r)| - 1) + Π over children`.
pub fn forest_product_size(lf: &LabeledForest, support: NodeSet) -> u128 {
    fn tree(lf: &LabeledForest, r: usize) -> u128 {
        let above = lf.forest().covers(r).iter().fold(1u128, |acc, c| acc.saturating_mul(tree(lf, c)));
        (lf.label(r).len() as u128 - 1).saturating_add(above)
    }
    let (sub, _) = lf.induced(support);
    sub.forest().minimal_elements().iter().fold(1u128, |acc, r| acc.saturating_mul(tree(&sub, r)))
}

/// Values of a section, one per forest node; nodes outside the support
/// hold the top of their label.
pub type Section = Vec<u16>;

/// The forest product over a subset of the nodes of a labeled forest,
/// with the correspondence between element indices and sections.
#[derive(Clone, Debug)]
pub struct ForestProduct {
    support: NodeSet,
    sections: Vec<Section>,
    index: HashMap<Section, usize>,
    algebra: FiniteMtl,
}

/// The three regions of a section.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ElementClass {
    /// `h⁻¹(1)`
    pub ones: NodeSet,
    /// `C_h`, the nodes with values strictly between bottom and top
    pub middle: NodeSet,
    /// nodes with value `0_i`
    pub zeros: NodeSet,
}

impl ForestProduct {
    pub fn new(lf: &LabeledForest) -> Result<ForestProduct, ConstructError> {
        ForestProduct::over(lf, lf.forest().nodes())
    }

    /// The product over `support` with the induced order.
    pub fn over(lf: &LabeledForest, support: NodeSet) -> Result<ForestProduct, ConstructError> {
        let size = forest_product_size(lf, support);
        let cap = crate::size_cap();
        if size > cap as u128 {
            return Err(ConstructError::CapExceeded { size, cap });
        }
        let sections = enumerate_sections(lf, support);
        debug_assert_eq!(sections.len() as u128, size);
        let index: HashMap<Section, usize> =
            sections.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect();
        let algebra = product_algebra(lf, support, &sections, &index)?;
        Ok(ForestProduct { support, sections, index, algebra })
    }

    pub fn algebra(&self) -> &FiniteMtl {
        &self.algebra
    }

    pub fn into_algebra(self) -> FiniteMtl {
        self.algebra
    }

    pub fn support(&self) -> NodeSet {
        self.support
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn section(&self, k: usize) -> &[u16] {
        &self.sections[k]
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn index_of(&self, values: &[u16]) -> Option<usize> {
        self.index.get(values).copied()
    }

    pub fn classify(&self, lf: &LabeledForest, k: usize) -> ElementClass {
        classify_values(lf, self.support, &self.sections[k])
    }

    /// `X_S = {h : h|_S = 1}` for a downset `S` of the support.
    pub fn downset_filter(&self, lf: &LabeledForest, s: NodeSet) -> Result<DownsetFilter, ConstructError> {
        if !s.is_subset(self.support) {
            return Err(ConstructError::NotInSupport(s));
        }
        let f = lf.forest();
        if s.iter().any(|i| self.support.iter().any(|j| f.leq(j, i) && !s.contains(j))) {
            return Err(ConstructError::NotADownset(s));
        }
        let is_top = |h: &[u16], i: usize| h[i] as usize == lf.label(i).top();
        let members: Vec<usize> =
            (0..self.len()).filter(|&k| s.iter().all(|i| is_top(&self.sections[k], i))).collect();
        let maxima = f.max_of(s);
        let by_maxima: Vec<usize> =
            (0..self.len()).filter(|&k| maxima.iter().all(|i| is_top(&self.sections[k], i))).collect();
        let mut gen = self.sections[0].clone();
        for i in self.support.iter() {
            gen[i] = if s.contains(i) { lf.label(i).top() as u16 } else { 0 };
        }
        let generator = self.index_of(&gen).expect("h_S is a section");
        let filter = Filter { generator, members };
        let a = &self.algebra;
        let prime = a.is_prime(&filter);
        let complement = ForestProduct::over(lf, self.support.difference(s))?;
        // extending by 1 on S is the identity on stored values
        let phi_map: Vec<usize> = complement
            .sections
            .iter()
            .map(|h| self.index_of(h).expect("extension by 1 is a section"))
            .collect();
        let upset = a.upset_algebra(generator)?;
        let to_upset: Vec<usize> =
            phi_map.iter().map(|&x| upset.index_of(x).expect("image lies in X_S")).collect();
        let phi = AlgMorphism::check(to_upset, complement.algebra(), &upset.algebra)?;
        Ok(DownsetFilter { set: s, filter, by_maxima, prime, complement, phi, phi_map, upset })
    }

    /// For a non-chain forest, the sections `g` (zero on `↑n`) and `h`
    /// (zero on `↑m`) for the first incomparable pair `n, m`.
    pub fn chain_counterexample(&self, lf: &LabeledForest) -> Option<(usize, usize)> {
        let f = lf.forest();
        let nodes: Vec<usize> = self.support.iter().collect();
        let (n, m) = nodes
            .iter()
            .flat_map(|&a| nodes.iter().map(move |&b| (a, b)))
            .find(|&(a, b)| a < b && !f.comparable(a, b))?;
        let make = |p: usize| {
            let mut v = self.sections[self.len() - 1].clone();
            for i in self.support.iter() {
                if f.leq(p, i) {
                    v[i] = 0;
                }
            }
            self.index_of(&v).expect("counterexample section is admissible")
        };
        Some((make(n), make(m)))
    }
}

/// `X_S` with its two descriptions, its generator and the isomorphism
/// `φ` from the product over the complement of `S`.
#[derive(Clone, Debug)]
pub struct DownsetFilter {
    pub set: NodeSet,
    pub filter: Filter,
    /// `{h : h(i) = 1 for every maximal i in S}`
    pub by_maxima: Vec<usize>,
    pub prime: bool,
    pub complement: ForestProduct,
    /// `φ` as a map into the algebra on `↑h_S`.
    pub phi: AlgMorphism,
    /// `φ` as a map into the full product.
    pub phi_map: Vec<usize>,
    pub upset: SubAlgebra,
}

pub fn forest_product(lf: &LabeledForest) -> Result<ForestProduct, ConstructError> {
    ForestProduct::new(lf)
}

// Choose D = h⁻¹(1) among downsets; minimal nodes of the rest take any
// non-top value, everything else is 0.
fn enumerate_sections(lf: &LabeledForest, support: NodeSet) -> Vec<Section> {
    let f = lf.forest();
    let tops: Vec<u16> = lf.labels().iter().map(|l| l.top() as u16).collect();
    let below_in = |i: usize| support.iter().filter(move |&j| f.lt(j, i));
    let mut downsets = vec![NodeSet::EMPTY];
    // grow downsets node by node in an order where predecessors come first
    let mut order: Vec<usize> = support.iter().collect();
    order.sort_by_key(|&i| below_in(i).count());
    for &i in &order {
        let need: NodeSet = below_in(i).collect();
        let extra: Vec<NodeSet> = downsets.iter().filter(|d| need.is_subset(**d)).map(|d| d.with(i)).collect();
        downsets.extend(extra);
    }
    let mut out: Vec<(usize, u64, Section)> = Vec::new();
    for d in downsets {
        let rest = support.difference(d);
        let minimal: Vec<usize> = rest.iter().filter(|&i| !below_in(i).any(|j| rest.contains(j))).collect();
        let mut base = tops.clone();
        for i in rest.iter() {
            base[i] = 0;
        }
        let mut vals = vec![0u16; minimal.len()];
        loop {
            let mut s = base.clone();
            for (k, &i) in minimal.iter().enumerate() {
                s[i] = vals[k];
            }
            out.push((d.len(), d.bits(), s));
            // odometer over label∖{top} on the minimal nodes, last fastest
            let mut done = true;
            for k in (0..minimal.len()).rev() {
                vals[k] += 1;
                if vals[k] < tops[minimal[k]] {
                    done = false;
                    break;
                }
                vals[k] = 0;
            }
            if done {
                break;
            }
        }
    }
    out.sort();
    out.into_iter().map(|(_, _, s)| s).collect()
}

fn product_algebra(
    lf: &LabeledForest,
    support: NodeSet,
    sections: &[Section],
    index: &HashMap<Section, usize>,
) -> Result<FiniteMtl, ConstructError> {
    let f = lf.forest();
    let nodes: Vec<usize> = support.iter().collect();
    let below: Vec<Vec<usize>> =
        (0..lf.len()).map(|i| nodes.iter().copied().filter(|&j| f.lt(j, i)).collect()).collect();
    let n = sections.len();
    let mut tabs: [Vec<u32>; 4] = Default::default();
    let mut buf = sections.last().cloned().unwrap_or_default();
    for (t, op) in Op::ALL.into_iter().enumerate() {
        let mut table = Vec::with_capacity(n * n);
        for (x, h) in sections.iter().enumerate() {
            for (y, g) in sections.iter().enumerate() {
                for &i in &nodes {
                    let l = lf.label(i);
                    let (a, b) = (h[i] as usize, g[i] as usize);
                    buf[i] = match op {
                        Op::Imp if !below[i].iter().all(|&j| lf.label(j).leq(h[j] as usize, g[j] as usize)) => 0,
                        _ => l.op(op, a, b) as u16,
                    };
                }
                match index.get(&buf[..]) {
                    Some(&k) => table.push(k as u32),
                    None => return Err(ConstructError::NotClosed { op: op.name(), x, y }),
                }
            }
        }
        tabs[t] = table;
    }
    let [mul, imp, meet, join] = tabs;
    Ok(FiniteMtl::assemble(n, 0, n - 1, mul, imp, meet, join))
}

/// Splits an arbitrary function `h` over `support` into its three regions.
pub fn classify_values(lf: &LabeledForest, support: NodeSet, h: &[u16]) -> ElementClass {
    let mut c = ElementClass { ones: NodeSet::EMPTY, middle: NodeSet::EMPTY, zeros: NodeSet::EMPTY };
    for i in support.iter() {
        let v = h[i] as usize;
        if v == lf.label(i).top() {
            c.ones.insert(i);
        } else if v == lf.label(i).bot() {
            c.zeros.insert(i);
        } else {
            c.middle.insert(i);
        }
    }
    c
}

/// The four equivalent membership conditions for a forest product,
/// evaluated independently on an arbitrary function `h`.
pub fn element_conditions(lf: &LabeledForest, support: NodeSet, h: &[u16]) -> [bool; 4] {
    let f = lf.forest();
    let one = |i: usize| h[i] as usize == lf.label(i).top();
    let zero = |i: usize| h[i] as usize == lf.label(i).bot();
    let pairs = || {
        support.iter().flat_map(move |i| support.iter().filter(move |&j| f.lt(i, j)).map(move |j| (i, j)))
    };
    let c1 = support.iter().all(|i| zero(i) || support.iter().filter(|&j| f.lt(j, i)).all(one));
    let c2 = pairs().all(|(i, j)| zero(j) || one(i));
    let c3 = support.iter().all(|i| one(i) || support.iter().filter(|&j| f.lt(i, j)).all(zero));
    let cls = classify_values(lf, support, h);
    let upward = |s: NodeSet| pairs().all(|(i, j)| !s.contains(i) || s.contains(j));
    let downward = |s: NodeSet| pairs().all(|(i, j)| !s.contains(j) || s.contains(i));
    let antichain = pairs().all(|(i, j)| !(cls.middle.contains(i) && cls.middle.contains(j)));
    let c4 = upward(cls.zeros) && downward(cls.ones) && antichain;
    [c1, c2, c3, c4]
}
