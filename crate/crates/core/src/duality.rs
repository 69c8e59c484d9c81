//! The functors `G` (algebras to labeled forests) and `H` (labeled forests
//! to algebras), with the unit and counit of the duality.

use serde::Serialize;
use thiserror::Error;

use crate::construct::{ConstructError, ForestProduct, LabeledForest};
use crate::mtl::{
    enumerate_chains, find_isomorphism, AlgMorphism, FiniteMtl, IdempotentStructure, MtlError, Quotient,
    SubAlgebra,
};
use crate::poset::{Forest, NodeSet, PMorphism, PosetError};
use crate::sheaf::{paste_sections, SheafError};

/// Largest chain size accepted by [`enumerate_archimedean_chains`].
pub const MAX_CHAIN_SIZE: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualityError {
    #[error("chain size {requested} exceeds the cap {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("not a morphism: {0}")]
    NotAMorphism(String),
    #[error("not representable: {e}*{y} != {e}^{y}")]
    NotRepresentable { e: usize, y: usize },
    #[error("not a skeleton chain: {0}")]
    NotASkeletonChain(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Mtl(#[from] MtlError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
}

/// Canonical nontrivial archimedean chains, pairwise non-isomorphic.
#[derive(Clone, Debug, Default)]
pub struct SkeletonRegistry {
    chains: Vec<FiniteMtl>,
}

impl SkeletonRegistry {
    pub fn new() -> SkeletonRegistry {
        SkeletonRegistry::default()
    }

    /// Adds `chain` unless an isomorphic one is present; returns its slot.
    pub fn insert(&mut self, chain: &FiniteMtl) -> Result<usize, DualityError> {
        if chain.is_trivial() {
            return Err(DualityError::NotASkeletonChain("trivial".into()));
        }
        let report = chain.archimedean_report()?;
        if !(report.definitional && report.equational) {
            return Err(DualityError::NotASkeletonChain("not archimedean".into()));
        }
        // a chain has at most one order isomorphism, so canonical tables
        // decide isomorphism
        let (canon, _) = chain.canonicalize();
        if let Some(k) = self.chains.iter().position(|c| *c == canon) {
            return Ok(k);
        }
        self.chains.push(canon);
        Ok(self.chains.len() - 1)
    }

    pub fn find(&self, chain: &FiniteMtl) -> Option<usize> {
        let (canon, _) = chain.canonicalize();
        self.chains.iter().position(|c| *c == canon)
    }

    pub fn chains(&self) -> &[FiniteMtl] {
        &self.chains
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }
}

/// All nontrivial archimedean chains with at most `max_n` elements.
pub fn enumerate_archimedean_chains(max_n: usize) -> Result<SkeletonRegistry, DualityError> {
    if max_n > MAX_CHAIN_SIZE {
        return Err(DualityError::CapExceeded { requested: max_n, cap: MAX_CHAIN_SIZE });
    }
    let mut reg = SkeletonRegistry::new();
    for n in 2..=max_n {
        for c in enumerate_chains(n) {
            if c.is_archimedean()? {
                reg.insert(&c)?;
            }
        }
    }
    Ok(reg)
}

/// `L<k>` for a Łukasiewicz chain, otherwise `None`.
pub fn lukasiewicz_name(chain: &FiniteMtl) -> Option<String> {
    let (canon, _) = chain.canonicalize();
    (canon == FiniteMtl::lukasiewicz(canon.len())).then(|| format!("L{}", canon.len()))
}

/// `G(M)` together with the data used to build it.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub labeled: LabeledForest,
    /// Node `k` of the forest is `structure.join_irreducibles[k]`.
    pub structure: IdempotentStructure,
    /// `↑a_e` for each node.
    pub upsets: Vec<SubAlgebra>,
    /// `↑a_e / ↑e` for each node, computed inside `upsets[k]`.
    pub quotients: Vec<Quotient>,
}

impl Decomposition {
    /// Class in the label at `node` of an element `x >= a_e` of `M`.
    pub fn class_of(&self, node: usize, x: usize) -> Option<usize> {
        let k = self.upsets[node].index_of(x)?;
        Some(self.quotients[node].class_of[k])
    }

    /// An element of `M` representing class `c` of the label at `node`.
    pub fn representative(&self, node: usize, c: usize) -> usize {
        self.upsets[node].embedding[self.quotients[node].representative[c]]
    }

    pub fn node_of(&self, e: usize) -> Option<usize> {
        self.structure.node_of(e)
    }
}

/// `G(M)`: the forest `J(I(M))` labelled by `↑a_e / ↑e`.
pub fn functor_g(m: &FiniteMtl) -> Result<Decomposition, DualityError> {
    let structure = m.idempotent_structure();
    let forest = structure.forest()?;
    let mut upsets = Vec::new();
    let mut quotients = Vec::new();
    let mut labels = Vec::new();
    for (k, &e) in structure.join_irreducibles.iter().enumerate() {
        let a = structure.predecessor[k];
        let up = m.upset_algebra(a)?;
        let e_local = up.index_of(e).expect("e lies above a_e");
        let q = up.algebra.quotient(&up.algebra.principal_filter(e_local)?)?;
        labels.push(q.algebra.clone());
        upsets.push(up);
        quotients.push(q);
    }
    let labeled = LabeledForest::new(forest, labels)?;
    Ok(Decomposition { labeled, structure, upsets, quotients })
}

/// A morphism `l -> m` of labeled forests: a p-morphism `φ` of the base
/// forests and injective `f_x : m(φ(x)) -> l(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledForestMorphism {
    pub base: PMorphism,
    pub family: Vec<AlgMorphism>,
}

impl LabeledForestMorphism {
    pub fn check(
        l: &LabeledForest,
        m: &LabeledForest,
        base: Vec<usize>,
        family: Vec<Vec<usize>>,
    ) -> Result<LabeledForestMorphism, DualityError> {
        let base = PMorphism::check(l.forest(), m.forest(), base)?;
        if family.len() != l.len() {
            return Err(DualityError::NotAMorphism(format!("{} family members for {} nodes", family.len(), l.len())));
        }
        let mut fs = Vec::with_capacity(family.len());
        for (x, f) in family.into_iter().enumerate() {
            let f = AlgMorphism::check(f, m.label(base.apply(x)), l.label(x))?;
            if !f.is_injective() {
                return Err(DualityError::NotAMorphism(format!("label map at {x} is not injective")));
            }
            fs.push(f);
        }
        Ok(LabeledForestMorphism { base, family: fs })
    }

    pub fn identity(l: &LabeledForest) -> LabeledForestMorphism {
        LabeledForestMorphism {
            base: PMorphism::identity(l.len()),
            family: l.labels().iter().map(AlgMorphism::identity).collect(),
        }
    }

    /// `self : l -> m` followed by `next : m -> n`; the label maps compose
    /// as `n(ψφx) -> m(φx) -> l(x)`.
    pub fn then(&self, next: &LabeledForestMorphism) -> LabeledForestMorphism {
        let base = self.base.then(&next.base);
        let family = self
            .family
            .iter()
            .enumerate()
            .map(|(x, f)| next.family[self.base.apply(x)].then(f))
            .collect();
        LabeledForestMorphism { base, family }
    }

    pub fn is_isomorphism(&self, l: &LabeledForest, m: &LabeledForest) -> bool {
        self.base.is_isomorphism(l.forest(), m.forest()) && self.family.iter().all(|f| f.is_bijective())
    }
}

/// `G(f) : G(N) -> G(M)` for `f : M -> N`.
///
/// The label map at `e` sends `[x]` to `[f(x)]`, and `[a_{f*(e)}]` to
/// `[a_e]`. This needs `f(x) >= a_e` above `a_{f*(e)}`, which can fail
/// when `f*` sends `e` and `a_e` to the same node; such `f` are rejected
/// with [`DualityError::NotAMorphism`].
pub fn functor_g_mor(
    f: &AlgMorphism,
    m: &FiniteMtl,
    n: &FiniteMtl,
    gm: &Decomposition,
    gn: &Decomposition,
) -> Result<LabeledForestMorphism, DualityError> {
    if f.source_len() != m.len() || f.target_len() != n.len() {
        return Err(DualityError::NotAMorphism("map does not match the algebras".into()));
    }
    let star = pullback(f, m, n, gm, gn)?;
    let mut family = Vec::with_capacity(star.len());
    for (node, &k) in star.iter().enumerate() {
        let a_src = gm.structure.predecessor[k];
        let a_dst = gn.structure.predecessor[node];
        let src_label = gm.labeled.label(k);
        let mut map = vec![usize::MAX; src_label.len()];
        for &x in &gm.upsets[k].embedding {
            let fx = if x == a_src { a_dst } else { f.apply(x) };
            let c = gm.class_of(k, x).expect("x lies above a_e");
            let v = gn.class_of(node, fx).ok_or_else(|| {
                DualityError::NotAMorphism(format!("f({x}) = {fx} is not above a_e at node {node}"))
            })?;
            if map[c] != usize::MAX && map[c] != v {
                return Err(DualityError::NotAMorphism(format!("label map at node {node} is not well defined")));
            }
            map[c] = v;
        }
        family.push(map);
    }
    LabeledForestMorphism::check(&gn.labeled, &gm.labeled, star, family)
}

/// `f*` on nodes: `f*(e)` is the least join-irreducible idempotent `k` of
/// `M` with `e <= f(k)`, the generator of the prime filter `f⁻¹(↑e)`.
pub fn pullback(
    f: &AlgMorphism,
    m: &FiniteMtl,
    n: &FiniteMtl,
    gm: &Decomposition,
    gn: &Decomposition,
) -> Result<Vec<usize>, DualityError> {
    let jm = &gm.structure.join_irreducibles;
    let mut star = Vec::with_capacity(gn.labeled.len());
    for &e in &gn.structure.join_irreducibles {
        let s: Vec<usize> = (0..jm.len()).filter(|&k| n.leq(e, f.apply(jm[k]))).collect();
        match s.iter().copied().find(|&k| s.iter().all(|&j| m.leq(jm[k], jm[j]))) {
            Some(k) => star.push(k),
            None => return Err(DualityError::NotAMorphism(format!("f*({e}) has no least element"))),
        }
    }
    Ok(star)
}

/// A node `e` of `G(N)` with `a_e > 0` and `f*(a_e) = f*(e)`.
pub fn collapsed_node(
    f: &AlgMorphism,
    m: &FiniteMtl,
    n: &FiniteMtl,
    gm: &Decomposition,
    gn: &Decomposition,
) -> Result<Option<usize>, DualityError> {
    let star = pullback(f, m, n, gm, gn)?;
    Ok((0..star.len()).find(|&e| {
        let a = gn.structure.predecessor[e];
        a != n.bot() && gn.node_of(a).map(|p| star[p]) == Some(star[e])
    }))
}

/// `H(l)`, the forest product.
pub fn functor_h(l: &LabeledForest) -> Result<ForestProduct, DualityError> {
    Ok(ForestProduct::new(l)?)
}

/// The three stages of `H(φ, F) : H(m) -> H(l)` and their composite.
#[derive(Clone, Debug)]
pub struct HMorphism {
    /// restriction to the image `φ(F)`
    pub beta: AlgMorphism,
    /// precomposition with `φ`
    pub gamma: AlgMorphism,
    /// pointwise `f_x`
    pub alpha: AlgMorphism,
    pub composite: AlgMorphism,
}

pub fn functor_h_mor(
    l: &LabeledForest,
    m: &LabeledForest,
    mor: &LabeledForestMorphism,
    hl: &ForestProduct,
    hm: &ForestProduct,
) -> Result<HMorphism, DualityError> {
    let phi = &mor.base;
    let image = phi.image();
    let on_image = ForestProduct::over(m, image)?;
    let m_phi_labels: Vec<FiniteMtl> = (0..l.len()).map(|x| m.label(phi.apply(x)).clone()).collect();
    let m_phi = LabeledForest::new(l.forest().clone(), m_phi_labels)?;
    let pulled = ForestProduct::new(&m_phi)?;

    let beta_map = hm
        .sections()
        .iter()
        .map(|h| {
            let mut v = h.clone();
            for i in (0..m.len()).filter(|&i| !image.contains(i)) {
                v[i] = m.label(i).top() as u16;
            }
            on_image.index_of(&v).ok_or_else(|| DualityError::NotAMorphism("restriction leaves the product".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let beta = AlgMorphism::check(beta_map, hm.algebra(), on_image.algebra())?;

    let gamma_map = on_image
        .sections()
        .iter()
        .map(|h| {
            let v: Vec<u16> = (0..l.len()).map(|x| h[phi.apply(x)]).collect();
            pulled.index_of(&v).ok_or_else(|| DualityError::NotAMorphism("h∘φ is not a section".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let gamma = AlgMorphism::check(gamma_map, on_image.algebra(), pulled.algebra())?;

    let alpha_map = pulled
        .sections()
        .iter()
        .map(|g| {
            let v: Vec<u16> = (0..l.len()).map(|x| mor.family[x].apply(g[x] as usize) as u16).collect();
            hl.index_of(&v).ok_or_else(|| DualityError::NotAMorphism("pointwise image is not a section".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let alpha = AlgMorphism::check(alpha_map, pulled.algebra(), hl.algebra())?;

    let composite = beta.then(&gamma).then(&alpha);
    let composite = AlgMorphism::check(composite.into_map(), hm.algebra(), hl.algebra())?;
    Ok(HMorphism { beta, gamma, alpha, composite })
}

/// Both local-unit conditions and a witness when they fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Representability {
    pub representable: bool,
    /// `(e, y)` with `e*y != e^y`
    pub witness: Option<(usize, usize)>,
    /// `(e, x)` with `x <= e` and `e*x != x`
    pub local_unit_witness: Option<(usize, usize)>,
}

impl Representability {
    pub fn conditions_agree(&self) -> bool {
        self.witness.is_none() == self.local_unit_witness.is_none()
    }
}

pub fn representability(m: &FiniteMtl) -> Representability {
    let witness = m.representability_witness();
    Representability { representable: witness.is_none(), witness, local_unit_witness: m.local_unit_witness() }
}

/// The counit `M -> H(G(M))` of a representable algebra.
#[derive(Clone, Debug)]
pub struct Counit {
    pub decomposition: Decomposition,
    pub product: ForestProduct,
    pub map: AlgMorphism,
}

/// Sends `x` to the amalgamation of the local sections `h_{x∧m}` over the
/// cover `{↓m : m maximal}` of `J(I(M))`.
pub fn counit(m: &FiniteMtl) -> Result<Counit, DualityError> {
    if let Some((e, y)) = m.representability_witness() {
        return Err(DualityError::NotRepresentable { e, y });
    }
    let g = functor_g(m)?;
    let lf = &g.labeled;
    let forest = lf.forest();
    let product = ForestProduct::new(lf)?;
    let ji = &g.structure.join_irreducibles;
    let maxima: Vec<usize> = forest.maximal_elements().iter().collect();
    let mut map = Vec::with_capacity(m.len());
    for x in 0..m.len() {
        let mut locals: Vec<(NodeSet, Vec<u16>)> = Vec::with_capacity(maxima.len());
        for &mx in &maxima {
            let down = forest.down(mx);
            let z = m.meet(x, ji[mx]);
            let e_z = down
                .iter()
                .filter(|&c| m.leq(z, ji[c]))
                .min_by_key(|&c| forest.down(c).len())
                .expect("z lies below the maximal node");
            let mut h: Vec<u16> = lf.labels().iter().map(|l| l.top() as u16).collect();
            for c in down.iter() {
                h[c] = if forest.lt(c, e_z) {
                    lf.label(c).top() as u16
                } else if c == e_z {
                    g.class_of(c, z).ok_or_else(|| {
                        DualityError::NotAMorphism(format!("{z} is not in the interval of node {c}"))
                    })? as u16
                } else {
                    lf.label(c).bot() as u16
                };
            }
            locals.push((down, h));
        }
        let members: Vec<(NodeSet, &[u16])> = locals.iter().map(|(s, h)| (*s, &h[..])).collect();
        let pasted = paste_sections(lf, &members)?;
        let k = product
            .index_of(&pasted)
            .ok_or_else(|| DualityError::NotAMorphism(format!("amalgam for {x} is not a section")))?;
        map.push(k);
    }
    let map = AlgMorphism::check(map, m, product.algebra())?;
    Ok(Counit { decomposition: g, product, map })
}

/// The unit `l -> G(H(l))`.
#[derive(Clone, Debug)]
pub struct Unit {
    pub product: ForestProduct,
    pub decomposition: Decomposition,
    pub morphism: LabeledForestMorphism,
}

impl Unit {
    pub fn is_isomorphism(&self, l: &LabeledForest) -> bool {
        self.morphism.is_isomorphism(l, &self.decomposition.labeled)
    }
}

/// `φ_l(i)` is the section equal to 1 on `↓i` and 0 elsewhere; the label
/// maps send a class `[h]` to `h(i)`.
pub fn unit(l: &LabeledForest) -> Result<Unit, DualityError> {
    let product = ForestProduct::new(l)?;
    let p = product.algebra();
    let g = functor_g(p)?;
    let forest = l.forest();
    let mut base = Vec::with_capacity(l.len());
    for i in 0..l.len() {
        let v: Vec<u16> = (0..l.len())
            .map(|j| if forest.leq(j, i) { l.label(j).top() as u16 } else { 0 })
            .collect();
        let h = product.index_of(&v).expect("characteristic sections are admissible");
        let node = g
            .node_of(h)
            .ok_or_else(|| DualityError::NotAMorphism(format!("h_{i} is not a join-irreducible idempotent")))?;
        base.push(node);
    }
    let mut family = Vec::with_capacity(l.len());
    for (i, &node) in base.iter().enumerate() {
        let label = g.labeled.label(node);
        let map: Vec<usize> =
            (0..label.len()).map(|c| product.section(g.representative(node, c))[i] as usize).collect();
        family.push(map);
    }
    let morphism = LabeledForestMorphism::check(l, &g.labeled, base, family)?;
    Ok(Unit { product, decomposition: g, morphism })
}

/// Summary of a `G` then `H` round trip on an algebra.
#[derive(Clone, Debug, Serialize)]
pub struct RoundtripReport {
    pub representable: bool,
    pub witness: Option<(usize, usize)>,
    pub size: usize,
    pub reconstructed_size: usize,
    pub iso: bool,
    pub counit_iso: Option<bool>,
    pub forest_nodes: usize,
    pub forest_covers: Vec<(usize, usize)>,
    pub labels: Vec<String>,
}

pub fn roundtrip(m: &FiniteMtl) -> Result<RoundtripReport, DualityError> {
    let rep = representability(m);
    let g = functor_g(m)?;
    let h = functor_h(&g.labeled)?;
    let iso = find_isomorphism(m, h.algebra()).is_some();
    let counit_iso = if rep.representable { Some(counit(m)?.map.is_bijective()) } else { None };
    Ok(RoundtripReport {
        representable: rep.representable,
        witness: rep.witness,
        size: m.len(),
        reconstructed_size: h.len(),
        iso,
        counit_iso,
        forest_nodes: g.labeled.len(),
        forest_covers: g.labeled.forest().cover_edges(),
        labels: g.labeled.labels().iter().map(label_summary).collect(),
    })
}

/// `L<k>` when the chain is Łukasiewicz, otherwise `chain(<n>)`.
pub fn label_summary(c: &FiniteMtl) -> String {
    lukasiewicz_name(c).unwrap_or_else(|| format!("chain({})", c.len()))
}

/// Base forest of `G(M)` as a forest value.
pub fn decomposition_forest(g: &Decomposition) -> &Forest {
    g.labeled.forest()
}
