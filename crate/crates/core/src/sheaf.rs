//! The presheaf of forest products on the downsets of a labeled forest.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::construct::{ordinal_sum, ConstructError, ForestProduct, LabeledForest};
use crate::mtl::{find_isomorphism, AlgMorphism, FiniteMtl, MtlError};
use crate::poset::{NodeSet, PosetError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SheafError {
    #[error("{s:?} is not contained in {t:?}")]
    NotNested { s: NodeSet, t: NodeSet },
    #[error("{0:?} is not a downset")]
    NotADownset(NodeSet),
    #[error("sections {alpha} and {beta} disagree at node {node}")]
    NotMatching { alpha: usize, beta: usize, node: usize },
    #[error("family has {sections} sections for {members} cover members")]
    FamilyShape { members: usize, sections: usize },
    #[error("pasted values are not a section over {0:?}")]
    NotAdmissible(NodeSet),
    #[error("element {index} out of range for the product over {set:?}")]
    NoSuchElement { set: NodeSet, index: usize },
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Mtl(#[from] MtlError),
}

/// A family of sections, one per member of a cover by downsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingFamily {
    pub cover: Vec<NodeSet>,
    /// Element index in the product over the corresponding cover member.
    pub sections: Vec<usize>,
}

/// `S ↦ P(S)` on every downset `S`, computed once.
#[derive(Clone, Debug)]
pub struct Presheaf {
    base: LabeledForest,
    downsets: Vec<NodeSet>,
    products: HashMap<NodeSet, ForestProduct>,
}

impl Presheaf {
    /// `cap` bounds the number of forest nodes for downset enumeration.
    pub fn new(base: LabeledForest, cap: usize) -> Result<Presheaf, SheafError> {
        let downsets = base.forest().downsets(cap)?;
        let mut products = HashMap::with_capacity(downsets.len());
        for &s in &downsets {
            products.insert(s, ForestProduct::over(&base, s)?);
        }
        Ok(Presheaf { base, downsets, products })
    }

    pub fn base(&self) -> &LabeledForest {
        &self.base
    }

    pub fn downsets(&self) -> &[NodeSet] {
        &self.downsets
    }

    pub fn product(&self, s: NodeSet) -> Result<&ForestProduct, SheafError> {
        self.products.get(&s).ok_or(SheafError::NotADownset(s))
    }

    /// `h|_S` for the element `k` of `P(T)`.
    pub fn restrict(&self, t: NodeSet, s: NodeSet, k: usize) -> Result<usize, SheafError> {
        if !s.is_subset(t) {
            return Err(SheafError::NotNested { s, t });
        }
        let pt = self.product(t)?;
        let ps = self.product(s)?;
        if k >= pt.len() {
            return Err(SheafError::NoSuchElement { set: t, index: k });
        }
        let mut v = pt.section(k).to_vec();
        for i in t.difference(s).iter() {
            v[i] = self.base.label(i).top() as u16;
        }
        ps.index_of(&v).ok_or(SheafError::NotAdmissible(s))
    }

    /// The restriction `P(T) -> P(S)`, checked to be a homomorphism.
    pub fn restriction_map(&self, t: NodeSet, s: NodeSet) -> Result<AlgMorphism, SheafError> {
        let pt = self.product(t)?;
        let map = (0..pt.len()).map(|k| self.restrict(t, s, k)).collect::<Result<Vec<_>, _>>()?;
        Ok(AlgMorphism::check(map, pt.algebra(), self.product(s)?.algebra())?)
    }

    /// Pairwise agreement on overlaps.
    pub fn check_matching(&self, fam: &MatchingFamily) -> Result<(), SheafError> {
        if fam.cover.len() != fam.sections.len() {
            return Err(SheafError::FamilyShape { members: fam.cover.len(), sections: fam.sections.len() });
        }
        for a in 0..fam.cover.len() {
            let ha = self.product(fam.cover[a])?.section(fam.sections[a]);
            for b in a + 1..fam.cover.len() {
                let hb = self.product(fam.cover[b])?.section(fam.sections[b]);
                let overlap = fam.cover[a].intersection(fam.cover[b]);
                if let Some(node) = overlap.iter().find(|&i| ha[i] != hb[i]) {
                    return Err(SheafError::NotMatching { alpha: a, beta: b, node });
                }
            }
        }
        Ok(())
    }

    /// Pastes a matching family into a section over the union.
    pub fn amalgamate(&self, fam: &MatchingFamily) -> Result<(NodeSet, usize), SheafError> {
        self.check_matching(fam)?;
        let t = fam.cover.iter().fold(NodeSet::EMPTY, |acc, &s| acc.union(s));
        let pt = self.product(t)?;
        let mut v = pt.section(pt.len() - 1).to_vec();
        for (s, &k) in fam.cover.iter().zip(&fam.sections) {
            let h = self.product(*s)?.section(k);
            for i in s.iter() {
                v[i] = h[i];
            }
        }
        pt.index_of(&v).map(|k| (t, k)).ok_or(SheafError::NotAdmissible(t))
    }

    /// Covers of `t` by pairwise incomparable downsets, at most `arity`
    /// members, in a deterministic order.
    pub fn covers_of(&self, t: NodeSet, arity: usize) -> Vec<Vec<NodeSet>> {
        let subs: Vec<NodeSet> = self.downsets.iter().copied().filter(|s| s.is_subset(t)).collect();
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn grow(
            subs: &[NodeSet],
            start: usize,
            t: NodeSet,
            arity: usize,
            cur: &mut Vec<NodeSet>,
            out: &mut Vec<Vec<NodeSet>>,
        ) {
            if !cur.is_empty() && cur.iter().fold(NodeSet::EMPTY, |a, &s| a.union(s)) == t {
                out.push(cur.clone());
            }
            if cur.len() == arity {
                return;
            }
            for k in start..subs.len() {
                let s = subs[k];
                if cur.iter().any(|&c| c.is_subset(s) || s.is_subset(c)) {
                    continue;
                }
                cur.push(s);
                grow(subs, k + 1, t, arity, cur, out);
                cur.pop();
            }
        }
        grow(&subs, 0, t, arity, &mut cur, &mut out);
        out
    }

    /// Every matching family over `cover`.
    pub fn matching_families(&self, cover: &[NodeSet]) -> Result<Vec<MatchingFamily>, SheafError> {
        let prods = cover.iter().map(|&s| self.product(s)).collect::<Result<Vec<_>, _>>()?;
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(cover.len());
        fn pick(
            cover: &[NodeSet],
            prods: &[&ForestProduct],
            cur: &mut Vec<usize>,
            out: &mut Vec<MatchingFamily>,
        ) {
            let a = cur.len();
            if a == cover.len() {
                out.push(MatchingFamily { cover: cover.to_vec(), sections: cur.clone() });
                return;
            }
            for k in 0..prods[a].len() {
                let h = prods[a].section(k);
                let agrees = (0..a).all(|b| {
                    let g = prods[b].section(cur[b]);
                    cover[a].intersection(cover[b]).iter().all(|i| h[i] == g[i])
                });
                if agrees {
                    cur.push(k);
                    pick(cover, prods, cur, out);
                    cur.pop();
                }
            }
        }
        pick(cover, &prods, &mut cur, &mut out);
        Ok(out)
    }

    /// For each tuple of restrictions to the cover members, the number of
    /// sections over the union producing it.
    pub fn restriction_counts(&self, cover: &[NodeSet]) -> Result<HashMap<Vec<usize>, usize>, SheafError> {
        let t = cover.iter().fold(NodeSet::EMPTY, |acc, &s| acc.union(s));
        let pt = self.product(t)?;
        let mut counts = HashMap::new();
        for k in 0..pt.len() {
            let key = cover.iter().map(|&s| self.restrict(t, s, k)).collect::<Result<Vec<_>, _>>()?;
            *counts.entry(key).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// `P(↓i)`.
    pub fn stalk(&self, i: usize) -> Result<&FiniteMtl, SheafError> {
        Ok(self.product(self.base.forest().down(i))?.algebra())
    }
}

/// Pastes sections given over the members of a cover, checking pairwise
/// agreement; nodes outside every member hold the top of their label.
pub fn paste_sections(lf: &LabeledForest, members: &[(NodeSet, &[u16])]) -> Result<Vec<u16>, SheafError> {
    let mut v: Vec<u16> = lf.labels().iter().map(|l| l.top() as u16).collect();
    for (a, &(sa, ha)) in members.iter().enumerate() {
        for (b, &(sb, hb)) in members.iter().enumerate().skip(a + 1) {
            if let Some(node) = sa.intersection(sb).iter().find(|&i| ha[i] != hb[i]) {
                return Err(SheafError::NotMatching { alpha: a, beta: b, node });
            }
        }
        for i in sa.iter() {
            v[i] = ha[i];
        }
    }
    Ok(v)
}

/// The ordinal sum of the labels along `↓i`, bottom first.
pub fn ordinal_sum_along(lf: &LabeledForest, i: usize) -> Result<FiniteMtl, ConstructError> {
    let mut chain: Vec<usize> = lf.forest().down(i).iter().collect();
    chain.sort_by_key(|&j| lf.forest().down(j).len());
    let parts: Vec<FiniteMtl> = chain.iter().map(|&j| lf.label(j).clone()).collect();
    ordinal_sum(&parts)
}

/// Per-downset results of [`sheaf_check`].
#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct DownsetReport {
    pub downset: Vec<usize>,
    pub elements: usize,
    pub covers: usize,
    pub families: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct SheafReport {
    pub nodes: usize,
    pub downsets: Vec<DownsetReport>,
    pub covers: usize,
    pub families: usize,
    pub stalks_checked: usize,
    pub quotients_checked: usize,
    pub failures: Vec<String>,
}

impl SheafReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.downsets.iter().all(|d| d.failures.is_empty())
    }
}

/// Unique amalgamation for every matching family on every cover of every
/// downset, stalks against ordinal sums, and `P(S) ≅ P(T)/X_S` for
/// nested downsets `S ⊆ T`.
pub fn sheaf_check(lf: &LabeledForest, node_cap: usize, arity: usize) -> Result<SheafReport, SheafError> {
    let p = Presheaf::new(lf.clone(), node_cap)?;
    let mut report = SheafReport { nodes: lf.len(), ..Default::default() };
    for &t in p.downsets() {
        let mut d = DownsetReport {
            downset: t.iter().collect(),
            elements: p.product(t)?.len(),
            ..Default::default()
        };
        for cover in p.covers_of(t, arity) {
            d.covers += 1;
            let counts = p.restriction_counts(&cover)?;
            for fam in p.matching_families(&cover)? {
                d.families += 1;
                let n = counts.get(&fam.sections).copied().unwrap_or(0);
                if n != 1 {
                    d.failures.push(format!("cover {cover:?}: family {:?} has {n} amalgamations", fam.sections));
                    continue;
                }
                let (_, k) = p.amalgamate(&fam)?;
                let back: Vec<usize> =
                    cover.iter().map(|&s| p.restrict(t, s, k)).collect::<Result<_, _>>()?;
                if back != fam.sections {
                    d.failures.push(format!("cover {cover:?}: amalgam of {:?} restricts wrongly", fam.sections));
                }
            }
        }
        report.covers += d.covers;
        report.families += d.families;
        report.downsets.push(d);
    }
    for i in 0..lf.len() {
        report.stalks_checked += 1;
        let stalk = p.stalk(i)?;
        if !stalk.is_chain() {
            report.failures.push(format!("stalk at {i} is not a chain"));
        }
        if find_isomorphism(stalk, &ordinal_sum_along(lf, i)?).is_none() {
            report.failures.push(format!("stalk at {i} is not the ordinal sum along its downset"));
        }
    }
    for &t in p.downsets() {
        let pt = p.product(t)?;
        for &s in p.downsets().iter().filter(|s| s.is_subset(t)) {
            report.quotients_checked += 1;
            let x = pt.downset_filter(lf, s)?;
            let q = pt.algebra().quotient(&x.filter)?;
            if find_isomorphism(&q.algebra, p.product(s)?.algebra()).is_none() {
                report.failures.push(format!("P({s:?}) is not P({t:?})/X_S"));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{Forest, Poset, DEFAULT_DOWNSET_CAP};

    fn chain2() -> LabeledForest {
        LabeledForest::boolean(Forest::from_covers(2, &[(0, 1)]).unwrap())
    }

    fn anti2() -> LabeledForest {
        LabeledForest::boolean(Forest::new(Poset::antichain(2)).unwrap())
    }

    #[test]
    fn restrictions() {
        let p = Presheaf::new(chain2(), DEFAULT_DOWNSET_CAP).unwrap();
        let full = NodeSet::full(2);
        let low = NodeSet::singleton(0);
        let top = p.product(full).unwrap().len() - 1;
        assert_eq!(p.restrict(full, full, 1).unwrap(), 1);
        assert_eq!(p.restrict(full, NodeSet::EMPTY, 1).unwrap(), 0);
        // (1,1) restricted to {i} is (1)
        assert_eq!(p.restrict(full, low, top).unwrap(), 1);
        assert!(matches!(p.restrict(low, full, 0), Err(SheafError::NotNested { .. })));
    }

    #[test]
    fn amalgamation_examples() {
        let p = Presheaf::new(anti2(), DEFAULT_DOWNSET_CAP).unwrap();
        let a = NodeSet::singleton(0);
        let b = NodeSet::singleton(1);
        let fam = MatchingFamily { cover: vec![a, b], sections: vec![1, 0] };
        let (t, k) = p.amalgamate(&fam).unwrap();
        assert_eq!(t, NodeSet::full(2));
        assert_eq!(p.product(t).unwrap().section(k), &[1, 0]);
        let whole = MatchingFamily { cover: vec![t], sections: vec![2] };
        assert_eq!(p.amalgamate(&whole).unwrap(), (t, 2));

        let c = Presheaf::new(chain2(), DEFAULT_DOWNSET_CAP).unwrap();
        let full = NodeSet::full(2);
        let low = NodeSet::singleton(0);
        let bad = MatchingFamily { cover: vec![full, low], sections: vec![2, 0] };
        assert!(matches!(c.amalgamate(&bad), Err(SheafError::NotMatching { alpha: 0, beta: 1, node: 0 })));
    }

    #[test]
    fn stalks() {
        let single = LabeledForest::new(Forest::new(Poset::antichain(1)).unwrap(), vec![FiniteMtl::lukasiewicz(3)]).unwrap();
        let p = Presheaf::new(single, DEFAULT_DOWNSET_CAP).unwrap();
        assert_eq!(*p.stalk(0).unwrap(), FiniteMtl::lukasiewicz(3));
        let p = Presheaf::new(chain2(), DEFAULT_DOWNSET_CAP).unwrap();
        assert_eq!(p.stalk(1).unwrap().len(), 3);
        assert!(p.stalk(1).unwrap().is_chain());
    }

    #[test]
    fn covers_are_antichains_with_full_union() {
        let p = Presheaf::new(anti2(), DEFAULT_DOWNSET_CAP).unwrap();
        let covers = p.covers_of(NodeSet::full(2), 3);
        assert_eq!(covers, vec![vec![NodeSet::singleton(0), NodeSet::singleton(1)], vec![NodeSet::full(2)]]);
    }

    #[test]
    fn small_reports_pass() {
        for lf in [chain2(), anti2()] {
            let r = sheaf_check(&lf, DEFAULT_DOWNSET_CAP, 3).unwrap();
            assert!(r.ok(), "{r:?}");
        }
    }
}
