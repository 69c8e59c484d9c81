use super::{AlgMorphism, FiniteMtl, MtlError, Op};
use crate::poset::{Forest, Poset, PosetError};

/// `I(M)`, its join-irreducibles `J(I(M))` with the induced order, the
/// minimal join-irreducibles and the predecessor `a_e` of each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdempotentStructure {
    pub idempotents: Vec<usize>,
    /// Node `k` of `order` is element `join_irreducibles[k]`.
    pub join_irreducibles: Vec<usize>,
    pub order: Poset,
    pub minimal: Vec<usize>,
    /// `predecessor[k]` is `a_e` for `e = join_irreducibles[k]`.
    pub predecessor: Vec<usize>,
}

impl IdempotentStructure {
    pub fn node_of(&self, e: usize) -> Option<usize> {
        self.join_irreducibles.iter().position(|&x| x == e)
    }

    pub fn forest(&self) -> Result<Forest, PosetError> {
        Forest::new(self.order.clone())
    }

    /// Maximal join-irreducibles, as elements.
    pub fn maximal(&self) -> Vec<usize> {
        self.order.maximal_elements().iter().map(|k| self.join_irreducibles[k]).collect()
    }
}

/// A filter `↑generator`; every filter of a finite MTL-algebra has this form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Filter {
    pub generator: usize,
    pub members: Vec<usize>,
}

impl Filter {
    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Prime filters ordered by inclusion; node `k` of `order` is `primes[k]`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub primes: Vec<Filter>,
    pub order: Poset,
}

/// `M/F` together with the projection and the class of each element.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub algebra: FiniteMtl,
    pub projection: AlgMorphism,
    /// Class index of each element of `M`.
    pub class_of: Vec<usize>,
    /// Representative (class maximum) in `M` of each class.
    pub representative: Vec<usize>,
}

/// A subset of `M` carrying its own MTL structure, with the inclusion.
#[derive(Clone, Debug)]
pub struct SubAlgebra {
    pub algebra: FiniteMtl,
    /// `embedding[k]` is the element of `M` at index `k`.
    pub embedding: Vec<usize>,
}

impl SubAlgebra {
    pub fn index_of(&self, x: usize) -> Option<usize> {
        self.embedding.iter().position(|&y| y == x)
    }
}

/// The four archimedean tests on a chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArchimedeanReport {
    /// Every `x <= y < 1` has some `y^n <= x`.
    pub definitional: bool,
    /// `((a->b)->b)^2 <= a v b` for all pairs.
    pub equational: bool,
    /// No idempotents other than bottom and top.
    pub idempotent_free: bool,
    /// Exactly two filters.
    pub simple: bool,
}

impl ArchimedeanReport {
    /// All four agree. On the trivial chain simplicity is excluded.
    pub fn consistent(&self, nontrivial: bool) -> bool {
        let a = self.definitional;
        a == self.equational && a == self.idempotent_free && (!nontrivial || a == self.simple)
    }
}

impl FiniteMtl {
    pub fn is_idempotent(&self, x: usize) -> bool {
        self.mul(x, x) == x
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.is_idempotent(x)).collect()
    }

    pub fn idempotent_structure(&self) -> IdempotentStructure {
        let idem = self.idempotents();
        let ji: Vec<usize> = idem
            .iter()
            .copied()
            .filter(|&e| {
                e != self.bot()
                    && !idem.iter().any(|&a| {
                        a != e && idem.iter().any(|&b| b != e && self.join(a, b) == e)
                    })
            })
            .collect();
        let k = ji.len();
        let mut rel = vec![vec![false; k]; k];
        for (i, &a) in ji.iter().enumerate() {
            for (j, &b) in ji.iter().enumerate() {
                rel[i][j] = self.leq(a, b);
            }
        }
        let order = Poset::from_relation(&rel).expect("induced order is a partial order");
        let minimal = order.minimal_elements().iter().map(|i| ji[i]).collect();
        let predecessor = (0..k)
            .map(|i| {
                let below: Vec<usize> = (0..k).filter(|&j| order.lt(j, i)).collect();
                below
                    .iter()
                    .copied()
                    .find(|&j| below.iter().all(|&m| order.leq(m, j)))
                    .map_or(self.bot(), |j| ji[j])
            })
            .collect();
        IdempotentStructure { idempotents: idem, join_irreducibles: ji, order, minimal, predecessor }
    }

    /// Generators of the prime filters; these must coincide with `J(I(M))`.
    pub fn prime_generators(&self) -> Vec<usize> {
        self.filters().into_iter().filter(|f| self.is_prime(f)).map(|f| f.generator).collect()
    }

    pub fn principal_filter(&self, e: usize) -> Result<Filter, MtlError> {
        if !self.is_idempotent(e) {
            return Err(MtlError::NotIdempotent { x: e });
        }
        Ok(Filter { generator: e, members: self.up(e) })
    }

    /// `<x>`: the up-set of the power limit of `x`.
    pub fn filter_generated(&self, x: usize) -> Filter {
        let (p, _) = self.power_limit(x);
        Filter { generator: p, members: self.up(p) }
    }

    /// One filter per idempotent, in generator order.
    pub fn filters(&self) -> Vec<Filter> {
        self.idempotents().into_iter().map(|e| Filter { generator: e, members: self.up(e) }).collect()
    }

    /// Checks the definition directly: nonempty up-set closed under `*`.
    pub fn is_filter(&self, set: &[usize]) -> bool {
        let inside = |x: usize| set.contains(&x);
        !set.is_empty()
            && set.iter().all(|&x| (0..self.len()).all(|y| !self.leq(x, y) || inside(y)))
            && set.iter().all(|&x| set.iter().all(|&y| inside(self.mul(x, y))))
    }

    pub fn is_prime(&self, f: &Filter) -> bool {
        if f.contains(self.bot()) {
            return false;
        }
        let n = self.len();
        (0..n).all(|x| (0..n).all(|y| !f.contains(self.join(x, y)) || f.contains(x) || f.contains(y)))
    }

    pub fn spectrum(&self) -> Spectrum {
        let primes: Vec<Filter> = self.filters().into_iter().filter(|f| self.is_prime(f)).collect();
        let rel: Vec<Vec<bool>> = primes
            .iter()
            .map(|p| primes.iter().map(|q| p.members.iter().all(|&x| q.contains(x))).collect())
            .collect();
        let order = Poset::from_relation(&rel).expect("inclusion is a partial order");
        Spectrum { primes, order }
    }

    /// `M/F` with `x ~ y` iff `x->y` and `y->x` lie in `F`. The quotient is
    /// returned in canonical encoding.
    pub fn quotient(&self, f: &Filter) -> Result<Quotient, MtlError> {
        let n = self.len();
        let equiv = |x: usize, y: usize| f.contains(self.imp(x, y)) && f.contains(self.imp(y, x));
        let mut class_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            if class_of[x] != usize::MAX {
                continue;
            }
            let c = members.len();
            let cls: Vec<usize> = (x..n).filter(|&y| equiv(x, y)).collect();
            for &y in &cls {
                class_of[y] = c;
            }
            members.push(cls);
        }
        let mut reps = Vec::with_capacity(members.len());
        for cls in &members {
            let max = cls.iter().copied().find(|&m| cls.iter().all(|&y| self.leq(y, m)));
            match max {
                Some(m) => reps.push(m),
                None => return Err(MtlError::Invalid(format!("class of {} has no maximum", cls[0]))),
            }
        }
        let k = members.len();
        let raw = FiniteMtl::from_fns(k, class_of[self.bot()], class_of[self.top()], |op, a, b| {
            class_of[self.op(op, reps[a], reps[b])]
        });
        let (algebra, perm) = raw.canonicalize();
        let class_of: Vec<usize> = class_of.iter().map(|&c| perm[c]).collect();
        let mut representative = vec![0; k];
        for (c, &r) in reps.iter().enumerate() {
            representative[perm[c]] = r;
        }
        let projection = AlgMorphism::check(class_of.clone(), self, &algebra)?;
        Ok(Quotient { algebra, projection, class_of, representative })
    }

    /// `↑x` with bottom `x` and the operations of `M`.
    pub fn upset_algebra(&self, x: usize) -> Result<SubAlgebra, MtlError> {
        if !self.is_idempotent(x) {
            return Err(MtlError::NotIdempotent { x });
        }
        self.sub_on(self.up(x), x, self.top(), false)
    }

    /// The interval `[a, e]` with bottom `a`, top `e`, product of `M` and
    /// residual `(x->y) ^ e`. Requires `a <= e` both idempotent.
    pub fn interval_algebra(&self, a: usize, e: usize) -> Result<SubAlgebra, MtlError> {
        for x in [a, e] {
            if !self.is_idempotent(x) {
                return Err(MtlError::NotIdempotent { x });
            }
        }
        if !self.leq(a, e) {
            return Err(MtlError::Invalid(format!("{a} is not below {e}")));
        }
        let elems: Vec<usize> = (0..self.len()).filter(|&x| self.leq(a, x) && self.leq(x, e)).collect();
        self.sub_on(elems, a, e, true)
    }

    fn sub_on(&self, elems: Vec<usize>, bot: usize, top: usize, cap_imp: bool) -> Result<SubAlgebra, MtlError> {
        let pos = |x: usize| elems.iter().position(|&y| y == x);
        let mut fail = None;
        let raw = FiniteMtl::from_fns(elems.len(), pos(bot).unwrap(), pos(top).unwrap(), |op, i, j| {
            let mut v = self.op(op, elems[i], elems[j]);
            if cap_imp && op == Op::Imp {
                v = self.meet(v, top);
            }
            pos(v).unwrap_or_else(|| {
                fail.get_or_insert((op, elems[i], elems[j]));
                0
            })
        });
        if let Some((op, x, y)) = fail {
            return Err(MtlError::NotHomomorphism { op: op.name(), x, y });
        }
        raw.check_axioms()?;
        let (algebra, perm) = raw.canonicalize();
        let mut embedding = vec![0; elems.len()];
        for (k, &x) in elems.iter().enumerate() {
            embedding[perm[k]] = x;
        }
        Ok(SubAlgebra { algebra, embedding })
    }

    pub fn archimedean_report(&self) -> Result<ArchimedeanReport, MtlError> {
        if let Some((x, y)) = self.incomparable_pair() {
            return Err(MtlError::NotAChain { x, y });
        }
        let n = self.len();
        let top = self.top();
        let definitional = (0..n).filter(|&y| y != top).all(|y| {
            let (limit, _) = self.power_limit(y);
            (0..n).filter(|&x| self.leq(x, y)).all(|x| self.leq(limit, x))
        });
        let equational = (0..n).all(|a| {
            (0..n).all(|b| {
                let t = self.imp(self.imp(a, b), b);
                self.leq(self.mul(t, t), self.join(a, b))
            })
        });
        let idempotent_free = self.idempotents().iter().all(|&x| x == self.bot() || x == top);
        let simple = self.filters().len() == 2;
        Ok(ArchimedeanReport { definitional, equational, idempotent_free, simple })
    }

    /// Definitional test; errors if `M` is not a chain.
    pub fn is_archimedean(&self) -> Result<bool, MtlError> {
        Ok(self.archimedean_report()?.definitional)
    }

    /// Every nonzero idempotent `e` satisfies `e*y = e^y`; otherwise the
    /// first failing pair `(e, y)`.
    pub fn representability_witness(&self) -> Option<(usize, usize)> {
        let n = self.len();
        self.idempotents()
            .into_iter()
            .filter(|&e| e != self.bot())
            .flat_map(|e| (0..n).map(move |y| (e, y)))
            .find(|&(e, y)| self.mul(e, y) != self.meet(e, y))
    }

    /// The local-unit form: `e*x = x` for every `x <= e`.
    pub fn local_unit_witness(&self) -> Option<(usize, usize)> {
        let n = self.len();
        self.idempotents()
            .into_iter()
            .filter(|&e| e != self.bot())
            .flat_map(|e| (0..n).map(move |x| (e, x)))
            .find(|&(e, x)| self.leq(x, e) && self.mul(e, x) != x)
    }

    pub fn is_representable(&self) -> bool {
        self.representability_witness().is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bool2x2() -> FiniteMtl {
        // (a, b) encoded as 2a + b; product order is a linear extension.
        FiniteMtl::from_fns(4, 0, 3, |op, x, y| {
            let f = |p: usize, q: usize| match op {
                Op::Mul | Op::Meet => p & q,
                Op::Join => p | q,
                Op::Imp => (1 - p) | q,
            };
            2 * f(x >> 1, y >> 1) + f(x & 1, y & 1)
        })
    }

    #[test]
    fn idempotent_structure_l3() {
        let s = FiniteMtl::lukasiewicz(3).idempotent_structure();
        assert_eq!(s.idempotents, vec![0, 2]);
        assert_eq!(s.join_irreducibles, vec![2]);
        assert_eq!(s.minimal, vec![2]);
        assert_eq!(s.predecessor, vec![0]);
    }

    #[test]
    fn idempotent_structure_boolean_square() {
        let m = bool2x2();
        m.check_axioms().unwrap();
        let s = m.idempotent_structure();
        assert_eq!(s.idempotents, vec![0, 1, 2, 3]);
        assert_eq!(s.join_irreducibles, vec![1, 2]);
        assert!(s.order.is_antichain(s.order.nodes()));
        assert_eq!(s.predecessor, vec![0, 0]);
    }

    #[test]
    fn idempotent_structure_g3() {
        let s = FiniteMtl::goedel(3).idempotent_structure();
        assert_eq!(s.idempotents, vec![0, 1, 2]);
        assert_eq!(s.join_irreducibles, vec![1, 2]);
        assert!(s.order.lt(0, 1));
        assert_eq!(s.minimal, vec![1]);
        assert_eq!(s.predecessor, vec![0, 1]);
    }

    #[test]
    fn filters_and_primes() {
        let l3 = FiniteMtl::lukasiewicz(3);
        assert_eq!(l3.filter_generated(1).members, vec![0, 1, 2]);
        let g3 = FiniteMtl::goedel(3);
        let fs = g3.filters();
        assert_eq!(fs.iter().map(|f| f.generator).collect::<Vec<_>>(), vec![0, 1, 2]);
        let prime: Vec<bool> = fs.iter().map(|f| g3.is_prime(f)).collect();
        assert_eq!(prime, vec![false, true, true]);
        for m in [l3, g3, bool2x2()] {
            assert_eq!(m.filter_generated(m.top()).members, vec![m.top()]);
            for f in m.filters() {
                assert!(m.is_filter(&f.members));
            }
        }
    }

    #[test]
    fn spectra() {
        assert_eq!(FiniteMtl::boolean().spectrum().primes.len(), 1);
        let s = bool2x2().spectrum();
        assert_eq!(s.primes.iter().map(|f| f.generator).collect::<Vec<_>>(), vec![1, 2]);
        assert!(!s.order.comparable(0, 1));
        let s = FiniteMtl::goedel(3).spectrum();
        // ↑1 ⊂ ↑a
        assert_eq!(s.primes[0].generator, 1);
        assert!(s.order.lt(1, 0));
    }

    #[test]
    fn quotients() {
        let w = FiniteMtl::non_representable_w();
        let q = w.quotient(&w.principal_filter(2).unwrap()).unwrap();
        assert_eq!(q.algebra, FiniteMtl::boolean());
        assert_eq!(q.class_of, vec![0, 0, 1, 1]);
        assert_eq!(q.representative, vec![1, 3]);
        let id = w.quotient(&w.principal_filter(3).unwrap()).unwrap();
        assert_eq!(id.algebra, w);
        let full = w.quotient(&w.principal_filter(0).unwrap()).unwrap();
        assert!(full.algebra.is_trivial());
    }

    #[test]
    fn upsets_and_intervals() {
        let g3 = FiniteMtl::goedel(3);
        assert_eq!(g3.upset_algebra(0).unwrap().algebra, g3);
        assert!(g3.upset_algebra(2).unwrap().algebra.is_trivial());
        let u = g3.upset_algebra(1).unwrap();
        assert_eq!(u.algebra, FiniteMtl::boolean());
        assert_eq!(u.embedding, vec![1, 2]);
        assert!(matches!(FiniteMtl::lukasiewicz(3).upset_algebra(1), Err(MtlError::NotIdempotent { x: 1 })));
        let i = g3.interval_algebra(0, 1).unwrap();
        assert_eq!(i.algebra, FiniteMtl::boolean());
    }

    #[test]
    fn archimedean_examples() {
        assert!(FiniteMtl::boolean().is_archimedean().unwrap());
        assert!(FiniteMtl::lukasiewicz(3).is_archimedean().unwrap());
        assert!(!FiniteMtl::goedel(3).is_archimedean().unwrap());
        assert!(matches!(bool2x2().is_archimedean(), Err(MtlError::NotAChain { .. })));
    }

    #[test]
    fn representability() {
        assert_eq!(FiniteMtl::non_representable_w().representability_witness(), Some((2, 1)));
        assert!(FiniteMtl::non_representable_w().local_unit_witness().is_some());
        assert!(FiniteMtl::boolean().is_representable());
        assert!(bool2x2().is_representable());
    }
}
