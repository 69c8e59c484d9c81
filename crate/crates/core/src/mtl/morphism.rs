use std::collections::VecDeque;

use super::{FiniteMtl, MtlError, Op};

/// A checked homomorphism, stored as its element map plus kernel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgMorphism {
    map: Vec<usize>,
    kernel: Vec<usize>,
    target_len: usize,
}

impl AlgMorphism {
    /// Checks that `map` preserves bottom, top and all four operations.
    pub fn check(map: Vec<usize>, source: &FiniteMtl, target: &FiniteMtl) -> Result<AlgMorphism, MtlError> {
        let n = source.len();
        if map.len() != n {
            return Err(MtlError::MapLength { len: map.len(), expected: n });
        }
        if let Some(x) = map.iter().position(|&v| v >= target.len()) {
            return Err(MtlError::Invalid(format!("image of {x} is out of range")));
        }
        if map[source.bot()] != target.bot() {
            return Err(MtlError::NotHomomorphism { op: "bot", x: source.bot(), y: source.bot() });
        }
        if map[source.top()] != target.top() {
            return Err(MtlError::NotHomomorphism { op: "top", x: source.top(), y: source.top() });
        }
        for op in Op::ALL {
            for x in 0..n {
                for y in 0..n {
                    if map[source.op(op, x, y)] != target.op(op, map[x], map[y]) {
                        return Err(MtlError::NotHomomorphism { op: op.name(), x, y });
                    }
                }
            }
        }
        let kernel = (0..n).filter(|&x| map[x] == target.top()).collect();
        Ok(AlgMorphism { map, kernel, target_len: target.len() })
    }

    pub fn identity(a: &FiniteMtl) -> AlgMorphism {
        AlgMorphism { map: (0..a.len()).collect(), kernel: vec![a.top()], target_len: a.len() }
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn into_map(self) -> Vec<usize> {
        self.map
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn source_len(&self) -> usize {
        self.map.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    /// `K_f = {x : f(x) = top}`.
    pub fn kernel(&self) -> &[usize] {
        &self.kernel
    }

    pub fn is_injective(&self) -> bool {
        self.kernel.len() == 1
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target_len];
        for &v in &self.map {
            hit[v] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && self.map.len() == self.target_len
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &AlgMorphism) -> AlgMorphism {
        let map: Vec<usize> = self.map.iter().map(|&x| next.map[x]).collect();
        let top = next.map[self.map[*self.kernel.first().expect("kernel contains top")]];
        let kernel = (0..map.len()).filter(|&x| map[x] == top).collect();
        AlgMorphism { map, kernel, target_len: next.target_len }
    }

    pub fn inverse(&self) -> Option<AlgMorphism> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y] = x;
        }
        let top = self.kernel[0];
        Some(AlgMorphism { map: inv, kernel: vec![self.map[top]], target_len: self.map.len() })
    }
}

// Invariants preserved by isomorphisms, used to prune candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Signature {
    idempotent: bool,
    nilpotent: bool,
    power_steps: usize,
    up: usize,
    down: usize,
    zero_divisors: usize,
}

fn signatures(a: &FiniteMtl) -> Vec<Signature> {
    let n = a.len();
    (0..n)
        .map(|x| {
            let (limit, steps) = a.power_limit(x);
            Signature {
                idempotent: a.is_idempotent(x),
                nilpotent: limit == a.bot(),
                power_steps: steps,
                up: (0..n).filter(|&y| a.leq(x, y)).count(),
                down: (0..n).filter(|&y| a.leq(y, x)).count(),
                zero_divisors: (0..n).filter(|&y| a.mul(x, y) == a.bot()).count(),
            }
        })
        .collect()
}

struct Search<'a> {
    a: &'a FiniteMtl,
    b: &'a FiniteMtl,
    injective: bool,
    candidates: Vec<Vec<usize>>,
    allowed: Vec<Vec<bool>>,
    map: Vec<usize>,
    used: Vec<bool>,
    assigned: Vec<usize>,
    limit: usize,
    found: Vec<Vec<usize>>,
}

const NONE: usize = usize::MAX;

impl<'a> Search<'a> {
    fn new(a: &'a FiniteMtl, b: &'a FiniteMtl, injective: bool, limit: usize) -> Search<'a> {
        let candidates: Vec<Vec<usize>> = if injective {
            let sa = signatures(a);
            let sb = signatures(b);
            sa.iter().map(|s| (0..b.len()).filter(|&y| sb[y] == *s).collect()).collect()
        } else {
            vec![(0..b.len()).collect(); a.len()]
        };
        let allowed = candidates
            .iter()
            .map(|c| {
                let mut v = vec![false; b.len()];
                for &y in c {
                    v[y] = true;
                }
                v
            })
            .collect();
        Search {
            a,
            b,
            injective,
            candidates,
            allowed,
            map: vec![NONE; a.len()],
            used: vec![false; b.len()],
            assigned: Vec::new(),
            limit,
            found: Vec::new(),
        }
    }

    // Assigns x -> v and everything it forces; on failure the caller
    // rolls back to its saved trail length.
    fn assign(&mut self, x: usize, v: usize) -> bool {
        let mut queue = VecDeque::from([(x, v)]);
        while let Some((x, v)) = queue.pop_front() {
            let cur = self.map[x];
            if cur != NONE {
                if cur != v {
                    return false;
                }
                continue;
            }
            if !self.allowed[x][v] || (self.injective && self.used[v]) {
                return false;
            }
            self.map[x] = v;
            self.used[v] = self.injective;
            self.assigned.push(x);
            for k in 0..self.assigned.len() {
                let y = self.assigned[k];
                let w = self.map[y];
                for op in Op::ALL {
                    queue.push_back((self.a.op(op, x, y), self.b.op(op, v, w)));
                }
                queue.push_back((self.a.imp(y, x), self.b.imp(w, v)));
            }
        }
        true
    }

    fn rollback(&mut self, len: usize) {
        while self.assigned.len() > len {
            let x = self.assigned.pop().unwrap();
            let v = self.map[x];
            self.map[x] = NONE;
            self.used[v] = false;
        }
    }

    fn run(&mut self) {
        if self.found.len() >= self.limit {
            return;
        }
        let next = (0..self.a.len())
            .filter(|&x| self.map[x] == NONE)
            .min_by_key(|&x| self.candidates[x].len());
        let Some(x) = next else {
            self.found.push(self.map.clone());
            return;
        };
        let cands = self.candidates[x].clone();
        for v in cands {
            if self.injective && self.used[v] {
                continue;
            }
            let save = self.assigned.len();
            if self.assign(x, v) {
                self.run();
            }
            self.rollback(save);
            if self.found.len() >= self.limit {
                return;
            }
        }
    }

    fn start(&mut self) -> bool {
        self.assign(self.a.bot(), self.b.bot()) && self.assign(self.a.top(), self.b.top())
    }
}

/// Some isomorphism `a -> b`, or `None` if there is none.
pub fn find_isomorphism(a: &FiniteMtl, b: &FiniteMtl) -> Option<Vec<usize>> {
    if a.len() != b.len() {
        return None;
    }
    let mut sa = signatures(a);
    let mut sb = signatures(b);
    sa.sort();
    sb.sort();
    if sa != sb {
        return None;
    }
    let mut s = Search::new(a, b, true, 1);
    if !s.start() {
        return None;
    }
    s.run();
    s.found.pop()
}

/// Up to `limit` homomorphisms `a -> b`, in search order.
pub fn find_morphisms(a: &FiniteMtl, b: &FiniteMtl, limit: usize) -> Vec<AlgMorphism> {
    let mut s = Search::new(a, b, false, limit);
    if !s.start() {
        return Vec::new();
    }
    s.run();
    s.found
        .into_iter()
        .map(|m| AlgMorphism::check(m, a, b).expect("search only yields homomorphisms"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_terminal() {
        let l3 = FiniteMtl::lukasiewicz(3);
        let id = AlgMorphism::check(vec![0, 1, 2], &l3, &l3).unwrap();
        assert!(id.is_injective() && id.is_bijective());
        let one = FiniteMtl::trivial();
        let t = AlgMorphism::check(vec![0, 0, 0], &l3, &one).unwrap();
        assert_eq!(t.kernel(), &[0, 1, 2]);
        assert!(!t.is_injective());
    }

    #[test]
    fn boolean_into_l3() {
        let l3 = FiniteMtl::lukasiewicz(3);
        let f = AlgMorphism::check(vec![0, 2], &FiniteMtl::boolean(), &l3).unwrap();
        assert!(f.is_injective());
        assert!(!f.is_surjective());
        assert!(matches!(
            AlgMorphism::check(vec![1, 2], &FiniteMtl::boolean(), &l3),
            Err(MtlError::NotHomomorphism { op: "bot", .. })
        ));
    }

    #[test]
    fn isomorphism_examples() {
        let l3 = FiniteMtl::lukasiewicz(3);
        let g3 = FiniteMtl::goedel(3);
        assert_eq!(find_isomorphism(&l3, &l3), Some(vec![0, 1, 2]));
        assert_eq!(find_isomorphism(&l3, &g3), None);
        let scrambled = FiniteMtl::lukasiewicz(5).relabel(&[0, 3, 1, 2, 4]);
        let iso = find_isomorphism(&FiniteMtl::lukasiewicz(5), &scrambled).unwrap();
        assert_eq!(iso, vec![0, 3, 1, 2, 4]);
    }

    #[test]
    fn morphism_enumeration() {
        // Ł3 has exactly one endomorphism; 2 embeds into everything once.
        let l3 = FiniteMtl::lukasiewicz(3);
        assert_eq!(find_morphisms(&l3, &l3, 10).len(), 1);
        assert_eq!(find_morphisms(&FiniteMtl::boolean(), &l3, 10).len(), 1);
        // Ł3 -> 2 does not exist: a*a = 0 but a = a->0 forces a -> both 0 and 1.
        assert!(find_morphisms(&l3, &FiniteMtl::boolean(), 10).is_empty());
        // G3 -> 2: a -> 0 breaks a->0 = 0, so only the quotient map remains.
        let maps = find_morphisms(&FiniteMtl::goedel(3), &FiniteMtl::boolean(), 10);
        assert_eq!(maps.len(), 1);
        assert_eq!(maps[0].map(), &[0, 1, 1]);
    }

    #[test]
    fn composition_and_inverse() {
        let l5 = FiniteMtl::lukasiewicz(5);
        let perm = [0, 3, 1, 2, 4];
        let s = l5.relabel(&perm);
        let f = AlgMorphism::check(perm.to_vec(), &l5, &s).unwrap();
        let g = f.inverse().unwrap();
        assert_eq!(f.then(&g), AlgMorphism::identity(&l5));
    }
}
