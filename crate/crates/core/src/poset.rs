//! Finite posets, forests, downsets (the opens of the Alexandrov topology)
//! and p-morphisms.
//!
//! Relations are stored closed: `leq[a * n + b]` is `true` iff `a <= b`.
//! Node subsets are bitmasks ([`NodeSet`]), which caps posets at 64 nodes.

use std::fmt;

use thiserror::Error;

/// Hard limit imposed by the bitmask representation of node sets.
pub const MAX_NODES: usize = 64;

/// Default cap on the node count for downset enumeration.
pub const DEFAULT_DOWNSET_CAP: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("relation is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("{n} nodes exceeds the supported maximum of {max}")]
    TooManyNodes { n: usize, max: usize },
    #[error("node {node} out of range for a poset on {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("not reflexive: {node} <= {node} fails")]
    NotReflexive { node: usize },
    #[error("not antisymmetric: {a} <= {b} and {b} <= {a} with {a} != {b}")]
    NotAntisymmetric { a: usize, b: usize },
    #[error("not transitive: {a} <= {b} <= {c} but not {a} <= {c}")]
    NotTransitive { a: usize, b: usize, c: usize },
    #[error("not a forest: below {node} the nodes {a} and {b} are incomparable")]
    NotAForest { node: usize, a: usize, b: usize },
    #[error("{nodes} nodes exceeds the configured cap of {cap}")]
    CapExceeded { nodes: usize, cap: usize },
    #[error("map has {len} entries but the source has {n} nodes")]
    MapLength { len: usize, n: usize },
    #[error("not a p-morphism: {reason}")]
    NotPMorphism { reason: String },
    #[error("malformed forest term at byte {pos}: {message}")]
    MalformedTerm { pos: usize, message: String },
}

/// A set of poset nodes, as a bitmask over node indices `0..64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        NodeSet(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }

    pub fn with(self, i: usize) -> Self {
        NodeSet(self.0 | (1u64 << i))
    }

    pub fn union(self, other: NodeSet) -> Self {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> Self {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: NodeSet) -> Self {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Smallest member, if any.
    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    pub fn iter(self) -> NodeSetIter {
        NodeSetIter(self.0)
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = NodeSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl IntoIterator for NodeSet {
    type Item = usize;
    type IntoIter = NodeSetIter;
    fn into_iter(self) -> NodeSetIter {
        self.iter()
    }
}

pub struct NodeSetIter(u64);

impl Iterator for NodeSetIter {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// A finite partial order on the nodes `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Poset {
    n: usize,
    leq: Vec<bool>,
    names: Vec<Option<String>>,
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Poset")
            .field("n", &self.n)
            .field("covers", &self.cover_edges())
            .finish()
    }
}

impl Poset {
    /// Validates a full (already closed) relation matrix.
    pub fn from_relation(rel: &[Vec<bool>]) -> Result<Self, PosetError> {
        let n = rel.len();
        if n > MAX_NODES {
            return Err(PosetError::TooManyNodes { n, max: MAX_NODES });
        }
        for (row, r) in rel.iter().enumerate() {
            if r.len() != n {
                return Err(PosetError::NotSquare { row, len: r.len(), expected: n });
            }
        }
        let leq: Vec<bool> = rel.iter().flatten().copied().collect();
        validate_order(n, &leq)?;
        Ok(Poset { n, leq, names: vec![None; n] })
    }

    /// Builds a poset from cover (or any generating) edges `i < j`, taking
    /// the reflexive-transitive closure.
    pub fn from_covers(n: usize, edges: &[(usize, usize)]) -> Result<Self, PosetError> {
        if n > MAX_NODES {
            return Err(PosetError::TooManyNodes { n, max: MAX_NODES });
        }
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(i, j) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(PosetError::NodeOutOfRange { node, n });
                }
            }
            leq[i * n + j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        validate_order(n, &leq)?;
        Ok(Poset { n, leq, names: vec![None; n] })
    }

    pub fn antichain(n: usize) -> Self {
        Poset::from_covers(n, &[]).expect("antichain is a poset")
    }

    pub fn chain(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Poset::from_covers(n, &edges).expect("chain is a poset")
    }

    pub fn with_names(mut self, names: Vec<Option<String>>) -> Self {
        assert_eq!(names.len(), self.n);
        self.names = names;
        self
    }

    pub fn set_name(&mut self, i: usize, name: impl Into<String>) {
        self.names[i] = Some(name.into());
    }

    pub fn names(&self) -> &[Option<String>] {
        &self.names
    }

    /// Display name of node `i`: its given name, or the index.
    pub fn name(&self, i: usize) -> String {
        self.names[i].clone().unwrap_or_else(|| i.to_string())
    }

    /// Looks a node up by name, falling back to parsing an index.
    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|x| x.as_deref() == Some(name))
            .or_else(|| name.parse().ok().filter(|&i| i < self.n))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::full(self.n)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.n + b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    /// `↓a`
    pub fn down(&self, a: usize) -> NodeSet {
        (0..self.n).filter(|&x| self.leq(x, a)).collect()
    }

    /// `↑a`
    pub fn up(&self, a: usize) -> NodeSet {
        (0..self.n).filter(|&x| self.leq(a, x)).collect()
    }

    /// Nodes `j` with `a ≺ j`.
    pub fn upper_covers(&self, a: usize) -> NodeSet {
        (0..self.n)
            .filter(|&j| self.lt(a, j) && !(0..self.n).any(|k| self.lt(a, k) && self.lt(k, j)))
            .collect()
    }

    /// Nodes `j` with `j ≺ a`.
    pub fn lower_covers(&self, a: usize) -> NodeSet {
        (0..self.n)
            .filter(|&j| self.lt(j, a) && !(0..self.n).any(|k| self.lt(j, k) && self.lt(k, a)))
            .collect()
    }

    pub fn cover_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| self.upper_covers(i).iter().map(move |j| (i, j)))
            .collect()
    }

    /// Minimal elements of `set`.
    pub fn min_of(&self, set: NodeSet) -> NodeSet {
        set.iter()
            .filter(|&x| !set.iter().any(|y| self.lt(y, x)))
            .collect()
    }

    /// Maximal elements of `set`.
    pub fn max_of(&self, set: NodeSet) -> NodeSet {
        set.iter()
            .filter(|&x| !set.iter().any(|y| self.lt(x, y)))
            .collect()
    }

    pub fn minimal_elements(&self) -> NodeSet {
        self.min_of(self.nodes())
    }

    pub fn maximal_elements(&self) -> NodeSet {
        self.max_of(self.nodes())
    }

    /// Least element of the whole poset, if it has one.
    pub fn least(&self) -> Option<usize> {
        (0..self.n).find(|&a| (0..self.n).all(|x| self.leq(a, x)))
    }

    pub fn greatest(&self) -> Option<usize> {
        (0..self.n).find(|&a| (0..self.n).all(|x| self.leq(x, a)))
    }

    pub fn is_chain(&self, set: NodeSet) -> bool {
        set.iter().all(|a| set.iter().all(|b| self.comparable(a, b)))
    }

    pub fn is_antichain(&self, set: NodeSet) -> bool {
        set.iter().all(|a| set.iter().all(|b| a == b || !self.comparable(a, b)))
    }

    pub fn is_total(&self) -> bool {
        self.is_chain(self.nodes())
    }

    pub fn is_downset(&self, set: NodeSet) -> bool {
        set.iter().all(|a| self.down(a).is_subset(set))
    }

    pub fn is_upset(&self, set: NodeSet) -> bool {
        set.iter().all(|a| self.up(a).is_subset(set))
    }

    pub fn down_closure(&self, set: NodeSet) -> NodeSet {
        set.iter().fold(NodeSet::EMPTY, |acc, a| acc.union(self.down(a)))
    }

    /// First witness that some principal downset is not a chain.
    pub fn forest_violation(&self) -> Option<(usize, usize, usize)> {
        for node in 0..self.n {
            let d = self.down(node);
            for a in d.iter() {
                for b in d.iter() {
                    if a < b && !self.comparable(a, b) {
                        return Some((node, a, b));
                    }
                }
            }
        }
        None
    }

    /// Every principal downset is totally ordered.
    pub fn is_forest(&self) -> bool {
        self.forest_violation().is_none()
    }

    /// A forest with a least element.
    pub fn is_tree(&self) -> bool {
        self.is_forest() && self.least().is_some()
    }

    /// The subposet induced on `set`; the returned vector maps new indices
    /// to old ones (ascending).
    pub fn induced(&self, set: NodeSet) -> (Poset, Vec<usize>) {
        let nodes: Vec<usize> = set.iter().collect();
        let k = nodes.len();
        let mut leq = vec![false; k * k];
        for (a, &x) in nodes.iter().enumerate() {
            for (b, &y) in nodes.iter().enumerate() {
                leq[a * k + b] = self.leq(x, y);
            }
        }
        let names = nodes.iter().map(|&x| self.names[x].clone()).collect();
        (Poset { n: k, leq, names }, nodes)
    }

    pub fn opposite(&self) -> Poset {
        let n = self.n;
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = self.leq(b, a);
            }
        }
        Poset { n, leq, names: self.names.clone() }
    }

    /// Disjoint union; node indices are concatenated in order.
    pub fn disjoint_union(parts: &[Poset]) -> Result<Poset, PosetError> {
        let n: usize = parts.iter().map(|p| p.n).sum();
        let mut edges = Vec::new();
        let mut names = Vec::with_capacity(n);
        let mut offset = 0;
        for p in parts {
            edges.extend(p.cover_edges().into_iter().map(|(a, b)| (a + offset, b + offset)));
            names.extend(p.names.iter().cloned());
            offset += p.n;
        }
        Ok(Poset::from_covers(n, &edges)?.with_names(names))
    }

    /// `1 ⊕ P`: a new least node 0 below every node of `P` (shifted by one).
    pub fn lift(&self) -> Result<Poset, PosetError> {
        let n = self.n + 1;
        let mut edges: Vec<_> = self.cover_edges().into_iter().map(|(a, b)| (a + 1, b + 1)).collect();
        edges.extend(self.minimal_elements().iter().map(|m| (0, m + 1)));
        let mut names = vec![None];
        names.extend(self.names.iter().cloned());
        Ok(Poset::from_covers(n, &edges)?.with_names(names))
    }

    /// Finds an order isomorphism `self -> other` (`map[i]` is the image of
    /// `i`), by backtracking over nodes pruned by up/down-set sizes.
    pub fn isomorphism(&self, other: &Poset) -> Option<Vec<usize>> {
        if self.n != other.n {
            return None;
        }
        let sig = |p: &Poset, a: usize| (p.down(a).len(), p.up(a).len(), p.upper_covers(a).len());
        let sa: Vec<_> = (0..self.n).map(|a| sig(self, a)).collect();
        let sb: Vec<_> = (0..other.n).map(|a| sig(other, a)).collect();
        let mut xa = sa.clone();
        let mut xb = sb.clone();
        xa.sort();
        xb.sort();
        if xa != xb {
            return None;
        }
        let mut map = vec![usize::MAX; self.n];
        let mut used = vec![false; self.n];
        fn go(
            a: &Poset,
            b: &Poset,
            sa: &[(usize, usize, usize)],
            sb: &[(usize, usize, usize)],
            i: usize,
            map: &mut [usize],
            used: &mut [bool],
        ) -> bool {
            if i == a.n {
                return true;
            }
            for y in 0..b.n {
                if used[y] || sa[i] != sb[y] {
                    continue;
                }
                let ok = (0..i).all(|j| {
                    a.leq(i, j) == b.leq(y, map[j]) && a.leq(j, i) == b.leq(map[j], y)
                });
                if !ok {
                    continue;
                }
                map[i] = y;
                used[y] = true;
                if go(a, b, sa, sb, i + 1, map, used) {
                    return true;
                }
                used[y] = false;
            }
            map[i] = usize::MAX;
            false
        }
        go(self, other, &sa, &sb, 0, &mut map, &mut used).then_some(map)
    }
}

fn validate_order(n: usize, leq: &[bool]) -> Result<(), PosetError> {
    for node in 0..n {
        if !leq[node * n + node] {
            return Err(PosetError::NotReflexive { node });
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if leq[a * n + b] && leq[b * n + a] {
                return Err(PosetError::NotAntisymmetric { a, b });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !leq[a * n + b] {
                continue;
            }
            for c in 0..n {
                if leq[b * n + c] && !leq[a * n + c] {
                    return Err(PosetError::NotTransitive { a, b, c });
                }
            }
        }
    }
    Ok(())
}

/// A poset in which every principal downset is a chain.
#[derive(Clone, PartialEq, Eq)]
pub struct Forest {
    poset: Poset,
    components: Vec<NodeSet>,
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Forest")
            .field("n", &self.poset.n)
            .field("covers", &self.poset.cover_edges())
            .finish()
    }
}

impl std::ops::Deref for Forest {
    type Target = Poset;
    fn deref(&self) -> &Poset {
        &self.poset
    }
}

/// One component of a forest together with its induced order.
#[derive(Clone, Debug)]
pub struct Tree {
    /// Tree-local index -> forest node.
    pub nodes: Vec<usize>,
    pub forest: Forest,
    /// Forest index of the least element.
    pub root: usize,
}

impl Forest {
    pub fn new(poset: Poset) -> Result<Self, PosetError> {
        if let Some((node, a, b)) = poset.forest_violation() {
            return Err(PosetError::NotAForest { node, a, b });
        }
        // Components of a forest: nodes sharing a minimal element below them.
        let mut components: Vec<NodeSet> = Vec::new();
        for m in poset.minimal_elements().iter() {
            components.push(poset.up(m));
        }
        components.sort_by_key(|c| c.first());
        Ok(Forest { poset, components })
    }

    pub fn from_covers(n: usize, edges: &[(usize, usize)]) -> Result<Self, PosetError> {
        Forest::new(Poset::from_covers(n, edges)?)
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn into_poset(self) -> Poset {
        self.poset
    }

    pub fn set_name(&mut self, i: usize, name: impl Into<String>) {
        self.poset.set_name(i, name);
    }

    /// Node sets of the connected components, ordered by least node index.
    pub fn components(&self) -> &[NodeSet] {
        &self.components
    }

    pub fn component_trees(&self) -> Vec<Tree> {
        self.components
            .iter()
            .map(|&c| {
                let (p, nodes) = self.poset.induced(c);
                let root = self.poset.min_of(c).first().expect("nonempty component");
                Tree { nodes, forest: Forest::new(p).expect("subforest"), root }
            })
            .collect()
    }

    /// `cov(i) = {j : i ≺ j}`.
    pub fn covers(&self, i: usize) -> NodeSet {
        self.poset.upper_covers(i)
    }

    /// The induced forest on `set`.
    pub fn induced(&self, set: NodeSet) -> (Forest, Vec<usize>) {
        let (p, nodes) = self.poset.induced(set);
        (Forest::new(p).expect("subposets of forests are forests"), nodes)
    }

    /// All downsets, ordered by size and then by bitmask.
    pub fn downsets(&self, cap: usize) -> Result<Vec<NodeSet>, PosetError> {
        if self.poset.n > cap {
            return Err(PosetError::CapExceeded { nodes: self.poset.n, cap });
        }
        let mut out = vec![NodeSet::EMPTY];
        for m in self.poset.minimal_elements().iter() {
            let tree = self.subtree_downsets(m);
            out = out
                .iter()
                .flat_map(|&a| tree.iter().map(move |&b| a.union(b)))
                .collect();
        }
        out.sort_by_key(|s| (s.len(), s.bits()));
        Ok(out)
    }

    // Downsets of the subtree ↑r: empty, or r together with a downset of
    // each child subtree.
    fn subtree_downsets(&self, r: usize) -> Vec<NodeSet> {
        let mut with_root = vec![NodeSet::singleton(r)];
        for c in self.covers(r).iter() {
            let child = self.subtree_downsets(c);
            with_root = with_root
                .iter()
                .flat_map(|&a| child.iter().map(move |&b| a.union(b)))
                .collect();
        }
        let mut out = vec![NodeSet::EMPTY];
        out.extend(with_root);
        out
    }

    /// Decomposes into a grammar term over `1`, `1 ⊕ F` and `⊎`.
    pub fn decompose(&self) -> ForestTerm {
        fn tree_term(f: &Forest, r: usize) -> ForestTerm {
            let kids: Vec<ForestTerm> = f.covers(r).iter().map(|c| tree_term(f, c)).collect();
            match kids.len() {
                0 => ForestTerm::One,
                1 => ForestTerm::Lift(Box::new(kids.into_iter().next().unwrap())),
                _ => ForestTerm::Lift(Box::new(ForestTerm::Union(kids))),
            }
        }
        let roots: Vec<ForestTerm> =
            self.poset.minimal_elements().iter().map(|r| tree_term(self, r)).collect();
        if roots.len() == 1 {
            roots.into_iter().next().unwrap()
        } else {
            ForestTerm::Union(roots)
        }
    }
}

/// Terms of the recursive forest grammar: `1`, `1 ⊕ F`, `F ⊎ .. ⊎ F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForestTerm {
    One,
    Lift(Box<ForestTerm>),
    Union(Vec<ForestTerm>),
}

impl ForestTerm {
    /// Parses a term. `⊕` may be written `+` and `⊎` may be written `|`;
    /// `⊕` binds tighter than `⊎`, and its left operand must be `1`.
    pub fn parse(s: &str) -> Result<ForestTerm, PosetError> {
        let toks = tokenize(s)?;
        let mut p = TermParser { toks: &toks, i: 0, end: s.len() };
        let t = p.union()?;
        if p.i != toks.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(t)
    }

    pub fn node_count(&self) -> usize {
        match self {
            ForestTerm::One => 1,
            ForestTerm::Lift(t) => 1 + t.node_count(),
            ForestTerm::Union(ts) => ts.iter().map(ForestTerm::node_count).sum(),
        }
    }

    /// The denoted forest, nodes numbered in preorder.
    pub fn build(&self) -> Result<Forest, PosetError> {
        Forest::new(self.build_poset()?)
    }

    fn build_poset(&self) -> Result<Poset, PosetError> {
        match self {
            ForestTerm::One => Ok(Poset::antichain(1)),
            ForestTerm::Lift(t) => t.build_poset()?.lift(),
            ForestTerm::Union(ts) => {
                let parts = ts.iter().map(ForestTerm::build_poset).collect::<Result<Vec<_>, _>>()?;
                Poset::disjoint_union(&parts)
            }
        }
    }
}

impl fmt::Display for ForestTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForestTerm::One => write!(f, "1"),
            ForestTerm::Lift(t) => match **t {
                ForestTerm::Union(_) => write!(f, "1 ⊕ ({t})"),
                _ => write!(f, "1 ⊕ {t}"),
            },
            ForestTerm::Union(ts) => {
                for (k, t) in ts.iter().enumerate() {
                    if k > 0 {
                        write!(f, " ⊎ ")?;
                    }
                    match t {
                        ForestTerm::Union(_) => write!(f, "({t})")?,
                        _ => write!(f, "{t}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    One,
    Plus,
    Cup,
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, PosetError> {
    let mut out = Vec::new();
    for (pos, c) in s.char_indices() {
        let t = match c {
            '1' => Tok::One,
            '⊕' | '+' => Tok::Plus,
            '⊎' | '|' => Tok::Cup,
            '(' => Tok::Open,
            ')' => Tok::Close,
            c if c.is_whitespace() => continue,
            c => {
                return Err(PosetError::MalformedTerm {
                    pos,
                    message: format!("unexpected character {c:?}"),
                })
            }
        };
        out.push((pos, t));
    }
    Ok(out)
}

struct TermParser<'a> {
    toks: &'a [(usize, Tok)],
    i: usize,
    end: usize,
}

impl TermParser<'_> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.i).map(|t| t.1)
    }

    fn err(&self, message: &str) -> PosetError {
        let pos = self.toks.get(self.i).map_or(self.end, |t| t.0);
        PosetError::MalformedTerm { pos, message: message.to_string() }
    }

    fn union(&mut self) -> Result<ForestTerm, PosetError> {
        let mut parts = vec![self.sum()?];
        while self.peek() == Some(Tok::Cup) {
            self.i += 1;
            parts.push(self.sum()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { ForestTerm::Union(parts) })
    }

    fn sum(&mut self) -> Result<ForestTerm, PosetError> {
        match self.peek() {
            Some(Tok::One) => {
                self.i += 1;
                if self.peek() == Some(Tok::Plus) {
                    self.i += 1;
                    Ok(ForestTerm::Lift(Box::new(self.sum()?)))
                } else {
                    Ok(ForestTerm::One)
                }
            }
            Some(Tok::Open) => {
                self.i += 1;
                let t = self.union()?;
                if self.peek() != Some(Tok::Close) {
                    return Err(self.err("expected ')'"));
                }
                self.i += 1;
                if self.peek() == Some(Tok::Plus) {
                    return Err(self.err("left operand of ⊕ must be 1"));
                }
                Ok(t)
            }
            _ => Err(self.err("expected '1' or '('")),
        }
    }
}

/// A map between posets, validated as a p-morphism: monotone, and for
/// `y <= f(x)` there is `z <= x` with `f(z) = y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PMorphism {
    pub map: Vec<usize>,
}

impl PMorphism {
    pub fn check(source: &Poset, target: &Poset, map: Vec<usize>) -> Result<Self, PosetError> {
        if map.len() != source.len() {
            return Err(PosetError::MapLength { len: map.len(), n: source.len() });
        }
        if let Some(&node) = map.iter().find(|&&y| y >= target.len()) {
            return Err(PosetError::NodeOutOfRange { node, n: target.len() });
        }
        if let Some(reason) = p_morphism_violation(source, target, &map) {
            return Err(PosetError::NotPMorphism { reason });
        }
        Ok(PMorphism { map })
    }

    pub fn identity(n: usize) -> Self {
        PMorphism { map: (0..n).collect() }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PMorphism) -> PMorphism {
        PMorphism { map: self.map.iter().map(|&x| other.map[x]).collect() }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// Bijective with a p-morphism inverse.
    pub fn is_isomorphism(&self, source: &Poset, target: &Poset) -> bool {
        self.inverse(target.len())
            .is_some_and(|inv| is_p_morphism(target, source, &inv.map))
    }

    pub fn inverse(&self, target_len: usize) -> Option<PMorphism> {
        if self.map.len() != target_len {
            return None;
        }
        let mut inv = vec![usize::MAX; target_len];
        for (x, &y) in self.map.iter().enumerate() {
            if inv[y] != usize::MAX {
                return None;
            }
            inv[y] = x;
        }
        Some(PMorphism { map: inv })
    }

    /// Image of the source, a downset of the target.
    pub fn image(&self) -> NodeSet {
        self.map.iter().copied().collect()
    }
}

fn p_morphism_violation(source: &Poset, target: &Poset, map: &[usize]) -> Option<String> {
    for a in 0..source.len() {
        for b in 0..source.len() {
            if source.leq(a, b) && !target.leq(map[a], map[b]) {
                return Some(format!("not monotone: {a} <= {b} but f({a}) !<= f({b})"));
            }
        }
    }
    for x in 0..source.len() {
        for y in 0..target.len() {
            if target.leq(y, map[x]) && !(0..source.len()).any(|z| source.leq(z, x) && map[z] == y) {
                return Some(format!("{y} <= f({x}) has no lift below {x}"));
            }
        }
    }
    None
}

pub fn is_p_morphism(source: &Poset, target: &Poset, map: &[usize]) -> bool {
    map.len() == source.len()
        && map.iter().all(|&y| y < target.len())
        && p_morphism_violation(source, target, map).is_none()
}
