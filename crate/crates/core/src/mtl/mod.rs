//! Finite MTL-algebras stored as Cayley tables.
//!
//! Elements are indices `0..n`. Algebras produced by this crate are in
//! canonical encoding: `bot = 0`, `top = n - 1`, and index order is a linear
//! extension of the lattice order. Parsed algebras may use any indices; call
//! [`FiniteMtl::canonicalize`] to normalise them.

mod chains;
mod filters;
mod morphism;

use std::fmt;

use thiserror::Error;

pub use chains::enumerate_chains;
pub use filters::{ArchimedeanReport, Filter, IdempotentStructure, Quotient, Spectrum, SubAlgebra};
pub use morphism::{find_isomorphism, find_morphisms, AlgMorphism};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MtlError {
    #[error("table {table}: {detail}")]
    Shape { table: &'static str, detail: String },
    #[error("bot/top index out of range for {n} elements")]
    BoundsOutOfRange { n: usize },
    #[error("not a lattice: {law} fails at {witness:?}")]
    NotLattice { law: &'static str, witness: Vec<usize> },
    #[error("bounds wrong: {detail}")]
    BoundsWrong { detail: String },
    #[error("multiplication not commutative: {x}*{y} != {y}*{x}")]
    NotCommutative { x: usize, y: usize },
    #[error("not a monoid: {law} fails at {witness:?}")]
    NotMonoid { law: &'static str, witness: Vec<usize> },
    #[error("residuation fails: ({x}*{y} <= {z}) != ({x} <= {y}->{z})")]
    ResiduationFails { x: usize, y: usize, z: usize },
    #[error("prelinearity fails: ({x}->{y}) v ({y}->{x}) != top")]
    PrelinearityFails { x: usize, y: usize },
    #[error("meet identity fails: {x} ^ {y} != ({x}*({x}->{y})) v ({y}*({y}->{x}))")]
    MeetIdentityFails { x: usize, y: usize },
    #[error("element {x} is not idempotent")]
    NotIdempotent { x: usize },
    #[error("algebra is not a chain: {x} and {y} are incomparable")]
    NotAChain { x: usize, y: usize },
    #[error("map is not a homomorphism: {op} fails at ({x}, {y})")]
    NotHomomorphism { op: &'static str, x: usize, y: usize },
    #[error("map has {len} entries, expected {expected}")]
    MapLength { len: usize, expected: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Raw tables, as read from a file or written by hand. `meet`/`join` may be
/// omitted and are then derived from the order `x <= y iff x -> y = top`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtlTables {
    pub n: usize,
    pub bot: usize,
    pub top: usize,
    pub mul: Vec<Vec<usize>>,
    pub imp: Vec<Vec<usize>>,
    pub meet: Option<Vec<Vec<usize>>>,
    pub join: Option<Vec<Vec<usize>>>,
}

/// A validated finite MTL-algebra.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteMtl {
    n: usize,
    bot: usize,
    top: usize,
    mul: Vec<u32>,
    imp: Vec<u32>,
    meet: Vec<u32>,
    join: Vec<u32>,
    leq: Vec<bool>,
}

impl fmt::Debug for FiniteMtl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteMtl(n={}, bot={}, top={})", self.n, self.bot, self.top)
    }
}

/// Binary operations, named for error reporting and generic table access.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Mul,
    Imp,
    Meet,
    Join,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::Mul, Op::Imp, Op::Meet, Op::Join];

    pub fn name(self) -> &'static str {
        match self {
            Op::Mul => "mul",
            Op::Imp => "imp",
            Op::Meet => "meet",
            Op::Join => "join",
        }
    }
}

impl FiniteMtl {
    /// Checks every axiom exhaustively and returns the first violation.
    pub fn validate(tables: &MtlTables) -> Result<FiniteMtl, MtlError> {
        let n = tables.n;
        if n == 0 {
            return Err(MtlError::Shape { table: "n", detail: "empty universe".into() });
        }
        if tables.bot >= n || tables.top >= n {
            return Err(MtlError::BoundsOutOfRange { n });
        }
        let mul = flatten("mul", n, &tables.mul)?;
        let imp = flatten("imp", n, &tables.imp)?;
        let (meet, join) = match (&tables.meet, &tables.join) {
            (Some(m), Some(j)) => (flatten("meet", n, m)?, flatten("join", n, j)?),
            (None, None) => derive_lattice(n, tables.top, &imp)?,
            (Some(_), None) => return Err(MtlError::Shape { table: "join", detail: "missing while meet is given".into() }),
            (None, Some(_)) => return Err(MtlError::Shape { table: "meet", detail: "missing while join is given".into() }),
        };
        let a = FiniteMtl::assemble(n, tables.bot, tables.top, mul, imp, meet, join);
        a.check_axioms()?;
        Ok(a)
    }

    /// Builds from flat row-major tables without checking axioms; the order
    /// is read off `meet`.
    pub(crate) fn assemble(
        n: usize,
        bot: usize,
        top: usize,
        mul: Vec<u32>,
        imp: Vec<u32>,
        meet: Vec<u32>,
        join: Vec<u32>,
    ) -> FiniteMtl {
        let mut leq = vec![false; n * n];
        for x in 0..n {
            for y in 0..n {
                leq[x * n + y] = meet[x * n + y] as usize == x;
            }
        }
        FiniteMtl { n, bot, top, mul, imp, meet, join, leq }
    }

    /// Builds an algebra from closures computing each operation.
    pub(crate) fn from_fns(
        n: usize,
        bot: usize,
        top: usize,
        mut f: impl FnMut(Op, usize, usize) -> usize,
    ) -> FiniteMtl {
        let mut tabs: [Vec<u32>; 4] = Default::default();
        for (k, op) in Op::ALL.into_iter().enumerate() {
            let mut t = Vec::with_capacity(n * n);
            for x in 0..n {
                for y in 0..n {
                    t.push(f(op, x, y) as u32);
                }
            }
            tabs[k] = t;
        }
        let [mul, imp, meet, join] = tabs;
        FiniteMtl::assemble(n, bot, top, mul, imp, meet, join)
    }

    /// Re-runs the full axiom check on an already built algebra.
    pub fn check_axioms(&self) -> Result<(), MtlError> {
        let n = self.n;
        for (name, t) in [("mul", &self.mul), ("imp", &self.imp), ("meet", &self.meet), ("join", &self.join)] {
            if let Some(pos) = t.iter().position(|&v| v as usize >= n) {
                return Err(MtlError::Shape {
                    table: name,
                    detail: format!("entry ({}, {}) = {} out of range", pos / n, pos % n, t[pos]),
                });
            }
        }
        self.check_lattice()?;
        self.check_bounds()?;
        self.check_monoid()?;
        self.check_residuation()?;
        for x in 0..n {
            for y in 0..n {
                if self.join(self.imp(x, y), self.imp(y, x)) != self.top {
                    return Err(MtlError::PrelinearityFails { x, y });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let rhs = self.join(self.mul(x, self.imp(x, y)), self.mul(y, self.imp(y, x)));
                if self.meet(x, y) != rhs {
                    return Err(MtlError::MeetIdentityFails { x, y });
                }
            }
        }
        Ok(())
    }

    fn check_lattice(&self) -> Result<(), MtlError> {
        let n = self.n;
        let fail = |law, witness: Vec<usize>| Err(MtlError::NotLattice { law, witness });
        for x in 0..n {
            if self.meet(x, x) != x {
                return fail("meet idempotence", vec![x]);
            }
            if self.join(x, x) != x {
                return fail("join idempotence", vec![x]);
            }
            for y in 0..n {
                if self.meet(x, y) != self.meet(y, x) {
                    return fail("meet commutativity", vec![x, y]);
                }
                if self.join(x, y) != self.join(y, x) {
                    return fail("join commutativity", vec![x, y]);
                }
                if self.meet(x, self.join(x, y)) != x {
                    return fail("absorption x^(xvy)=x", vec![x, y]);
                }
                if self.join(x, self.meet(x, y)) != x {
                    return fail("absorption xv(x^y)=x", vec![x, y]);
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let xy = self.meet(x, y);
                let jxy = self.join(x, y);
                for z in 0..n {
                    if self.meet(xy, z) != self.meet(x, self.meet(y, z)) {
                        return fail("meet associativity", vec![x, y, z]);
                    }
                    if self.join(jxy, z) != self.join(x, self.join(y, z)) {
                        return fail("join associativity", vec![x, y, z]);
                    }
                }
            }
        }
        Ok(())
    }

    fn check_bounds(&self) -> Result<(), MtlError> {
        for x in 0..self.n {
            if !self.leq(self.bot, x) {
                return Err(MtlError::BoundsWrong { detail: format!("bot {} is not below {x}", self.bot) });
            }
            if !self.leq(x, self.top) {
                return Err(MtlError::BoundsWrong { detail: format!("{x} is not below top {}", self.top) });
            }
        }
        Ok(())
    }

    fn check_monoid(&self) -> Result<(), MtlError> {
        let n = self.n;
        for x in 0..n {
            for y in x + 1..n {
                if self.mul(x, y) != self.mul(y, x) {
                    return Err(MtlError::NotCommutative { x, y });
                }
            }
        }
        for x in 0..n {
            if self.mul(x, self.top) != x {
                return Err(MtlError::NotMonoid { law: "top is the unit", witness: vec![x] });
            }
        }
        for x in 0..n {
            for y in 0..n {
                let xy = self.mul(x, y);
                for z in 0..n {
                    if self.mul(xy, z) != self.mul(x, self.mul(y, z)) {
                        return Err(MtlError::NotMonoid { law: "associativity", witness: vec![x, y, z] });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_residuation(&self) -> Result<(), MtlError> {
        let n = self.n;
        for x in 0..n {
            let lx = &self.leq[x * n..x * n + n];
            for y in 0..n {
                let xy = self.mul(x, y);
                let lxy = &self.leq[xy * n..xy * n + n];
                let iy = &self.imp[y * n..y * n + n];
                for z in 0..n {
                    if lxy[z] != lx[iy[z] as usize] {
                        return Err(MtlError::ResiduationFails { x, y, z });
                    }
                }
            }
        }
        Ok(())
    }

    /// A chain `0 < 1 < .. < n-1` with the given multiplication; the residual
    /// is `x -> y = max{z : x*z <= y}`. Not validated.
    pub fn from_chain_mul(mul: &[Vec<usize>]) -> FiniteMtl {
        let n = mul.len();
        FiniteMtl::from_fns(n, 0, n - 1, |op, x, y| match op {
            Op::Mul => mul[x][y],
            Op::Imp => (0..n).rev().find(|&z| mul[x][z] <= y).unwrap_or(0),
            Op::Meet => x.min(y),
            Op::Join => x.max(y),
        })
    }

    /// The Łukasiewicz chain with `k` elements; `Ł2` is the Boolean chain.
    pub fn lukasiewicz(k: usize) -> FiniteMtl {
        assert!(k >= 1);
        let t = k - 1;
        FiniteMtl::from_fns(k, 0, t, |op, x, y| match op {
            Op::Mul => (x + y).saturating_sub(t),
            Op::Imp => (t - x + y).min(t),
            Op::Meet => x.min(y),
            Op::Join => x.max(y),
        })
    }

    /// The Gödel chain with `k` elements (`x*y = min(x, y)`).
    pub fn goedel(k: usize) -> FiniteMtl {
        assert!(k >= 1);
        let t = k - 1;
        FiniteMtl::from_fns(k, 0, t, |op, x, y| match op {
            Op::Mul | Op::Meet => x.min(y),
            Op::Imp => {
                if x <= y {
                    t
                } else {
                    y
                }
            }
            Op::Join => x.max(y),
        })
    }

    pub fn boolean() -> FiniteMtl {
        FiniteMtl::lukasiewicz(2)
    }

    pub fn trivial() -> FiniteMtl {
        FiniteMtl::lukasiewicz(1)
    }

    /// The 4-chain `0 < b < e < 1` with `e*e = e` and `e*b = b*b = 0`.
    pub fn non_representable_w() -> FiniteMtl {
        FiniteMtl::from_chain_mul(&[
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 1],
            vec![0, 0, 2, 2],
            vec![0, 1, 2, 3],
        ])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_trivial(&self) -> bool {
        self.n == 1
    }

    pub fn bot(&self) -> usize {
        self.bot
    }

    pub fn top(&self) -> usize {
        self.top
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.n + y] as usize
    }

    #[inline]
    pub fn imp(&self, x: usize, y: usize) -> usize {
        self.imp[x * self.n + y] as usize
    }

    #[inline]
    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet[x * self.n + y] as usize
    }

    #[inline]
    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x * self.n + y] as usize
    }

    #[inline]
    pub fn op(&self, op: Op, x: usize, y: usize) -> usize {
        match op {
            Op::Mul => self.mul(x, y),
            Op::Imp => self.imp(x, y),
            Op::Meet => self.meet(x, y),
            Op::Join => self.join(x, y),
        }
    }

    #[inline]
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.n + y]
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    /// `x^k` with `x^0 = top`.
    pub fn pow(&self, x: usize, k: usize) -> usize {
        (0..k).fold(self.top, |acc, _| self.mul(acc, x))
    }

    /// The fixpoint of `x, x^2, x^3, ..` and the number of steps to reach it.
    pub fn power_limit(&self, x: usize) -> (usize, usize) {
        let mut p = x;
        let mut steps = 1;
        loop {
            let q = self.mul(p, x);
            if q == p {
                return (p, steps);
            }
            p = q;
            steps += 1;
        }
    }

    pub fn incomparable_pair(&self) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|x| (x + 1..self.n).map(move |y| (x, y)))
            .find(|&(x, y)| !self.leq(x, y) && !self.leq(y, x))
    }

    pub fn is_chain(&self) -> bool {
        self.incomparable_pair().is_none()
    }

    pub fn up(&self, x: usize) -> Vec<usize> {
        (0..self.n).filter(|&y| self.leq(x, y)).collect()
    }

    pub fn down(&self, x: usize) -> Vec<usize> {
        (0..self.n).filter(|&y| self.leq(y, x)).collect()
    }

    /// Meet of a nonempty set of elements.
    pub fn meet_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    pub fn join_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.bot, |acc, x| self.join(acc, x))
    }

    pub fn tables(&self) -> MtlTables {
        let rows = |t: &[u32]| -> Vec<Vec<usize>> {
            t.chunks(self.n).map(|r| r.iter().map(|&v| v as usize).collect()).collect()
        };
        MtlTables {
            n: self.n,
            bot: self.bot,
            top: self.top,
            mul: rows(&self.mul),
            imp: rows(&self.imp),
            meet: Some(rows(&self.meet)),
            join: Some(rows(&self.join)),
        }
    }

    /// Renames element `x` to `perm[x]`.
    pub fn relabel(&self, perm: &[usize]) -> FiniteMtl {
        let n = self.n;
        let mut inv = vec![0; n];
        for (x, &p) in perm.iter().enumerate() {
            inv[p] = x;
        }
        FiniteMtl::from_fns(n, perm[self.bot], perm[self.top], |op, x, y| {
            perm[self.op(op, inv[x], inv[y])]
        })
    }

    /// Old index -> canonical index: sort by `|↓x|`, ties by index.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&x| (self.down(x).len(), x));
        let mut perm = vec![0; self.n];
        for (new, &old) in order.iter().enumerate() {
            perm[old] = new;
        }
        perm
    }

    pub fn is_canonical(&self) -> bool {
        self.bot == 0
            && self.top == self.n - 1
            && (0..self.n).all(|x| (0..self.n).all(|y| !self.leq(x, y) || x <= y))
    }

    /// Canonical copy and the renaming used (old -> new).
    pub fn canonicalize(&self) -> (FiniteMtl, Vec<usize>) {
        let perm = self.canonical_order();
        (self.relabel(&perm), perm)
    }

    /// Replaces a single table entry without any checking; for mutation
    /// testing of the validator.
    pub fn with_entry(&self, op: Op, x: usize, y: usize, value: usize) -> FiniteMtl {
        let mut a = self.clone();
        let n = a.n;
        let t = match op {
            Op::Mul => &mut a.mul,
            Op::Imp => &mut a.imp,
            Op::Meet => &mut a.meet,
            Op::Join => &mut a.join,
        };
        t[x * n + y] = value as u32;
        if op == Op::Meet {
            let meet = a.meet.clone();
            a = FiniteMtl::assemble(n, a.bot, a.top, a.mul, a.imp, meet, a.join);
        }
        a
    }
}

fn flatten(table: &'static str, n: usize, rows: &[Vec<usize>]) -> Result<Vec<u32>, MtlError> {
    if rows.len() != n {
        return Err(MtlError::Shape { table, detail: format!("{} rows, expected {n}", rows.len()) });
    }
    let mut out = Vec::with_capacity(n * n);
    for (x, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(MtlError::Shape { table, detail: format!("row {x} has {} entries, expected {n}", r.len()) });
        }
        for (y, &v) in r.iter().enumerate() {
            if v >= n {
                return Err(MtlError::Shape { table, detail: format!("entry ({x}, {y}) = {v} out of range") });
            }
            out.push(v as u32);
        }
    }
    Ok(out)
}

// Order x <= y iff x -> y = top; meet/join are its glb/lub.
fn derive_lattice(n: usize, top: usize, imp: &[u32]) -> Result<(Vec<u32>, Vec<u32>), MtlError> {
    let le = |x: usize, y: usize| imp[x * n + y] as usize == top;
    let mut meet = Vec::with_capacity(n * n);
    let mut join = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let lower: Vec<usize> = (0..n).filter(|&z| le(z, x) && le(z, y)).collect();
            let glb = lower.iter().copied().find(|&z| lower.iter().all(|&w| le(w, z)));
            let upper: Vec<usize> = (0..n).filter(|&z| le(x, z) && le(y, z)).collect();
            let lub = upper.iter().copied().find(|&z| upper.iter().all(|&w| le(z, w)));
            match (glb, lub) {
                (Some(m), Some(j)) => {
                    meet.push(m as u32);
                    join.push(j as u32);
                }
                _ => {
                    return Err(MtlError::NotLattice { law: "derived order has meets and joins", witness: vec![x, y] })
                }
            }
        }
    }
    Ok((meet, join))
}
