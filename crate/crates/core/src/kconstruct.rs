//! Recursive rebuild of a forest product from ordinal sums and direct
//! products, and a check that it agrees with the section construction.

use std::fmt;

use crate::construct::{direct_product, ordinal_sum, ConstructError, ForestProduct, LabeledForest};
use crate::mtl::{find_isomorphism, FiniteMtl};
use crate::poset::{Forest, NodeSet, Tree};

/// How `K` was assembled. Nodes are forest indices; names come from the
/// forest when printing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KPlan {
    Label(usize),
    /// `l(node) ⊕ (product of the children)`
    OrdinalSum(usize, Vec<KPlan>),
    Product(Vec<KPlan>),
}

impl KPlan {
    pub fn display<'a>(&'a self, forest: &'a Forest) -> PlanDisplay<'a> {
        PlanDisplay { plan: self, forest }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        match self {
            KPlan::Label(i) => vec![*i],
            KPlan::OrdinalSum(_, ch) | KPlan::Product(ch) => ch.iter().flat_map(KPlan::leaves).collect(),
        }
    }

    /// Nodes heading an ordinal sum.
    pub fn sum_nodes(&self) -> Vec<usize> {
        match self {
            KPlan::Label(_) => Vec::new(),
            KPlan::OrdinalSum(i, ch) => {
                let mut v = vec![*i];
                v.extend(ch.iter().flat_map(KPlan::sum_nodes));
                v
            }
            KPlan::Product(ch) => ch.iter().flat_map(KPlan::sum_nodes).collect(),
        }
    }
}

pub struct PlanDisplay<'a> {
    plan: &'a KPlan,
    forest: &'a Forest,
}

impl PlanDisplay<'_> {
    fn write_tree(&self, f: &mut fmt::Formatter<'_>, p: &KPlan) -> fmt::Result {
        match p {
            KPlan::Label(i) => write!(f, "l({})", self.forest.name(*i)),
            KPlan::OrdinalSum(i, ch) => {
                write!(f, "l({})⊕(", self.forest.name(*i))?;
                for (k, c) in ch.iter().enumerate() {
                    if k > 0 {
                        write!(f, "×")?;
                    }
                    // a sum inside a product needs its own parentheses
                    let wrap = ch.len() > 1 && matches!(c, KPlan::OrdinalSum(..));
                    if wrap {
                        write!(f, "(")?;
                    }
                    self.write_tree(f, c)?;
                    if wrap {
                        write!(f, ")")?;
                    }
                }
                write!(f, ")")
            }
            KPlan::Product(ch) => {
                for (k, c) in ch.iter().enumerate() {
                    if k > 0 {
                        write!(f, "×")?;
                    }
                    write!(f, "[")?;
                    self.write_tree(f, c)?;
                    write!(f, "]")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for PlanDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_tree(f, self.plan)
    }
}

/// `K` of the subtree `↑i` of `t`. `i` is a forest index.
pub fn k_build_tree(l: &LabeledForest, t: &Tree, i: usize) -> Result<(FiniteMtl, KPlan), ConstructError> {
    let children: Vec<usize> = l.forest().covers(i).iter().collect();
    debug_assert!(t.nodes.contains(&i));
    if children.is_empty() {
        return Ok((l.label(i).clone(), KPlan::Label(i)));
    }
    let mut algebras = Vec::with_capacity(children.len());
    let mut plans = Vec::with_capacity(children.len());
    for c in children {
        let (a, p) = k_build_tree(l, t, c)?;
        algebras.push(a);
        plans.push(p);
    }
    let prod = if algebras.len() == 1 { algebras.pop().unwrap() } else { direct_product(&algebras)? };
    let sum = ordinal_sum(&[l.label(i).clone(), prod])?;
    Ok((sum, KPlan::OrdinalSum(i, plans)))
}

/// `K` of the whole forest: the product of `K` over the component trees.
pub fn k_of_forest(l: &LabeledForest) -> Result<(FiniteMtl, KPlan), ConstructError> {
    let trees = l.forest().component_trees();
    if trees.is_empty() {
        return Ok((FiniteMtl::trivial(), KPlan::Product(Vec::new())));
    }
    let mut algebras = Vec::with_capacity(trees.len());
    let mut plans = Vec::with_capacity(trees.len());
    for t in &trees {
        let (a, p) = k_build_tree(l, t, t.root)?;
        algebras.push(a);
        plans.push(p);
    }
    if algebras.len() == 1 {
        return Ok((algebras.pop().unwrap(), plans.pop().unwrap()));
    }
    Ok((direct_product(&algebras)?, KPlan::Product(plans)))
}

#[derive(Clone, Debug)]
pub struct KVerification {
    pub k_size: usize,
    pub p_size: usize,
    pub plan: String,
    pub isomorphism: Option<Vec<usize>>,
}

impl KVerification {
    pub fn ok(&self) -> bool {
        self.k_size == self.p_size && self.isomorphism.is_some()
    }
}

/// Builds both `K` and the forest product and searches for an isomorphism.
pub fn verify_k_iso(l: &LabeledForest) -> Result<KVerification, ConstructError> {
    let (k, plan) = k_of_forest(l)?;
    let p = ForestProduct::new(l)?;
    Ok(KVerification {
        k_size: k.len(),
        p_size: p.len(),
        plan: plan.display(l.forest()).to_string(),
        isomorphism: find_isomorphism(&k, p.algebra()),
    })
}

/// The forest product over a disjoint union against the product of the
/// forest products over the components.
pub fn check_components_product(l: &LabeledForest) -> Result<bool, ConstructError> {
    let whole = ForestProduct::new(l)?;
    let parts = l
        .forest()
        .components()
        .iter()
        .map(|&c| Ok(ForestProduct::new(&l.induced(c).0)?.into_algebra()))
        .collect::<Result<Vec<_>, ConstructError>>()?;
    let prod = if parts.is_empty() { FiniteMtl::trivial() } else { direct_product(&parts)? };
    Ok(find_isomorphism(whole.algebra(), &prod).is_some())
}

/// For a tree, the forest product against `l(root) ⊕ P(tree without root)`.
/// Returns `None` when the forest is not a tree.
pub fn check_root_sum(l: &LabeledForest) -> Result<Option<bool>, ConstructError> {
    let f = l.forest();
    if f.components().len() != 1 {
        return Ok(None);
    }
    let root = f.minimal_elements().first().expect("nonempty tree");
    let whole = ForestProduct::new(l)?;
    let rest = NodeSet::full(l.len()).difference(NodeSet::singleton(root));
    let sum = if rest.is_empty() {
        l.label(root).clone()
    } else {
        let upper = ForestProduct::new(&l.induced(rest).0)?.into_algebra();
        ordinal_sum(&[l.label(root).clone(), upper])?
    };
    Ok(Some(find_isomorphism(whole.algebra(), &sum).is_some()))
}
