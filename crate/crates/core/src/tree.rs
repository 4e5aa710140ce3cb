//! Rooted `m`-ary trees, wreath-recursion automata and their finite-depth
//! truncations.
//!
//! Leaves of the depth-`d` tree are words `x_1 … x_d` over `0..m`, numbered
//! with `x_1` most significant. A vertex at level `j` is the prefix of
//! length `j`; its cone is the set of leaves extending it.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtered::FilteredGroup;
use crate::perm::Perm;
use crate::permgroup::GroupHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeSpec {
    pub arity: usize,
    pub depth: usize,
}

impl TreeSpec {
    pub fn new(arity: usize, depth: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::input("tree arity must be at least 2"));
        }
        if depth < 1 {
            return Err(Error::input("tree depth must be at least 1"));
        }
        let leaves = (arity as u128).checked_pow(depth as u32);
        match leaves {
            Some(n) if n <= crate::perm::MAX_DEGREE as u128 => Ok(TreeSpec { arity, depth }),
            _ => Err(Error::input(format!(
                "an {arity}-ary tree of depth {depth} has too many leaves"
            ))),
        }
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.arity.pow(level as u32)
    }

    pub fn leaves(&self) -> usize {
        self.level_size(self.depth)
    }

    pub fn leaf_digits(&self, leaf: usize) -> Vec<usize> {
        let mut digits = vec![0; self.depth];
        let mut x = leaf;
        for pos in (0..self.depth).rev() {
            digits[pos] = x % self.arity;
            x /= self.arity;
        }
        digits
    }

    pub fn leaf_from_digits(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &x| acc * self.arity + x)
    }

    /// The level-`level` ancestor of a leaf.
    pub fn ancestor(&self, leaf: usize, level: usize) -> Vertex {
        Vertex {
            level,
            index: leaf / self.level_size(self.depth - level),
        }
    }

    pub fn vertices_at(&self, level: usize) -> impl Iterator<Item = Vertex> {
        (0..self.level_size(level)).map(move |index| Vertex { level, index })
    }

    /// Leaves under `v`, as a contiguous range.
    pub fn cone(&self, v: Vertex) -> std::ops::Range<usize> {
        let width = self.level_size(self.depth - v.level);
        v.index * width..(v.index + 1) * width
    }
}

/// A vertex: its level and its index among the vertices of that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub level: usize,
    pub index: usize,
}

impl Vertex {
    pub const ROOT: Vertex = Vertex { level: 0, index: 0 };

    /// Base-`arity` digit string of the address (empty for the root).
    pub fn address(&self, arity: usize) -> String {
        let mut digits = Vec::with_capacity(self.level);
        let mut x = self.index;
        for _ in 0..self.level {
            digits.push(std::char::from_digit((x % arity) as u32, 36).unwrap());
            x /= arity;
        }
        digits.iter().rev().collect()
    }

    pub fn parse(address: &str, arity: usize) -> Result<Vertex> {
        let mut index = 0;
        for c in address.chars() {
            let d = c
                .to_digit(36)
                .filter(|&d| (d as usize) < arity)
                .ok_or_else(|| Error::input(format!("bad vertex address {address:?}")))?;
            index = index * arity + d as usize;
        }
        Ok(Vertex {
            level: address.chars().count(),
            index,
        })
    }

    pub fn parent(&self, arity: usize) -> Option<Vertex> {
        (self.level > 0).then(|| Vertex {
            level: self.level - 1,
            index: self.index / arity,
        })
    }
}

/// A clopen subset of the (truncated) boundary: a set of leaves, with its
/// canonical antichain of maximal cones.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClopenSet {
    tree: TreeSpec,
    leaves: FixedBitSet,
}

impl ClopenSet {
    pub fn empty(tree: TreeSpec) -> Self {
        ClopenSet {
            tree,
            leaves: FixedBitSet::with_capacity(tree.leaves()),
        }
    }

    pub fn whole(tree: TreeSpec) -> Self {
        let mut leaves = FixedBitSet::with_capacity(tree.leaves());
        leaves.insert_range(..);
        ClopenSet { tree, leaves }
    }

    pub fn cone(tree: TreeSpec, v: Vertex) -> Self {
        let mut leaves = FixedBitSet::with_capacity(tree.leaves());
        leaves.insert_range(tree.cone(v));
        ClopenSet { tree, leaves }
    }

    /// Union of the cones below the given vertices; they need not form an
    /// antichain.
    pub fn from_vertices(tree: TreeSpec, vertices: &[Vertex]) -> Result<Self> {
        let mut set = ClopenSet::empty(tree);
        for &v in vertices {
            if v.level > tree.depth || v.index >= tree.level_size(v.level) {
                return Err(Error::input(format!("vertex {v:?} is not in the tree")));
            }
            set.leaves.insert_range(tree.cone(v));
        }
        Ok(set)
    }

    pub fn from_addresses(tree: TreeSpec, addresses: &[String]) -> Result<Self> {
        let vs = addresses
            .iter()
            .map(|a| Vertex::parse(a, tree.arity))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vertices(tree, &vs)
    }

    /// All unions of level-`level` cones, in binary-counter order.
    pub fn all_at_level(tree: TreeSpec, level: usize) -> Vec<ClopenSet> {
        let n = tree.level_size(level);
        assert!(n < 24, "too many level-{level} clopens to list");
        (0u32..1 << n)
            .map(|mask| {
                let vs: Vec<Vertex> = (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|index| Vertex { level, index })
                    .collect();
                ClopenSet::from_vertices(tree, &vs).unwrap()
            })
            .collect()
    }

    pub fn tree(&self) -> TreeSpec {
        self.tree
    }

    pub fn leaves(&self) -> &FixedBitSet {
        &self.leaves
    }

    pub fn contains_leaf(&self, leaf: usize) -> bool {
        self.leaves[leaf]
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.count_ones(..) == 0
    }

    pub fn is_whole(&self) -> bool {
        self.leaves.count_ones(..) == self.tree.leaves()
    }

    pub fn complement(&self) -> ClopenSet {
        let mut leaves = self.leaves.clone();
        leaves.toggle_range(..);
        ClopenSet {
            tree: self.tree,
            leaves,
        }
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        let mut leaves = self.leaves.clone();
        leaves.union_with(&other.leaves);
        ClopenSet {
            tree: self.tree,
            leaves,
        }
    }

    pub fn intersection(&self, other: &ClopenSet) -> ClopenSet {
        let mut leaves = self.leaves.clone();
        leaves.intersect_with(&other.leaves);
        ClopenSet {
            tree: self.tree,
            leaves,
        }
    }

    pub fn is_subset(&self, other: &ClopenSet) -> bool {
        self.leaves.is_subset(&other.leaves)
    }

    /// Maximal cones contained in the set; complete sibling families are
    /// merged into their parent.
    pub fn antichain(&self) -> Vec<Vertex> {
        let mut out = Vec::new();
        self.collect_cones(Vertex::ROOT, &mut out);
        out
    }

    fn collect_cones(&self, v: Vertex, out: &mut Vec<Vertex>) {
        let range = self.tree.cone(v);
        let width = range.len();
        let count = self.leaves.count_ones(range);
        if count == width {
            out.push(v);
        } else if count > 0 {
            for c in 0..self.tree.arity {
                self.collect_cones(
                    Vertex {
                        level: v.level + 1,
                        index: v.index * self.tree.arity + c,
                    },
                    out,
                );
            }
        }
    }

    /// Deepest level appearing in the canonical antichain (0 for empty/whole).
    pub fn level(&self) -> usize {
        self.antichain().iter().map(|v| v.level).max().unwrap_or(0)
    }

    pub fn addresses(&self) -> Vec<String> {
        self.antichain()
            .iter()
            .map(|v| v.address(self.tree.arity))
            .collect()
    }

    /// Image under a leaf permutation.
    pub fn image(&self, g: &Perm) -> ClopenSet {
        let mut leaves = FixedBitSet::with_capacity(self.tree.leaves());
        for leaf in self.leaves.ones() {
            leaves.insert(g.apply(leaf));
        }
        ClopenSet {
            tree: self.tree,
            leaves,
        }
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "{{")?;
        for (i, a) in self.addresses().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if a.is_empty() {
                write!(f, "ε")?;
            } else {
                write!(f, "{a}")?;
            }
        }
        write!(f, "}}")
    }
}

/// One automaton state: a permutation of the alphabet and one section per
/// letter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonState {
    pub root_perm: Vec<usize>,
    pub sections: Vec<String>,
}

/// Wreath recursion `q = root_perm(q) · (section_0, …, section_{m-1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WreathAutomaton {
    pub arity: usize,
    pub states: BTreeMap<String, AutomatonState>,
    pub generators: Vec<String>,
}

pub const IDENTITY_STATE: &str = "e";

impl WreathAutomaton {
    pub fn new(
        arity: usize,
        states: BTreeMap<String, AutomatonState>,
        generators: Vec<String>,
    ) -> Result<Self> {
        let mut states = states;
        let identity = AutomatonState {
            root_perm: (0..arity).collect(),
            sections: vec![IDENTITY_STATE.to_string(); arity],
        };
        match states.get(IDENTITY_STATE) {
            Some(s) if *s != identity => {
                return Err(Error::input("state \"e\" must be the identity state"))
            }
            Some(_) => {}
            None => {
                states.insert(IDENTITY_STATE.to_string(), identity);
            }
        }
        for (name, s) in &states {
            Perm::from_images(s.root_perm.clone()).map_err(|_| {
                Error::input(format!("state {name:?}: root_perm is not a permutation"))
            })?;
            if s.root_perm.len() != arity || s.sections.len() != arity {
                return Err(Error::input(format!(
                    "state {name:?} does not match arity {arity}"
                )));
            }
            for t in &s.sections {
                if !states.contains_key(t) {
                    return Err(Error::input(format!(
                        "state {name:?} refers to undefined state {t:?}"
                    )));
                }
            }
        }
        for g in &generators {
            if !states.contains_key(g) {
                return Err(Error::input(format!("generator {g:?} is not a state")));
            }
        }
        Ok(WreathAutomaton {
            arity,
            states,
            generators,
        })
    }

    /// Automaton whose depth-`depth` truncation is the full automorphism
    /// group of the tree: `Sym(m)` generators placed at each vertex `0^j`.
    pub fn full(arity: usize, depth: usize) -> Self {
        let mut states = BTreeMap::new();
        let mut generators = Vec::new();
        let e = IDENTITY_STATE.to_string();
        let mut transposition: Vec<usize> = (0..arity).collect();
        transposition.swap(0, 1);
        let cycle: Vec<usize> = (0..arity).map(|x| (x + 1) % arity).collect();
        let mut local: Vec<(&str, Vec<usize>)> = vec![("t", transposition)];
        if arity > 2 {
            local.push(("c", cycle));
        }
        for (label, perm) in local {
            for j in 0..depth {
                let name = format!("{label}{j}");
                let state = if j == 0 {
                    AutomatonState {
                        root_perm: perm.clone(),
                        sections: vec![e.clone(); arity],
                    }
                } else {
                    let mut sections = vec![e.clone(); arity];
                    sections[0] = format!("{label}{}", j - 1);
                    AutomatonState {
                        root_perm: (0..arity).collect(),
                        sections,
                    }
                };
                states.insert(name.clone(), state);
                generators.push(name);
            }
        }
        WreathAutomaton::new(arity, states, generators).unwrap()
    }

    /// Binary adding machine `a = σ(e, a)`.
    pub fn odometer() -> Self {
        let mut states = BTreeMap::new();
        states.insert(
            "a".to_string(),
            AutomatonState {
                root_perm: vec![1, 0],
                sections: vec![IDENTITY_STATE.to_string(), "a".to_string()],
            },
        );
        WreathAutomaton::new(2, states, vec!["a".to_string()]).unwrap()
    }

    /// The leaf permutation of `state` on the depth-`depth` truncation.
    pub fn leaf_permutation(&self, state: &str, tree: TreeSpec) -> Result<Perm> {
        if !self.states.contains_key(state) {
            return Err(Error::input(format!("unknown state {state:?}")));
        }
        let images = (0..tree.leaves())
            .map(|leaf| {
                let mut q = state;
                let digits = tree.leaf_digits(leaf);
                let out: Vec<usize> = digits
                    .iter()
                    .map(|&x| {
                        let s = &self.states[q];
                        q = &s.sections[x];
                        s.root_perm[x]
                    })
                    .collect();
                tree.leaf_from_digits(&out)
            })
            .collect();
        Perm::from_images(images)
    }
}

/// A truncated tree action: the group acting on level-`d` vertices with
/// the level stabilisers `U_0 ⊇ … ⊇ U_{d-1}` as filtration.
#[derive(Clone, Debug)]
pub struct TreeAction {
    pub tree: TreeSpec,
    pub fg: FilteredGroup,
}

impl TreeAction {
    pub fn truncate(aut: &WreathAutomaton, tree: TreeSpec) -> Result<Self> {
        if aut.arity != tree.arity {
            return Err(Error::input(format!(
                "automaton arity {} does not match tree arity {}",
                aut.arity, tree.arity
            )));
        }
        let gens = aut
            .generators
            .iter()
            .map(|g| aut.leaf_permutation(g, tree))
            .collect::<Result<Vec<_>>>()?;
        let group = GroupHandle::new(tree.leaves(), gens)?;
        Self::from_group(group, tree)
    }

    /// Wraps an arbitrary group of leaf permutations. Every element must
    /// preserve the tree structure.
    pub fn from_group(group: GroupHandle, tree: TreeSpec) -> Result<Self> {
        if group.degree() != tree.leaves() {
            return Err(Error::input(
                "group degree differs from the number of leaves",
            ));
        }
        for g in group.generators() {
            if !preserves_tree(g, tree) {
                return Err(Error::input(format!("{g} is not a tree automorphism")));
            }
        }
        let mut chain = vec![group.clone()];
        for level in 1..tree.depth {
            chain.push(level_stabiliser(&group, tree, level)?);
        }
        Ok(TreeAction {
            tree,
            fg: FilteredGroup::with_margin(chain, usize::from(tree.depth > 1))?,
        })
    }

    pub fn group(&self) -> &GroupHandle {
        self.fg.ambient()
    }

    /// Elements fixing every leaf outside `c`.
    pub fn rist(&self, c: &ClopenSet) -> Result<GroupHandle> {
        let outside: Vec<usize> = c.complement().leaves().ones().collect();
        self.group()
            .subgroup_where(|g| outside.iter().all(|&p| g.apply(p) == p))
    }

    /// Setwise stabiliser of `c`.
    pub fn stabiliser(&self, c: &ClopenSet) -> Result<GroupHandle> {
        let inside: Vec<usize> = c.leaves().ones().collect();
        self.group()
            .subgroup_where(|g| inside.iter().all(|&p| c.contains_leaf(g.apply(p))))
    }
}

fn preserves_tree(g: &Perm, tree: TreeSpec) -> bool {
    (1..tree.depth).all(|level| {
        let width = tree.level_size(tree.depth - level);
        (0..tree.leaves()).all(|leaf| {
            let block = leaf / width;
            g.apply(leaf) / width == g.apply(block * width) / width
        })
    })
}

/// Pointwise stabiliser of the level-`level` vertices.
pub fn level_stabiliser(group: &GroupHandle, tree: TreeSpec, level: usize) -> Result<GroupHandle> {
    let width = tree.level_size(tree.depth - level);
    group.subgroup_where(|g| (0..tree.level_size(level)).all(|b| g.apply(b * width) / width == b))
}
