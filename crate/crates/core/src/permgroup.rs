//! Finite permutation groups.
//!
//! A [`GroupHandle`] is an immutable, cheaply clonable generated group with a
//! stabiliser-chain index. Subgroup equality is decided by order plus
//! membership of generators, never by comparing generating sets.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::schreier::StabChain;

/// Hard cap on explicit element enumeration.
pub const ENUMERATION_LIMIT: u128 = 1 << 20;

/// Default budget for [`GroupHandle::normal_subgroups`].
pub const DEFAULT_NORMAL_BUDGET: u128 = 1 << 16;

struct Inner {
    degree: usize,
    generators: Vec<Perm>,
    chain: StabChain,
    elements: OnceLock<Arc<Vec<Perm>>>,
}

#[derive(Clone)]
pub struct GroupHandle(Arc<Inner>);

impl GroupHandle {
    pub fn new(degree: usize, generators: Vec<Perm>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::input("permutation degree must be at least 1"));
        }
        for g in &generators {
            if g.degree() != degree {
                return Err(Error::input(format!(
                    "generator {g} has degree {} but the group has degree {degree}",
                    g.degree()
                )));
            }
        }
        let generators: Vec<Perm> = generators
            .into_iter()
            .filter(|g| !g.is_identity())
            .collect();
        let chain = StabChain::new(degree, &generators);
        Ok(GroupHandle(Arc::new(Inner {
            degree,
            generators,
            chain,
            elements: OnceLock::new(),
        })))
    }

    pub fn trivial(degree: usize) -> Self {
        GroupHandle::new(degree.max(1), Vec::new()).unwrap()
    }

    pub fn symmetric(n: usize) -> Self {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Perm::from_cycles(n, &[&[0, 1]]).unwrap());
            let cycle: Vec<usize> = (0..n).collect();
            gens.push(Perm::from_cycles(n, &[&cycle]).unwrap());
        }
        GroupHandle::new(n.max(1), gens).unwrap()
    }

    pub fn alternating(n: usize) -> Self {
        let gens = (2..n)
            .map(|k| Perm::from_cycles(n, &[&[0, 1, k]]).unwrap())
            .collect();
        GroupHandle::new(n.max(1), gens).unwrap()
    }

    pub fn cyclic(n: usize) -> Self {
        let cycle: Vec<usize> = (0..n).collect();
        GroupHandle::new(
            n.max(1),
            vec![Perm::from_cycles(n.max(1), &[&cycle]).unwrap()],
        )
        .unwrap()
    }

    /// `a × b` acting on the disjoint union of the two point sets.
    pub fn direct_product(a: &GroupHandle, b: &GroupHandle) -> GroupHandle {
        let (na, nb) = (a.degree(), b.degree());
        let mut gens: Vec<Perm> = a
            .generators()
            .iter()
            .map(|g| g.direct_sum(&Perm::identity(nb)))
            .collect();
        gens.extend(
            b.generators()
                .iter()
                .map(|g| Perm::identity(na).direct_sum(g)),
        );
        GroupHandle::new(na + nb, gens).unwrap()
    }

    /// The two factor embeddings of [`GroupHandle::direct_product`].
    pub fn direct_factors(a: &GroupHandle, b: &GroupHandle) -> (GroupHandle, GroupHandle) {
        let (na, nb) = (a.degree(), b.degree());
        let left = a
            .generators()
            .iter()
            .map(|g| g.direct_sum(&Perm::identity(nb)))
            .collect();
        let right = b
            .generators()
            .iter()
            .map(|g| Perm::identity(na).direct_sum(g))
            .collect();
        (
            GroupHandle::new(na + nb, left).unwrap(),
            GroupHandle::new(na + nb, right).unwrap(),
        )
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.0.generators
    }

    pub fn base(&self) -> Vec<usize> {
        self.0.chain.base()
    }

    pub fn order(&self) -> u128 {
        self.0.chain.order()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.generators.is_empty()
    }

    pub fn identity(&self) -> Perm {
        Perm::identity(self.degree())
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.degree() == self.degree() && self.0.chain.contains(g)
    }

    fn check_degree(&self, other: &GroupHandle) -> Result<()> {
        if self.degree() != other.degree() {
            return Err(Error::input(format!(
                "degree mismatch: {} vs {}",
                self.degree(),
                other.degree()
            )));
        }
        Ok(())
    }

    pub fn is_subgroup_of(&self, other: &GroupHandle) -> bool {
        self.degree() == other.degree() && self.generators().iter().all(|g| other.contains(g))
    }

    pub fn same_subgroup(&self, other: &GroupHandle) -> bool {
        self.degree() == other.degree()
            && self.order() == other.order()
            && self.is_subgroup_of(other)
    }

    /// All elements, lexicographically sorted by image array. Memoised.
    pub fn elements(&self) -> Result<Arc<Vec<Perm>>> {
        if let Some(e) = self.0.elements.get() {
            return Ok(e.clone());
        }
        let order = self.order();
        if order > ENUMERATION_LIMIT {
            return Err(Error::resource(
                "element enumeration",
                ENUMERATION_LIMIT as u64,
                order.min(u64::MAX as u128) as u64,
            ));
        }
        let mut all = Vec::with_capacity(order as usize);
        self.0.chain.for_each_element(|g| all.push(g.clone()));
        all.sort_unstable();
        Ok(self.0.elements.get_or_init(|| Arc::new(all)).clone())
    }

    /// Enumerates elements without memoising them.
    pub fn for_each_element(&self, visit: impl FnMut(&Perm)) -> Result<()> {
        let order = self.order();
        if order > ENUMERATION_LIMIT {
            return Err(Error::resource(
                "element enumeration",
                ENUMERATION_LIMIT as u64,
                order.min(u64::MAX as u128) as u64,
            ));
        }
        self.0.chain.for_each_element(visit);
        Ok(())
    }

    /// Builds a subgroup from the elements of `self` satisfying `pred`.
    /// `pred` must cut out a subgroup.
    pub fn subgroup_where(&self, mut pred: impl FnMut(&Perm) -> bool) -> Result<GroupHandle> {
        let mut chain = StabChain::new(self.degree(), &[]);
        let mut gens = Vec::new();
        self.for_each_element(|g| {
            if !g.is_identity() && pred(g) && !chain.contains(g) {
                chain.extend(0, g.clone());
                gens.push(g.clone());
            }
        })?;
        GroupHandle::new(self.degree(), gens)
    }

    pub fn subgroup(&self, gens: Vec<Perm>) -> Result<GroupHandle> {
        for g in &gens {
            if !self.contains(g) {
                return Err(Error::input(format!("{g} is not an element of the group")));
            }
        }
        GroupHandle::new(self.degree(), gens)
    }

    /// Subgroup generated by the generators of both.
    pub fn join(&self, other: &GroupHandle) -> Result<GroupHandle> {
        self.check_degree(other)?;
        let mut gens = self.generators().to_vec();
        gens.extend(other.generators().iter().cloned());
        GroupHandle::new(self.degree(), gens)
    }

    pub fn intersection(&self, other: &GroupHandle) -> Result<GroupHandle> {
        self.check_degree(other)?;
        if self.is_subgroup_of(other) {
            return Ok(self.clone());
        }
        if other.is_subgroup_of(self) {
            return Ok(other.clone());
        }
        let (small, big) = if self.order() <= other.order() {
            (self, other)
        } else {
            (other, self)
        };
        small.subgroup_where(|g| big.contains(g))
    }

    /// `C_self(h)`: elements of `self` commuting with every element of `h`.
    pub fn centraliser(&self, h: &GroupHandle) -> Result<GroupHandle> {
        self.check_degree(h)?;
        if h.is_trivial() {
            return Ok(self.clone());
        }
        let hg = h.generators();
        self.subgroup_where(|x| hg.iter().all(|y| x.commutes_with(y)))
    }

    /// `N_self(h)`: elements of `self` conjugating `h` onto itself.
    pub fn normaliser(&self, h: &GroupHandle) -> Result<GroupHandle> {
        self.check_degree(h)?;
        if h.is_trivial() {
            return Ok(self.clone());
        }
        let hg = h.generators();
        self.subgroup_where(|x| hg.iter().all(|y| h.contains(&y.conjugate_by(x))))
    }

    /// Whether `h` is normalised by every element of `self`.
    pub fn normalises(&self, h: &GroupHandle) -> bool {
        self.degree() == h.degree()
            && self.generators().iter().all(|x| {
                h.generators()
                    .iter()
                    .all(|y| h.contains(&y.conjugate_by(x)))
            })
    }

    /// Whether `self` is a normal subgroup of `g`.
    pub fn is_normal_in(&self, g: &GroupHandle) -> bool {
        self.is_subgroup_of(g) && g.normalises(self)
    }

    /// Smallest subgroup of `self` containing `s` and closed under conjugation
    /// by `self`.
    pub fn normal_closure(&self, s: &[Perm]) -> Result<GroupHandle> {
        for x in s {
            if !self.contains(x) {
                return Err(Error::input(format!("{x} is not an element of the group")));
            }
        }
        self.closure_under(self.generators(), s)
    }

    /// Smallest subgroup containing `s` and normalised by `conjugators`.
    pub fn closure_under(&self, conjugators: &[Perm], s: &[Perm]) -> Result<GroupHandle> {
        let mut chain = StabChain::new(self.degree(), &[]);
        let mut gens: Vec<Perm> = Vec::new();
        for x in s {
            if !x.is_identity() && !chain.contains(x) {
                chain.extend(0, x.clone());
                gens.push(x.clone());
            }
        }
        let mut idx = 0;
        while idx < gens.len() {
            let y = gens[idx].clone();
            for c in conjugators {
                let z = y.conjugate_by(c);
                if !chain.contains(&z) {
                    chain.extend(0, z.clone());
                    gens.push(z);
                }
            }
            idx += 1;
        }
        GroupHandle::new(self.degree(), gens)
    }

    pub fn centre(&self) -> Result<GroupHandle> {
        self.centraliser(self)
    }

    pub fn is_abelian(&self) -> bool {
        let g = self.generators();
        g.iter()
            .enumerate()
            .all(|(i, a)| g[i + 1..].iter().all(|b| a.commutes_with(b)))
    }

    /// `h^x = x^-1 h x`.
    pub fn conjugate(&self, x: &Perm) -> Result<GroupHandle> {
        if x.degree() != self.degree() {
            return Err(Error::input("conjugating element has the wrong degree"));
        }
        GroupHandle::new(
            self.degree(),
            self.generators()
                .iter()
                .map(|y| y.conjugate_by(x))
                .collect(),
        )
    }

    /// Largest subgroup of `h` normal in `self`.
    pub fn core(&self, h: &GroupHandle) -> Result<GroupHandle> {
        self.check_degree(h)?;
        let mut current = h.clone();
        loop {
            let mut next = current.clone();
            for x in self.generators() {
                next = next.intersection(&current.conjugate(x)?)?;
            }
            if next.order() == current.order() {
                return Ok(current);
            }
            current = next;
        }
    }

    /// Commutator subgroup `[self, other]` as a normal closure inside the
    /// join of both groups.
    pub fn commutator_subgroup(&self, other: &GroupHandle) -> Result<GroupHandle> {
        self.check_degree(other)?;
        let mut comms = Vec::new();
        for a in self.generators() {
            for b in other.generators() {
                comms.push(a.commutator(b));
            }
        }
        let ambient = self.join(other)?;
        ambient.closure_under(ambient.generators(), &comms)
    }

    /// Generating set depending only on the subgroup: scan the elements in
    /// lexicographic order, keeping each one not yet generated.
    pub fn canonical_generators(&self) -> Result<Vec<Perm>> {
        let elements = self.elements()?;
        let mut chain = StabChain::new(self.degree(), &[]);
        let mut gens = Vec::new();
        for g in elements.iter() {
            if chain.order() == self.order() {
                break;
            }
            if !chain.contains(g) {
                chain.extend(0, g.clone());
                gens.push(g.clone());
            }
        }
        Ok(gens)
    }

    /// Sort key for deterministic output: order, then canonical generators.
    pub fn canonical_key(&self) -> Result<(u128, Vec<Perm>)> {
        Ok((self.order(), self.canonical_generators()?))
    }

    /// Every normal subgroup of `self`.
    ///
    /// Each normal subgroup is a join of normal closures of single
    /// conjugacy classes, so those closures are built first and then joined
    /// breadth-first until nothing new appears. Results are sorted by order.
    pub fn normal_subgroups(&self, budget: u128) -> Result<Vec<GroupHandle>> {
        let order = self.order();
        if order > budget {
            return Err(Error::resource(
                "normal subgroup enumeration (group order)",
                budget as u64,
                order.min(u64::MAX as u128) as u64,
            ));
        }
        let table = ElementIndex::new(self)?;
        let n = table.len();
        let mut classed = FixedBitSet::with_capacity(n);
        let mut class_closures: Vec<(FixedBitSet, Vec<Perm>)> = Vec::new();
        let mut seen_closures: HashMap<FixedBitSet, ()> = HashMap::new();
        for (idx, x) in table.elements.iter().enumerate() {
            if classed[idx] {
                continue;
            }
            // conjugacy class of x
            let mut class = vec![x.clone()];
            classed.insert(idx);
            let mut k = 0;
            while k < class.len() {
                let y = class[k].clone();
                for g in self.generators() {
                    let z = y.conjugate_by(g);
                    let zi = table.index_of(&z);
                    if !classed[zi] {
                        classed.insert(zi);
                        class.push(z);
                    }
                }
                k += 1;
            }
            if x.is_identity() {
                continue;
            }
            let closure = self.closure_under(self.generators(), std::slice::from_ref(x))?;
            let bits = table.bits_of(&closure)?;
            if seen_closures.insert(bits.clone(), ()).is_none() {
                class_closures.push((bits, closure.generators().to_vec()));
            }
        }

        let trivial_bits = {
            let mut b = FixedBitSet::with_capacity(n);
            b.insert(table.index_of(&self.identity()));
            b
        };
        let mut found: HashMap<FixedBitSet, Vec<Perm>> = HashMap::new();
        found.insert(trivial_bits.clone(), Vec::new());
        let mut frontier = vec![(trivial_bits, Vec::<Perm>::new())];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (bits, gens) in &frontier {
                for (cbits, cgens) in &class_closures {
                    if cbits.is_subset(bits) {
                        continue;
                    }
                    let mut joined = gens.clone();
                    joined.extend(cgens.iter().cloned());
                    let handle = GroupHandle::new(self.degree(), joined.clone())?;
                    let jbits = table.bits_of(&handle)?;
                    if !found.contains_key(&jbits) {
                        let jgens = handle.generators().to_vec();
                        found.insert(jbits.clone(), jgens.clone());
                        next.push((jbits, jgens));
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<GroupHandle> = found
            .into_values()
            .map(|gens| GroupHandle::new(self.degree(), gens))
            .collect::<Result<_>>()?;
        sort_subgroups(&mut out)?;
        Ok(out)
    }

    /// Every subgroup, by brute force. Only for small test oracles.
    pub fn all_subgroups_brute_force(&self) -> Result<Vec<GroupHandle>> {
        let table = ElementIndex::new(self)?;
        let n = table.len();
        let mut found: HashMap<FixedBitSet, GroupHandle> = HashMap::new();
        let trivial = GroupHandle::trivial(self.degree());
        found.insert(table.bits_of(&trivial)?, trivial.clone());
        let mut frontier = vec![trivial];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for h in &frontier {
                for x in table.elements.iter() {
                    if h.contains(x) {
                        continue;
                    }
                    let mut gens = h.generators().to_vec();
                    gens.push(x.clone());
                    let k = GroupHandle::new(self.degree(), gens)?;
                    let bits = table.bits_of(&k)?;
                    if let std::collections::hash_map::Entry::Vacant(e) = found.entry(bits) {
                        e.insert(k.clone());
                        next.push(k);
                    }
                }
            }
            frontier = next;
            if found.len() > n * 64 + 4096 {
                return Err(Error::resource(
                    "brute-force subgroup enumeration",
                    (n * 64 + 4096) as u64,
                    found.len() as u64,
                ));
            }
        }
        let mut out: Vec<GroupHandle> = found.into_values().collect();
        sort_subgroups(&mut out)?;
        Ok(out)
    }
}

/// Sorts by (order, canonical generators).
pub fn sort_subgroups(groups: &mut [GroupHandle]) -> Result<()> {
    let mut keyed: Vec<((u128, Vec<Perm>), GroupHandle)> = groups
        .iter()
        .map(|g| Ok((g.canonical_key()?, g.clone())))
        .collect::<Result<_>>()?;
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    for (slot, (_, g)) in groups.iter_mut().zip(keyed) {
        *slot = g;
    }
    Ok(())
}

impl PartialEq for GroupHandle {
    fn eq(&self, other: &Self) -> bool {
        self.same_subgroup(other)
    }
}

impl Eq for GroupHandle {}

impl fmt::Debug for GroupHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group(order {}, gens [", self.order())?;
        for (i, g) in self.generators().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "])")
    }
}

/// Lookup from elements of a group to dense indices, used to key subgroups
/// by membership bitsets.
pub struct ElementIndex {
    pub elements: Arc<Vec<Perm>>,
    index: HashMap<Perm, usize>,
}

impl ElementIndex {
    pub fn new(group: &GroupHandle) -> Result<Self> {
        let elements = group.elements()?;
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
        Ok(ElementIndex { elements, index })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, g: &Perm) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn index_of(&self, g: &Perm) -> usize {
        self.index[g]
    }

    pub fn bits_of(&self, h: &GroupHandle) -> Result<FixedBitSet> {
        let mut bits = FixedBitSet::with_capacity(self.len());
        let mut missing = None;
        h.for_each_element(|g| match self.index.get(g) {
            Some(&i) => bits.insert(i),
            None => missing = Some(g.clone()),
        })?;
        match missing {
            Some(g) => Err(Error::input(format!("{g} lies outside the indexed group"))),
            None => Ok(bits),
        }
    }
}
