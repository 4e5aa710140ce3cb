//! Explicit element tables for small groups, with subgroups as membership
//! bitsets. Used wherever many subgroups of one group are compared,
//! intersected or joined.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::permgroup::GroupHandle;

pub type Bits = FixedBitSet;

/// Largest group for which a full multiplication table is stored.
const MUL_TABLE_LIMIT: usize = 4096;

/// Largest group a [`GroupTable`] is built for.
pub const TABLE_LIMIT: usize = 1 << 16;

pub struct GroupTable {
    group: GroupHandle,
    elements: Arc<Vec<Perm>>,
    index: FxHashMap<Perm, u32>,
    mul: Option<Vec<u32>>,
    inv: Vec<u32>,
    gens: Vec<u32>,
}

impl GroupTable {
    pub fn new(group: &GroupHandle) -> Result<Self> {
        let order = group.order();
        if order > TABLE_LIMIT as u128 {
            return Err(Error::resource(
                "element table",
                TABLE_LIMIT as u64,
                order.min(u64::MAX as u128) as u64,
            ));
        }
        let elements = group.elements()?;
        let n = elements.len();
        let index: FxHashMap<Perm, u32> = elements
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i as u32))
            .collect();
        let inv = elements.iter().map(|g| index[&g.inverse()]).collect();
        let mul = (n <= MUL_TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; n * n];
            for (a, ga) in elements.iter().enumerate() {
                for (b, gb) in elements.iter().enumerate() {
                    t[a * n + b] = index[&ga.then(gb)];
                }
            }
            t
        });
        let gens = group.generators().iter().map(|g| index[g]).collect();
        Ok(GroupTable {
            group: group.clone(),
            elements,
            index,
            mul,
            inv,
            gens,
        })
    }

    pub fn group(&self) -> &GroupHandle {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &Perm {
        &self.elements[i]
    }

    pub fn index_of(&self, g: &Perm) -> Option<usize> {
        self.index.get(g).map(|&i| i as usize)
    }

    /// Index 0 is the identity: it is the lexicographically least element.
    pub const IDENTITY: usize = 0;

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.mul {
            Some(t) => t[a * self.len() + b] as usize,
            None => self.index[&self.elements[a].then(&self.elements[b])] as usize,
        }
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn generator_indices(&self) -> &[u32] {
        &self.gens
    }

    pub fn empty_bits(&self) -> Bits {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn trivial_bits(&self) -> Bits {
        let mut b = self.empty_bits();
        b.insert(Self::IDENTITY);
        b
    }

    pub fn full_bits(&self) -> Bits {
        let mut b = self.empty_bits();
        b.insert_range(..);
        b
    }

    pub fn order_of(bits: &Bits) -> usize {
        bits.count_ones(..)
    }

    /// Subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Bits {
        let mut bits = self.trivial_bits();
        self.extend_closure(&mut bits, gens);
        bits
    }

    /// Grows the subgroup `bits` to the subgroup generated by it and `gens`.
    pub fn extend_closure(&self, bits: &mut Bits, gens: &[usize]) {
        let gens: Vec<usize> = gens.iter().copied().filter(|&g| !bits[g]).collect();
        if gens.is_empty() {
            return;
        }
        // right-multiply everything by the full generating set until stable
        let mut all_gens: Vec<usize> = self.small_generators(bits);
        all_gens.extend(gens);
        let mut queue: Vec<usize> = bits.ones().collect();
        while let Some(x) = queue.pop() {
            for &g in &all_gens {
                let y = self.mul(x, g);
                if !bits[y] {
                    bits.insert(y);
                    queue.push(y);
                }
            }
        }
    }

    /// Join of two subgroups.
    pub fn join(&self, a: &Bits, b: &Bits) -> Bits {
        let mut out = a.clone();
        let gens = self.small_generators(b);
        self.extend_closure(&mut out, &gens);
        out
    }

    /// Greedy generating set: scan members in index order, keep each one
    /// not yet generated. Depends only on the subgroup.
    pub fn small_generators(&self, bits: &Bits) -> Vec<usize> {
        let target = bits.count_ones(..);
        let mut have = self.trivial_bits();
        let mut gens = Vec::new();
        for x in bits.ones() {
            if have.count_ones(..) == target {
                break;
            }
            if !have[x] {
                gens.push(x);
                let mut queue: Vec<usize> = have.ones().collect();
                let cur = gens.clone();
                while let Some(y) = queue.pop() {
                    for &g in &cur {
                        let z = self.mul(y, g);
                        if !have[z] {
                            have.insert(z);
                            queue.push(z);
                        }
                    }
                }
            }
        }
        gens
    }

    /// Conjugation action `x ↦ g^-1 x g` of a normalising permutation, as an
    /// index map.
    pub fn conj_table(&self, g: &Perm) -> Result<Vec<u32>> {
        self.elements
            .iter()
            .map(|x| {
                self.index.get(&x.conjugate_by(g)).copied().ok_or_else(|| {
                    Error::input(format!("{g} does not normalise the indexed group"))
                })
            })
            .collect()
    }

    /// Smallest subgroup containing `seed` and invariant under each of the
    /// given conjugation tables.
    pub fn invariant_closure(&self, seed: &[usize], actions: &[Vec<u32>]) -> Bits {
        let mut gens: Vec<usize> = Vec::new();
        let mut orbit = self.empty_bits();
        for &s in seed {
            if !orbit[s] {
                orbit.insert(s);
                gens.push(s);
            }
        }
        let mut k = 0;
        while k < gens.len() {
            let x = gens[k];
            for act in actions {
                let y = act[x] as usize;
                if !orbit[y] {
                    orbit.insert(y);
                    gens.push(y);
                }
            }
            k += 1;
        }
        self.closure(&gens)
    }

    pub fn is_invariant(&self, bits: &Bits, actions: &[Vec<u32>]) -> bool {
        let gens = self.small_generators(bits);
        actions
            .iter()
            .all(|act| gens.iter().all(|&g| bits[act[g] as usize]))
    }

    pub fn bits_of(&self, h: &GroupHandle) -> Result<Bits> {
        let mut bits = self.empty_bits();
        let mut missing = None;
        h.for_each_element(|g| match self.index.get(g) {
            Some(&i) => bits.insert(i as usize),
            None => missing = Some(g.clone()),
        })?;
        match missing {
            Some(g) => Err(Error::input(format!("{g} lies outside the indexed group"))),
            None => Ok(bits),
        }
    }

    pub fn handle(&self, bits: &Bits) -> GroupHandle {
        let gens = self
            .small_generators(bits)
            .into_iter()
            .map(|i| self.elements[i].clone())
            .collect();
        GroupHandle::new(self.group.degree(), gens).expect("members have the table's degree")
    }

    /// `{x ∈ within : x commutes with every element of of}`.
    pub fn centraliser(&self, within: &Bits, of: &Bits) -> Bits {
        let gens: Vec<&Perm> = self
            .small_generators(of)
            .into_iter()
            .map(|g| &self.elements[g])
            .collect();
        let mut out = self.empty_bits();
        for x in within.ones() {
            let px = &self.elements[x];
            if gens.iter().all(|g| px.commutes_with(g)) {
                out.insert(x);
            }
        }
        out
    }

    /// Whether every element of `by` normalises `sub`.
    pub fn normalises(&self, by: &Bits, sub: &Bits) -> bool {
        let bg = self.small_generators(by);
        let sg = self.small_generators(sub);
        bg.iter().all(|&b| {
            let bi = self.inv(b);
            sg.iter().all(|&s| sub[self.mul(self.mul(bi, s), b)])
        })
    }

    /// `g^-1 x g` for table indices.
    fn conj(&self, x: usize, g: usize) -> usize {
        self.index[&self.elements[x].conjugate_by(&self.elements[g])] as usize
    }

    /// Conjugacy class representatives of the whole group (least index per
    /// class).
    pub fn class_representatives(&self) -> Vec<usize> {
        let mut seen = self.empty_bits();
        let mut reps = Vec::new();
        let gens: Vec<usize> = self.gens.iter().map(|&g| g as usize).collect();
        for x in 0..self.len() {
            if seen[x] {
                continue;
            }
            reps.push(x);
            seen.insert(x);
            let mut queue = vec![x];
            while let Some(y) = queue.pop() {
                for &g in &gens {
                    let z = self.conj(y, g);
                    if !seen[z] {
                        seen.insert(z);
                        queue.push(z);
                    }
                }
            }
        }
        reps
    }

    /// Normal closure of one element in the whole group.
    pub fn normal_closure(&self, x: usize) -> Bits {
        let mut class = vec![x];
        let mut seen = self.empty_bits();
        seen.insert(x);
        let mut k = 0;
        while k < class.len() {
            for &g in &self.gens {
                let g = g as usize;
                let z = self.conj(class[k], g);
                if !seen[z] {
                    seen.insert(z);
                    class.push(z);
                }
            }
            k += 1;
        }
        self.closure(&class)
    }

    /// Checks that `bits` is closed under multiplication (used by tests and
    /// debug assertions).
    pub fn is_subgroup(&self, bits: &Bits) -> bool {
        bits[Self::IDENTITY]
            && bits
                .ones()
                .all(|a| bits.ones().all(|b| bits[self.mul(a, b)]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_matches_handle() {
        let s4 = GroupHandle::symmetric(4);
        let t = GroupTable::new(&s4).unwrap();
        assert_eq!(t.element(GroupTable::IDENTITY), &Perm::identity(4));
        let v4 = GroupHandle::new(
            4,
            vec![
                Perm::from_cycles(4, &[&[0, 1], &[2, 3]]).unwrap(),
                Perm::from_cycles(4, &[&[0, 2], &[1, 3]]).unwrap(),
            ],
        )
        .unwrap();
        let bits = t.bits_of(&v4).unwrap();
        assert!(t.is_subgroup(&bits));
        let gens = t.small_generators(&bits);
        assert_eq!(t.closure(&gens), bits);
        assert_eq!(t.handle(&bits), v4);
        assert_eq!(t.class_representatives().len(), 5);
        let full = t.full_bits();
        assert_eq!(GroupTable::order_of(&t.centraliser(&full, &full)), 1);
        assert!(t.normalises(&full, &bits));
    }
}
