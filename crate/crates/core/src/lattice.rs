//! Explicit finite lattices and Boolean algebras.
//!
//! Elements are identified by index; every constructor takes a canonical key
//! per element and rejects duplicates, so callers deduplicate up front.

use std::collections::HashSet;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Largest lattice built explicitly.
pub const SIZE_LIMIT: usize = 1 << 14;

/// A finite poset with a least element and all binary meets; joins (and a
/// greatest element) are present when every pair has an upper bound.
#[derive(Clone, Debug)]
pub struct FiniteLattice {
    keys: Vec<String>,
    /// `down[b]` holds every `a ≤ b`.
    down: Vec<FixedBitSet>,
    meet: Vec<u16>,
    join: Option<Vec<u16>>,
    bottom: usize,
    top: Option<usize>,
}

impl FiniteLattice {
    /// Builds the structure from a partial order given as a predicate.
    /// Fails if the relation is not a partial order, there is no least
    /// element, or some pair lacks a greatest lower bound.
    pub fn from_order(keys: Vec<String>, leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let n = keys.len();
        if n == 0 {
            return Err(Error::input("a lattice needs at least one element"));
        }
        if n > SIZE_LIMIT {
            return Err(Error::resource(
                "lattice elements",
                SIZE_LIMIT as u64,
                n as u64,
            ));
        }
        let mut seen = HashSet::new();
        for k in &keys {
            if !seen.insert(k) {
                return Err(Error::input(format!("duplicate element key {k}")));
            }
        }
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        for (b, row) in down.iter_mut().enumerate() {
            for a in 0..n {
                if leq(a, b) {
                    row.insert(a);
                }
            }
        }
        for a in 0..n {
            if !down[a][a] {
                return Err(Error::input(format!(
                    "order is not reflexive at {}",
                    keys[a]
                )));
            }
            for b in down[a].ones() {
                if b != a && down[b][a] {
                    return Err(Error::input(format!(
                        "order is not antisymmetric: {} and {}",
                        keys[a], keys[b]
                    )));
                }
                if !down[b].is_subset(&down[a]) {
                    return Err(Error::input(format!(
                        "order is not transitive below {}",
                        keys[a]
                    )));
                }
            }
        }
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for (b, row) in down.iter().enumerate() {
            for a in row.ones() {
                up[a].insert(b);
            }
        }
        let bottom = (0..n)
            .find(|&a| up[a].count_ones(..) == n)
            .ok_or_else(|| Error::input("order has no least element"))?;
        let top = (0..n).find(|&a| down[a].count_ones(..) == n);

        let down_size: Vec<usize> = down.iter().map(|d| d.count_ones(..)).collect();
        let up_size: Vec<usize> = up.iter().map(|u| u.count_ones(..)).collect();
        let mut meet = vec![0u16; n * n];
        let mut join = vec![0u16; n * n];
        let mut has_joins = true;
        for a in 0..n {
            for b in a..n {
                let mut lower = down[a].clone();
                lower.intersect_with(&down[b]);
                let m = greatest(&lower, &down_size).ok_or_else(|| {
                    Error::input(format!("{} and {} have no meet", keys[a], keys[b]))
                })?;
                meet[a * n + b] = m as u16;
                meet[b * n + a] = m as u16;
                if has_joins {
                    let mut upper = up[a].clone();
                    upper.intersect_with(&up[b]);
                    match greatest(&upper, &up_size) {
                        Some(j) => {
                            join[a * n + b] = j as u16;
                            join[b * n + a] = j as u16;
                        }
                        None => has_joins = false,
                    }
                }
            }
        }
        Ok(FiniteLattice {
            keys,
            down,
            meet,
            join: has_joins.then_some(join),
            bottom,
            top,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn key(&self, a: usize) -> &str {
        &self.keys[a]
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.keys.iter().position(|k| k == key)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.down[b][a]
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.len() + b] as usize
    }

    /// Panics on a meet-semilattice without joins.
    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join.as_ref().expect("lattice has joins")[a * self.len() + b] as usize
    }

    pub fn has_joins(&self) -> bool {
        self.join.is_some()
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> Option<usize> {
        self.top
    }

    /// Elements covering the bottom.
    pub fn atoms(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| a != self.bottom && self.down[a].count_ones(..) == 2)
            .collect()
    }

    /// Cover relation `(a, b)` with `a ⋖ b`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for b in 0..self.len() {
            for a in self.down[b].ones() {
                if a == b {
                    continue;
                }
                let between = self.down[b]
                    .ones()
                    .any(|c| c != a && c != b && self.down[c][a]);
                if !between {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// First `(a, b, c)` with `a ≤ c` and `a ∨ (b ∧ c) ≠ (a ∨ b) ∧ c`.
    pub fn non_modular_triple(&self) -> Option<[usize; 3]> {
        let n = self.len();
        for c in 0..n {
            for a in self.down[c].ones() {
                for b in 0..n {
                    if self.join(a, self.meet(b, c)) != self.meet(self.join(a, b), c) {
                        return Some([a, b, c]);
                    }
                }
            }
        }
        None
    }

    pub fn is_modular(&self) -> bool {
        self.has_joins() && self.non_modular_triple().is_none()
    }

    /// First `(a, b, c)` with `a ∧ (b ∨ c) ≠ (a ∧ b) ∨ (a ∧ c)`.
    pub fn non_distributive_triple(&self) -> Option<[usize; 3]> {
        let n = self.len();
        for a in 0..n {
            for b in 0..n {
                for c in b + 1..n {
                    if self.meet(a, self.join(b, c)) != self.join(self.meet(a, b), self.meet(a, c))
                    {
                        return Some([a, b, c]);
                    }
                }
            }
        }
        None
    }

    pub fn is_distributive(&self) -> bool {
        self.has_joins() && self.non_distributive_triple().is_none()
    }

    /// Induced sub-poset on `indices` (in the given order).
    pub fn restrict(&self, indices: &[usize]) -> Result<FiniteLattice> {
        let keys = indices.iter().map(|&i| self.keys[i].clone()).collect();
        FiniteLattice::from_order(keys, |a, b| self.leq(indices[a], indices[b]))
    }

    pub fn to_json(&self) -> Value {
        let n = self.len();
        let table = |t: &Vec<u16>| -> Vec<Vec<u16>> { t.chunks(n).map(|r| r.to_vec()).collect() };
        json!({
            "elements": self.keys,
            "bottom": self.bottom,
            "top": self.top,
            "covers": self.covers(),
            "meet": table(&self.meet),
            "join": self.join.as_ref().map(table),
        })
    }

    /// Hasse diagram in Graphviz syntax, bottom at the bottom.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph lattice {\n  rankdir=BT;\n");
        for (i, k) in self.keys.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label={:?}];", k);
        }
        for (a, b) in self.covers() {
            let _ = writeln!(s, "  n{a} -> n{b};");
        }
        s.push_str("}\n");
        s
    }
}

/// Member of `set` whose down-set (or up-set) is as large as the set itself,
/// i.e. the greatest element of `set` when one exists.
fn greatest(set: &FixedBitSet, size: &[usize]) -> Option<usize> {
    let want = set.count_ones(..);
    set.ones().find(|&m| size[m] == want)
}

/// A unary map on a lattice's index set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Involution(pub Vec<usize>);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum InvolutionFault {
    WrongLength { expected: usize, got: usize },
    NotInvolutive { element: usize },
    NotOrderReversing { lesser: usize, greater: usize },
}

impl Involution {
    pub fn apply(&self, a: usize) -> usize {
        self.0[a]
    }

    pub fn fault(&self, lat: &FiniteLattice) -> Option<InvolutionFault> {
        let n = lat.len();
        if self.0.len() != n || self.0.iter().any(|&x| x >= n) {
            return Some(InvolutionFault::WrongLength {
                expected: n,
                got: self.0.len(),
            });
        }
        if let Some(element) = (0..n).find(|&a| self.0[self.0[a]] != a) {
            return Some(InvolutionFault::NotInvolutive { element });
        }
        for greater in 0..n {
            for lesser in lat.down[greater].ones() {
                if !lat.leq(self.0[greater], self.0[lesser]) {
                    return Some(InvolutionFault::NotOrderReversing { lesser, greater });
                }
            }
        }
        None
    }
}

/// Why a candidate involution was refused by [`boolflip_construct`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Rejection {
    Involution(InvolutionFault),
    /// `α ∧ β = 0` disagrees with `β ≤ α^⊥`.
    Hypothesis {
        alpha: usize,
        beta: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AxiomFault {
    NoJoins,
    NoTop,
    Complement(usize),
    Distributivity([usize; 3]),
    Involution(InvolutionFault),
    DeMorgan(usize, usize),
}

/// A bounded distributive lattice with complementation.
#[derive(Clone, Debug)]
pub struct BooleanAlg {
    lattice: FiniteLattice,
    complement: Vec<usize>,
}

impl BooleanAlg {
    /// Verifies every axiom; a failing axiom is reported as a violation.
    pub fn new(lattice: FiniteLattice, complement: Vec<usize>) -> Result<Self> {
        let alg = BooleanAlg {
            lattice,
            complement,
        };
        match alg.axiom_fault() {
            None => Ok(alg),
            Some(f) => Err(Error::violation(format!("not a Boolean algebra: {f:?}"))),
        }
    }

    /// The subsets of `{0, …, n-1}`, keyed like `{0,2}`, indexed by bitmask.
    pub fn power_set(n: usize) -> Result<Self> {
        if n > 14 {
            return Err(Error::resource(
                "lattice elements",
                SIZE_LIMIT as u64,
                1 << n.min(63),
            ));
        }
        let size = 1usize << n;
        let keys = (0..size).map(|m| subset_key(m, n)).collect();
        let lattice = FiniteLattice::from_order(keys, |a, b| a & !b == 0)?;
        let complement = (0..size).map(|m| !m & (size - 1)).collect();
        BooleanAlg::new(lattice, complement)
    }

    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn bottom(&self) -> usize {
        self.lattice.bottom()
    }

    pub fn top(&self) -> usize {
        self.lattice.top().expect("Boolean algebras are bounded")
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.lattice.meet(a, b)
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.lattice.join(a, b)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.lattice.leq(a, b)
    }

    pub fn complement(&self, a: usize) -> usize {
        self.complement[a]
    }

    pub fn complement_table(&self) -> &[usize] {
        &self.complement
    }

    pub fn atoms(&self) -> Vec<usize> {
        self.lattice.atoms()
    }

    pub fn key(&self, a: usize) -> &str {
        self.lattice.key(a)
    }

    /// Atoms below `a`; in a finite Boolean algebra this determines `a`.
    pub fn atoms_below(&self, a: usize) -> Vec<usize> {
        self.atoms()
            .into_iter()
            .filter(|&t| self.leq(t, a))
            .collect()
    }

    pub fn axiom_fault(&self) -> Option<AxiomFault> {
        let lat = &self.lattice;
        if !lat.has_joins() {
            return Some(AxiomFault::NoJoins);
        }
        let Some(top) = lat.top() else {
            return Some(AxiomFault::NoTop);
        };
        let inv = Involution(self.complement.clone());
        if let Some(f) = inv.fault(lat) {
            return Some(AxiomFault::Involution(f));
        }
        for a in 0..lat.len() {
            let c = self.complement[a];
            if lat.meet(a, c) != lat.bottom() || lat.join(a, c) != top {
                return Some(AxiomFault::Complement(a));
            }
        }
        if let Some(t) = lat.non_distributive_triple() {
            return Some(AxiomFault::Distributivity(t));
        }
        self.de_morgan_fault()
    }

    /// First pair breaking `(a ∧ b)^⊥ = a^⊥ ∨ b^⊥` or its dual.
    pub fn de_morgan_fault(&self) -> Option<AxiomFault> {
        let n = self.len();
        for a in 0..n {
            for b in a..n {
                let (ca, cb) = (self.complement(a), self.complement(b));
                if self.complement(self.meet(a, b)) != self.join(ca, cb)
                    || self.complement(self.join(a, b)) != self.meet(ca, cb)
                {
                    return Some(AxiomFault::DeMorgan(a, b));
                }
            }
        }
        None
    }

    /// Smallest subset containing `seed`, 0 and ∞ closed under ∧, ∨ and ⊥,
    /// as sorted indices.
    pub fn generated_indices(&self, seed: &[usize]) -> Vec<usize> {
        let mut members = FixedBitSet::with_capacity(self.len());
        let mut list = Vec::new();
        let push = |x: usize, members: &mut FixedBitSet, list: &mut Vec<usize>| {
            if !members[x] {
                members.insert(x);
                list.push(x);
            }
        };
        push(self.bottom(), &mut members, &mut list);
        push(self.top(), &mut members, &mut list);
        for &s in seed {
            push(s, &mut members, &mut list);
        }
        let mut k = 0;
        while k < list.len() {
            let x = list[k];
            push(self.complement(x), &mut members, &mut list);
            for i in 0..=k {
                let y = list[i];
                push(self.meet(x, y), &mut members, &mut list);
                push(self.join(x, y), &mut members, &mut list);
            }
            k += 1;
        }
        list.sort_unstable();
        list
    }

    pub fn subalgebra_generated(&self, seed: &[usize]) -> Result<(BooleanAlg, Vec<usize>)> {
        let idx = self.generated_indices(seed);
        let sub = self.restrict(&idx)?;
        Ok((sub, idx))
    }

    /// Induced structure on a subset closed under the operations.
    pub fn restrict(&self, indices: &[usize]) -> Result<BooleanAlg> {
        let lattice = self.lattice.restrict(indices)?;
        let pos = |x: usize| indices.iter().position(|&i| i == x);
        let complement = indices
            .iter()
            .map(|&i| {
                pos(self.complement(i))
                    .ok_or_else(|| Error::input("subset is not closed under complement"))
            })
            .collect::<Result<Vec<_>>>()?;
        BooleanAlg::new(lattice, complement)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.lattice.to_json();
        v["complement"] = json!(self.complement);
        v["atoms"] = json!(self.atoms());
        v
    }
}

fn subset_key(mask: usize, n: usize) -> String {
    let members: Vec<String> = (0..n)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i.to_string())
        .collect();
    format!("{{{}}}", members.join(","))
}

#[derive(Debug, thiserror::Error)]
pub enum BoolflipError {
    #[error("candidate involution rejected: {0:?}")]
    Rejected(Rejection),
    #[error(transparent)]
    Other(#[from] Error),
}

impl From<BoolflipError> for Error {
    fn from(e: BoolflipError) -> Self {
        match e {
            BoolflipError::Rejected(r) => {
                Error::violation(format!("boolflip hypothesis fails: {r:?}"))
            }
            BoolflipError::Other(e) => e,
        }
    }
}

/// Turns a meet-semilattice with 0 and an order-reversing involution `⊥`
/// satisfying `α ∧ β = 0 ⟺ β ≤ α^⊥` into a Boolean algebra with top `0^⊥`,
/// `α ∨ β = (α^⊥ ∧ β^⊥)^⊥` and complement `⊥`.
pub fn boolflip_construct(
    m: &FiniteLattice,
    inv: &Involution,
) -> std::result::Result<BooleanAlg, BoolflipError> {
    if let Some(f) = inv.fault(m) {
        return Err(BoolflipError::Rejected(Rejection::Involution(f)));
    }
    let n = m.len();
    let zero = m.bottom();
    for alpha in 0..n {
        for beta in 0..n {
            let disjoint = m.meet(alpha, beta) == zero;
            if disjoint != m.leq(beta, inv.apply(alpha)) {
                return Err(BoolflipError::Rejected(Rejection::Hypothesis {
                    alpha,
                    beta,
                }));
            }
        }
    }
    let top = inv.apply(zero);
    if m.top() != Some(top) {
        return Err(Error::internal("0^⊥ is not the greatest element").into());
    }
    // Joins exist once the hypothesis holds; the constructor recomputes them
    // from the order and we check they agree with the De Morgan formula.
    let lattice = FiniteLattice::from_order(m.keys.clone(), |a, b| m.leq(a, b))?;
    if !lattice.has_joins() {
        return Err(Error::internal("boolflip output lacks joins").into());
    }
    for a in 0..n {
        for b in 0..n {
            let j = inv.apply(m.meet(inv.apply(a), inv.apply(b)));
            if lattice.join(a, b) != j {
                return Err(Error::internal(format!(
                    "De Morgan join of {} and {} is not the least upper bound",
                    m.key(a),
                    m.key(b)
                ))
                .into());
            }
        }
    }
    let alg = BooleanAlg {
        lattice,
        complement: inv.0.clone(),
    };
    match alg.axiom_fault() {
        None => Ok(alg),
        Some(f) => Err(Error::internal(format!("boolflip output fails an axiom: {f:?}")).into()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomKind {
    /// `∧` and `0`.
    Meet,
    /// `∨` and `∞`.
    Join,
    Full,
    /// Full plus complements.
    Boolean,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomFault {
    pub operation: &'static str,
    pub arguments: Vec<usize>,
}

/// Checks that `f` (indexed by source element) preserves the operations of
/// `kind`. `complement`s are needed only for [`HomKind::Boolean`].
pub fn lattice_hom_check(
    src: &FiniteLattice,
    dst: &FiniteLattice,
    f: &[usize],
    kind: HomKind,
    complements: Option<(&[usize], &[usize])>,
) -> Result<Option<HomFault>> {
    let n = src.len();
    if f.len() != n || f.iter().any(|&x| x >= dst.len()) {
        return Err(Error::input("map is not total on the source"));
    }
    let fault = |operation, arguments| {
        Ok(Some(HomFault {
            operation,
            arguments,
        }))
    };
    let meets = kind != HomKind::Join;
    let joins = kind != HomKind::Meet;
    if meets && f[src.bottom()] != dst.bottom() {
        return fault("bottom", vec![src.bottom()]);
    }
    if joins {
        if !src.has_joins() || !dst.has_joins() {
            return Err(Error::input("join preservation needs joins on both sides"));
        }
        if let (Some(t), Some(dt)) = (src.top(), dst.top()) {
            if f[t] != dt {
                return fault("top", vec![t]);
            }
        }
    }
    for a in 0..n {
        for b in a..n {
            if meets && f[src.meet(a, b)] != dst.meet(f[a], f[b]) {
                return fault("meet", vec![a, b]);
            }
            if joins && f[src.join(a, b)] != dst.join(f[a], f[b]) {
                return fault("join", vec![a, b]);
            }
        }
    }
    if kind == HomKind::Boolean {
        let (sc, dc) =
            complements.ok_or_else(|| Error::input("Boolean check needs complements"))?;
        if let Some(a) = (0..n).find(|&a| f[sc[a]] != dc[f[a]]) {
            return fault("complement", vec![a]);
        }
    }
    Ok(None)
}
