//! Local classes of subgroups of a filtered group, the structure lattice of
//! locally normal classes, quasi-centralisers and C-stability.
//!
//! Two subgroups are locally equivalent when they agree on some chain
//! member; since agreement propagates downwards, the class of `h` is
//! determined by `h ∩ U_k`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtered::{FilteredGroup, Margin};
use crate::lattice::FiniteLattice;
use crate::perm::Perm;
use crate::permgroup::GroupHandle;
use crate::table::{Bits, GroupTable};

/// The local class of a subgroup, represented by its trace on `U_k`.
#[derive(Clone, Debug)]
pub struct LocalClass {
    rep: GroupHandle,
    witness: Option<usize>,
}

impl LocalClass {
    pub fn rep(&self) -> &GroupHandle {
        &self.rep
    }

    /// Smallest `i` with `U_i` normalising the source subgroup, if any.
    pub fn witness(&self) -> Option<usize> {
        self.witness
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_trivial()
    }

    /// `order:generators` with generators in canonical order.
    pub fn key(&self) -> String {
        subgroup_key(&self.rep)
    }
}

impl PartialEq for LocalClass {
    fn eq(&self, other: &Self) -> bool {
        self.rep == other.rep
    }
}

impl Eq for LocalClass {}

impl Serialize for LocalClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LocalClass", 3)?;
        st.serialize_field("order", &self.rep.order().to_string())?;
        st.serialize_field("witness", &self.witness)?;
        let gens: Vec<Vec<usize>> = self.rep.generators().iter().map(Perm::to_vec).collect();
        st.serialize_field("generators", &gens)?;
        st.end()
    }
}

/// Canonical text key of a subgroup: order and sorted generators.
pub fn subgroup_key(h: &GroupHandle) -> String {
    let gens = h
        .canonical_generators()
        .unwrap_or_else(|_| h.generators().to_vec());
    let parts: Vec<String> = gens.iter().map(|g| g.to_string()).collect();
    format!("{}:{}", h.order(), parts.join(" "))
}

#[derive(Clone, Debug, Serialize)]
pub struct LocallyNormalWitness {
    #[serde(skip)]
    pub subgroup: GroupHandle,
    pub level: usize,
}

/// The class of `h`: its trace `h ∩ U_k`.
pub fn canonical_class(fg: &FilteredGroup, h: &GroupHandle) -> Result<LocalClass> {
    ensure_inside(fg, h)?;
    let rep = fg.cut(h, fg.depth())?;
    let witness = is_locally_normal(fg, h)?.map(|w| w.level);
    Ok(LocalClass { rep, witness })
}

/// Smallest `i` such that `U_i` normalises `h`.
pub fn is_locally_normal(
    fg: &FilteredGroup,
    h: &GroupHandle,
) -> Result<Option<LocallyNormalWitness>> {
    ensure_inside(fg, h)?;
    Ok((0..=fg.depth())
        .find(|&i| fg.level(i).normalises(h))
        .map(|level| LocallyNormalWitness {
            subgroup: h.clone(),
            level,
        }))
}

fn ensure_inside(fg: &FilteredGroup, h: &GroupHandle) -> Result<()> {
    if h.is_subgroup_of(fg.ambient()) {
        Ok(())
    } else {
        Err(Error::input("subgroup does not lie in the ambient group"))
    }
}

/// Locally normal classes with witness at most some level, ordered by
/// (order, key), with their lattice structure.
pub struct LnLattice {
    table: Arc<GroupTable>,
    bits: Vec<Bits>,
    classes: Vec<LocalClass>,
    lattice: FiniteLattice,
    max_witness: usize,
    warnings: Vec<String>,
}

/// Default cap on the number of classes enumerated.
pub const DEFAULT_CLASS_BUDGET: usize = crate::lattice::SIZE_LIMIT;

/// All classes whose rep `L ⊆ U_k` is normalised by `U_{max_witness}`.
///
/// Every such `L` is the join of the invariant closures of its cyclic
/// subgroups, so a breadth-first search over joins of those closures
/// reaches all of them.
pub fn ln_lattice(fg: &FilteredGroup, max_witness: usize, budget: usize) -> Result<LnLattice> {
    if max_witness > fg.depth() {
        return Err(Error::input(format!(
            "max witness {max_witness} exceeds chain depth {}",
            fg.depth()
        )));
    }
    let table = Arc::new(GroupTable::new(fg.deepest())?);
    let actions = conj_actions(&table, fg.level(max_witness))?;

    let mut seen: HashMap<Bits, ()> = HashMap::new();
    let mut atoms: Vec<Bits> = Vec::new();
    for x in 1..table.len() {
        let c = table.invariant_closure(&[x], &actions);
        if !seen.contains_key(&c) {
            seen.insert(c.clone(), ());
            atoms.push(c);
        }
    }
    let mut found: Vec<Bits> = vec![table.trivial_bits()];
    let mut index: HashMap<Bits, usize> = HashMap::new();
    index.insert(table.trivial_bits(), 0);
    let mut k = 0;
    while k < found.len() {
        let x = found[k].clone();
        for a in &atoms {
            if a.is_subset(&x) {
                continue;
            }
            let j = table.join(&x, a);
            if !index.contains_key(&j) {
                if found.len() >= budget {
                    return Err(Error::resource(
                        "locally normal classes",
                        budget as u64,
                        found.len() as u64,
                    ));
                }
                index.insert(j.clone(), found.len());
                found.push(j);
            }
        }
        k += 1;
    }

    let level_actions: Vec<Vec<Vec<u32>>> = (0..=max_witness)
        .map(|i| conj_actions(&table, fg.level(i)))
        .collect::<Result<_>>()?;
    let mut classes: Vec<(usize, String, Bits, LocalClass)> = found
        .into_iter()
        .map(|b| {
            let rep = table.handle(&b);
            let witness = level_actions
                .iter()
                .position(|acts| table.is_invariant(&b, acts));
            let class = LocalClass { rep, witness };
            (GroupTable::order_of(&b), class.key(), b, class)
        })
        .collect();
    classes.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let keys = classes.iter().map(|c| c.1.clone()).collect();
    let bits: Vec<Bits> = classes.iter().map(|c| c.2.clone()).collect();
    let lattice = FiniteLattice::from_order(keys, |a, b| bits[a].is_subset(&bits[b]))?;
    let mut warnings = Vec::new();
    if fg.is_degenerate() {
        warnings.push(degenerate_warning());
    }
    Ok(LnLattice {
        table,
        bits,
        classes: classes.into_iter().map(|c| c.3).collect(),
        lattice,
        max_witness,
        warnings,
    })
}

pub(crate) fn degenerate_warning() -> String {
    "deepest chain member is trivial: every class collapses to 0".to_string()
}

fn conj_actions(table: &GroupTable, by: &GroupHandle) -> Result<Vec<Vec<u32>>> {
    by.generators()
        .iter()
        .map(|g| table.conj_table(g))
        .collect()
}

impl LnLattice {
    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn classes(&self) -> &[LocalClass] {
        &self.classes
    }

    pub fn class(&self, a: usize) -> &LocalClass {
        &self.classes[a]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn max_witness(&self) -> usize {
        self.max_witness
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Index of the class with this rep, if present.
    pub fn find(&self, rep: &GroupHandle) -> Option<usize> {
        let b = self.table.bits_of(rep).ok()?;
        self.bits.iter().position(|x| *x == b)
    }

    pub fn find_bits(&self, b: &Bits) -> Option<usize> {
        self.bits.iter().position(|x| x == b)
    }

    pub fn rep_bits(&self, a: usize) -> &Bits {
        &self.bits[a]
    }

    pub fn table(&self) -> &GroupTable {
        &self.table
    }

    /// First pair whose lattice meet/join differs from the intersection /
    /// product of reps.
    pub fn operation_mismatch(&self) -> Option<(usize, usize)> {
        let n = self.len();
        for a in 0..n {
            for b in a..n {
                let mut i = self.bits[a].clone();
                i.intersect_with(&self.bits[b]);
                if self.bits[self.lattice.meet(a, b)] != i {
                    return Some((a, b));
                }
                let p = self.table.join(&self.bits[a], &self.bits[b]);
                if self.bits[self.lattice.join(a, b)] != p {
                    return Some((a, b));
                }
            }
        }
        None
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.lattice.to_json();
        v["classes"] = serde_json::to_value(&self.classes).expect("classes serialise");
        v["max_witness"] = self.max_witness.into();
        v["warnings"] = serde_json::to_value(&self.warnings).expect("strings serialise");
        v
    }
}

/// Classes whose rep is invariant under conjugation by the whole ambient
/// group.
pub fn fixed_classes(fg: &FilteredGroup, lat: &LnLattice) -> Result<Vec<usize>> {
    let actions = conj_actions(&lat.table, fg.ambient())?;
    Ok((0..lat.len())
        .filter(|&a| lat.table.is_invariant(&lat.bits[a], &actions))
        .collect())
}

/// Maps classes of a shallower truncation to the deeper one by
/// `rep ↦ rep ∩ U_k`; asserts the map preserves meets.
pub fn project_to_depth(shallow: &LnLattice, deep: &LnLattice) -> Result<Vec<usize>> {
    let deep_u = deep.table.group();
    let map = (0..shallow.len())
        .map(|a| {
            let r = shallow.classes[a].rep.intersection(deep_u)?;
            deep.find(&r).ok_or_else(|| {
                Error::precondition("projected rep is not a class of the deeper lattice")
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (sl, dl) = (&shallow.lattice, &deep.lattice);
    for a in 0..shallow.len() {
        for b in a..shallow.len() {
            if map[sl.meet(a, b)] != dl.meet(map[a], map[b]) {
                return Err(Error::internal("depth projection does not preserve meets"));
            }
        }
    }
    Ok(map)
}

/// `C_G(U_i)`.
pub fn quasi_centre_at(fg: &FilteredGroup, i: usize) -> Result<GroupHandle> {
    if i > fg.depth() {
        return Err(Error::input(format!("level {i} exceeds chain depth")));
    }
    fg.ambient().centraliser(fg.level(i))
}

#[derive(Clone, Debug, Serialize)]
pub struct QzVerdict {
    pub holds: bool,
    /// `j ≥ i`: the predicate is outside its intended range and only
    /// reported, not trusted.
    pub degenerate: bool,
    /// An element outside `U_j` centralising `U_i`, when one exists.
    pub witness: Option<Vec<usize>>,
}

/// Whether no element outside `U_j` centralises `U_i`.
pub fn qz_trivial_at(fg: &FilteredGroup, i: usize, j: usize) -> Result<QzVerdict> {
    let qz = quasi_centre_at(fg, i)?;
    if j > fg.depth() {
        return Err(Error::input(format!("level {j} exceeds chain depth")));
    }
    let uj = fg.level(j);
    let witness = qz
        .generators()
        .iter()
        .find(|g| !uj.contains(g))
        .map(Perm::to_vec);
    Ok(QzVerdict {
        holds: witness.is_none(),
        degenerate: j >= i,
        witness,
    })
}

/// `QC_inside(h) = C_inside(h ∩ U_k)`.
pub fn quasi_centraliser(
    fg: &FilteredGroup,
    h: &GroupHandle,
    inside: &GroupHandle,
) -> Result<GroupHandle> {
    ensure_inside(fg, h)?;
    ensure_inside(fg, inside)?;
    let qc = inside.centraliser(&fg.cut(h, fg.depth())?)?;
    debug_assert!((0..=fg.depth()).all(|i| {
        let hi = fg.cut(h, i).unwrap();
        inside
            .centraliser(&fg.cut(&hi, fg.depth()).unwrap())
            .unwrap()
            == qc
    }));
    Ok(qc)
}

/// Centraliser calculus with a margin `(i, j)`: centralisers are taken in
/// `U_j` and subgroups are compared through their window `(X ∩ U_j)·U_k`,
/// which forgets what lives only in the deepest member. At a finite depth
/// `U_k` is typically abelian and every centraliser picks up spurious
/// bottom-layer elements; the window discards exactly those.
#[derive(Clone, Debug)]
pub struct MarginView<'a> {
    fg: &'a FilteredGroup,
    margin: Margin,
}

impl<'a> MarginView<'a> {
    pub fn new(fg: &'a FilteredGroup, margin: Margin) -> Result<Self> {
        fg.check_margin(margin)?;
        Ok(MarginView { fg, margin })
    }

    pub fn filtered(&self) -> &FilteredGroup {
        self.fg
    }

    pub fn margin(&self) -> Margin {
        self.margin
    }

    /// `U_j`.
    pub fn visible(&self) -> &GroupHandle {
        self.fg.level(self.margin.visible)
    }

    pub fn window(&self, x: &GroupHandle) -> Result<GroupHandle> {
        x.intersection(self.visible())?.join(self.fg.deepest())
    }

    /// `(X ∩ U_level)·U_k`.
    pub fn window_at(&self, x: &GroupHandle, level: usize) -> Result<GroupHandle> {
        x.intersection(self.fg.level(level))?
            .join(self.fg.deepest())
    }

    /// Deepest cut that still leaves something above `U_k`, within the
    /// margin: `max(j, min(i, k - 1))`.
    pub fn comparison_level(&self) -> usize {
        let k = self.fg.depth();
        self.margin
            .visible
            .max(self.margin.deep.min(k.saturating_sub(1)))
    }

    pub fn same_window(&self, x: &GroupHandle, y: &GroupHandle) -> Result<bool> {
        Ok(self.window(x)? == self.window(y)?)
    }

    /// Window equal to `U_k`: nothing visible.
    pub fn is_null(&self, x: &GroupHandle) -> Result<bool> {
        Ok(x.intersection(self.visible())?
            .is_subgroup_of(self.fg.deepest()))
    }

    /// `C_{U_j}(X ∩ U_j)`.
    pub fn perp(&self, x: &GroupHandle) -> Result<GroupHandle> {
        let uj = self.visible();
        uj.centraliser(&x.intersection(uj)?)
    }

    /// `perp` computed from every deeper cut `X ∩ U_b` (`j ≤ b ≤ i`) that
    /// keeps the window of `X` gives the same window.
    pub fn perp_is_stable(&self, x: &GroupHandle) -> Result<bool> {
        let w = self.window(x)?;
        let p = self.window(&self.perp(x)?)?;
        for b in self.margin.visible..=self.margin.deep {
            let xb = self.fg.cut(x, b)?;
            if self.window(&xb)? == w && self.window(&self.perp(&xb)?)? != p {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Truncated C-stability of `h`: `QC(h) ∩ QC(C(h))` is trivial, cross-checked
/// against `QC(h·C(h))`.
///
/// With a nonzero margin width the check runs in the margin view at the
/// filtration's default margin; otherwise it is the literal test on `U_k`.
pub fn c_stable_check(fg: &FilteredGroup, h: &GroupHandle) -> Result<bool> {
    if fg.margin() == 0 {
        c_stable_literal(fg, h)
    } else {
        c_stable_at(fg, h, fg.default_margin())
    }
}

/// Literal form: `C_G(h ∩ U_k) ∩ C_G(C_G(h) ∩ U_k) ∩ U_k = 1`.
pub fn c_stable_literal(fg: &FilteredGroup, h: &GroupHandle) -> Result<bool> {
    ensure_inside(fg, h)?;
    let g = fg.ambient();
    let uk = fg.deepest();
    let qc = |x: &GroupHandle| quasi_centraliser(fg, x, g);
    let ch = g.centraliser(h)?;
    let def = qc(h)?.intersection(&qc(&ch)?)?.intersection(uk)?;
    let via_product = qc(&h.join(&ch)?)?.intersection(uk)?;
    if def.is_trivial() != via_product.is_trivial() {
        let k = fg.depth();
        return Err(Error::artefact(
            (k, k),
            "the two C-stability formulas disagree at this depth",
        ));
    }
    Ok(def.is_trivial())
}

/// Margin form: the window of `perp(h) ∩ perp(perp(h))` is null, and so is
/// the window of `perp(h·perp(h))`.
pub fn c_stable_at(fg: &FilteredGroup, h: &GroupHandle, margin: Margin) -> Result<bool> {
    ensure_inside(fg, h)?;
    let mv = MarginView::new(fg, margin)?;
    let hj = h.intersection(mv.visible())?;
    let p = mv.perp(&hj)?;
    let def = p.intersection(&mv.perp(&p)?)?;
    let via_product = mv.perp(&hj.join(&p)?)?;
    let (a, b) = (mv.is_null(&def)?, mv.is_null(&via_product)?);
    if a != b {
        return Err(Error::artefact(
            margin.pair(),
            "the two C-stability formulas disagree in the margin view",
        ));
    }
    Ok(a)
}
