//! The quasi-hypercentre and the [A]-regular radical of a filtered group,
//! found by exhaustive search over normal subgroups and cross-checked
//! against the quasi-centraliser construction.
//!
//! [A]-membership is never decided directly: semisimplicity is read off
//! the margin predicates (trivial quasi-centre, no visible abelian
//! locally normal subgroup).

use serde::Serialize;

use crate::centlat::{screen, Screening};
use crate::error::{Error, Result};
use crate::filtered::{FilteredGroup, Margin};
use crate::filtration::{qz_trivial_at, subgroup_key, MarginView};
use crate::perm::Perm;
use crate::permgroup::GroupHandle;
use crate::table::GroupTable;

/// Largest quotient degree realised by the coset action.
pub const QUOTIENT_DEGREE_LIMIT: usize = crate::perm::MAX_DEGREE;

/// `G/N` with chain `(U_i·N)/N`, acting on the cosets of `N`.
pub struct QuotientFiltered {
    pub kernel: GroupHandle,
    pub quotient: FilteredGroup,
    table: GroupTable,
    coset: Vec<u32>,
    reps: Vec<usize>,
}

impl QuotientFiltered {
    pub fn new(base: &FilteredGroup, kernel: &GroupHandle) -> Result<Self> {
        let g = base.ambient();
        if !kernel.is_subgroup_of(g) || !kernel.is_normal_in(g) {
            return Err(Error::input("kernel is not a normal subgroup"));
        }
        let index = g.order() / kernel.order();
        if index > QUOTIENT_DEGREE_LIMIT as u128 {
            return Err(Error::resource(
                "quotient degree",
                QUOTIENT_DEGREE_LIMIT as u64,
                index.min(u64::MAX as u128) as u64,
            ));
        }
        let table = GroupTable::new(g)?;
        let kbits = table.bits_of(kernel)?;
        let kidx: Vec<usize> = kbits.ones().collect();
        let mut coset = vec![u32::MAX; table.len()];
        let mut reps = Vec::new();
        for x in 0..table.len() {
            if coset[x] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(x);
            for &n in &kidx {
                coset[table.mul(n, x)] = id;
            }
        }
        let mut q = QuotientFiltered {
            kernel: kernel.clone(),
            quotient: FilteredGroup::constant(GroupHandle::trivial(1), 0),
            table,
            coset,
            reps,
        };
        let chain = base
            .chain()
            .iter()
            .map(|u| {
                let gens = u.generators().iter().map(|x| q.image(x)).collect();
                GroupHandle::new(q.reps.len(), gens)
            })
            .collect::<Result<Vec<_>>>()?;
        q.quotient = FilteredGroup::with_margin(chain, base.margin())?;
        Ok(q)
    }

    pub fn index(&self) -> usize {
        self.reps.len()
    }

    /// The coset permutation `Nx ↦ Nxg`.
    pub fn image(&self, g: &Perm) -> Perm {
        let gi = self
            .table
            .index_of(g)
            .expect("element of the ambient group");
        let images = self
            .reps
            .iter()
            .map(|&r| self.coset[self.table.mul(r, gi)] as usize)
            .collect();
        Perm::from_images(images).expect("right multiplication permutes cosets")
    }

    /// Full preimage of a subgroup of the quotient.
    pub fn preimage(&self, h: &GroupHandle) -> Result<GroupHandle> {
        let mut gens = self.kernel.generators().to_vec();
        for y in h.generators() {
            let target = y.apply(0);
            // any element mapping the identity coset to `target` with image y
            let x = (0..self.table.len())
                .filter(|&x| self.coset[x] as usize == target)
                .map(|x| self.table.element(x).clone())
                .find(|x| &self.image(x) == y)
                .ok_or_else(|| Error::internal("quotient element without preimage"))?;
            gens.push(x);
        }
        GroupHandle::new(self.kernel.degree(), gens)
    }
}

fn invariant_under(x: &GroupHandle, s: &Perm) -> bool {
    x.generators()
        .iter()
        .all(|y| x.contains(&y.conjugate_by(s)))
}

fn shifted(m: Margin, h: usize) -> Result<Margin> {
    if h > m.visible {
        return Err(Error::input(format!(
            "open subgroup U_{h} lies below the visible level {}",
            m.visible
        )));
    }
    Ok(Margin::new(m.deep - h, m.visible - h))
}

/// `{g : [g, K ∩ U_level] ⊆ L}`; `K`, `L` must be normal with `L ≤ K`.
pub fn qc_modulo_at(
    fg: &FilteredGroup,
    k: &GroupHandle,
    l: &GroupHandle,
    level: usize,
) -> Result<GroupHandle> {
    let g = fg.ambient();
    if !l.is_subgroup_of(k) {
        return Err(Error::precondition("L is not contained in K"));
    }
    for (name, x) in [("K", k), ("L", l)] {
        if let Some(gen) = g.generators().iter().find(|s| !invariant_under(x, s)) {
            return Err(Error::precondition(format!(
                "{name} is not invariant under {gen}"
            )));
        }
    }
    let kc = fg.cut(k, level)?;
    let kgens = kc.generators().to_vec();
    let out = g.subgroup_where(|x| {
        kgens
            .iter()
            .all(|y| l.contains(&x.inverse().then(&y.inverse()).then(x).then(y)))
    })?;
    if !out.is_normal_in(g) || !l.is_subgroup_of(&out) {
        return Err(Error::internal(
            "quasi-centraliser modulo L is not normal over L",
        ));
    }
    Ok(out)
}

/// Quasi-centraliser of `K` modulo `L` at the deepest chain member.
pub fn qc_modulo(fg: &FilteredGroup, k: &GroupHandle, l: &GroupHandle) -> Result<GroupHandle> {
    qc_modulo_at(fg, k, l, fg.depth())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QzMode {
    Exhaustive,
    QcRoute,
}

/// Budget for the normal-subgroup enumeration (group order).
pub const DEFAULT_RADICAL_BUDGET: u128 = 1 << 16;

fn margin_qz_trivial(fg: &FilteredGroup, m: Margin) -> Result<bool> {
    Ok(qz_trivial_at(fg, m.deep, m.visible)?.holds)
}

/// Outcome of an exhaustive radical search over the normal subgroups.
#[derive(Clone, Debug)]
pub struct RadicalSearch {
    /// Intersection of every normal subgroup whose quotient passes.
    pub result: GroupHandle,
    /// The inclusion-minimal passing normal subgroups.
    pub minimal: Vec<GroupHandle>,
    /// Whether the quotient by `result` passes again. Fails exactly when
    /// `minimal` has more than one member.
    pub requotient_passes: bool,
}

impl RadicalSearch {
    pub fn unique(&self) -> bool {
        self.minimal.len() == 1
    }
}

/// Exhaustive search for the least normal subgroup whose quotient passes
/// `pred`, short-circuiting when the group itself passes.
pub fn radical_search(
    fg: &FilteredGroup,
    budget: u128,
    pred: &dyn Fn(&FilteredGroup) -> Result<bool>,
) -> Result<RadicalSearch> {
    let g = fg.ambient();
    if pred(fg)? {
        let one = GroupHandle::trivial(g.degree());
        return Ok(RadicalSearch {
            result: one.clone(),
            minimal: vec![one],
            requotient_passes: true,
        });
    }
    let normals = g.normal_subgroups(budget).map_err(|e| match e {
        Error::Resource { .. } => Error::resource(
            "normal subgroup enumeration; try the qc route",
            budget.min(u64::MAX as u128) as u64,
            g.order().min(u64::MAX as u128) as u64,
        ),
        e => e,
    })?;
    let mut passing = Vec::new();
    for n in normals.iter().filter(|n| !n.is_trivial()) {
        let q = QuotientFiltered::new(fg, n)?;
        if pred(&q.quotient)? {
            passing.push(n.clone());
        }
    }
    let mut acc = g.clone();
    for n in &passing {
        if !acc.is_subgroup_of(n) {
            acc = acc.intersection(n)?;
        }
    }
    let minimal: Vec<GroupHandle> = passing
        .iter()
        .filter(|n| {
            !passing
                .iter()
                .any(|m| m.order() < n.order() && m.is_subgroup_of(n))
        })
        .cloned()
        .collect();
    let requotient_passes = acc.is_trivial() || pred(&QuotientFiltered::new(fg, &acc)?.quotient)?;
    Ok(RadicalSearch {
        result: acc,
        minimal,
        requotient_passes,
    })
}

/// Exhaustive quasi-hypercentre search, without the uniqueness assertion.
pub fn qz_hypercentre_search(
    fg: &FilteredGroup,
    margin: Margin,
    budget: u128,
) -> Result<RadicalSearch> {
    fg.check_margin(margin)?;
    radical_search(fg, budget, &|f| margin_qz_trivial(f, margin))
}

/// Exhaustive regular-radical search, without the uniqueness assertion.
pub fn regular_radical_search(
    fg: &FilteredGroup,
    margin: Margin,
    budget: u128,
) -> Result<RadicalSearch> {
    fg.check_margin(margin)?;
    radical_search(fg, budget, &|f| Ok(screen(f, margin)?.passed()))
}

fn non_unique(margin: Margin, what: &str, s: &RadicalSearch) -> Error {
    Error::artefact(
        margin.pair(),
        format!(
            "quotient by the {what} fails again: {} incomparable minimal normal subgroups, e.g. {}",
            s.minimal.len(),
            s.minimal
                .iter()
                .take(2)
                .map(subgroup_key)
                .collect::<Vec<_>>()
                .join(" and ")
        ),
    )
}

/// The quasi-hypercentre at a margin: the least normal subgroup whose
/// quotient has margin-trivial quasi-centre.
pub fn qz_hypercentre(
    fg: &FilteredGroup,
    margin: Margin,
    mode: QzMode,
    budget: u128,
) -> Result<GroupHandle> {
    fg.check_margin(margin)?;
    let exhaustive = || -> Result<GroupHandle> {
        let s = radical_search(fg, budget, &|f| margin_qz_trivial(f, margin))?;
        if !s.requotient_passes {
            return Err(non_unique(margin, "quasi-hypercentre", &s));
        }
        Ok(s.result)
    };
    match mode {
        QzMode::Exhaustive => exhaustive(),
        QzMode::QcRoute => {
            // R = QZ∞(U_j) with the inherited chain, then QC_G(U_j / R)
            let j = margin.visible;
            let h = fg.restrict_to_level(j)?;
            let r = qz_hypercentre(&h, shifted(margin, j)?, QzMode::Exhaustive, budget)?;
            let k = qc_modulo_at(fg, fg.level(j), &r, margin.deep)?;
            if fg.ambient().order() <= budget {
                let q = exhaustive()?;
                let mv = MarginView::new(fg, margin)?;
                if !mv.same_window(&k, &q)? {
                    return Err(Error::artefact(
                        margin.pair(),
                        format!(
                            "qc route gives {} where the exhaustive search gives {}",
                            subgroup_key(&k),
                            subgroup_key(&q)
                        ),
                    ));
                }
            }
            Ok(k)
        }
    }
}

/// [A]-semisimplicity at the margin, with its witnesses.
pub fn c_semisimple_check(fg: &FilteredGroup, margin: Margin) -> Result<Screening> {
    screen(fg, margin)
}

/// The [A]-regular radical at a margin: the least normal subgroup with
/// [A]-semisimple quotient. Checked to contain the quasi-hypercentre.
pub fn regular_radical(fg: &FilteredGroup, margin: Margin, budget: u128) -> Result<GroupHandle> {
    fg.check_margin(margin)?;
    let s = regular_radical_search(fg, margin, budget)?;
    if !s.requotient_passes {
        return Err(non_unique(margin, "regular radical", &s));
    }
    let r = s.result;
    let q = qz_hypercentre(fg, margin, QzMode::Exhaustive, budget)?;
    if !q.is_subgroup_of(&r) {
        return Err(Error::artefact(
            margin.pair(),
            "quasi-hypercentre is not inside the regular radical",
        ));
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub open_index: usize,
    /// `QZ∞(U_h) = QZ∞(G) ∩ U_h`.
    pub qz_literal: bool,
    pub qz_windowed: bool,
    /// `R(U_h) = R(G) ∩ U_h`.
    pub radical_literal: bool,
    pub radical_windowed: bool,
}

impl StabilityReport {
    /// Literal mismatches with matching windows are truncation artefacts.
    pub fn holds(&self) -> bool {
        self.qz_windowed && self.radical_windowed
    }
}

/// Both radicals of `G` and of `U_h` (inherited chain, shifted margin).
pub fn stability_checks(
    fg: &FilteredGroup,
    margin: Margin,
    h: usize,
    budget: u128,
) -> Result<StabilityReport> {
    // at h = visible the shifted margin sees nothing and both radicals of
    // U_h are trivial by construction
    if h == 0 || h >= margin.visible {
        return Err(Error::precondition(format!(
            "open index {h} must lie strictly between 0 and the visible level {}",
            margin.visible
        )));
    }
    let sub = fg.restrict_to_level(h)?;
    let sm = shifted(margin, h)?;
    let uh = fg.level(h);
    let mv = MarginView::new(fg, margin)?;
    let qg = qz_hypercentre(fg, margin, QzMode::Exhaustive, budget)?.intersection(uh)?;
    let qh = qz_hypercentre(&sub, sm, QzMode::Exhaustive, budget)?;
    let rg = regular_radical(fg, margin, budget)?.intersection(uh)?;
    let rh = regular_radical(&sub, sm, budget)?;
    Ok(StabilityReport {
        open_index: h,
        qz_literal: qg == qh,
        qz_windowed: mv.same_window(&qg, &qh)?,
        radical_literal: rg == rh,
        radical_windowed: mv.same_window(&rg, &rh)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalRepresentative {
    pub closure: Vec<Vec<usize>>,
    pub closure_order: u128,
    /// `|M ∩ U_k : l ∩ U_k|`.
    pub deep_index: u128,
    /// `|M : l|`.
    pub index: u128,
    /// Least chain level normalising `l ∩ U_k`.
    pub normalising_level: Option<usize>,
}

/// Normal closure `M` of a commensurated locally normal `l`, with the
/// index of `l` in it.
pub fn normal_representative(fg: &FilteredGroup, l: &GroupHandle) -> Result<NormalRepresentative> {
    let g = fg.ambient();
    if !l.is_subgroup_of(g) {
        return Err(Error::input("subgroup is not inside the ambient group"));
    }
    let k = fg.depth();
    let deep = fg.cut(l, k)?;
    for s in g.generators() {
        let conj = l.conjugate(s)?;
        if fg.cut(&conj, k)? != deep {
            return Err(Error::precondition(format!(
                "not commensurated: {s} moves the deep part"
            )));
        }
    }
    let normalising_level = (0..=k).find(|&i| {
        fg.level(i)
            .generators()
            .iter()
            .all(|u| invariant_under(&deep, u))
    });
    if normalising_level.is_none() {
        return Err(Error::precondition(
            "not locally normal: no chain member normalises it",
        ));
    }
    let m = g.normal_closure(l.generators())?;
    let md = fg.cut(&m, k)?;
    Ok(NormalRepresentative {
        closure: m.generators().iter().map(Perm::to_vec).collect(),
        closure_order: m.order(),
        deep_index: md.order() / deep.order().max(1),
        index: m.order() / l.order(),
        normalising_level,
    })
}
