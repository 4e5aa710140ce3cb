//! Direct-product structure of centreless groups and the local
//! decomposition algebra of a filtered group.
//!
//! In a centreless group every direct factor `K` satisfies `K = C(C(K))`,
//! so direct factors are found among the centraliser-closed normal
//! subgroups. Those are exactly the intersections of the centralisers
//! `C(ncl(x))` of normal closures of single elements, which keeps the
//! search far below a full normal-subgroup enumeration.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtration::{subgroup_key, MarginView};
use crate::lattice::{boolflip_construct, BooleanAlg, FiniteLattice, Involution};
use crate::perm::Perm;
use crate::permgroup::GroupHandle;
use crate::table::{Bits, GroupTable};

/// `h` as an internal direct product of indecomposable factors.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub of: GroupHandle,
    pub factors: Vec<GroupHandle>,
}

impl Decomposition {
    /// The `2^n` products of subsets of the factors, ordered by subset mask.
    pub fn all_direct_factors(&self) -> Result<Vec<GroupHandle>> {
        let n = self.factors.len();
        if n > 16 {
            return Err(Error::resource(
                "direct factors",
                1 << 16,
                1u64 << n.min(63),
            ));
        }
        (0..1usize << n)
            .map(|mask| {
                let mut acc = GroupHandle::trivial(self.of.degree());
                for (t, f) in self.factors.iter().enumerate() {
                    if mask >> t & 1 == 1 {
                        acc = acc.join(f)?;
                    }
                }
                Ok(acc)
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gens = |h: &GroupHandle| -> Vec<Vec<usize>> {
            h.generators().iter().map(Perm::to_vec).collect()
        };
        serde_json::json!({
            "order": self.of.order().to_string(),
            "factors": self.factors.iter().map(|f| serde_json::json!({
                "order": f.order().to_string(),
                "generators": gens(f),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Which direct-factor condition fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FactorFault {
    NotSubgroup,
    NotNormal,
    /// `K·C_h(K) ≠ h`.
    ProductTooSmall,
    /// `K ∩ C_h(K) ≠ 1`.
    NontrivialIntersection,
}

pub fn factor_fault(h: &GroupHandle, k: &GroupHandle) -> Result<Option<FactorFault>> {
    if !k.is_subgroup_of(h) {
        return Ok(Some(FactorFault::NotSubgroup));
    }
    if !h.normalises(k) {
        return Ok(Some(FactorFault::NotNormal));
    }
    let c = h.centraliser(k)?;
    if !k.intersection(&c)?.is_trivial() {
        return Ok(Some(FactorFault::NontrivialIntersection));
    }
    if k.order() * c.order() != h.order() {
        return Ok(Some(FactorFault::ProductTooSmall));
    }
    Ok(None)
}

fn require_centreless(h: &GroupHandle) -> Result<()> {
    if h.centre()?.is_trivial() {
        Ok(())
    } else {
        Err(Error::precondition(
            "group has a nontrivial centre; direct factors need not be unique",
        ))
    }
}

/// The unique direct complement `C_h(kf)` of a direct factor.
pub fn direct_complement(h: &GroupHandle, kf: &GroupHandle) -> Result<GroupHandle> {
    require_centreless(h)?;
    if let Some(f) = factor_fault(h, kf)? {
        return Err(Error::violation(format!("not a direct factor: {f:?}")));
    }
    let c = h.centraliser(kf)?;
    if &h.centraliser(&c)? != kf {
        return Err(Error::internal(
            "direct factor differs from its double centraliser",
        ));
    }
    Ok(c)
}

/// Centraliser-closed normal subgroups of the tabled group, as bitsets,
/// sorted by (order, first element).
pub fn closed_normal_subgroups(t: &GroupTable) -> Vec<Bits> {
    let full = t.full_bits();
    let mut seen: HashMap<Bits, ()> = HashMap::new();
    let mut atoms = Vec::new();
    for x in t.class_representatives() {
        let c = t.centraliser(&full, &t.normal_closure(x));
        if seen.insert(c.clone(), ()).is_none() {
            atoms.push(c);
        }
    }
    let mut all = atoms.clone();
    let mut k = 0;
    while k < all.len() {
        for a in &atoms {
            let mut m = all[k].clone();
            m.intersect_with(a);
            if seen.insert(m.clone(), ()).is_none() {
                all.push(m);
            }
        }
        k += 1;
    }
    all.sort_by_key(|b| (b.count_ones(..), b.ones().collect::<Vec<_>>()));
    all
}

/// All direct factors of a centreless group.
pub fn direct_factors(h: &GroupHandle) -> Result<Vec<GroupHandle>> {
    require_centreless(h)?;
    let t = GroupTable::new(h)?;
    let full = t.full_bits();
    let n = t.len();
    Ok(closed_normal_subgroups(&t)
        .into_iter()
        .filter(|b| {
            let c = t.centraliser(&full, b);
            let mut i = b.clone();
            i.intersect_with(&c);
            i.count_ones(..) == 1 && b.count_ones(..) * c.count_ones(..) == n
        })
        .map(|b| t.handle(&b))
        .collect())
}

/// The indecomposable direct factors: the minimal nontrivial direct
/// factors.
pub fn krs_decompose(h: &GroupHandle) -> Result<Decomposition> {
    let all = direct_factors(h)?;
    let factors: Vec<GroupHandle> = all
        .iter()
        .filter(|f| {
            !f.is_trivial()
                && !all
                    .iter()
                    .any(|g| !g.is_trivial() && g.order() < f.order() && g.is_subgroup_of(f))
        })
        .cloned()
        .collect();
    let d = Decomposition {
        of: h.clone(),
        factors,
    };
    let expected = 1usize << d.factors.len();
    if all.len() != expected {
        return Err(Error::internal(format!(
            "{} direct factors but {} indecomposables",
            all.len(),
            d.factors.len()
        )));
    }
    Ok(d)
}

/// `(h ∩ kf, C_h(kf))` for a double-centraliser-closed `h ⊆ g`.
pub fn dirfac_split(
    g: &GroupHandle,
    kf: &GroupHandle,
    h: &GroupHandle,
) -> Result<(GroupHandle, GroupHandle)> {
    require_centreless(g)?;
    if let Some(f) = factor_fault(g, kf)? {
        return Err(Error::violation(format!("not a direct factor: {f:?}")));
    }
    if !h.is_subgroup_of(g) || &g.centraliser(&g.centraliser(h)?)? != h {
        return Err(Error::precondition(
            "subgroup is not its own double centraliser",
        ));
    }
    let a = h.intersection(kf)?;
    let b = h.centraliser(kf)?;
    if !a.intersection(&b)?.is_trivial() || a.order() * b.order() != h.order() {
        return Err(Error::internal(
            "split pieces do not multiply back to the subgroup",
        ));
    }
    Ok((a, b))
}

/// The local decomposition algebra below a source subgroup.
pub struct LdAlgebra {
    pub algebra: BooleanAlg,
    /// Window of each element.
    pub windows: Vec<GroupHandle>,
    /// A direct factor realising each element.
    pub sources: Vec<GroupHandle>,
    pub level: usize,
}

impl LdAlgebra {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn keys(&self) -> Vec<String> {
        self.windows.iter().map(subgroup_key).collect()
    }

    pub fn contains_window(&self, w: &GroupHandle) -> bool {
        self.windows.iter().any(|x| x == w)
    }
}

/// Classes of direct factors of `H = alpha ∩ U_level`, up to window, with
/// the complement `β ↦ [C_H(β)]`, assembled by the boolflip construction.
///
/// A factor here is a normal `N ⊴ H` whose overlap with `C_H(N)` has null
/// window and with `N·C_H(N)` filling the window of `H`: a direct factor up
/// to the deepest chain member.
pub fn ld_lattice(mv: &MarginView, alpha: &GroupHandle, level: usize) -> Result<LdAlgebra> {
    let fg = mv.filtered();
    if level > fg.depth() {
        return Err(Error::input(format!("level {level} exceeds chain depth")));
    }
    let h = alpha.intersection(fg.level(level))?;
    let t = GroupTable::new(&h)?;
    let full = t.full_bits();
    let hw = mv.window(&h)?;

    let mut windows: Vec<GroupHandle> = Vec::new();
    let mut sources: Vec<GroupHandle> = Vec::new();
    let mut complements: Vec<GroupHandle> = Vec::new();
    for b in closed_normal_subgroups(&t) {
        let c = t.centraliser(&full, &b);
        let mut overlap = b.clone();
        overlap.intersect_with(&c);
        if !mv.is_null(&t.handle(&overlap))? {
            continue;
        }
        let prod = t.handle(&t.join(&b, &c));
        if mv.window(&prod)? != hw {
            continue;
        }
        let n = t.handle(&b);
        let w = mv.window(&n)?;
        let cw = mv.window(&t.handle(&c))?;
        match windows.iter().position(|x| *x == w) {
            Some(i) => {
                if complements[i] != cw {
                    return Err(Error::artefact(
                        mv.margin().pair(),
                        "factors with equal windows have different complements",
                    ));
                }
            }
            None => {
                windows.push(w);
                sources.push(n);
                complements.push(cw);
            }
        }
    }
    if windows.is_empty() {
        // only happens when the level is too far from centreless, e.g. abelian
        return Err(Error::precondition(format!(
            "no margin-direct factors at level {level}: the level has a non-null centre at margin {:?}",
            mv.margin().pair()
        )));
    }
    let mut order: Vec<usize> = (0..windows.len()).collect();
    order.sort_by_cached_key(|&i| (windows[i].order(), subgroup_key(&windows[i])));
    let windows: Vec<GroupHandle> = order.iter().map(|&i| windows[i].clone()).collect();
    let sources: Vec<GroupHandle> = order.iter().map(|&i| sources[i].clone()).collect();
    let complements: Vec<GroupHandle> = order.iter().map(|&i| complements[i].clone()).collect();

    let keys = windows.iter().map(subgroup_key).collect();
    let semilattice =
        FiniteLattice::from_order(keys, |a, b| windows[a].is_subgroup_of(&windows[b]))?;
    let inv = complements
        .iter()
        .map(|c| {
            windows.iter().position(|w| w == c).ok_or_else(|| {
                Error::artefact(
                    mv.margin().pair(),
                    "complement window is not a factor class",
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let algebra = boolflip_construct(&semilattice, &Involution(inv))?;
    Ok(LdAlgebra {
        algebra,
        windows,
        sources,
        level,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitivityReport {
    /// `LD(α) ⊆ LD(β)`.
    pub included: bool,
    /// `α ∈ LD(β)`.
    pub member: bool,
}

/// Compares `LD(α) ⊆ LD(β)` with `α ∈ LD(β)` at one level; they must agree.
/// Returns whether `α ∈ LD(β)`.
pub fn ld_transitive_check(
    fg_view: &MarginView,
    alpha: &GroupHandle,
    beta: &GroupHandle,
    level: usize,
) -> Result<TransitivityReport> {
    let la = ld_lattice(fg_view, alpha, level)?;
    let lb = ld_lattice(fg_view, beta, level)?;
    let included = la.windows.iter().all(|w| lb.contains_window(w));
    let aw = fg_view.window(&alpha.intersection(fg_view.filtered().level(level))?)?;
    let member = lb.contains_window(&aw);
    if included != member {
        return Err(Error::artefact(
            fg_view.margin().pair(),
            "LD inclusion and membership disagree",
        ));
    }
    Ok(TransitivityReport { included, member })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::Margin;
    use crate::tree::{ClopenSet, TreeAction, TreeSpec, Vertex, WreathAutomaton};

    fn s3() -> GroupHandle {
        GroupHandle::symmetric(3)
    }

    fn w(depth: usize) -> TreeAction {
        let tree = TreeSpec::new(2, depth).unwrap();
        TreeAction::truncate(&WreathAutomaton::full(2, depth), tree).unwrap()
    }

    /// Direct factors by brute force: every subgroup that is normal with a
    /// normal complement meeting it trivially.
    fn brute_direct_factors(h: &GroupHandle) -> usize {
        let subs = h.all_subgroups_brute_force().unwrap();
        subs.iter()
            .filter(|k| {
                h.normalises(k)
                    && subs.iter().any(|m| {
                        h.normalises(m)
                            && k.intersection(m).unwrap().is_trivial()
                            && k.order() * m.order() == h.order()
                    })
            })
            .count()
    }

    #[test]
    fn s3_squared() {
        let g = GroupHandle::direct_product(&s3(), &s3());
        let d = krs_decompose(&g).unwrap();
        assert_eq!(d.factors.len(), 2);
        assert_eq!(d.all_direct_factors().unwrap().len(), 4);
        assert_eq!(brute_direct_factors(&g), 4);
        let (l, r) = GroupHandle::direct_factors(&s3(), &s3());
        assert!(d.factors.contains(&l) && d.factors.contains(&r));
    }

    #[test]
    fn indecomposable_and_trivial() {
        let d = krs_decompose(&s3()).unwrap();
        assert_eq!(d.factors, vec![s3()]);
        assert_eq!(d.all_direct_factors().unwrap().len(), 2);
        let t = krs_decompose(&GroupHandle::trivial(3)).unwrap();
        assert!(t.factors.is_empty());
        assert_eq!(t.all_direct_factors().unwrap().len(), 1);
    }

    #[test]
    fn complements() {
        let s4 = GroupHandle::symmetric(4);
        let g = GroupHandle::direct_product(&s3(), &s4);
        let (l, r) = GroupHandle::direct_factors(&s3(), &s4);
        assert_eq!(direct_complement(&g, &l).unwrap(), r);
        assert!(direct_complement(&g, &g).unwrap().is_trivial());
        assert_eq!(direct_complement(&g, &GroupHandle::trivial(7)).unwrap(), g);
        let d4 = GroupHandle::new(
            4,
            vec![
                Perm::from_cycles(4, &[&[0, 1, 2, 3]]).unwrap(),
                Perm::from_cycles(4, &[&[0, 2]]).unwrap(),
            ],
        )
        .unwrap();
        assert!(matches!(
            direct_complement(&d4, &d4),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn splits() {
        let g = GroupHandle::direct_product(&s3(), &s3());
        let (l, r) = GroupHandle::direct_factors(&s3(), &s3());
        let (a, b) = dirfac_split(&g, &l, &g).unwrap();
        assert_eq!((a, b), (l.clone(), r));
        let diag = g
            .subgroup_where(|x| (0..3).all(|p| x.apply(p) + 3 == x.apply(p + 3)))
            .unwrap();
        assert_eq!(diag.order(), 6);
        assert!(matches!(
            dirfac_split(&g, &l, &diag),
            Err(Error::Precondition { .. })
        ));
        let s4 = GroupHandle::symmetric(4);
        let g = GroupHandle::direct_product(&s3(), &s4);
        let (l, _) = GroupHandle::direct_factors(&s3(), &s4);
        let (a, b) = dirfac_split(&g, &l, &l).unwrap();
        assert_eq!(a, l);
        assert!(b.is_trivial());
    }

    #[test]
    fn closed_normals_cover_brute_force_factors() {
        let s4 = GroupHandle::symmetric(4);
        let g = GroupHandle::direct_product(&s3(), &s4);
        assert_eq!(direct_factors(&g).unwrap().len(), brute_direct_factors(&g));
    }

    #[test]
    fn ld_of_w3_and_w4() {
        let t3 = w(3);
        let mv = MarginView::new(&t3.fg, Margin::new(2, 1)).unwrap();
        let g = t3.fg.ambient().clone();
        let ld = ld_lattice(&mv, &g, 1).unwrap();
        assert_eq!(ld.len(), 4);
        let zero = ld_lattice(&mv, &GroupHandle::trivial(8), 1).unwrap();
        assert_eq!(zero.len(), 1);

        let t4 = w(4);
        let mv = MarginView::new(&t4.fg, Margin::new(2, 1)).unwrap();
        let g = t4.fg.ambient().clone();
        let ld = ld_lattice(&mv, &g, 2).unwrap();
        assert_eq!(ld.len(), 16);
        assert_eq!(ld.algebra.atoms().len(), 4);

        let v = ClopenSet::cone(t4.tree, Vertex { level: 1, index: 0 });
        let r = t4.rist(&v).unwrap();
        assert!(ld_transitive_check(&mv, &r, &g, 1).unwrap().member);
        assert!(!ld_transitive_check(&mv, &g, &r, 1).unwrap().member);
        assert!(ld_transitive_check(&mv, &g, &g, 1).unwrap().member);
    }
}
