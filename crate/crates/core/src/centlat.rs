//! The centraliser lattice: `⊥` on classes, the Boolean algebra it
//! generates, the `⊥²` projection from locally normal classes, and the
//! double-centraliser identities for groups without abelian normal
//! subgroups.
//!
//! Everything here runs in a [`MarginView`]: classes are windows and `⊥`
//! is the centraliser in `U_j`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtered::{FilteredGroup, Margin};
use crate::filtration::{qz_trivial_at, subgroup_key, LnLattice, MarginView, QzVerdict};
use crate::lattice::{boolflip_construct, BooleanAlg, BoolflipError, FiniteLattice, Involution};
use crate::perm::Perm;
use crate::permgroup::{GroupHandle, DEFAULT_NORMAL_BUDGET};
use crate::table::GroupTable;

/// Result of the local C-stability screening at a margin.
#[derive(Clone, Debug, Serialize)]
pub struct Screening {
    pub margin: Margin,
    pub qz: QzVerdict,
    /// An element outside `U_j` whose `U_i`-invariant closure is abelian.
    pub visible_abelian: Option<Vec<usize>>,
}

impl Screening {
    pub fn passed(&self) -> bool {
        self.qz.holds && !self.qz.degenerate && self.visible_abelian.is_none()
    }
}

/// Looks for an abelian subgroup normalised by `U_i` and not inside `U_j`.
///
/// Such a subgroup exists iff some `a ∉ U_j` has abelian `U_i`-invariant
/// closure, i.e. its `U_i`-conjugates commute pairwise.
pub fn visible_abelian(fg: &FilteredGroup, i: usize, j: usize) -> Result<Option<Perm>> {
    if i > fg.depth() || j > fg.depth() {
        return Err(Error::input("margin level exceeds chain depth"));
    }
    let g = fg.ambient();
    let uj = fg.level(j);
    let gens = fg.level(i).generators().to_vec();
    let mut found = None;
    g.for_each_element(|a| {
        if found.is_some() || uj.contains(a) {
            return;
        }
        let mut orbit = vec![a.clone()];
        let mut k = 0;
        while k < orbit.len() {
            for u in &gens {
                let y = orbit[k].conjugate_by(u);
                if orbit.contains(&y) {
                    continue;
                }
                if !orbit.iter().all(|x| x.commutes_with(&y)) {
                    return;
                }
                orbit.push(y);
            }
            k += 1;
        }
        found = Some(a.clone());
    })?;
    Ok(found)
}

pub fn screen(fg: &FilteredGroup, margin: Margin) -> Result<Screening> {
    fg.check_margin(margin)?;
    let (i, j) = margin.pair();
    Ok(Screening {
        margin,
        qz: qz_trivial_at(fg, i, j)?,
        visible_abelian: visible_abelian(fg, i, j)?.map(|p| p.to_vec()),
    })
}

/// A margin view that has been screened (or explicitly not).
pub struct CentContext<'a> {
    pub view: MarginView<'a>,
    pub screening: Screening,
    /// False when screening failed and the caller asked to go on anyway.
    pub validated: bool,
}

impl<'a> CentContext<'a> {
    /// Screens the margin; refuses to go on when screening fails unless
    /// `unsafe_mode` is set, in which case results are tagged unvalidated.
    pub fn new(fg: &'a FilteredGroup, margin: Margin, unsafe_mode: bool) -> Result<Self> {
        let view = MarginView::new(fg, margin)?;
        let screening = screen(fg, margin)?;
        let validated = screening.passed();
        if !validated && !unsafe_mode {
            return Err(Error::precondition(format!(
                "margin ({}, {}) fails local C-stability screening: {}",
                margin.deep,
                margin.visible,
                screening_reason(&screening)
            )));
        }
        Ok(CentContext {
            view,
            screening,
            validated,
        })
    }

    /// Window used to key centraliser classes, taken at the comparison level.
    pub fn window(&self, x: &GroupHandle) -> Result<GroupHandle> {
        self.view.window_at(x, self.view.comparison_level())
    }

    /// `⊥` of a source subgroup, with the stability assertion.
    pub fn perp(&self, x: &GroupHandle) -> Result<CentClass> {
        if !self.view.perp_is_stable(x)? {
            return Err(Error::artefact(
                self.view.margin().pair(),
                "perp depends on the cut level",
            ));
        }
        let source = self.view.perp(x)?;
        let window = self.window(&source)?;
        Ok(CentClass {
            source,
            window,
            validated: self.validated,
        })
    }
}

fn screening_reason(s: &Screening) -> String {
    if s.qz.degenerate {
        "visible level is not above the deep level".into()
    } else if !s.qz.holds {
        "an element above the visible level centralises the deep level".into()
    } else {
        "an abelian locally normal subgroup is visible".into()
    }
}

/// A centraliser class: a window together with a source realising it.
#[derive(Clone, Debug)]
pub struct CentClass {
    pub source: GroupHandle,
    pub window: GroupHandle,
    pub validated: bool,
}

impl CentClass {
    pub fn key(&self) -> String {
        subgroup_key(&self.window)
    }
}

/// A Boolean algebra of centraliser classes.
pub struct LcAlgebra {
    pub algebra: BooleanAlg,
    pub classes: Vec<CentClass>,
    /// Sources the algebra was generated from.
    pub seeds: Vec<GroupHandle>,
    pub validated: bool,
}

impl LcAlgebra {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn find_window(&self, w: &GroupHandle) -> Option<usize> {
        self.classes.iter().position(|c| &c.window == w)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.algebra.to_json();
        v["validated"] = self.validated.into();
        v
    }
}

/// Closes `{⊥s}` (plus `0` and `∞`) under `∧` and `⊥`, then verifies the
/// Boolean axioms through the boolflip construction; joins are the De
/// Morgan joins `(α^⊥ ∧ β^⊥)^⊥`.
pub fn lc_algebra(ctx: &CentContext, seeds: &[GroupHandle], budget: usize) -> Result<LcAlgebra> {
    let mv = &ctx.view;
    let n = mv.filtered().ambient().degree();
    let mut classes: Vec<CentClass> = Vec::new();
    let mut perps: Vec<Option<usize>> = Vec::new();
    let add = |c: CentClass,
               classes: &mut Vec<CentClass>,
               perps: &mut Vec<Option<usize>>|
     -> Result<usize> {
        if let Some(i) = classes.iter().position(|x| x.window == c.window) {
            // a second source for a known class must have the same ⊥
            if classes[i].source != c.source
                && ctx.perp(&classes[i].source)?.window != ctx.perp(&c.source)?.window
            {
                return Err(Error::artefact(
                    mv.margin().pair(),
                    format!("perp is not well defined on class {}", classes[i].key()),
                ));
            }
            return Ok(i);
        }
        if classes.len() >= budget {
            return Err(Error::resource(
                "centraliser classes",
                budget as u64,
                classes.len() as u64,
            ));
        }
        classes.push(c);
        perps.push(None);
        Ok(classes.len() - 1)
    };
    add(ctx.perp(mv.visible())?, &mut classes, &mut perps)?;
    add(
        ctx.perp(&GroupHandle::trivial(n))?,
        &mut classes,
        &mut perps,
    )?;
    for s in seeds {
        add(ctx.perp(s)?, &mut classes, &mut perps)?;
    }
    let mut k = 0;
    while k < classes.len() {
        let p = ctx.perp(&classes[k].source)?;
        let pi = add(p, &mut classes, &mut perps)?;
        perps[k] = Some(pi);
        for other in 0..=k {
            let src = classes[k].source.intersection(&classes[other].source)?;
            let window = ctx.window(&src)?;
            let met = CentClass {
                source: src,
                window,
                validated: ctx.validated,
            };
            add(met, &mut classes, &mut perps)?;
        }
        k += 1;
    }
    let perps: Vec<usize> = perps
        .into_iter()
        .map(|p| p.expect("closure visits every class"))
        .collect();

    // canonical order: by window order, then key
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by_cached_key(|&i| (classes[i].window.order(), classes[i].key()));
    let mut pos = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let classes: Vec<CentClass> = order.iter().map(|&i| classes[i].clone()).collect();
    let inv: Vec<usize> = order.iter().map(|&i| pos[perps[i]]).collect();

    let keys = classes.iter().map(CentClass::key).collect();
    let semilattice = FiniteLattice::from_order(keys, |a, b| {
        classes[a].window.is_subgroup_of(&classes[b].window)
    })?;
    // meets of sources must realise the order-theoretic meets
    for a in 0..classes.len() {
        for b in a..classes.len() {
            let w = ctx.window(&classes[a].source.intersection(&classes[b].source)?)?;
            if classes[semilattice.meet(a, b)].window != w {
                return Err(Error::artefact(
                    mv.margin().pair(),
                    format!("meet of {} and {} is not realised by sources", a, b),
                ));
            }
        }
    }
    let algebra = boolflip_construct(&semilattice, &Involution(inv)).map_err(|e| match e {
        BoolflipError::Rejected(r) => Error::artefact(
            mv.margin().pair(),
            format!("boolflip hypothesis fails: {r:?}"),
        ),
        BoolflipError::Other(e) => e,
    })?;
    Ok(LcAlgebra {
        algebra,
        classes,
        seeds: seeds.to_vec(),
        validated: ctx.validated,
    })
}

/// Whether a locally normal rep is generated by its intersections with the
/// seeds, i.e. the class splits as `⋁ (α ∧ [s])`. Classes twisted across
/// several seeds (graphs of isomorphisms between pieces) fail this.
pub fn splits_over(rep: &GroupHandle, seeds: &[GroupHandle]) -> Result<bool> {
    let mut acc = GroupHandle::trivial(rep.degree());
    for s in seeds {
        acc = acc.join(&rep.intersection(s)?)?;
    }
    Ok(&acc == rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport {
    /// Margin-valid classes: split over the seeds, with stable `⊥` landing
    /// in the algebra.
    pub valid: usize,
    pub total: usize,
    /// Image of each valid class, by LN index.
    pub image: Vec<(usize, usize)>,
    pub surjective: bool,
    /// First failing pair and operation, if any.
    pub fault: Option<(usize, usize, String)>,
}

impl ProjectionReport {
    pub fn passed(&self) -> bool {
        self.surjective && self.fault.is_none()
    }
}

/// `⊥²` from locally normal classes into the algebra: `⊥` is computed from
/// the class rep, the second `⊥` from the stored source of the resulting
/// centraliser class. Checks surjectivity, `∧` and `∨ ↦ ∨_c` on the
/// margin-valid classes (see [`splits_over`]); the rest are counted in
/// `total - valid`.
pub fn perp2_projection_check(
    ctx: &CentContext,
    ln: &LnLattice,
    lc: &LcAlgebra,
) -> Result<ProjectionReport> {
    let alg = &lc.algebra;
    let mut f: Vec<Option<usize>> = Vec::with_capacity(ln.len());
    for a in 0..ln.len() {
        let rep = ln.class(a).rep();
        let img = if splits_over(rep, &lc.seeds)? && ctx.view.perp_is_stable(rep)? {
            let w = ctx.window(&ctx.view.perp(rep)?)?;
            lc.find_window(&w).map(|p| alg.complement(p))
        } else {
            None
        };
        f.push(img);
    }
    let lat = ln.lattice();
    let mut fault = None;
    'outer: for a in 0..ln.len() {
        for b in a..ln.len() {
            let (Some(fa), Some(fb)) = (f[a], f[b]) else {
                continue;
            };
            if let Some(fm) = f[lat.meet(a, b)] {
                if fm != alg.meet(fa, fb) {
                    fault = Some((a, b, "meet".to_string()));
                    break 'outer;
                }
            }
            if let Some(fj) = f[lat.join(a, b)] {
                if fj != alg.join(fa, fb) {
                    fault = Some((a, b, "join".to_string()));
                    break 'outer;
                }
            }
        }
    }
    let image: Vec<(usize, usize)> = f
        .iter()
        .enumerate()
        .filter_map(|(a, x)| x.map(|x| (a, x)))
        .collect();
    let mut hit = vec![false; alg.len()];
    for &(_, x) in &image {
        hit[x] = true;
    }
    Ok(ProjectionReport {
        valid: image.len(),
        total: ln.len(),
        surjective: hit.iter().all(|&h| h),
        image,
        fault,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CclemReport {
    pub meet_of_closures: bool,
    pub centraliser_of_intersection: bool,
    pub relative_double_centraliser: bool,
}

impl CclemReport {
    pub fn holds(&self) -> bool {
        self.meet_of_closures
            && self.centraliser_of_intersection
            && self.relative_double_centraliser
    }
}

/// A nontrivial abelian normal subgroup of `g`, if there is one.
pub fn abelian_normal_witness(g: &GroupHandle) -> Result<Option<GroupHandle>> {
    let normals = g.normal_subgroups(DEFAULT_NORMAL_BUDGET)?;
    Ok(normals
        .into_iter()
        .find(|n| !n.is_trivial() && n.is_abelian()))
}

/// The three double-centraliser identities for normal `a, b` in a group
/// without nontrivial abelian normal subgroups:
/// `C²(A∩B) = C²(A) ∩ C²(B)`, `C_A(B) = C_A(A∩B)` and
/// `C_A(C_G(B)) = C_A(C_A(B))`. Rejects groups with an abelian normal
/// subgroup, naming it.
pub fn cclem_check(g: &GroupHandle, a: &GroupHandle, b: &GroupHandle) -> Result<CclemReport> {
    for (name, x) in [("first", a), ("second", b)] {
        if !x.is_normal_in(g) {
            return Err(Error::precondition(format!(
                "{name} subgroup is not normal"
            )));
        }
    }
    if let Some(w) = abelian_normal_witness(g)? {
        return Err(Error::precondition(format!(
            "abelian normal subgroup of order {} exists: {:?}",
            w.order(),
            w.generators()
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
        )));
    }
    cclem_identities(g, a, b)
}

/// Both sides of the three identities, without the precondition.
pub fn cclem_identities(g: &GroupHandle, a: &GroupHandle, b: &GroupHandle) -> Result<CclemReport> {
    let c = |x: &GroupHandle| g.centraliser(x);
    let c2 = |x: &GroupHandle| -> Result<GroupHandle> { c(&c(x)?) };
    let ab = a.intersection(b)?;
    Ok(CclemReport {
        meet_of_closures: c2(&ab)? == c2(a)?.intersection(&c2(b)?)?,
        centraliser_of_intersection: a.centraliser(b)? == a.centraliser(&ab)?,
        relative_double_centraliser: a.centraliser(&c(b)?)? == a.centraliser(&a.centraliser(b)?)?,
    })
}

/// `C_G(h ∩ U_i) ∩ N_G(h) = C_G(h)`, under the hypothesis
/// `C_h(h ∩ U_i) = 1` (the truncated "`QZ(h)` is trivial"). An element
/// normalising `h` and fixing the normal subgroup `h ∩ U_i` pointwise then
/// acts trivially on `h`.
pub fn bewcor_at(fg: &FilteredGroup, h: &GroupHandle, i: usize) -> Result<bool> {
    let g = fg.ambient();
    let hi = fg.cut(h, i)?;
    if !h.centraliser(&hi)?.is_trivial() {
        return Err(Error::precondition(format!(
            "h has nontrivial quasi-centre at level {i}"
        )));
    }
    let lhs = g.centraliser(&hi)?.intersection(&g.normaliser(h)?)?;
    Ok(lhs == g.centraliser(h)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityPair {
    pub levels: (usize, usize),
    /// `C_{U_a}(h ∩ U_a) = C_{U_a}(h ∩ U_b)`.
    pub literal: bool,
    /// The same, compared by window.
    pub windowed: bool,
}

/// `C_{U_a}(h ∩ U_a)` against `C_{U_a}(h ∩ U_b)` for margin levels
/// `from ≤ a < b ≤ deep`: the centraliser class depends only on the class
/// of `h`.
pub fn centraliser_stability(
    mv: &MarginView,
    h: &GroupHandle,
    from: usize,
) -> Result<Vec<StabilityPair>> {
    let fg = mv.filtered();
    let deep = mv.margin().deep;
    let mut out = Vec::new();
    for a in from..=deep {
        let ua = fg.level(a);
        let ca = ua.centraliser(&fg.cut(h, a)?)?;
        for b in a + 1..=deep {
            let cb = ua.centraliser(&fg.cut(h, b)?)?;
            out.push(StabilityPair {
                levels: (a, b),
                literal: ca == cb,
                windowed: mv.same_window(&ca, &cb)?,
            });
        }
    }
    Ok(out)
}

/// `C(C(C(h))) = C(h)` inside `g`.
pub fn elcent_check(g: &GroupHandle, h: &GroupHandle) -> Result<bool> {
    let c1 = g.centraliser(h)?;
    let c3 = g.centraliser(&g.centraliser(&c1)?)?;
    Ok(c1 == c3)
}

/// `C³ = C` for every subgroup of a small group, using a table.
pub fn elcent_exhaustive(g: &GroupHandle) -> Result<Option<GroupHandle>> {
    let t = GroupTable::new(g)?;
    let full = t.full_bits();
    for h in g.all_subgroups_brute_force()? {
        let b = t.bits_of(&h)?;
        let c1 = t.centraliser(&full, &b);
        let c3 = t.centraliser(&full, &t.centraliser(&full, &c1));
        if c1 != c3 {
            return Ok(Some(h));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{ln_lattice, DEFAULT_CLASS_BUDGET};
    use crate::tree::{ClopenSet, TreeAction, TreeSpec, WreathAutomaton};

    fn w(depth: usize) -> TreeAction {
        let tree = TreeSpec::new(2, depth).unwrap();
        TreeAction::truncate(&WreathAutomaton::full(2, depth), tree).unwrap()
    }

    fn rists(ta: &TreeAction, level: usize) -> Vec<GroupHandle> {
        ta.tree
            .vertices_at(level)
            .map(|v| ta.rist(&ClopenSet::cone(ta.tree, v)).unwrap())
            .collect()
    }

    #[test]
    fn screening() {
        let t4 = w(4);
        assert!(screen(&t4.fg, Margin::new(2, 1)).unwrap().passed());
        let t3 = w(3);
        let s = screen(&t3.fg, Margin::new(2, 1)).unwrap();
        assert!(s.qz.holds);
        assert!(s.visible_abelian.is_some());
        assert!(CentContext::new(&t3.fg, Margin::new(2, 1), false).is_err());
    }

    #[test]
    fn perp_of_rists_in_w4() {
        let t4 = w(4);
        let ctx = CentContext::new(&t4.fg, Margin::new(2, 1), false).unwrap();
        let inf = ctx.perp(&GroupHandle::trivial(16)).unwrap();
        assert_eq!(inf.window, ctx.window(t4.fg.level(1)).unwrap());
        let zero = ctx.perp(t4.fg.level(1)).unwrap();
        assert!(ctx.view.is_null(&zero.window).unwrap());
        let r = rists(&t4, 1);
        let p = ctx.perp(&r[0]).unwrap();
        assert_eq!(p.window, ctx.window(&r[1]).unwrap());
    }

    #[test]
    fn algebras() {
        let t3 = w(3);
        let ctx = CentContext::new(&t3.fg, Margin::new(2, 1), true).unwrap();
        assert!(!ctx.validated);
        let lc = lc_algebra(&ctx, &rists(&t3, 1), 1 << 10).unwrap();
        assert_eq!(lc.len(), 4);
        let empty = lc_algebra(&ctx, &[], 1 << 10).unwrap();
        assert_eq!(empty.len(), 2);

        let t4 = w(4);
        let ctx = CentContext::new(&t4.fg, Margin::new(2, 1), false).unwrap();
        let lc = lc_algebra(&ctx, &rists(&t4, 2), 1 << 10).unwrap();
        assert_eq!(lc.len(), 16);
        assert!(lc.validated);
    }

    #[test]
    fn projection_on_w3() {
        let t3 = w(3);
        let ctx = CentContext::new(&t3.fg, Margin::new(2, 1), true).unwrap();
        let lc = lc_algebra(&ctx, &rists(&t3, 1), 1 << 10).unwrap();
        let ln = ln_lattice(&t3.fg, 1, DEFAULT_CLASS_BUDGET).unwrap();
        let rep = perp2_projection_check(&ctx, &ln, &lc).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn cclem() {
        let s3 = GroupHandle::symmetric(3);
        let g = GroupHandle::direct_product(&s3, &s3);
        let (l, r) = GroupHandle::direct_factors(&s3, &s3);
        // A3 × A3 is abelian and normal, so only the identities themselves apply
        assert!(cclem_check(&g, &l, &r).is_err());
        assert!(cclem_identities(&g, &l, &r).unwrap().holds());
        assert!(cclem_identities(&g, &l, &l).unwrap().holds());
        let a5 = GroupHandle::new(
            5,
            vec![
                Perm::from_cycles(5, &[&[0, 1, 2, 3, 4]]).unwrap(),
                Perm::from_cycles(5, &[&[0, 1, 2]]).unwrap(),
            ],
        )
        .unwrap();
        let a5sq = GroupHandle::direct_product(&a5, &a5);
        let (l, r) = GroupHandle::direct_factors(&a5, &a5);
        assert!(cclem_check(&a5sq, &l, &r).unwrap().holds());
        let d4 = GroupHandle::new(
            4,
            vec![
                Perm::from_cycles(4, &[&[0, 1, 2, 3]]).unwrap(),
                Perm::from_cycles(4, &[&[0, 2]]).unwrap(),
            ],
        )
        .unwrap();
        let err = cclem_check(&d4, &d4, &d4).unwrap_err();
        assert!(err.to_string().contains("order 2"), "{err}");
        assert_eq!(elcent_exhaustive(&d4).unwrap(), None);
    }

    #[test]
    fn bewcor_and_stability_on_w4() {
        let ta = w(4);
        let fg = &ta.fg;
        let m = Margin::new(2, 1);
        let mv = MarginView::new(fg, m).unwrap();
        let mut hs: Vec<GroupHandle> = fg.chain().to_vec();
        for level in 0..3 {
            for c in ClopenSet::all_at_level(ta.tree, level) {
                hs.push(ta.rist(&c).unwrap());
            }
        }
        let (mut applicable, mut literal, mut pairs) = (0, 0, 0);
        for h in &hs {
            for i in 0..=fg.depth() {
                if let Ok(ok) = bewcor_at(fg, h, i) {
                    assert!(ok);
                    applicable += 1;
                }
            }
            for p in centraliser_stability(&mv, h, 1).unwrap() {
                assert!(p.windowed, "{p:?}");
                pairs += 1;
                literal += usize::from(p.literal);
            }
        }
        assert!(applicable > 0);
        // the leaf-swap layer breaks the literal form for half the inputs
        assert!(literal < pairs);
        // U_1 = W_3 × W_3 has a centre
        assert!(bewcor_at(fg, fg.level(1), 1).is_err());
    }
}
