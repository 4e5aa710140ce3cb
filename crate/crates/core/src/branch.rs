//! Branch structure of tree actions: certification of smooth, weakly and
//! locally branch behaviour up to a level, the embedding `θ` of clopens
//! into the centraliser lattice, the double-centraliser description of
//! rigid stabilisers, and local faithfulness of actions on algebras.

use serde::Serialize;

use crate::centlat::{CentClass, CentContext};
use crate::decomp::ld_lattice;
use crate::error::{Error, Result};
use crate::filtration::LnLattice;
use crate::lattice::BooleanAlg;
use crate::permgroup::GroupHandle;
use crate::stone::{stone_space, AlgebraAction};
use crate::tree::{ClopenSet, TreeAction};

/// Clopens whose antichains lie at levels `≤ level`: unions of level cones.
pub fn clopens_to_level(ta: &TreeAction, level: usize) -> Result<Vec<ClopenSet>> {
    if level > ta.tree.depth {
        return Err(Error::input("clopen level exceeds tree depth"));
    }
    if ta.tree.level_size(level) > 16 {
        return Err(Error::resource(
            "clopen sets",
            1 << 16,
            1u64 << ta.tree.level_size(level).min(63),
        ));
    }
    Ok(ClopenSet::all_at_level(ta.tree, level))
}

fn addresses(c: &ClopenSet) -> Vec<String> {
    c.addresses()
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchReport {
    /// Certified up to this level.
    pub level: usize,
    pub smooth: bool,
    pub weakly_branch: bool,
    pub locally_branch: bool,
    /// First failing clopen for each property, as vertex addresses.
    pub smooth_witness: Option<Vec<String>>,
    pub weak_witness: Option<Vec<String>>,
    pub local_witness: Option<Vec<String>>,
}

/// Checks every nonempty clopen with antichain at levels `≤ max_level`:
/// its stabiliser contains a chain member, its rigid stabiliser is
/// nontrivial, and `rist(c)·rist(cᶜ)` contains a chain member.
///
/// The truncation acts faithfully on the leaves, so the action kernel is
/// trivial and weak branching asks for `rist(c) ≠ 1`.
pub fn branch_certify(ta: &TreeAction, max_level: usize) -> Result<BranchReport> {
    if max_level + 1 > ta.tree.depth {
        return Err(Error::input(format!(
            "max level {max_level} reaches the deepest level of a depth-{} tree",
            ta.tree.depth
        )));
    }
    let fg = &ta.fg;
    let chain: Vec<&GroupHandle> = (0..=fg.depth()).map(|i| fg.level(i)).collect();
    let mut report = BranchReport {
        level: max_level,
        smooth: true,
        weakly_branch: true,
        locally_branch: true,
        smooth_witness: None,
        weak_witness: None,
        local_witness: None,
    };
    for c in clopens_to_level(ta, max_level)? {
        if c.is_empty() {
            continue;
        }
        if report.smooth
            && !chain
                .iter()
                .any(|u| u.generators().iter().all(|g| c.image(g) == c))
        {
            report.smooth = false;
            report.smooth_witness = Some(addresses(&c));
        }
        let r = ta.rist(&c)?;
        if report.weakly_branch && r.is_trivial() {
            report.weakly_branch = false;
            report.weak_witness = Some(addresses(&c));
        }
        if report.locally_branch {
            let prod = r.join(&ta.rist(&c.complement())?)?;
            if !chain.iter().any(|u| u.is_subgroup_of(&prod)) {
                report.locally_branch = false;
                report.local_witness = Some(addresses(&c));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaReport {
    /// Clopen addresses and the key of their class, in clopen order.
    pub classes: Vec<(Vec<String>, String)>,
    pub injective: bool,
    pub meets: bool,
    pub complements: bool,
    /// Whether every image lies in the LD algebra (locally branch inputs).
    pub in_ld: Option<bool>,
}

/// `θ(α) = [rist(α)]` on the clopens at levels `≤ max_level`, with
/// injectivity, meets (`rist(α∩β) = rist(α) ∩ rist(β)` up to class) and
/// complements (`θ(αᶜ) = θ(α)^⊥`) verified. For locally branch inputs the
/// images are also checked against the LD algebra of `U_{max_level}`.
pub fn theta_embedding(
    ctx: &CentContext,
    ta: &TreeAction,
    max_level: usize,
) -> Result<ThetaReport> {
    let cert = branch_certify(ta, max_level)?;
    if !cert.weakly_branch {
        return Err(Error::precondition(format!(
            "not weakly branch to level {max_level}: {:?}",
            cert.weak_witness
        )));
    }
    let pair = ctx.view.margin().pair();
    let clopens = clopens_to_level(ta, max_level)?;
    let theta: Vec<CentClass> = clopens
        .iter()
        .map(|c| {
            let source = ta.rist(c)?;
            Ok(CentClass {
                window: ctx.window(&source)?,
                source,
                validated: ctx.validated,
            })
        })
        .collect::<Result<_>>()?;
    let index = |c: &ClopenSet| {
        clopens
            .iter()
            .position(|d| d == c)
            .expect("closed under set operations")
    };
    for a in 0..clopens.len() {
        for b in a + 1..clopens.len() {
            if theta[a].window == theta[b].window {
                return Err(Error::artefact(
                    pair,
                    format!(
                        "θ identifies {:?} and {:?}",
                        addresses(&clopens[a]),
                        addresses(&clopens[b])
                    ),
                ));
            }
            let m = index(&clopens[a].intersection(&clopens[b]));
            if ctx.window(&theta[a].source.intersection(&theta[b].source)?)? != theta[m].window {
                return Err(Error::artefact(
                    pair,
                    format!(
                        "θ does not preserve the meet of {:?} and {:?}",
                        addresses(&clopens[a]),
                        addresses(&clopens[b])
                    ),
                ));
            }
        }
    }
    for (a, c) in clopens.iter().enumerate() {
        let comp = index(&c.complement());
        if ctx.perp(&theta[a].source)?.window != theta[comp].window {
            return Err(Error::artefact(
                pair,
                format!("θ(αᶜ) ≠ θ(α)^⊥ at α = {:?}", addresses(c)),
            ));
        }
    }
    let in_ld = if cert.locally_branch {
        let ld = ld_lattice(&ctx.view, ta.group(), max_level)?;
        let mut ok = true;
        for t in &theta {
            let w = ctx
                .view
                .window(&t.source.intersection(ta.fg.level(max_level))?)?;
            ok &= ld.contains_window(&w);
        }
        Some(ok)
    } else {
        None
    };
    Ok(ThetaReport {
        classes: clopens
            .iter()
            .zip(&theta)
            .map(|(c, t)| (addresses(c), t.key()))
            .collect(),
        injective: true,
        meets: true,
        complements: true,
        in_ld,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LatristReport {
    pub addresses: Vec<String>,
    /// `|rist(c) ∩ U_k|`.
    pub order: u128,
    /// `rist(c) = ⊥⊥(rist(c))` as classes in the margin view.
    pub holds: bool,
    /// `rist(c) ∩ U_k = C(C(rist(c) ∩ U_k)) ∩ U_k` in the whole truncation.
    /// Fails whenever the truncation has a centre inside `U_k`.
    pub literal: bool,
}

/// Rigid stabilisers are their own double centralisers.
pub fn latrist_verify(ctx: &CentContext, ta: &TreeAction, c: &ClopenSet) -> Result<LatristReport> {
    let g = ta.group();
    let uk = ta.fg.deepest();
    let rist = ta.rist(c)?;
    let r = rist.intersection(uk)?;
    let cc = g.centraliser(&g.centraliser(&r)?)?.intersection(uk)?;
    let once = ctx.perp(&rist)?;
    let twice = ctx.perp(&once.source)?;
    Ok(LatristReport {
        addresses: addresses(c),
        order: r.order(),
        holds: twice.window == ctx.window(&rist)?,
        literal: cc == r,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LnipReport {
    /// Points (atoms) at which the action is locally faithful.
    pub locally_faithful: Vec<usize>,
    /// Every two nonzero classes of the supplied lattice meet nontrivially.
    pub lnip: Option<bool>,
    /// The group is transitive on points.
    pub minimal: bool,
    /// Under LNIP and minimality: the fixer of every proper nonzero
    /// element's complement is trivial.
    pub proper_rists_trivial: Option<bool>,
}

/// Local faithfulness at each point of `S(alg)`: `p` is locally faithful
/// iff for every `α ∋ p` the subgroup fixing every point of `α` (the rigid
/// stabiliser of `αᶜ` in the algebra action) is trivial.
pub fn lnip_analysis(
    alg: &BooleanAlg,
    action: &AlgebraAction,
    ln: Option<&LnLattice>,
) -> Result<LnipReport> {
    let space = stone_space(alg);
    let n = space.len();
    if n > 63 {
        return Err(Error::resource("Stone points", 63, n as u64));
    }
    // fixed-point masks of nonidentity elements
    let mut masks: Vec<u64> = Vec::new();
    let mut orbit_of_0 = 0u64;
    action.group.for_each_element(|g| {
        let sigma = action.on_space(&space, g);
        if n > 0 {
            orbit_of_0 |= 1 << sigma[0];
        }
        if !g.is_identity() {
            let fixed = (0..n)
                .filter(|&p| sigma[p] == p)
                .fold(0u64, |m, p| m | 1 << p);
            masks.push(fixed);
        }
    })?;
    masks.sort_unstable();
    masks.dedup();
    let fixer_trivial = |alpha: u64| !masks.iter().any(|&m| m & alpha == alpha);
    let locally_faithful = (0..n)
        .filter(|&p| {
            (0..alg.len())
                .map(|a| space.clopen(a))
                .filter(|&alpha| alpha >> p & 1 == 1)
                .all(fixer_trivial)
        })
        .collect();
    let minimal = n == 0 || orbit_of_0.count_ones() as usize == n;
    let lnip = ln.map(|ln| {
        let lat = ln.lattice();
        let bottom = lat.bottom();
        (0..ln.len()).filter(|&a| a != bottom).all(|a| {
            (0..ln.len())
                .filter(|&b| b != bottom)
                .all(|b| lat.meet(a, b) != bottom)
        })
    });
    let proper_rists_trivial = (lnip == Some(true) && minimal).then(|| {
        (0..alg.len())
            .filter(|&a| a != alg.top() && a != alg.bottom())
            .all(|a| fixer_trivial(space.clopen(alg.complement(a))))
    });
    Ok(LnipReport {
        locally_faithful,
        lnip,
        minimal,
        proper_rists_trivial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::Margin;
    use crate::stone::clopen_algebra;
    use crate::tree::{TreeSpec, Vertex, WreathAutomaton};

    fn w(depth: usize) -> TreeAction {
        let tree = TreeSpec::new(2, depth).unwrap();
        TreeAction::truncate(&WreathAutomaton::full(2, depth), tree).unwrap()
    }

    fn odometer(depth: usize) -> TreeAction {
        let tree = TreeSpec::new(2, depth).unwrap();
        TreeAction::truncate(&WreathAutomaton::odometer(), tree).unwrap()
    }

    #[test]
    fn certification() {
        let r = branch_certify(&w(4), 2).unwrap();
        assert!(r.smooth && r.weakly_branch && r.locally_branch, "{r:?}");
        let o = branch_certify(&odometer(3), 1).unwrap();
        assert!(!o.weakly_branch);
        assert_eq!(o.weak_witness, Some(vec!["0".to_string()]));
        assert!(branch_certify(&w(3), 3).is_err());
    }

    #[test]
    fn theta_on_w4() {
        let t = w(4);
        let ctx = CentContext::new(&t.fg, Margin::new(2, 1), false).unwrap();
        let r = theta_embedding(&ctx, &t, 1).unwrap();
        assert_eq!(r.classes.len(), 4);
        assert_eq!(r.in_ld, Some(true));
        let r2 = theta_embedding(&ctx, &t, 2).unwrap();
        assert_eq!(r2.classes.len(), 16);
        assert_eq!(r2.in_ld, Some(true));
    }

    #[test]
    fn latrist_on_w4() {
        let t = w(4);
        let ctx = CentContext::new(&t.fg, Margin::new(2, 1), false).unwrap();
        for level in 0..=2 {
            for c in ClopenSet::all_at_level(t.tree, level) {
                let r = latrist_verify(&ctx, &t, &c).unwrap();
                assert!(r.holds, "{:?}", r.addresses);
                // the centre of the truncation spoils the literal form
                assert_eq!(r.literal, c.is_whole(), "{:?}", r.addresses);
            }
        }
        let whole = ClopenSet::cone(t.tree, Vertex::ROOT);
        assert_eq!(
            latrist_verify(&ctx, &t, &whole).unwrap().order,
            t.fg.deepest().order()
        );
    }

    #[test]
    fn local_faithfulness() {
        let t = w(3);
        let (alg, clopens) = clopen_algebra(t.tree, 2).unwrap();
        let act = AlgebraAction::on_clopens(t.group().clone(), clopens);
        let r = lnip_analysis(&alg, &act, None).unwrap();
        assert!(r.locally_faithful.is_empty());
        assert!(r.minimal);

        let o = odometer(3);
        let (alg, clopens) = clopen_algebra(o.tree, 3).unwrap();
        let act = AlgebraAction::on_clopens(o.group().clone(), clopens);
        let r = lnip_analysis(&alg, &act, None).unwrap();
        assert_eq!(r.locally_faithful, (0..8).collect::<Vec<_>>());

        let (triv, clopens) = clopen_algebra(o.tree, 0).unwrap();
        let act = AlgebraAction::on_clopens(o.group().clone(), clopens);
        assert!(lnip_analysis(&triv, &act, None)
            .unwrap()
            .locally_faithful
            .is_empty());
        let one = GroupHandle::trivial(8);
        let (triv, clopens) = clopen_algebra(o.tree, 0).unwrap();
        let act = AlgebraAction::on_clopens(one, clopens);
        assert_eq!(
            lnip_analysis(&triv, &act, None).unwrap().locally_faithful,
            vec![0]
        );
    }

    #[test]
    fn rist_invariants() {
        let t = w(3);
        let cs = ClopenSet::all_at_level(t.tree, 2);
        let rists: Vec<GroupHandle> = cs.iter().map(|c| t.rist(c).unwrap()).collect();
        for (a, c) in cs.iter().enumerate() {
            let comp = cs.iter().position(|d| *d == c.complement()).unwrap();
            let (r, rc) = (&rists[a], &rists[comp]);
            assert!(r
                .generators()
                .iter()
                .all(|x| rc.generators().iter().all(|y| x.commutes_with(y))));
            assert!(r.intersection(rc).unwrap().is_trivial());
            for (b, d) in cs.iter().enumerate() {
                if c.is_subset(d) {
                    assert!(r.is_subgroup_of(&rists[b]));
                }
                if c.intersection(d).is_empty() {
                    // an element swapping the two pieces lies only on the right
                    let u = cs.iter().position(|e| *e == c.union(d)).unwrap();
                    assert!(r.join(&rists[b]).unwrap().is_subgroup_of(&rists[u]));
                }
            }
        }
    }
}
