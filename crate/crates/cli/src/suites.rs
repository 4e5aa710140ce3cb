//! Named verification suites. Each check either passes, fails, or is
//! skipped because the input does not meet its precondition.

use locnorm_core::branch::{branch_certify, clopens_to_level, latrist_verify, theta_embedding};
use locnorm_core::centlat::{
    bewcor_at, cclem_check, cclem_identities, centraliser_stability, elcent_check,
    perp2_projection_check, CentContext,
};
use locnorm_core::decomp::ld_lattice;
use locnorm_core::filtration::{ln_lattice, subgroup_key, MarginView};
use locnorm_core::io::Loaded;
use locnorm_core::lattice::BooleanAlg;
use locnorm_core::radicals::{qz_hypercentre_search, regular_radical_search, stability_checks};
use locnorm_core::stone::{clopen_algebra, stone_space};
use locnorm_core::{Error, GroupHandle, Result};
use serde::Serialize;

use crate::{lc_for, RunConfig};

pub const SUITES: &[&str] = &[
    "boolean",
    "modularity",
    "stone",
    "centlat",
    "branch",
    "radicals",
    "identities",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    /// Failed preconditions skip the check; budget overruns abort the
    /// suite; every other error counts as a failure.
    fn check(
        &mut self,
        name: impl Into<String>,
        f: impl FnOnce() -> Result<(bool, String)>,
    ) -> Result<()> {
        let (status, detail) = match f() {
            Ok((true, d)) => (Status::Pass, d),
            Ok((false, d)) => (Status::Fail, d),
            Err(Error::Precondition { reason }) => (Status::Skipped, reason),
            Err(e @ Error::Resource { .. }) | Err(e @ Error::Input { .. }) => return Err(e),
            Err(e) => (Status::Fail, e.to_string()),
        };
        self.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            status,
            detail,
        });
        Ok(())
    }
}

fn axioms(alg: &BooleanAlg) -> (bool, String) {
    match alg.axiom_fault().or_else(|| alg.de_morgan_fault()) {
        None => (true, format!("{} elements", alg.len())),
        Some(f) => (false, format!("{f:?}")),
    }
}

fn round_trip(alg: &BooleanAlg) -> Result<(bool, String)> {
    let space = stone_space(alg);
    Ok(match space.round_trip_fault(alg)? {
        None => (true, format!("{} points", space.len())),
        Some(f) => (false, f),
    })
}

pub fn run(name: &str, loaded: &Loaded, cfg: &RunConfig) -> Result<Report> {
    let names: Vec<&'static str> = match name {
        "all" => SUITES.to_vec(),
        _ => vec![*SUITES.iter().find(|s| **s == name).ok_or_else(|| {
            Error::input(format!(
                "unknown suite {name:?}; known: all, {}",
                SUITES.join(", ")
            ))
        })?],
    };
    let mut checks = Vec::new();
    for suite in names {
        let mut r = Recorder {
            suite,
            checks: Vec::new(),
        };
        match suite {
            "boolean" => boolean(&mut r, loaded, cfg)?,
            "modularity" => modularity(&mut r, loaded, cfg)?,
            "stone" => stone(&mut r, loaded, cfg)?,
            "centlat" => centlat(&mut r, loaded, cfg)?,
            "branch" => branch(&mut r, loaded, cfg)?,
            "radicals" => radicals(&mut r, loaded, cfg)?,
            "identities" => identities(&mut r, loaded, cfg)?,
            _ => unreachable!(),
        }
        checks.extend(r.checks);
    }
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    Ok(Report {
        suite: name.to_string(),
        checks,
        passed,
    })
}

fn boolean(r: &mut Recorder, l: &Loaded, cfg: &RunConfig) -> Result<()> {
    r.check("lc algebra axioms", || {
        Ok(axioms(&lc_for(l, cfg)?.1.algebra))
    })?;
    r.check("ld algebra axioms", || {
        let m = cfg.margin(&l.fg)?;
        let mv = MarginView::new(&l.fg, m)?;
        Ok(axioms(&ld_lattice(&mv, l.fg.ambient(), m.deep)?.algebra))
    })?;
    if let Some(ta) = &l.tree {
        for level in 0..ta.tree.depth.min(3) {
            r.check(format!("clopen algebra axioms, level {level}"), || {
                Ok(axioms(&clopen_algebra(ta.tree, level)?.0))
            })?;
        }
    }
    Ok(())
}

fn modularity(r: &mut Recorder, l: &Loaded, cfg: &RunConfig) -> Result<()> {
    let mw = cfg.max_witness(&l.fg);
    r.check(format!("ln lattice modular, max witness {mw}"), || {
        let lat = ln_lattice(&l.fg, mw, cfg.class_budget())?;
        Ok(match lat.lattice().non_modular_triple() {
            None => (true, format!("{} classes", lat.len())),
            Some(t) => (false, format!("non-modular triple {t:?}")),
        })
    })
}

fn stone(r: &mut Recorder, l: &Loaded, cfg: &RunConfig) -> Result<()> {
    r.check("lc algebra round trip", || {
        round_trip(&lc_for(l, cfg)?.1.algebra)
    })?;
    r.check("ld algebra round trip", || {
        let m = cfg.margin(&l.fg)?;
        let mv = MarginView::new(&l.fg, m)?;
        round_trip(&ld_lattice(&mv, l.fg.ambient(), m.deep)?.algebra)
    })?;
    if let Some(ta) = &l.tree {
        for level in 0..ta.tree.depth.min(3) {
            r.check(format!("clopen algebra round trip, level {level}"), || {
                round_trip(&clopen_algebra(ta.tree, level)?.0)
            })?;
        }
    }
    Ok(())
}

fn centlat(r: &mut Recorder, l: &Loaded, cfg: &RunConfig) -> Result<()> {
    r.check("lc algebra validated", || {
        let lc = lc_for(l, cfg)?.1;
        if !lc.validated && cfg.unsafe_mode {
            return Err(Error::precondition(
                "built in unsafe mode; screening not passed",
            ));
        }
        Ok((lc.validated, format!("{} classes", lc.len())))
    })?;
    r.check("perp2 projection", || {
        let (m, lc) = lc_for(l, cfg)?;
        let ctx = CentContext::new(&l.fg, m, cfg.unsafe_mode)?;
        let ln = ln_lattice(&l.fg, cfg.max_witness(&l.fg), cfg.class_budget())?;
        let p = perp2_projection_check(&ctx, &ln, &lc)?;
        Ok((
            p.passed(),
            format!("{} of {} classes margin-valid", p.valid, p.total),
        ))
    })?;
    if let Some(ta) = &l.tree {
        let level = cfg.clopen_level(ta);
        r.check(format!("theta embedding, level {level}"), || {
            let ctx = CentContext::new(&l.fg, cfg.margin(&l.fg)?, cfg.unsafe_mode)?;
            let t = theta_embedding(&ctx, ta, level)?;
            let ok = t.injective && t.meets && t.complements && t.in_ld != Some(false);
            Ok((ok, format!("{} clopens", t.classes.len())))
        })?;
    }
    Ok(())
}

fn branch(r: &mut Recorder, l: &Loaded, cfg: &RunConfig) -> Result<()> {
    let Some(ta) = &l.tree else {
        return r.check("branch certificate", || {
            Err(Error::precondition("not a tree spec"))
        });
    };
    let level = cfg.clopen_level(ta);
    r.check(format!("branch certificate, level {level}"), || {
        let c = branch_certify(ta, level)?;
        Ok((
            true,
            format!("weakly {} locally {}", c.weakly_branch, c.locally_branch),
        ))
    })?;
    r.check("rist = C(C(rist)) for every clopen", || {
        let ctx = CentContext::new(&l.fg, cfg.margin(&l.fg)?, cfg.unsafe_mode)?;
        let mut bad = Vec::new();
        let clopens = clopens_to_level(ta, level)?;
        for c in &clopens {
            let rep = latrist_verify(&ctx, ta, c)?;
            if !rep.holds {
                bad.push(rep.addresses.join(","));
            }
        }
        Ok((
            bad.is_empty(),
            format!("{} clopens, failing: {bad:?}", clopens.len()),
        ))
    })
}

fn radicals(r: &mut Recorder, l: &Loaded, cfg: &RunConfig) -> Result<()> {
    let fg = &l.fg;
    let m = cfg.margin(fg)?;
    let budget = cfg.order_budget();
    if fg.ambient().order() > budget {
        return r.check("radicals", || {
            Err(Error::precondition("group order above the budget"))
        });
    }
    let q = qz_hypercentre_search(fg, m, budget)?;
    let rr = regular_radical_search(fg, m, budget)?;
    r.check(
        "quasi-hypercentre is the least passing normal subgroup",
        || {
            Ok((
                q.unique() && q.requotient_passes,
                format!("{} minimal", q.minimal.len()),
            ))
        },
    )?;
    r.check(
        "regular radical is the least passing normal subgroup",
        || {
            Ok((
                rr.unique() && rr.requotient_passes,
                format!("{} minimal", rr.minimal.len()),
            ))
        },
    )?;
    r.check("quasi-hypercentre inside the regular radical", || {
        Ok((q.result.is_subgroup_of(&rr.result), String::new()))
    })?;
    r.check("radicals stable under passing to U_1", || {
        let s = stability_checks(fg, m, 1, budget).map_err(|e| match e {
            Error::Resource { what, .. } => Error::precondition(format!("over budget: {what}")),
            e => e,
        })?;
        Ok((s.holds(), format!("{s:?}")))
    })
}

/// Chain members, rigid stabilisers of clopens up to the clopen level and,
/// for small groups, every normal subgroup.
fn test_subgroups(l: &Loaded, cfg: &RunConfig) -> Result<Vec<GroupHandle>> {
    let mut hs: Vec<GroupHandle> = l.fg.chain().to_vec();
    if let Some(ta) = &l.tree {
        for c in clopens_to_level(ta, cfg.clopen_level(ta))? {
            hs.push(ta.rist(&c)?);
        }
    }
    if l.fg.ambient().order() <= SMALL_ORDER {
        hs.extend(l.fg.ambient().normal_subgroups(SMALL_ORDER)?);
    }
    hs.sort_by_key(subgroup_key);
    hs.dedup();
    Ok(hs)
}

const SMALL_ORDER: u128 = 1 << 10;

fn identities(r: &mut Recorder, l: &Loaded, cfg: &RunConfig) -> Result<()> {
    let fg = &l.fg;
    let g = fg.ambient();
    let hs = test_subgroups(l, cfg)?;
    r.check("C(C(C(H))) = C(H)", || {
        for h in &hs {
            if !elcent_check(g, h)? {
                return Ok((false, format!("fails at {}", subgroup_key(h))));
            }
        }
        Ok((true, format!("{} subgroups", hs.len())))
    })?;
    r.check(
        "QC(H) ∩ N(H) = C(H) when H has trivial quasi-centre",
        || {
            let mut applicable = 0;
            for h in &hs {
                for i in 0..=fg.depth() {
                    match bewcor_at(fg, h, i) {
                        Ok(true) => applicable += 1,
                        Ok(false) => {
                            return Ok((
                                false,
                                format!("fails at level {i} for {}", subgroup_key(h)),
                            ))
                        }
                        Err(Error::Precondition { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok((
                true,
                format!("{applicable} applicable (subgroup, level) pairs"),
            ))
        },
    )?;
    r.check("C_U(H ∩ U) independent of U, by window", || {
        let m = cfg.margin(fg)?;
        // the identity assumes what the screening certifies
        let ctx = CentContext::new(fg, m, false)?;
        let mut pairs = 0;
        for h in &hs {
            for p in centraliser_stability(&ctx.view, h, m.visible.max(1))? {
                if !p.windowed {
                    return Ok((
                        false,
                        format!("levels {:?} for {}", p.levels, subgroup_key(h)),
                    ));
                }
                pairs += 1;
            }
        }
        Ok((true, format!("{pairs} level pairs")))
    })?;
    // Outside the hypothesis (no abelian normal subgroup) a failure is
    // reported as skipped with the witness.
    let normals: Vec<&GroupHandle> = hs.iter().filter(|h| h.is_normal_in(g)).collect();
    r.check(
        "centraliser identities on pairs of normal subgroups",
        || {
            for &a in &normals {
                for &b in &normals {
                    if !cclem_identities(g, a, b)?.holds() {
                        cclem_check(g, a, b)?;
                        return Ok((false, format!("orders {} and {}", a.order(), b.order())));
                    }
                }
            }
            Ok((true, format!("{} normal subgroups", normals.len())))
        },
    )
}
