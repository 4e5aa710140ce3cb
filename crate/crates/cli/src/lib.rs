//! Command dispatch for the `locnorm` binary. Every command turns a loaded
//! group spec into one JSON artifact (optionally DOT) plus a verdict.

use locnorm_core::branch::{branch_certify, clopens_to_level, latrist_verify, theta_embedding};
use locnorm_core::centlat::{lc_algebra, CentContext, LcAlgebra};
use locnorm_core::decomp::ld_lattice;
use locnorm_core::filtered::{FilteredGroup, Margin};
use locnorm_core::filtration::{
    fixed_classes, ln_lattice, subgroup_key, LnLattice, MarginView, DEFAULT_CLASS_BUDGET,
};
use locnorm_core::io::{catalog, GroupSpecFile, Loaded};
use locnorm_core::radicals::{
    c_semisimple_check, qz_hypercentre, qz_hypercentre_search, regular_radical_search, QzMode,
    RadicalSearch, DEFAULT_RADICAL_BUDGET,
};
use locnorm_core::stone::stone_space;
use locnorm_core::tree::{ClopenSet, TreeAction};
use locnorm_core::{Error, GroupHandle, Result};
use serde_json::{json, Value};

pub mod suites;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Ln,
    Ld,
    Lc,
    Stone,
    Branch,
    Radicals,
    FixedPoints,
    Verify,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Dot,
}

#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub margin_i: Option<usize>,
    pub margin_j: Option<usize>,
    pub max_witness: Option<usize>,
    /// Clopen level for tree commands, chain level for `ld`.
    pub depth: Option<usize>,
    pub budget: Option<u64>,
    pub format: Format,
    pub suite: Option<String>,
    pub unsafe_mode: bool,
}

/// What a command produced. `ok` is false when a checked identity failed.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub json: Value,
    pub dot: Option<String>,
    pub ok: bool,
}

impl Artifact {
    fn new(json: Value) -> Self {
        Artifact {
            json,
            dot: None,
            ok: true,
        }
    }

    /// The bytes to write for `format`. Pretty JSON with sorted keys, so
    /// equal inputs give byte-identical output.
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.json).expect("json") + "\n"),
            Format::Dot => self
                .dot
                .clone()
                .ok_or_else(|| Error::input("this command has no DOT output")),
        }
    }
}

/// `path` or `@name` for a catalog group.
pub fn load_input(input: &str) -> Result<Loaded> {
    match input.strip_prefix('@') {
        Some(name) => catalog::load(name),
        None => GroupSpecFile::read(std::path::Path::new(input))?.load(),
    }
}

impl RunConfig {
    /// Explicit levels, or `(min(k, 2), min(k, 2) - 1)`: the shallowest
    /// margin with a nontrivial window.
    pub fn margin(&self, fg: &FilteredGroup) -> Result<Margin> {
        let k = fg.depth();
        let i = self.margin_i.unwrap_or(k.min(2));
        let j = self.margin_j.unwrap_or(i.saturating_sub(1));
        let m = Margin::new(i, j);
        fg.check_margin(m)?;
        Ok(m)
    }

    pub fn max_witness(&self, fg: &FilteredGroup) -> usize {
        self.max_witness.unwrap_or(fg.depth().saturating_sub(1))
    }

    pub fn class_budget(&self) -> usize {
        self.budget.map_or(DEFAULT_CLASS_BUDGET, |b| b as usize)
    }

    pub fn order_budget(&self) -> u128 {
        self.budget.map_or(DEFAULT_RADICAL_BUDGET, u128::from)
    }

    /// Clopen level for tree commands; defaults to two above the leaves.
    pub fn clopen_level(&self, ta: &TreeAction) -> usize {
        self.depth.unwrap_or(ta.tree.depth.saturating_sub(2))
    }
}

pub fn group_json(h: &GroupHandle) -> Value {
    let gens: Vec<Vec<usize>> = h
        .canonical_generators()
        .unwrap_or_else(|_| h.generators().to_vec())
        .iter()
        .map(|g| g.to_vec())
        .collect();
    let order =
        u64::try_from(h.order()).map_or_else(|_| json!(h.order().to_string()), |o| json!(o));
    json!({ "order": order, "generators": gens })
}

fn tree_of(loaded: &Loaded) -> Result<&TreeAction> {
    loaded
        .tree
        .as_ref()
        .ok_or_else(|| Error::precondition("this command needs a tree spec"))
}

/// Sources for the centraliser algebra: rigid stabilisers of the cones at
/// the clopen level for trees, the chain members otherwise.
pub fn seeds(loaded: &Loaded, cfg: &RunConfig) -> Result<Vec<GroupHandle>> {
    match &loaded.tree {
        Some(ta) => {
            let level = cfg.clopen_level(ta);
            if level >= ta.tree.depth {
                return Err(Error::input(format!(
                    "clopen level {level} is not above the leaves"
                )));
            }
            ta.tree
                .vertices_at(level)
                .map(|v| ta.rist(&ClopenSet::cone(ta.tree, v)))
                .collect()
        }
        None => Ok(loaded.fg.chain()[1..].to_vec()),
    }
}

pub fn lc_for(loaded: &Loaded, cfg: &RunConfig) -> Result<(Margin, LcAlgebra)> {
    let m = cfg.margin(&loaded.fg)?;
    let ctx = CentContext::new(&loaded.fg, m, cfg.unsafe_mode)?;
    let lc = lc_algebra(&ctx, &seeds(loaded, cfg)?, cfg.class_budget())?;
    Ok((m, lc))
}

/// Indices of the sublattice generated by the pieces `rist(v) ∩ U_k` for
/// the vertices `v` at `level`, together with `0` and `∞`.
pub fn piece_sublattice(ta: &TreeAction, lat: &LnLattice, level: usize) -> Result<Vec<usize>> {
    if level >= ta.tree.depth {
        return Err(Error::input(format!(
            "level {level} is not above the leaves"
        )));
    }
    let l = lat.lattice();
    let mut set = vec![l.bottom()];
    set.extend(l.top());
    for v in ta.tree.vertices_at(level) {
        let piece = ta
            .rist(&ClopenSet::cone(ta.tree, v))?
            .intersection(ta.fg.deepest())?;
        let a = lat.find(&piece).ok_or_else(|| {
            Error::precondition("a level piece is not in the lattice; raise --max-witness")
        })?;
        set.push(a);
    }
    loop {
        let mut next = set.clone();
        for &a in &set {
            for &b in &set {
                next.push(l.meet(a, b));
                next.push(l.join(a, b));
            }
        }
        next.sort_unstable();
        next.dedup();
        if next.len() == set.len() {
            return Ok(next);
        }
        set = next;
    }
}

fn margin_json(m: Margin) -> Value {
    json!({ "deep": m.deep, "visible": m.visible })
}

fn search_json(s: &RadicalSearch) -> Value {
    json!({
        "subgroup": group_json(&s.result),
        "minimal_passing": s.minimal.len(),
        "unique": s.unique(),
        "requotient_passes": s.requotient_passes,
    })
}

pub fn run(cmd: Command, loaded: &Loaded, cfg: &RunConfig) -> Result<Artifact> {
    let fg = &loaded.fg;
    match cmd {
        Command::Ln => {
            let lat = ln_lattice(fg, cfg.max_witness(fg), cfg.class_budget())?;
            let mut v = lat.to_json();
            v["modular"] = lat.lattice().is_modular().into();
            let mut dot = lat.lattice().to_dot();
            if let (Some(ta), Some(level)) = (&loaded.tree, cfg.depth) {
                let sub = lat
                    .lattice()
                    .restrict(&piece_sublattice(ta, &lat, level)?)?;
                v = sub.to_json();
                v["level"] = level.into();
                v["modular"] = sub.is_modular().into();
                dot = sub.to_dot();
            }
            let mut a = Artifact::new(v);
            a.dot = Some(dot);
            Ok(a)
        }
        Command::FixedPoints => {
            let lat = ln_lattice(fg, cfg.max_witness(fg), cfg.class_budget())?;
            let fixed = fixed_classes(fg, &lat)?;
            let keys: Vec<&str> = fixed.iter().map(|&a| lat.lattice().key(a)).collect();
            let mut a = Artifact::new(json!({
                "max_witness": lat.max_witness(),
                "lattice_size": lat.len(),
                "fixed": keys,
            }));
            a.dot = Some(lat.lattice().restrict(&fixed)?.to_dot());
            Ok(a)
        }
        Command::Ld => {
            let m = cfg.margin(fg)?;
            let mv = MarginView::new(fg, m)?;
            let level = cfg.depth.unwrap_or(m.deep);
            let ld = ld_lattice(&mv, fg.ambient(), level)?;
            let sources: Vec<Value> = ld.sources.iter().map(group_json).collect();
            let mut v = ld.algebra.to_json();
            v["level"] = level.into();
            v["margin"] = margin_json(m);
            v["factors"] = sources.into();
            let mut a = Artifact::new(v);
            a.ok = ld.algebra.axiom_fault().is_none();
            a.dot = Some(ld.algebra.lattice().to_dot());
            Ok(a)
        }
        Command::Lc => {
            let (m, lc) = lc_for(loaded, cfg)?;
            let mut v = lc.to_json();
            v["margin"] = margin_json(m);
            let mut a = Artifact::new(v);
            a.ok = lc.algebra.axiom_fault().is_none();
            a.dot = Some(lc.algebra.lattice().to_dot());
            Ok(a)
        }
        Command::Stone => {
            let (m, lc) = lc_for(loaded, cfg)?;
            let space = stone_space(&lc.algebra);
            let fault = space.round_trip_fault(&lc.algebra)?;
            let mut v = space.to_json(&lc.algebra);
            v["margin"] = margin_json(m);
            v["round_trip_fault"] = json!(fault);
            let mut a = Artifact::new(v);
            a.ok = fault.is_none();
            Ok(a)
        }
        Command::Branch => {
            let ta = tree_of(loaded)?;
            let level = cfg.clopen_level(ta);
            let cert = branch_certify(ta, level)?;
            let mut v = json!({ "certificate": cert });
            let mut ok = true;
            if cert.weakly_branch {
                let m = cfg.margin(fg)?;
                let ctx = CentContext::new(fg, m, cfg.unsafe_mode)?;
                let theta = theta_embedding(&ctx, ta, level)?;
                ok &= theta.injective && theta.meets && theta.complements;
                let mut latrist = Vec::new();
                for c in clopens_to_level(ta, level)? {
                    let r = latrist_verify(&ctx, ta, &c)?;
                    ok &= r.holds;
                    latrist.push(r);
                }
                v["margin"] = margin_json(m);
                v["theta"] = json!(theta);
                v["latrist"] = json!(latrist);
            }
            let mut a = Artifact::new(v);
            a.ok = ok;
            Ok(a)
        }
        Command::Radicals => radicals(fg, cfg),
        Command::Verify => {
            let name = cfg.suite.as_deref().unwrap_or("all");
            let report = suites::run(name, loaded, cfg)?;
            let mut a = Artifact::new(json!(report));
            a.ok = report.passed;
            Ok(a)
        }
    }
}

fn radicals(fg: &FilteredGroup, cfg: &RunConfig) -> Result<Artifact> {
    let m = cfg.margin(fg)?;
    let budget = cfg.order_budget();
    let screening = c_semisimple_check(fg, m)?;
    let mut v = json!({
        "margin": margin_json(m),
        "semisimple": screening.passed(),
        "screening": screening,
    });
    let mut ok = true;
    if fg.ambient().order() <= budget {
        let q = qz_hypercentre_search(fg, m, budget)?;
        let r = regular_radical_search(fg, m, budget)?;
        let contained = q.result.is_subgroup_of(&r.result);
        ok = q.requotient_passes && r.requotient_passes && contained;
        v["route"] = "exhaustive".into();
        v["quasi_hypercentre"] = search_json(&q);
        v["regular_radical"] = search_json(&r);
        v["contained"] = contained.into();
    } else {
        let k = qz_hypercentre(fg, m, QzMode::QcRoute, budget)?;
        v["route"] = "qc".into();
        v["quasi_hypercentre"] = json!({ "subgroup": group_json(&k), "key": subgroup_key(&k) });
    }
    let mut a = Artifact::new(v);
    a.ok = ok;
    Ok(a)
}
