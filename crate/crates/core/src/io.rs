//! Group specification files and the built-in catalog.
//!
//! A spec is JSON, either a permutation group with an explicit chain or a
//! wreath automaton truncated to a finite depth:
//!
//! ```json
//! {"kind": "permutation", "degree": 4,
//!  "generators": {"r": [1, 2, 3, 0], "s": [2, 1, 0, 3]},
//!  "filtration": [["r"], [[2, 3, 0, 1]]]}
//! ```
//!
//! Filtration entries list the generators of `U_1, U_2, …`; `U_0` is the
//! group generated by every named generator. An entry is a generator name
//! or an inline image array.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtered::FilteredGroup;
use crate::perm::Perm;
use crate::permgroup::GroupHandle;
use crate::tree::{AutomatonState, TreeAction, TreeSpec, WreathAutomaton};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpecFile {
    Permutation(PermutationSpec),
    Tree(TreeSpecFile),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermutationSpec {
    pub degree: usize,
    pub generators: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub filtration: Vec<Vec<GenRef>>,
    /// Default margin width; 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GenRef {
    Name(String),
    Images(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpecFile {
    pub arity: usize,
    pub depth: usize,
    pub states: BTreeMap<String, AutomatonState>,
    pub generators: Vec<String>,
}

/// A parsed spec: always a filtered group, plus the tree when there is one.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub fg: FilteredGroup,
    pub tree: Option<TreeAction>,
}

impl GroupSpecFile {
    /// Parses JSON; syntax and shape errors report their line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::input(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serialises");
        s.push('\n');
        s
    }

    /// Builds the group and checks every chain member is normal.
    pub fn load(&self) -> Result<Loaded> {
        match self {
            GroupSpecFile::Permutation(p) => Ok(Loaded {
                fg: p.load()?,
                tree: None,
            }),
            GroupSpecFile::Tree(t) => {
                let tree = TreeSpec::new(t.arity, t.depth)?;
                let aut = WreathAutomaton::new(t.arity, t.states.clone(), t.generators.clone())?;
                let ta = TreeAction::truncate(&aut, tree)?;
                Ok(Loaded {
                    fg: ta.fg.clone(),
                    tree: Some(ta),
                })
            }
        }
    }

    /// Permutation spec listing the chain explicitly.
    pub fn from_filtered(fg: &FilteredGroup) -> Self {
        let n = fg.ambient().degree();
        let generators = fg
            .ambient()
            .generators()
            .iter()
            .enumerate()
            .map(|(i, g)| (format!("g{i}"), g.to_vec()))
            .collect();
        let filtration = fg.chain()[1..]
            .iter()
            .map(|u| {
                u.generators()
                    .iter()
                    .map(|g| GenRef::Images(g.to_vec()))
                    .collect()
            })
            .collect();
        GroupSpecFile::Permutation(PermutationSpec {
            degree: n,
            generators,
            filtration,
            margin: (fg.margin() != 1).then_some(fg.margin()),
        })
    }

    pub fn from_automaton(aut: &WreathAutomaton, depth: usize) -> Self {
        GroupSpecFile::Tree(TreeSpecFile {
            arity: aut.arity,
            depth,
            states: aut.states.clone(),
            generators: aut.generators.clone(),
        })
    }
}

impl PermutationSpec {
    fn perm(&self, r: &GenRef) -> Result<Perm> {
        let images = match r {
            GenRef::Name(name) => self
                .generators
                .get(name)
                .ok_or_else(|| Error::input(format!("unknown generator {name:?}")))?,
            GenRef::Images(v) => v,
        };
        if images.len() != self.degree {
            return Err(Error::input(format!(
                "image array of length {} in a spec of degree {}",
                images.len(),
                self.degree
            )));
        }
        Perm::from_images(images.clone())
    }

    fn load(&self) -> Result<FilteredGroup> {
        let all: Vec<Perm> = self
            .generators
            .keys()
            .map(|k| self.perm(&GenRef::Name(k.clone())))
            .collect::<Result<_>>()?;
        let mut chain = vec![GroupHandle::new(self.degree, all)?];
        for level in &self.filtration {
            let gens = level.iter().map(|r| self.perm(r)).collect::<Result<_>>()?;
            chain.push(GroupHandle::new(self.degree, gens)?);
        }
        FilteredGroup::with_margin(chain, self.margin.unwrap_or(1).min(self.filtration.len()))
    }
}

/// Named inputs used throughout the tests, benches and examples.
pub mod catalog {
    use super::*;

    pub const NAMES: &[&str] = &[
        "w3", "w4", "odometer", "cyclic8", "z8xz8", "z4xw3", "d4", "a5", "s3xs3", "s3xs4",
    ];

    pub fn spec(name: &str) -> Option<GroupSpecFile> {
        Some(match name {
            "w3" => GroupSpecFile::from_automaton(&WreathAutomaton::full(2, 3), 3),
            "w4" => GroupSpecFile::from_automaton(&WreathAutomaton::full(2, 4), 4),
            "odometer" => GroupSpecFile::from_automaton(&WreathAutomaton::odometer(), 3),
            _ => GroupSpecFile::from_filtered(&filtered(name)?),
        })
    }

    /// Looks a name up, failing with an input error listing the choices.
    pub fn load(name: &str) -> Result<Loaded> {
        spec(name)
            .ok_or_else(|| {
                Error::input(format!(
                    "no catalog group {name:?}; known: {}",
                    NAMES.join(", ")
                ))
            })?
            .load()
    }

    pub fn tree(depth: usize) -> TreeAction {
        TreeAction::truncate(
            &WreathAutomaton::full(2, depth),
            TreeSpec::new(2, depth).unwrap(),
        )
        .unwrap()
    }

    /// `Z/n ⊇ 2Z/n ⊇ 4Z/n ⊇ … ⊇ 0` for `n` a power of two.
    pub fn cyclic_chain(n: usize) -> FilteredGroup {
        let c = Perm::from_images((0..n).map(|x| (x + 1) % n).collect()).unwrap();
        let mut chain = Vec::new();
        let mut step = 1;
        while step <= n {
            chain.push(GroupHandle::new(n, vec![c.pow(step as u64)]).unwrap());
            step *= 2;
        }
        FilteredGroup::new(chain).unwrap()
    }

    fn cycle(n: usize, offset: usize, len: usize) -> Perm {
        let cyc: Vec<usize> = (offset..offset + len).collect();
        Perm::from_cycles(n, &[&cyc]).unwrap()
    }

    fn filtered(name: &str) -> Option<FilteredGroup> {
        Some(match name {
            "cyclic8" => cyclic_chain(8),
            "z8xz8" => {
                let (a, b) = (cycle(16, 0, 8), cycle(16, 8, 8));
                let chain = (0..3)
                    .map(|i| GroupHandle::new(16, vec![a.pow(1 << i), b.pow(1 << i)]).unwrap())
                    .collect();
                FilteredGroup::new(chain).unwrap()
            }
            "z4xw3" => FilteredGroup::product(&cyclic_chain(4), &tree(3).fg).unwrap(),
            "d4" => {
                let (r, s) = (cycle(4, 0, 4), Perm::from_cycles(4, &[&[0, 2]]).unwrap());
                let chain = vec![
                    GroupHandle::new(4, vec![r.clone(), s]).unwrap(),
                    GroupHandle::new(4, vec![r.clone()]).unwrap(),
                    GroupHandle::new(4, vec![r.pow(2)]).unwrap(),
                ];
                FilteredGroup::new(chain).unwrap()
            }
            "a5" => FilteredGroup::constant(GroupHandle::alternating(5), 2),
            "s3xs3" | "s3xs4" => {
                let m = if name == "s3xs3" { 3 } else { 4 };
                let s3 = GroupHandle::symmetric(3);
                let sm = GroupHandle::symmetric(m);
                let g = GroupHandle::direct_product(&s3, &sm);
                let n = g.degree();
                // U_1 = the product of the alternating groups
                let a = GroupHandle::direct_product(
                    &GroupHandle::alternating(3),
                    &GroupHandle::alternating(m),
                );
                FilteredGroup::new(vec![g, a, GroupHandle::trivial(n)]).unwrap()
            }
            _ => return None,
        })
    }
}
