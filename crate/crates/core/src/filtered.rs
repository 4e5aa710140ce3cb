//! Finite groups with a descending chain of normal subgroups.

use crate::error::{Error, Result};
use crate::permgroup::GroupHandle;

/// A pair of chain levels `(deep, visible)` with `visible < deep`.
///
/// Margin-aware predicates only trust what happens above `visible` for
/// objects cut down to `deep`; anything confined to `U_visible` is treated
/// as invisible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Margin {
    pub deep: usize,
    pub visible: usize,
}

impl Margin {
    pub fn new(deep: usize, visible: usize) -> Self {
        Margin { deep, visible }
    }

    pub fn pair(self) -> (usize, usize) {
        (self.deep, self.visible)
    }
}

/// `U_0 ⊇ U_1 ⊇ … ⊇ U_k`, every `U_i` normal in `U_0`.
#[derive(Clone, Debug)]
pub struct FilteredGroup {
    chain: Vec<GroupHandle>,
    margin: usize,
}

impl FilteredGroup {
    /// `chain[0]` is taken as the ambient group. Rejects chains that do not
    /// descend or whose members are not normal in the ambient group.
    pub fn new(chain: Vec<GroupHandle>) -> Result<Self> {
        Self::with_margin(chain, 1)
    }

    pub fn with_margin(chain: Vec<GroupHandle>, margin: usize) -> Result<Self> {
        let Some(ambient) = chain.first() else {
            return Err(Error::input(
                "a filtration needs at least the ambient group",
            ));
        };
        for (i, pair) in chain.windows(2).enumerate() {
            if !pair[1].is_subgroup_of(&pair[0]) {
                return Err(Error::input(format!(
                    "chain member U_{} is not contained in U_{}",
                    i + 1,
                    i
                )));
            }
        }
        for (i, u) in chain.iter().enumerate() {
            if !ambient.normalises(u) {
                return Err(Error::input(format!(
                    "chain member U_{i} is not normal in the ambient group"
                )));
            }
        }
        let depth = chain.len() - 1;
        if margin > depth {
            return Err(Error::input(format!(
                "margin {margin} exceeds chain depth {depth}"
            )));
        }
        Ok(FilteredGroup { chain, margin })
    }

    /// Filtration with every member equal to `g`.
    pub fn constant(g: GroupHandle, depth: usize) -> Self {
        FilteredGroup {
            chain: vec![g; depth + 1],
            margin: 0,
        }
    }

    /// Product filtration `A_i × B_i` on the disjoint union of the point
    /// sets; both chains must have the same depth.
    pub fn product(a: &FilteredGroup, b: &FilteredGroup) -> Result<Self> {
        if a.depth() != b.depth() {
            return Err(Error::input(
                "product filtration needs chains of equal depth",
            ));
        }
        let chain = a
            .chain
            .iter()
            .zip(&b.chain)
            .map(|(x, y)| GroupHandle::direct_product(x, y))
            .collect();
        Self::with_margin(chain, a.margin.max(b.margin))
    }

    pub fn ambient(&self) -> &GroupHandle {
        &self.chain[0]
    }

    pub fn chain(&self) -> &[GroupHandle] {
        &self.chain
    }

    /// Index `k` of the deepest chain member.
    pub fn depth(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn level(&self, i: usize) -> &GroupHandle {
        &self.chain[i]
    }

    pub fn deepest(&self) -> &GroupHandle {
        &self.chain[self.depth()]
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// `(k, k - m)` for the stored margin width `m`.
    pub fn default_margin(&self) -> Margin {
        let k = self.depth();
        Margin::new(k, k - self.margin.min(k))
    }

    pub fn check_margin(&self, m: Margin) -> Result<()> {
        if m.deep > self.depth() {
            return Err(Error::input(format!(
                "margin level {} exceeds chain depth {}",
                m.deep,
                self.depth()
            )));
        }
        if m.visible > m.deep {
            return Err(Error::input(format!(
                "visible level {} lies below deep level {}",
                m.visible, m.deep
            )));
        }
        Ok(())
    }

    /// `U_i` with the inherited chain `U_i ⊇ U_{i+1} ⊇ … ⊇ U_k`.
    pub fn restrict_to_level(&self, i: usize) -> Result<FilteredGroup> {
        if i > self.depth() {
            return Err(Error::input(format!("level {i} exceeds chain depth")));
        }
        FilteredGroup::with_margin(self.chain[i..].to_vec(), self.margin.min(self.depth() - i))
    }

    /// The chain truncated at `U_j` (deepest member dropped below `j`).
    pub fn truncate_depth(&self, j: usize) -> Result<FilteredGroup> {
        if j > self.depth() {
            return Err(Error::input(format!("depth {j} exceeds chain depth")));
        }
        FilteredGroup::with_margin(self.chain[..=j].to_vec(), self.margin.min(j))
    }

    /// True when the deepest member is trivial, in which case every class
    /// collapses to zero.
    pub fn is_degenerate(&self) -> bool {
        self.deepest().is_trivial()
    }

    /// `h ∩ U_i`.
    pub fn cut(&self, h: &GroupHandle, i: usize) -> Result<GroupHandle> {
        h.intersection(&self.chain[i])
    }
}
