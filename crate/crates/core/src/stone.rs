//! Stone duality for finite Boolean algebras: points are atoms, and group
//! actions and embeddings are transported to the point side.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::filtered::FilteredGroup;
use crate::lattice::{lattice_hom_check, BooleanAlg, HomKind};
use crate::perm::Perm;
use crate::permgroup::GroupHandle;
use crate::tree::{ClopenSet, TreeSpec, Vertex};

/// Points of a finite Boolean algebra: one per atom, with the principal
/// ultrafilter of that atom as its membership row.
#[derive(Clone, Debug)]
pub struct StoneSpace {
    atoms: Vec<usize>,
    membership: Vec<FixedBitSet>,
}

impl StoneSpace {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Algebra index of the atom behind point `p`.
    pub fn atom(&self, p: usize) -> usize {
        self.atoms[p]
    }

    pub fn point_of_atom(&self, a: usize) -> Option<usize> {
        self.atoms.iter().position(|&x| x == a)
    }

    /// `p ∈ S(α)`.
    pub fn contains(&self, p: usize, alpha: usize) -> bool {
        self.membership[p][alpha]
    }

    /// The clopen `S(α)` as a point bitmask.
    pub fn clopen(&self, alpha: usize) -> u64 {
        (0..self.len())
            .filter(|&p| self.contains(p, alpha))
            .fold(0, |m, p| m | 1 << p)
    }

    /// First point whose member set is not an ultrafilter.
    pub fn ultrafilter_fault(&self, alg: &BooleanAlg) -> Option<usize> {
        (0..self.len()).find(|&p| {
            let m = &self.membership[p];
            let n = alg.len();
            m[alg.bottom()]
                || !m[alg.top()]
                || (0..n).any(|a| m[a] == m[alg.complement(a)])
                || (0..n).any(|a| {
                    m[a] && (0..n).any(|b| (alg.leq(a, b) && !m[b]) || (m[b] && !m[alg.meet(a, b)]))
                })
        })
    }

    /// Checks that `α ↦ S(α)` is an isomorphism onto the power set of the
    /// points, and that every element is the join of the atoms below it.
    pub fn round_trip_fault(&self, alg: &BooleanAlg) -> Result<Option<String>> {
        if let Some(p) = self.ultrafilter_fault(alg) {
            return Ok(Some(format!("point {p} is not an ultrafilter")));
        }
        let clopens = BooleanAlg::power_set(self.len())?;
        let f: Vec<usize> = (0..alg.len()).map(|a| self.clopen(a) as usize).collect();
        let mut seen = vec![false; clopens.len()];
        for &x in &f {
            if std::mem::replace(&mut seen[x], true) {
                return Ok(Some(format!("two elements share the clopen {x:#b}")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Ok(Some("some clopen is not hit".into()));
        }
        if let Some(fault) = lattice_hom_check(
            alg.lattice(),
            clopens.lattice(),
            &f,
            HomKind::Boolean,
            Some((alg.complement_table(), clopens.complement_table())),
        )? {
            return Ok(Some(format!("clopen map fails {:?}", fault)));
        }
        for a in 0..alg.len() {
            let j = alg
                .atoms_below(a)
                .into_iter()
                .fold(alg.bottom(), |acc, t| alg.join(acc, t));
            if j != a {
                return Ok(Some(format!("element {a} is not the join of its atoms")));
            }
        }
        Ok(None)
    }

    pub fn to_json(&self, alg: &BooleanAlg) -> Value {
        let points: Vec<Value> = (0..self.len())
            .map(|p| {
                json!({
                    "atom": alg.key(self.atoms[p]),
                    "members": self.membership[p].ones().collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "points": points })
    }
}

pub fn stone_space(alg: &BooleanAlg) -> StoneSpace {
    let atoms = alg.atoms();
    let membership = atoms
        .iter()
        .map(|&t| {
            let mut row = FixedBitSet::with_capacity(alg.len());
            for a in 0..alg.len() {
                if alg.leq(t, a) {
                    row.insert(a);
                }
            }
            row
        })
        .collect();
    StoneSpace { atoms, membership }
}

/// The algebra of level-`level` clopens: element `m` is the union of the
/// cones over the vertices whose bit is set in `m`.
pub fn clopen_algebra(tree: TreeSpec, level: usize) -> Result<(BooleanAlg, Vec<ClopenSet>)> {
    if level > tree.depth {
        return Err(Error::input("clopen level exceeds tree depth"));
    }
    let n = tree.level_size(level);
    let alg = BooleanAlg::power_set(n)?;
    let clopens = (0..alg.len())
        .map(|m| {
            let vs: Vec<Vertex> = (0..n)
                .filter(|i| m >> i & 1 == 1)
                .map(|index| Vertex { level, index })
                .collect();
            ClopenSet::from_vertices(tree, &vs)
        })
        .collect::<Result<_>>()?;
    Ok((alg, clopens))
}

type ActFn = dyn Fn(&Perm) -> Vec<usize> + Send + Sync;

/// A group acting on an algebra: `act(g)` is the induced permutation of
/// algebra elements.
#[derive(Clone)]
pub struct AlgebraAction {
    pub group: GroupHandle,
    act: Arc<ActFn>,
}

impl std::fmt::Debug for AlgebraAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AlgebraAction")
            .field("group", &self.group)
            .finish()
    }
}

impl AlgebraAction {
    pub fn new(
        group: GroupHandle,
        act: impl Fn(&Perm) -> Vec<usize> + Send + Sync + 'static,
    ) -> Self {
        AlgebraAction {
            group,
            act: Arc::new(act),
        }
    }

    pub fn trivial(group: GroupHandle, alg: &BooleanAlg) -> Self {
        let n = alg.len();
        Self::new(group, move |_| (0..n).collect())
    }

    /// Action on clopens through the leaves.
    pub fn on_clopens(group: GroupHandle, clopens: Vec<ClopenSet>) -> Self {
        Self::new(group, move |g| {
            clopens
                .iter()
                .map(|c| {
                    let img = c.image(g);
                    clopens
                        .iter()
                        .position(|d| d == &img)
                        .expect("clopen algebra is invariant")
                })
                .collect()
        })
    }

    /// Action through a permutation of the atoms (one image per point).
    pub fn on_points(
        group: GroupHandle,
        alg: &BooleanAlg,
        point_perm: impl Fn(&Perm) -> Vec<usize> + Send + Sync + 'static,
    ) -> Self {
        let space = stone_space(alg);
        let alg = alg.clone();
        Self::new(group, move |g| {
            let sigma = point_perm(g);
            transport_to_algebra(&alg, &space, &sigma)
        })
    }

    pub fn apply(&self, g: &Perm, a: usize) -> usize {
        (self.act)(g)[a]
    }

    pub fn induced(&self, g: &Perm) -> Vec<usize> {
        (self.act)(g)
    }

    /// Each generator acts by an automorphism, and the action law holds on
    /// generator pairs. Returns the first offending generator index.
    pub fn law_fault(&self, alg: &BooleanAlg) -> Result<Option<usize>> {
        let gens = self.group.generators();
        for (i, g) in gens.iter().enumerate() {
            let f = self.induced(g);
            if f.len() != alg.len() || !is_automorphism(alg, &f)? {
                return Ok(Some(i));
            }
            for h in gens {
                let gh = self.induced(&g.then(h));
                let fh = self.induced(h);
                if (0..alg.len()).any(|a| gh[a] != fh[f[a]]) {
                    return Ok(Some(i));
                }
            }
        }
        Ok(None)
    }

    /// Permutation of the Stone points induced by `g`.
    pub fn on_space(&self, space: &StoneSpace, g: &Perm) -> Vec<usize> {
        let f = self.induced(g);
        (0..space.len())
            .map(|p| {
                space
                    .point_of_atom(f[space.atom(p)])
                    .expect("automorphisms permute atoms")
            })
            .collect()
    }
}

fn is_automorphism(alg: &BooleanAlg, f: &[usize]) -> Result<bool> {
    let mut seen = vec![false; alg.len()];
    for &x in f {
        if x >= alg.len() || std::mem::replace(&mut seen[x], true) {
            return Ok(false);
        }
    }
    Ok(lattice_hom_check(
        alg.lattice(),
        alg.lattice(),
        f,
        HomKind::Boolean,
        Some((alg.complement_table(), alg.complement_table())),
    )?
    .is_none())
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothReport {
    pub smooth: bool,
    /// Element whose stabiliser contains no chain member.
    pub witness: Option<usize>,
    /// Least `i` with `U_i` fixing each element, where one exists.
    pub levels: Vec<Option<usize>>,
}

/// Every element's stabiliser contains some `U_i`.
pub fn is_smooth(
    action: &AlgebraAction,
    fg: &FilteredGroup,
    alg: &BooleanAlg,
) -> Result<SmoothReport> {
    if &action.group != fg.ambient() {
        return Err(Error::input("action group is not the filtered group"));
    }
    let induced: Vec<Vec<Vec<usize>>> = (0..=fg.depth())
        .map(|i| {
            fg.level(i)
                .generators()
                .iter()
                .map(|g| action.induced(g))
                .collect()
        })
        .collect();
    let levels: Vec<Option<usize>> = (0..alg.len())
        .map(|a| (0..=fg.depth()).find(|&i| induced[i].iter().all(|f| f[a] == a)))
        .collect();
    let witness = levels.iter().position(Option::is_none);
    Ok(SmoothReport {
        smooth: witness.is_none(),
        witness,
        levels,
    })
}

/// Dual of an embedding: point map `S(B) → S(A)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointMap(pub Vec<usize>);

impl PointMap {
    /// `self` after `other`: `x ↦ self(other(x))`.
    pub fn after(&self, other: &PointMap) -> PointMap {
        PointMap(other.0.iter().map(|&x| self.0[x]).collect())
    }
}

/// Pulls ultrafilters back along `embed: A → B`; each atom of `B` lies
/// below exactly one atom of `A`'s image.
pub fn dual_map(a: &BooleanAlg, b: &BooleanAlg, embed: &[usize]) -> Result<PointMap> {
    if let Some(f) = lattice_hom_check(
        a.lattice(),
        b.lattice(),
        embed,
        HomKind::Boolean,
        Some((a.complement_table(), b.complement_table())),
    )? {
        return Err(Error::violation(format!(
            "not a Boolean homomorphism: {f:?}"
        )));
    }
    let mut seen = vec![false; b.len()];
    for (x, &y) in embed.iter().enumerate() {
        if std::mem::replace(&mut seen[y], true) {
            return Err(Error::violation(format!("not injective at element {x}")));
        }
    }
    let (sa, sb) = (stone_space(a), stone_space(b));
    let map = (0..sb.len())
        .map(|q| {
            let t = sb.atom(q);
            (0..sa.len())
                .find(|&p| b.leq(t, embed[sa.atom(p)]))
                .ok_or_else(|| Error::internal("atom of B below no image atom"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointMap(map))
}

/// The dual map of an equivariant embedding, verified surjective and
/// equivariant on generators.
pub fn equivariant_quotient(
    a: &BooleanAlg,
    b: &BooleanAlg,
    embed: &[usize],
    act_a: &AlgebraAction,
    act_b: &AlgebraAction,
) -> Result<PointMap> {
    if act_a.group != act_b.group {
        return Err(Error::input("actions of different groups"));
    }
    for (i, g) in act_a.group.generators().iter().enumerate() {
        let (fa, fb) = (act_a.induced(g), act_b.induced(g));
        if let Some(x) = (0..a.len()).find(|&x| embed[fa[x]] != fb[embed[x]]) {
            return Err(Error::violation(format!(
                "embedding is not equivariant: generator {i}, element {}",
                a.key(x)
            )));
        }
    }
    let map = dual_map(a, b, embed)?;
    let (sa, sb) = (stone_space(a), stone_space(b));
    let mut hit = vec![false; sa.len()];
    for &p in &map.0 {
        hit[p] = true;
    }
    if let Some(p) = hit.iter().position(|h| !h) {
        return Err(Error::internal(format!("dual map misses point {p}")));
    }
    for g in act_a.group.generators() {
        let (pa, pb) = (act_a.on_space(&sa, g), act_b.on_space(&sb, g));
        if (0..sb.len()).any(|q| map.0[pb[q]] != pa[map.0[q]]) {
            return Err(Error::internal("dual map is not equivariant"));
        }
    }
    Ok(map)
}

/// Algebra map induced by a permutation of the points:
/// `α ↦ ⋁ σ(atoms below α)`.
pub fn transport_to_algebra(alg: &BooleanAlg, space: &StoneSpace, sigma: &[usize]) -> Vec<usize> {
    (0..alg.len())
        .map(|a| {
            (0..space.len())
                .filter(|&p| space.contains(p, a))
                .fold(alg.bottom(), |acc, p| alg.join(acc, space.atom(sigma[p])))
        })
        .collect()
}

/// Point permutation induced by an algebra automorphism.
pub fn transport_to_points(space: &StoneSpace, f: &[usize]) -> Option<Vec<usize>> {
    (0..space.len())
        .map(|p| space.point_of_atom(f[space.atom(p)]))
        .collect()
}

/// The two transports are mutually inverse on `sigma`, and the algebra map
/// is an automorphism.
pub fn aut_transport_check(alg: &BooleanAlg, sigma: &[usize]) -> Result<bool> {
    let space = stone_space(alg);
    if sigma.len() != space.len() {
        return Err(Error::input("point permutation has the wrong length"));
    }
    let f = transport_to_algebra(alg, &space, sigma);
    if !is_automorphism(alg, &f)? {
        return Ok(false);
    }
    Ok(transport_to_points(&space, &f).as_deref() == Some(sigma))
}

/// Every automorphism of `alg`, as point permutations (all permutations of
/// the atoms, each checked).
pub fn automorphisms(alg: &BooleanAlg) -> Result<Vec<Vec<usize>>> {
    let n = stone_space(alg).len();
    if n > 8 {
        return Err(Error::resource("atom permutations", 40320, factorial(n)));
    }
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut |p| out.push(p.to_vec()));
    out.retain(|p| aut_transport_check(alg, p).unwrap_or(false));
    Ok(out)
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn permutations(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, visit);
        p.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{TreeAction, WreathAutomaton};

    fn w(depth: usize) -> TreeAction {
        let tree = TreeSpec::new(2, depth).unwrap();
        TreeAction::truncate(&WreathAutomaton::full(2, depth), tree).unwrap()
    }

    #[test]
    fn spaces() {
        let b3 = BooleanAlg::power_set(3).unwrap();
        let s = stone_space(&b3);
        assert_eq!(s.len(), 3);
        assert_eq!(s.round_trip_fault(&b3).unwrap(), None);
        let b0 = BooleanAlg::power_set(0).unwrap();
        assert!(stone_space(&b0).is_empty());
        let b1 = BooleanAlg::power_set(1).unwrap();
        assert_eq!(stone_space(&b1).len(), 1);
        let (c2, _) = clopen_algebra(TreeSpec::new(2, 3).unwrap(), 2).unwrap();
        assert_eq!(c2.len(), 16);
        assert_eq!(stone_space(&c2).len(), 4);
    }

    #[test]
    fn smooth_tree_actions() {
        let t = w(3);
        for level in 0..=2 {
            let (alg, clopens) = clopen_algebra(t.tree, level).unwrap();
            let act = AlgebraAction::on_clopens(t.group().clone(), clopens);
            assert_eq!(act.law_fault(&alg).unwrap(), None);
            let r = is_smooth(&act, &t.fg, &alg).unwrap();
            assert!(r.smooth);
            assert!(r.levels.iter().all(|l| l.unwrap() <= level));
        }
    }

    #[test]
    fn constant_chain_transitive_action_is_not_smooth() {
        let a5 = GroupHandle::new(
            5,
            vec![
                Perm::from_cycles(5, &[&[0, 1, 2, 3, 4]]).unwrap(),
                Perm::from_cycles(5, &[&[0, 1, 2]]).unwrap(),
            ],
        )
        .unwrap();
        let fg = FilteredGroup::constant(a5.clone(), 2);
        let alg = BooleanAlg::power_set(5).unwrap();
        let act = AlgebraAction::on_points(a5.clone(), &alg, |g| g.to_vec());
        assert_eq!(act.law_fault(&alg).unwrap(), None);
        let r = is_smooth(&act, &fg, &alg).unwrap();
        assert!(!r.smooth);
        assert_eq!(r.witness, Some(1));
        let triv = AlgebraAction::trivial(a5, &alg);
        assert!(is_smooth(&triv, &fg, &alg).unwrap().smooth);
    }

    #[test]
    fn address_truncation() {
        let t = w(3);
        let (a, ca) = clopen_algebra(t.tree, 1).unwrap();
        let (b, cb) = clopen_algebra(t.tree, 2).unwrap();
        let embed: Vec<usize> = ca
            .iter()
            .map(|c| cb.iter().position(|d| d == c).unwrap())
            .collect();
        let act_a = AlgebraAction::on_clopens(t.group().clone(), ca);
        let act_b = AlgebraAction::on_clopens(t.group().clone(), cb.clone());
        let map = equivariant_quotient(&a, &b, &embed, &act_a, &act_b).unwrap();
        assert_eq!(map, PointMap(vec![0, 0, 1, 1]));
        let id: Vec<usize> = (0..b.len()).collect();
        let idmap = equivariant_quotient(&b, &b, &id, &act_b, &act_b).unwrap();
        assert_eq!(idmap, PointMap(vec![0, 1, 2, 3]));
        // {0, ∞} → constant map
        let (z, cz) = clopen_algebra(t.tree, 0).unwrap();
        let ez: Vec<usize> = cz
            .iter()
            .map(|c| cb.iter().position(|d| d == c).unwrap())
            .collect();
        let act_z = AlgebraAction::on_clopens(t.group().clone(), cz);
        let zmap = equivariant_quotient(&z, &b, &ez, &act_z, &act_b).unwrap();
        assert_eq!(zmap, PointMap(vec![0; 4]));
        // functoriality: dual(b∘a) = dual(a)∘dual(b)
        let eza: Vec<usize> = (0..z.len()).map(|x| embed[ez_in(&ez, &embed, x)]).collect();
        assert_eq!(eza, ez);
        let za = dual_map(
            &z,
            &a,
            &(0..z.len())
                .map(|x| ez_in(&ez, &embed, x))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(zmap, za.after(&map));
    }

    /// Index in A of the image of `x ∈ {0,∞}`.
    fn ez_in(ez: &[usize], embed: &[usize], x: usize) -> usize {
        embed.iter().position(|&y| y == ez[x]).unwrap()
    }

    #[test]
    fn bad_embedding_rejected() {
        let a = BooleanAlg::power_set(1).unwrap();
        let b = BooleanAlg::power_set(2).unwrap();
        assert!(dual_map(&a, &b, &[0, 1]).is_err());
        assert!(dual_map(&a, &b, &[0, 3]).is_ok());
    }

    #[test]
    fn automorphisms_of_eight() {
        let b3 = BooleanAlg::power_set(3).unwrap();
        assert!(aut_transport_check(&b3, &[0, 1, 2]).unwrap());
        assert!(aut_transport_check(&b3, &[1, 0, 2]).unwrap());
        let s = stone_space(&b3);
        let f = transport_to_algebra(&b3, &s, &[1, 0, 2]);
        assert_eq!(transport_to_points(&s, &f), Some(vec![1, 0, 2]));
        assert_eq!(automorphisms(&b3).unwrap().len(), 6);
    }

    proptest::proptest! {
        #[test]
        fn generated_subalgebras_round_trip(n in 1usize..6, seed in proptest::collection::vec(0usize..64, 0..4)) {
            let alg = BooleanAlg::power_set(n).unwrap();
            let seed: Vec<usize> = seed.into_iter().map(|x| x % alg.len()).collect();
            let (sub, _) = alg.subalgebra_generated(&seed).unwrap();
            let space = stone_space(&sub);
            proptest::prop_assert_eq!(1usize << space.len(), sub.len());
            proptest::prop_assert_eq!(space.round_trip_fault(&sub).unwrap(), None);
        }
    }
}
