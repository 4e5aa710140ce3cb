//! Deterministic Schreier-Sims: a base and strong generating set with
//! explicit transversals, enough for exact order, membership and
//! enumeration.

use crate::perm::Perm;

#[derive(Debug, Clone)]
struct Level {
    base: usize,
    gens: Vec<Perm>,
    orbit: Vec<usize>,
    /// `transversal[p] = Some(u)` with `base^u = p` for every orbit point.
    transversal: Vec<Option<Perm>>,
}

impl Level {
    fn new(degree: usize, base: usize) -> Self {
        let mut transversal = vec![None; degree];
        transversal[base] = Some(Perm::identity(degree));
        Level {
            base,
            gens: Vec::new(),
            orbit: vec![base],
            transversal,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct StabChain {
    degree: usize,
    levels: Vec<Level>,
}

impl StabChain {
    pub fn new(degree: usize, generators: &[Perm]) -> Self {
        let mut chain = StabChain {
            degree,
            levels: Vec::new(),
        };
        for g in generators {
            chain.extend(0, g.clone());
        }
        chain
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        let (residue, level) = self.sift(g.clone(), 0);
        level == self.levels.len() && residue.is_identity()
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    /// Adds `g` to the group; `g` must fix the base points of levels `< from`.
    pub fn extend(&mut self, from: usize, g: Perm) {
        let (residue, stop) = self.sift(g, from);
        if residue.is_identity() {
            return;
        }
        if stop == self.levels.len() {
            let base = residue
                .first_moved_point()
                .expect("non-identity residue moves a point");
            self.levels.push(Level::new(self.degree, base));
        }
        let mut pending = Vec::new();
        for level in from..=stop {
            self.add_generator(level, residue.clone(), &mut pending);
        }
        for (level, schreier) in pending {
            self.extend(level + 1, schreier);
        }
    }

    /// Strips `g` through the levels from `from` on. Returns the residue and
    /// the level where stripping stopped (`levels.len()` if it got through).
    fn sift(&self, mut g: Perm, from: usize) -> (Perm, usize) {
        for (idx, level) in self.levels.iter().enumerate().skip(from) {
            let image = g.apply(level.base);
            match &level.transversal[image] {
                Some(u) => g = g.then(&u.inverse()),
                None => return (g, idx),
            }
        }
        (g, self.levels.len())
    }

    /// Extends the orbit of `level` for the new generator and queues the
    /// Schreier generators of every (point, generator) pair not seen before.
    fn add_generator(&mut self, level: usize, g: Perm, pending: &mut Vec<(usize, Perm)>) {
        let lvl = &mut self.levels[level];
        lvl.gens.push(g);
        let newest = lvl.gens.len() - 1;
        let old_len = lvl.orbit.len();
        let mut schreier = |t_p: &Perm, s: &Perm, t_q: &Perm| {
            let y = t_p.then(s).then(&t_q.inverse());
            if !y.is_identity() {
                pending.push((level, y));
            }
        };
        // old points against the new generator only
        for idx in 0..old_len {
            let p = lvl.orbit[idx];
            let s = &lvl.gens[newest];
            let q = s.apply(p);
            let t_p = lvl.transversal[p].clone().unwrap();
            match &lvl.transversal[q] {
                Some(t_q) => schreier(&t_p, s, t_q),
                None => {
                    lvl.transversal[q] = Some(t_p.then(s));
                    lvl.orbit.push(q);
                }
            }
        }
        // new points against every generator
        let mut idx = old_len;
        while idx < lvl.orbit.len() {
            let p = lvl.orbit[idx];
            let t_p = lvl.transversal[p].clone().unwrap();
            for s in &lvl.gens {
                let q = s.apply(p);
                match &lvl.transversal[q] {
                    Some(t_q) => schreier(&t_p, s, t_q),
                    None => {
                        lvl.transversal[q] = Some(t_p.then(s));
                        lvl.orbit.push(q);
                    }
                }
            }
            idx += 1;
        }
    }

    /// Calls `visit` on every group element exactly once.
    pub fn for_each_element(&self, mut visit: impl FnMut(&Perm)) {
        fn walk(levels: &[Level], acc: &Perm, visit: &mut impl FnMut(&Perm)) {
            match levels.split_last() {
                None => visit(acc),
                Some((last, rest)) => {
                    // g = u_deep ... u_1 u_0: walk from the deepest level up
                    for &p in &last.orbit {
                        let u = last.transversal[p].as_ref().unwrap();
                        walk(rest, &acc.then(u), visit);
                    }
                }
            }
        }
        walk(&self.levels, &Perm::identity(self.degree), &mut visit);
    }
}
