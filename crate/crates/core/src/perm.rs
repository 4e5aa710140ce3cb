//! Permutations of `{0, .., n-1}` stored as image arrays.
//!
//! Products are read left to right: `a.then(&b)` first applies `a`, then `b`,
//! so `p^(ab) = (p^a)^b`. Conjugation follows the same convention,
//! `x^g = g^-1 x g`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported permutation degree.
pub const MAX_DEGREE: usize = 4096;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u16>", into = "Vec<u16>")]
pub struct Perm {
    images: Vec<u16>,
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm {
            images: (0..degree as u16).collect(),
        }
    }

    /// Builds a permutation from its image array, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let degree = images.len();
        if degree > MAX_DEGREE {
            return Err(Error::input(format!(
                "degree {degree} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        let mut seen = vec![false; degree];
        for &p in &images {
            if p >= degree || seen[p] {
                return Err(Error::input(format!(
                    "image array {images:?} is not a bijection on 0..{degree}"
                )));
            }
            seen[p] = true;
        }
        Ok(Perm {
            images: images.into_iter().map(|p| p as u16).collect(),
        })
    }

    /// Builds a permutation on `degree` points from disjoint cycles.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (idx, &p) in cycle.iter().enumerate() {
                if p >= degree || touched[p] {
                    return Err(Error::input(format!(
                        "bad cycle {cycle:?} on {degree} points"
                    )));
                }
                touched[p] = true;
                images[p] = cycle[(idx + 1) % cycle.len()];
            }
        }
        Self::from_images(images)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.images.iter().map(|&p| p as usize)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.images().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &p)| i == p as usize)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            images: self
                .images
                .iter()
                .map(|&p| other.images[p as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0u16; self.degree()];
        for (i, &p) in self.images.iter().enumerate() {
            images[p as usize] = i as u16;
        }
        Perm { images }
    }

    /// `g^-1 self g`.
    pub fn conjugate_by(&self, g: &Perm) -> Perm {
        // (g^-1 x g)(p) : p -> g^-1(p) -> x -> g
        let mut images = vec![0u16; self.degree()];
        for (i, &p) in self.images.iter().enumerate() {
            images[g.images[i] as usize] = g.images[p as usize];
        }
        Perm { images }
    }

    pub fn commutes_with(&self, other: &Perm) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &p)| other.images[p as usize] == self.images[other.images[i] as usize])
    }

    /// Commutator `[self, other] = self^-1 other^-1 self other`.
    pub fn commutator(&self, other: &Perm) -> Perm {
        self.inverse().then(&other.inverse()).then(self).then(other)
    }

    pub fn pow(&self, mut e: u64) -> Perm {
        let mut base = self.clone();
        let mut acc = Perm::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            e >>= 1;
        }
        acc
    }

    pub fn order(&self) -> u64 {
        let mut seen = vec![false; self.degree()];
        let mut lcm = 1u64;
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                p = self.apply(p);
                len += 1;
            }
            lcm = lcm / gcd(lcm, len) * len;
        }
        lcm
    }

    pub fn first_moved_point(&self) -> Option<usize> {
        self.images
            .iter()
            .enumerate()
            .find(|(i, &p)| *i != p as usize)
            .map(|(i, _)| i)
    }

    /// Direct sum acting on `0..self.degree()` and then `other` shifted past it.
    pub fn direct_sum(&self, other: &Perm) -> Perm {
        let shift = self.degree() as u16;
        let mut images = self.images.clone();
        images.extend(other.images.iter().map(|&p| p + shift));
        Perm { images }
    }

    pub fn extend_to(&self, degree: usize) -> Perm {
        let mut images = self.images.clone();
        images.extend(self.degree() as u16..degree as u16);
        Perm { images }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl TryFrom<Vec<u16>> for Perm {
    type Error = Error;

    fn try_from(v: Vec<u16>) -> Result<Self> {
        Perm::from_images(v.into_iter().map(usize::from).collect())
    }
}

impl From<Perm> for Vec<u16> {
    fn from(p: Perm) -> Self {
        p.images
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Cycle notation, `()` for the identity.
impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.degree()];
        let mut wrote = false;
        for start in 0..self.degree() {
            if seen[start] || self.apply(start) == start {
                continue;
            }
            write!(f, "(")?;
            let mut p = start;
            let mut first = true;
            while !seen[p] {
                seen[p] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{p}")?;
                first = false;
                p = self.apply(p);
            }
            write!(f, ")")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}
