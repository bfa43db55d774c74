//! A small finite permutation-group engine: orbits, stabilizer chains
//! (deterministic Schreier–Sims), order, membership sifting and exactly
//! uniform random elements.
//!
//! Domains are lists of tagged points, typically the disjoint union of
//! windows (window-index, point); permutations act on point indices.

use std::fmt;

use num::BigUint;
use rand::Rng;

use crate::{Error, Result};

/// A point of a finite domain: a window index (1-based) and an integer
/// coordinate inside that window.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DomainPoint {
    pub window: usize,
    pub point: i64,
}

/// A permutation of the index set 0..degree of some domain.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm {
            images: (0..degree).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &y in &images {
            if y >= n || seen[y] {
                return Err(Error::InvalidInput(
                    "images are not a permutation of the domain".into(),
                ));
            }
            seen[y] = true;
        }
        Ok(Perm { images })
    }

    /// Caller guarantees `images` is a permutation of 0..len.
    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Perm::from_images(images.clone()).is_ok());
        Perm { images }
    }

    /// Restriction to the first `n` points; the caller guarantees they are
    /// preserved as a block.
    pub(crate) fn restrict(&self, n: usize) -> Perm {
        debug_assert!(self.images[..n].iter().all(|&y| y < n));
        Perm {
            images: self.images[..n].to_vec(),
        }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, p: usize) -> usize {
        self.images[p]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &y)| i == y)
    }

    /// "Apply `self`, then `other`" — same convention as the rest of the
    /// crate.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            images: self.images.iter().map(|&y| other.images[y]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &y) in self.images.iter().enumerate() {
            images[y] = i;
        }
        Perm { images }
    }

    /// The conjugate `self^by = by^-1 * self * by`.
    pub fn conjugate(&self, by: &Perm) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &y) in self.images.iter().enumerate() {
            images[by.images[i]] = by.images[y];
        }
        Perm { images }
    }

    pub fn fixed_points(&self) -> usize {
        self.images.iter().enumerate().filter(|&(i, &y)| i == y).count()
    }

    fn first_moved(&self) -> Option<usize> {
        self.images.iter().enumerate().find(|&(i, &y)| i != y).map(|(i, _)| i)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.images)
    }
}

/// A faithful action: a tagged domain together with generator permutations.
#[derive(Clone, Debug)]
pub struct FiniteAction {
    points: Vec<DomainPoint>,
    generators: Vec<Perm>,
}

impl FiniteAction {
    pub fn new(points: Vec<DomainPoint>, generators: Vec<Perm>) -> Result<Self> {
        for g in &generators {
            if g.degree() != points.len() {
                return Err(Error::DegreeMismatch {
                    left: g.degree(),
                    right: points.len(),
                });
            }
        }
        Ok(FiniteAction { points, generators })
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[DomainPoint] {
        &self.points
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }
}

struct Level {
    base: usize,
    gens: Vec<Perm>,
    /// transversal[p] maps base -> p for p in the orbit
    transversal: Vec<Option<Perm>>,
    /// orbit in BFS discovery order (deterministic)
    orbit: Vec<usize>,
}

impl Level {
    fn new(base: usize, degree: usize) -> Self {
        let mut transversal = vec![None; degree];
        transversal[base] = Some(Perm::identity(degree));
        Level {
            base,
            gens: Vec::new(),
            transversal,
            orbit: vec![base],
        }
    }

    /// BFS orbit of the base under `gens`, in discovery order.
    fn recompute_orbit(&mut self, gens: &[Perm], degree: usize) {
        self.transversal = vec![None; degree];
        self.transversal[self.base] = Some(Perm::identity(degree));
        self.orbit = vec![self.base];
        let mut head = 0;
        while head < self.orbit.len() {
            let p = self.orbit[head];
            head += 1;
            for g in gens {
                let q = g.apply(p);
                if self.transversal[q].is_none() {
                    let rep = self.transversal[p].as_ref().expect("p in orbit").compose(g);
                    self.transversal[q] = Some(rep);
                    self.orbit.push(q);
                }
            }
        }
    }
}

/// A base and strong generating set for the group generated by a finite
/// action. Built once, then queried for order, membership and uniform random
/// elements.
pub struct StabChain {
    degree: usize,
    levels: Vec<Level>,
}

impl StabChain {
    /// Deterministic Schreier–Sims: every Schreier generator is sifted, no
    /// randomized verification.
    pub fn build(action: &FiniteAction) -> StabChain {
        let mut chain = StabChain {
            degree: action.degree(),
            levels: Vec::new(),
        };
        for g in action.generators() {
            chain.insert(g.clone());
        }
        chain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Base points, one per level.
    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    /// The strong generators valid at level i: everything stored at levels
    /// >= i (those all fix the bases of the levels above them).
    fn strong_gens_for(&self, i: usize) -> Vec<Perm> {
        self.levels[i..]
            .iter()
            .flat_map(|l| l.gens.iter().cloned())
            .collect()
    }

    fn insert(&mut self, g: Perm) {
        let (residue, at) = self.sift_from(0, g);
        if residue.is_identity() {
            return;
        }
        self.place_residue(at, residue);
        for j in (0..=at).rev() {
            self.complete_level(j);
        }
    }

    fn place_residue(&mut self, at: usize, residue: Perm) {
        if at == self.levels.len() {
            let base = residue.first_moved().expect("residue moves a point");
            self.levels.push(Level::new(base, self.degree));
        }
        self.levels[at].gens.push(residue);
    }

    /// Re-establishes the chain invariant at level i, assuming all deeper
    /// levels are complete: recomputes the orbit and sifts every Schreier
    /// generator through the levels below, placing non-trivial residues and
    /// re-completing the affected deeper levels bottom-up.
    fn complete_level(&mut self, i: usize) {
        'rescan: loop {
            let gens = self.strong_gens_for(i);
            self.levels[i].recompute_orbit(&gens, self.degree);
            let orbit = self.levels[i].orbit.clone();
            for &p in &orbit {
                for s in &gens {
                    let schreier = {
                        let lvl = &self.levels[i];
                        let t_p = lvl.transversal[p].as_ref().expect("orbit point");
                        let q = s.apply(p);
                        let t_q = lvl.transversal[q].as_ref().expect("orbit point");
                        t_p.compose(s).compose(&t_q.inverse())
                    };
                    let (residue, at) = self.sift_from(i + 1, schreier);
                    if residue.is_identity() {
                        continue;
                    }
                    self.place_residue(at, residue);
                    for j in ((i + 1)..=at).rev() {
                        self.complete_level(j);
                    }
                    continue 'rescan;
                }
            }
            return;
        }
    }

    /// Sifts `g` through levels `from..`, returning the residue and the level
    /// it got stuck at (= levels.len() if it sifted through completely).
    fn sift_from(&self, from: usize, mut g: Perm) -> (Perm, usize) {
        for (i, level) in self.levels.iter().enumerate().skip(from) {
            if g.is_identity() {
                return (g, i);
            }
            let p = g.apply(level.base);
            match &level.transversal[p] {
                None => return (g, i),
                Some(t) => g = g.compose(&t.inverse()),
            }
        }
        (g, self.levels.len())
    }

    /// Group order: the product of the orbit lengths.
    pub fn order(&self) -> BigUint {
        let mut order = BigUint::from(1u32);
        for level in &self.levels {
            order *= BigUint::from(level.orbit.len());
        }
        order
    }

    /// Exact membership via sifting.
    pub fn contains(&self, g: &Perm) -> Result<bool> {
        if g.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: g.degree(),
                right: self.degree,
            });
        }
        let (residue, _) = self.sift_from(0, g.clone());
        Ok(residue.is_identity())
    }

    /// Exactly uniform random element: one independent uniform coset
    /// representative per level.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Perm {
        let mut acc = Perm::identity(self.degree);
        for level in self.levels.iter().rev() {
            let p = level.orbit[rng.gen_range(0..level.orbit.len())];
            let t = level.transversal[p].as_ref().expect("orbit point");
            acc = acc.compose(t);
        }
        acc
    }

    /// Enumerates all elements (products of transversal representatives),
    /// refusing when the order exceeds `cap`.
    pub fn elements(&self, cap: u64) -> Result<Vec<Perm>> {
        let order = self.order();
        if order > BigUint::from(cap) {
            return Err(Error::EnumerationRefused { size: order, cap });
        }
        let mut out = vec![Perm::identity(self.degree)];
        for level in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * level.orbit.len());
            for g in &out {
                for &p in &level.orbit {
                    let t = level.transversal[p].as_ref().expect("orbit point");
                    next.push(g.compose(t));
                }
            }
            out = next;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cycle_perm(degree: usize, points: &[usize]) -> Perm {
        let mut images: Vec<usize> = (0..degree).collect();
        for (i, &p) in points.iter().enumerate() {
            images[p] = points[(i + 1) % points.len()];
        }
        Perm::from_images(images).unwrap()
    }

    fn alternating_action(n: usize) -> FiniteAction {
        // A_n = <(0,1,2), (0,1,...,n-1)> for odd n
        assert!(n % 2 == 1);
        let points = (0..n)
            .map(|i| DomainPoint {
                window: 1,
                point: i as i64,
            })
            .collect();
        let three = cycle_perm(n, &[0, 1, 2]);
        let full = cycle_perm(n, &(0..n).collect::<Vec<_>>());
        FiniteAction::new(points, vec![three, full]).unwrap()
    }

    #[test]
    fn order_of_a5() {
        let chain = StabChain::build(&alternating_action(5));
        assert_eq!(chain.order(), BigUint::from(60u32));
    }

    #[test]
    fn order_of_alternating_windows() {
        // (2r+1)!/2 for r = 2, 3, 4
        for (n, expected) in [(5usize, 60u64), (7, 2520), (9, 181440)] {
            let chain = StabChain::build(&alternating_action(n));
            assert_eq!(chain.order(), BigUint::from(expected));
        }
    }

    #[test]
    fn empty_generating_set_is_trivial() {
        let action = FiniteAction::new(
            (0..4)
                .map(|i| DomainPoint { window: 1, point: i })
                .collect(),
            vec![],
        )
        .unwrap();
        let chain = StabChain::build(&action);
        assert_eq!(chain.order(), BigUint::from(1u32));
        assert!(chain.contains(&Perm::identity(4)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(chain.random_element(&mut rng).is_identity());
    }

    #[test]
    fn membership_matches_brute_force() {
        // exhaustive check on A_5: sifting agrees with the enumerated set
        let chain = StabChain::build(&alternating_action(5));
        let elements: std::collections::HashSet<Vec<usize>> = chain
            .elements(100)
            .unwrap()
            .into_iter()
            .map(|p| p.images().to_vec())
            .collect();
        assert_eq!(elements.len(), 60);
        let mut checked = 0;
        let mut member = 0;
        permute_all(5, &mut |images| {
            let p = Perm::from_images(images.to_vec()).unwrap();
            let by_chain = chain.contains(&p).unwrap();
            let by_set = elements.contains(images);
            assert_eq!(by_chain, by_set);
            checked += 1;
            if by_chain {
                member += 1;
            }
        });
        assert_eq!(checked, 120);
        assert_eq!(member, 60);
    }

    // calls f exactly once per permutation of 0..n
    fn permute_all(n: usize, f: &mut impl FnMut(&[usize])) {
        fn rec(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
            if k == items.len() {
                f(items);
                return;
            }
            for i in k..items.len() {
                items.swap(k, i);
                rec(items, k + 1, f);
                items.swap(k, i);
            }
        }
        let mut items: Vec<usize> = (0..n).collect();
        rec(&mut items, 0, f);
    }

    #[test]
    fn odd_permutation_rejected_by_alternating_chain() {
        let chain = StabChain::build(&alternating_action(5));
        let transposition = cycle_perm(5, &[0, 1]);
        assert!(!chain.contains(&transposition).unwrap());
        for g in chain.elements(100).unwrap() {
            assert!(g.degree() == 5);
        }
    }

    #[test]
    fn strong_generators_are_members() {
        let action = alternating_action(7);
        let chain = StabChain::build(&action);
        for g in action.generators() {
            assert!(chain.contains(g).unwrap());
        }
    }

    #[test]
    fn random_elements_stay_in_the_group() {
        let chain = StabChain::build(&alternating_action(5));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let g = chain.random_element(&mut rng);
            assert!(chain.contains(&g).unwrap());
        }
    }

    #[test]
    fn domain_mismatch_is_reported() {
        let chain = StabChain::build(&alternating_action(5));
        assert!(matches!(
            chain.contains(&Perm::identity(6)),
            Err(Error::DegreeMismatch { .. })
        ));
    }
}
