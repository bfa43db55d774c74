//! The subgroup cast of G(P): the finite subgroups L_i, the kernels G_i and
//! D_i, finitely generated subgroups H of N with stabilizer chains over a
//! faithful window action, membership in K_i = (H ∩ L_i)(G_i ∩ D_i), and the
//! Følner sets F_i = {σ^j l}.

use num::BigUint;
use rand::Rng;

use crate::neumann::{GroupElement, OddSequence};
use crate::permutation::WindowPerm;
use crate::stabchain::{DomainPoint, FiniteAction, Perm, StabChain};
use crate::{Error, Result};

/// Default cap on full enumerations (elements of F_i or of a subgroup).
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// The disjoint union of the windows 1..=depth, with index arithmetic for
/// moving between group elements and permutations of the tagged domain.
#[derive(Clone, Debug)]
pub struct WindowStack {
    seq: OddSequence,
    radii: Vec<i64>,
    offsets: Vec<usize>,
    degree: usize,
}

impl WindowStack {
    pub fn new(seq: &OddSequence, depth: usize) -> Result<Self> {
        assert!(depth >= 1);
        let mut radii = Vec::with_capacity(depth);
        let mut offsets = Vec::with_capacity(depth);
        let mut degree = 0usize;
        for j in 1..=depth {
            let r = seq.radius(j)?;
            radii.push(r);
            offsets.push(degree);
            degree += (2 * r + 1) as usize;
        }
        Ok(WindowStack {
            seq: seq.clone(),
            radii,
            offsets,
            degree,
        })
    }

    pub fn seq(&self) -> &OddSequence {
        &self.seq
    }

    pub fn depth(&self) -> usize {
        self.radii.len()
    }

    /// Total number of points, the degree of the permutation action.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> Vec<DomainPoint> {
        let mut out = Vec::with_capacity(self.degree);
        for (w, &r) in self.radii.iter().enumerate() {
            for x in -r..=r {
                out.push(DomainPoint {
                    window: w + 1,
                    point: x,
                });
            }
        }
        out
    }

    /// The action of an element on the stacked windows: coordinate j acts on
    /// block j. Faithful on L_depth.
    pub fn perm_of(&self, g: &GroupElement) -> Perm {
        debug_assert_eq!(g.seq(), &self.seq);
        let mut images = vec![0usize; self.degree];
        for (w, &r) in self.radii.iter().enumerate() {
            let coord = g.coordinate(w + 1).expect("stack windows are available");
            let base = self.offsets[w];
            for x in -r..=r {
                images[base + (x + r) as usize] = base + (coord.apply(x) + r) as usize;
            }
        }
        Perm::from_images(images).expect("coordinates are bijections")
    }

    /// Extracts the block of window j (1-based) from a domain permutation.
    pub fn window_perm(&self, p: &Perm, j: usize) -> WindowPerm {
        let r = self.radii[j - 1];
        let base = self.offsets[j - 1];
        let images = (-r..=r)
            .map(|x| p.apply(base + (x + r) as usize) as i64 - base as i64 - r)
            .collect();
        WindowPerm::from_images(r, images).expect("block-preserving permutation")
    }

    /// The unique element of L_depth whose coordinates 1..=depth are the
    /// blocks of `p`.
    pub fn element_from_perm(&self, p: &Perm) -> GroupElement {
        let coords = (1..=self.depth()).map(|j| self.window_perm(p, j)).collect();
        GroupElement::from_coordinates(&self.seq, 0, coords)
            .expect("blocks of a group action are even window permutations")
    }

    /// Extends the action of an element of L_{smaller.depth} to this deeper
    /// stack: the first blocks are copied and the remaining windows carry the
    /// element's tail (= its last explicit block) embedded.
    pub(crate) fn extend_from(&self, smaller: &WindowStack, p: &Perm) -> Perm {
        debug_assert!(smaller.depth() <= self.depth());
        debug_assert_eq!(p.degree(), smaller.degree());
        let mut images: Vec<usize> = (0..self.degree).collect();
        images[..smaller.degree].copy_from_slice(p.images());
        let last = smaller.depth();
        let r_last = smaller.radii[last - 1];
        let base_last = smaller.offsets[last - 1];
        for w in last..self.depth() {
            let r = self.radii[w];
            let base = self.offsets[w];
            for x in -r_last..=r_last {
                let y = p.apply(base_last + (x + r_last) as usize) as i64
                    - base_last as i64
                    - r_last;
                images[base + (x + r) as usize] = base + (y + r) as usize;
            }
        }
        Perm::from_images_unchecked(images)
    }

    /// True when the blocks of windows `from..=depth` all agree as finitely
    /// supported permutations, i.e. the represented element lies in L_from.
    pub(crate) fn stable_from(&self, p: &Perm, from: usize) -> bool {
        for w in from..self.depth() {
            // compare window w with window w+1 (1-based)
            let r_small = self.radii[w - 1];
            let r_big = self.radii[w];
            let base_small = self.offsets[w - 1];
            let base_big = self.offsets[w];
            for x in -r_big..=r_big {
                let img_big =
                    p.apply(base_big + (x + r_big) as usize) as i64 - base_big as i64 - r_big;
                let expected = if x.abs() <= r_small {
                    p.apply(base_small + (x + r_small) as usize) as i64
                        - base_small as i64
                        - r_small
                } else {
                    x
                };
                if img_big != expected {
                    return false;
                }
            }
        }
        true
    }
}

/// The 2r_i - 1 generators τ^{σ^j}, j ∈ [r_i - 1], of L_i.
pub fn l_generators(seq: &OddSequence, i: usize) -> Result<Vec<GroupElement>> {
    let r = seq.radius(i)?;
    let tau = GroupElement::tau(seq);
    let mut out = Vec::with_capacity((2 * r - 1) as usize);
    for j in -(r - 1)..=(r - 1) {
        out.push(tau.conjugate(&GroupElement::sigma_pow(seq, j))?);
    }
    Ok(out)
}

/// Membership in L_i: an element of N whose canonical prefix stabilizes by
/// window i.
pub fn in_l(g: &GroupElement, i: usize) -> bool {
    g.is_in_n() && g.prefix_len() <= i
}

/// Membership in G_i = ker(G -> ∏_{j<=i} A_j): the first i coordinates are
/// trivial.
pub fn in_g(g: &GroupElement, i: usize) -> Result<bool> {
    for j in 1..=i {
        if !g.coordinate(j)?.is_identity() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Membership in D_i = ker(G -> ℤ/(2r_i - 1)ℤ), via the abelianization.
pub fn in_d(g: &GroupElement, i: usize) -> Result<bool> {
    let modulus = 2 * g.seq().radius(i)? - 1;
    Ok(g.abelianization().rem_euclid(modulus) == 0)
}

/// A finitely generated (hence finite) subgroup H of N, stored as generators
/// plus a stabilizer chain over the faithful action on windows 1..=bound.
pub struct FiniteSubgroup {
    seq: OddSequence,
    generators: Vec<GroupElement>,
    bound: usize,
    stack: WindowStack,
    chain: StabChain,
}

impl FiniteSubgroup {
    /// Closes the generators into a subgroup. All generators must lie in N;
    /// the stabilizer bound is the largest stabilization index among them
    /// (products never leave L_bound).
    pub fn close(seq: &OddSequence, generators: Vec<GroupElement>) -> Result<Self> {
        let mut bound = 1;
        for g in &generators {
            bound = bound.max(g.stabilization_index()?);
        }
        let stack = WindowStack::new(seq, bound)?;
        let perms: Vec<Perm> = generators.iter().map(|g| stack.perm_of(g)).collect();
        let action = FiniteAction::new(stack.points(), perms)?;
        let chain = StabChain::build(&action);
        Ok(FiniteSubgroup {
            seq: seq.clone(),
            generators,
            bound,
            stack,
            chain,
        })
    }

    /// Parses a comma-separated list of generator words, e.g. `t, s^-1 t s`.
    pub fn parse(seq: &OddSequence, literal: &str) -> Result<Self> {
        let mut gens = Vec::new();
        for part in literal.split(',') {
            let word = part.trim();
            if word.is_empty() {
                continue;
            }
            gens.push(crate::neumann::evaluate_word(seq, word)?);
        }
        Self::close(seq, gens)
    }

    pub fn seq(&self) -> &OddSequence {
        &self.seq
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// The least b with H ≤ L_b that the closure certified.
    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn order(&self) -> BigUint {
        self.chain.order()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.is_in_n()
            && g.prefix_len() <= self.bound
            && self
                .chain
                .contains(&self.stack.perm_of(g))
                .expect("degrees match by construction")
    }

    /// Exactly uniform random element.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        self.stack.element_from_perm(&self.chain.random_element(rng))
    }

    /// All elements, refusing beyond `cap`.
    pub fn elements(&self, cap: u64) -> Result<Vec<GroupElement>> {
        Ok(self
            .chain
            .elements(cap)?
            .iter()
            .map(|p| self.stack.element_from_perm(p))
            .collect())
    }

    /// Streams all elements without materializing them as a vector.
    pub fn for_each_element(
        &self,
        cap: u64,
        mut f: impl FnMut(&GroupElement) -> Result<()>,
    ) -> Result<()> {
        for p in self.chain.elements(cap)? {
            f(&self.stack.element_from_perm(&p))?;
        }
        Ok(())
    }

    pub(crate) fn stack(&self) -> &WindowStack {
        &self.stack
    }

    /// Sifts a raw permutation of the stack's domain; meaningful only for
    /// permutations known to arise from elements of L_bound.
    pub(crate) fn chain_contains(&self, p: &Perm) -> bool {
        self.chain.contains(p).expect("degrees match by construction")
    }

    /// Raw chain elements (permutations of the window stack).
    pub(crate) fn chain_elements(&self, cap: u64) -> Result<Vec<Perm>> {
        self.chain.elements(cap)
    }

    /// The subgroup H ∩ L_i = {h ∈ H : i(h) <= i}.
    pub fn intersect_with_l(&self, i: usize) -> Result<FiniteSubgroup> {
        if i >= self.bound {
            // H itself: H ≤ L_bound ≤ L_i
            return FiniteSubgroup::close(&self.seq, self.generators.clone());
        }
        let members: Vec<GroupElement> = self
            .elements(ENUMERATION_CAP)?
            .into_iter()
            .filter(|h| in_l(h, i))
            .collect();
        FiniteSubgroup::close(&self.seq, members)
    }
}

/// Membership test for K_i = (H ∩ L_i)(G_i ∩ D_i), precomputed once per
/// (H, i) pair.
///
/// An element g lies in K_i exactly when its abelianization vanishes mod
/// 2r_i - 1 and its projection to the first i coordinates lies in the
/// projection of H ∩ L_i: for h ∈ H ∩ L_i the condition h^-1 g ∈ G_i ∩ D_i
/// reduces to those two checks. K_i itself (finite index, huge) is never
/// materialized.
pub struct KMembership {
    modulus: i64,
    stack: WindowStack,
    chain: StabChain,
}

impl KMembership {
    pub fn new(h: &FiniteSubgroup, i: usize) -> Result<Self> {
        let hl = h.intersect_with_l(i)?;
        let stack = WindowStack::new(&h.seq, i)?;
        let perms: Vec<Perm> = hl.generators().iter().map(|g| stack.perm_of(g)).collect();
        let action = FiniteAction::new(stack.points(), perms)?;
        let chain = StabChain::build(&action);
        let modulus = 2 * h.seq.radius(i)? - 1;
        Ok(KMembership {
            modulus,
            stack,
            chain,
        })
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.abelianization().rem_euclid(self.modulus) == 0
            && self
                .chain
                .contains(&self.stack.perm_of(g))
                .expect("degrees match by construction")
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub(crate) fn stack(&self) -> &WindowStack {
        &self.stack
    }

    /// Sifts the projection to windows 1..=i directly (no abelianization
    /// check).
    pub(crate) fn chain_contains(&self, p: &Perm) -> bool {
        self.chain.contains(p).expect("degrees match by construction")
    }
}

/// One-off membership in K_i; prefer [`KMembership`] for repeated queries.
pub fn in_k(g: &GroupElement, h: &FiniteSubgroup, i: usize) -> Result<bool> {
    Ok(KMembership::new(h, i)?.contains(g))
}

/// The Følner set F_i = {σ^j l : j ∈ [r_i - 1], l ∈ L_i}, stored in factored
/// form: |F_i| = (2r_i - 1)·|L_i| and enumeration is only unfolded on demand.
pub struct FolnerSet {
    seq: OddSequence,
    index: usize,
    j_half: i64,
    l_subgroup: FiniteSubgroup,
    size: BigUint,
}

impl FolnerSet {
    pub fn new(seq: &OddSequence, i: usize) -> Result<Self> {
        let r = seq.radius(i)?;
        let l_subgroup = FiniteSubgroup::close(seq, l_generators(seq, i)?)?;
        let size = BigUint::from((2 * r - 1) as u64) * l_subgroup.order();
        Ok(FolnerSet {
            seq: seq.clone(),
            index: i,
            j_half: r - 1,
            l_subgroup,
            size,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn size(&self) -> &BigUint {
        &self.size
    }

    /// The σ-exponents [r_i - 1] of the factored form.
    pub fn j_range(&self) -> impl Iterator<Item = i64> {
        -self.j_half..=self.j_half
    }

    pub fn l_subgroup(&self) -> &FiniteSubgroup {
        &self.l_subgroup
    }

    /// Full enumeration of σ^j·l, refused above the cap (the sampling mode
    /// remains available).
    pub fn elements(&self, cap: u64) -> Result<Vec<GroupElement>> {
        if self.size > BigUint::from(cap) {
            return Err(Error::EnumerationRefused {
                size: self.size.clone(),
                cap,
            });
        }
        let l_elements = self.l_subgroup.elements(cap)?;
        let mut out = Vec::with_capacity(l_elements.len() * (2 * self.j_half as usize + 1));
        for j in self.j_range() {
            let sigma_j = GroupElement::sigma_pow(&self.seq, j);
            for l in &l_elements {
                out.push(sigma_j.multiply(l).expect("windows available"));
            }
        }
        Ok(out)
    }

    /// Streams σ^j·l over the whole set, refusing above the cap.
    pub fn for_each_element(
        &self,
        cap: u64,
        mut f: impl FnMut(&GroupElement) -> Result<()>,
    ) -> Result<()> {
        if self.size > BigUint::from(cap) {
            return Err(Error::EnumerationRefused {
                size: self.size.clone(),
                cap,
            });
        }
        for j in self.j_range() {
            let sigma_j = GroupElement::sigma_pow(&self.seq, j);
            self.l_subgroup.for_each_element(cap, |l| {
                f(&sigma_j.multiply(l).expect("windows available"))
            })?;
        }
        Ok(())
    }

    /// Uniform sample σ^j·l with j uniform and l chain-uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let j = rng.gen_range(-self.j_half..=self.j_half);
        let l = self.l_subgroup.random_element(rng);
        GroupElement::sigma_pow(&self.seq, j)
            .multiply(&l)
            .expect("windows available")
    }
}
