//! Almost-homomorphism laboratory: the exact finite-quotient representation
//! of G(P) on the stacked windows 1..=depth, the multiplicative defect of a
//! map under the normalized Hamming metric, distances between maps, and
//! controlled random perturbations of the generator images.
//!
//! A map is stored on a finite probe set only, keyed by the canonical group
//! element of each probe word; every element keeps the first word that
//! produced it and its image is always the product of the current generator
//! images along that word. Perturbing the generators therefore perturbs all
//! word images coherently while group relations (different words, same key)
//! pick up a nonzero defect.

use std::collections::BTreeMap;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::WindowStack;
use crate::neumann::{GroupElement, Letter, OddSequence, Word};
use crate::stabchain::Perm;
use crate::{Error, Rat, Result};

/// The normalized Hamming distance 1 - |Fix(a^-1 b)| / n on permutations of
/// a common finite domain.
pub fn hamming_distance(a: &Perm, b: &Perm) -> Result<Rat> {
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch {
            left: a.degree(),
            right: b.degree(),
        });
    }
    let agree = a
        .images()
        .iter()
        .zip(b.images())
        .filter(|(x, y)| x == y)
        .count();
    Ok(Rat::new((a.degree() - agree) as i64, a.degree() as i64))
}

struct Entry {
    word: Word,
    image: Perm,
}

/// A map G(P) -> S(n) on a finite probe set, n = n_1 + ... + n_depth.
pub struct FiniteRep {
    seq: OddSequence,
    depth: usize,
    stack: WindowStack,
    tau_image: Perm,
    sigma_image: Perm,
    entries: BTreeMap<GroupElement, Entry>,
}

impl FiniteRep {
    /// The genuine quotient: generators act by their coordinates on the
    /// disjoint union of the windows 1..=depth, so the defect is identically
    /// zero.
    pub fn quotient(seq: &OddSequence, depth: usize, probes: &[Word]) -> Result<FiniteRep> {
        let stack = WindowStack::new(seq, depth)?;
        let tau_image = stack.perm_of(&GroupElement::tau(seq));
        let sigma_image = stack.perm_of(&GroupElement::sigma(seq));
        let mut rep = FiniteRep {
            seq: seq.clone(),
            depth,
            stack,
            tau_image,
            sigma_image,
            entries: BTreeMap::new(),
        };
        rep.insert_probes(probes)?;
        Ok(rep)
    }

    /// The same probe set re-imaged through replacement generator images.
    pub fn with_generator_images(&self, tau_image: Perm, sigma_image: Perm) -> Result<FiniteRep> {
        for p in [&tau_image, &sigma_image] {
            if p.degree() != self.degree() {
                return Err(Error::DegreeMismatch {
                    left: p.degree(),
                    right: self.degree(),
                });
            }
        }
        let mut rep = FiniteRep {
            seq: self.seq.clone(),
            depth: self.depth,
            stack: self.stack.clone(),
            tau_image,
            sigma_image,
            entries: BTreeMap::new(),
        };
        let probes: Vec<Word> = self.entries.values().map(|e| e.word.clone()).collect();
        rep.insert_probes(&probes)?;
        Ok(rep)
    }

    fn insert_probes(&mut self, probes: &[Word]) -> Result<()> {
        for word in probes {
            let key = word.evaluate(&self.seq)?;
            if !self.entries.contains_key(&key) {
                let image = self.word_image(word);
                self.entries.insert(
                    key,
                    Entry {
                        word: word.clone(),
                        image,
                    },
                );
            }
        }
        Ok(())
    }

    fn word_image(&self, word: &Word) -> Perm {
        let tau_inv = self.tau_image.inverse();
        let sigma_inv = self.sigma_image.inverse();
        let mut acc = Perm::identity(self.degree());
        for letter in word.letters() {
            let factor = match letter {
                Letter::Tau => &self.tau_image,
                Letter::TauInv => &tau_inv,
                Letter::Sigma => &self.sigma_image,
                Letter::SigmaInv => &sigma_inv,
            };
            acc = acc.compose(factor);
        }
        acc
    }

    pub fn seq(&self) -> &OddSequence {
        &self.seq
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Degree of the target symmetric group.
    pub fn degree(&self) -> usize {
        self.stack.degree()
    }

    pub fn probe_count(&self) -> usize {
        self.entries.len()
    }

    pub fn probe_words(&self) -> impl Iterator<Item = &Word> {
        self.entries.values().map(|e| &e.word)
    }

    pub fn tau_image(&self) -> &Perm {
        &self.tau_image
    }

    pub fn sigma_image(&self) -> &Perm {
        &self.sigma_image
    }

    /// The image of the group element the word evaluates to.
    pub fn image(&self, word: &Word) -> Result<&Perm> {
        let key = word.evaluate(&self.seq)?;
        self.entries
            .get(&key)
            .map(|e| &e.image)
            .ok_or_else(|| Error::MissingProbe(word.to_string()))
    }

    /// max over the pairs of d_n(f(u) f(v), f(uv)); 0 over an empty list.
    /// Both words and their concatenation must be probe keys.
    pub fn defect(&self, pairs: &[(Word, Word)]) -> Result<Rat> {
        let mut worst = Rat::new(0, 1);
        for (u, v) in pairs {
            let product = self.image(u)?.compose(self.image(v)?);
            let direct = self.image(&u.concat(v))?;
            worst = worst.max(hamming_distance(&product, direct)?);
        }
        Ok(worst)
    }

    /// max over the words of d_n(f(w), g(w)).
    pub fn distance(&self, other: &FiniteRep, words: &[Word]) -> Result<Rat> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        let mut worst = Rat::new(0, 1);
        for w in words {
            worst = worst.max(hamming_distance(self.image(w)?, other.image(w)?)?);
        }
        Ok(worst)
    }

    /// Composes each generator image with a uniformly random permutation of
    /// an independently chosen ceil(epsilon * n)-point subset, then recomputes
    /// every probe image from its stored word.
    pub fn perturb(&self, epsilon: f64, seed: u64) -> Result<FiniteRep> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidInput(format!(
                "epsilon {epsilon} outside [0, 1]"
            )));
        }
        let n = self.degree();
        let k = (epsilon * n as f64).ceil() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let tau_image = self.tau_image.compose(&random_small_support(n, k, &mut rng));
        rng.set_stream(1);
        let sigma_image = self
            .sigma_image
            .compose(&random_small_support(n, k, &mut rng));
        self.with_generator_images(tau_image, sigma_image)
    }
}

/// A uniformly random permutation of a uniformly random k-subset of 0..n
/// (identity outside the subset; the identity inside is possible too).
fn random_small_support<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Perm {
    let mut points: Vec<usize> = (0..n).collect();
    points.shuffle(rng);
    points.truncate(k);
    let mut shuffled = points.clone();
    shuffled.shuffle(rng);
    let mut images: Vec<usize> = (0..n).collect();
    for (from, to) in points.iter().zip(&shuffled) {
        images[*from] = *to;
    }
    Perm::from_images_unchecked(images)
}

/// All words of length at most `max_len` over t, t^-1, s, s^-1, shortest
/// first. Used to build probe sets closed under the concatenations the
/// defect needs.
pub fn enumerate_words(max_len: usize) -> Vec<Word> {
    let letters = [Letter::Tau, Letter::TauInv, Letter::Sigma, Letter::SigmaInv];
    let mut out = vec![Word::empty()];
    let mut layer: Vec<Vec<Letter>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * 4);
        for stem in &layer {
            for &l in &letters {
                let mut word = stem.clone();
                word.push(l);
                out.push(Word::from_letters(word.clone()));
                next.push(word);
            }
        }
        layer = next;
    }
    out
}

/// Every pair (u, v) of nonempty enumerated words with |u| + |v| bounded by
/// `total_len`; the concatenated word is enumerated as well, so the pair is
/// usable against a probe set from [`enumerate_words`]`(total_len)`.
pub fn enumerate_pairs(total_len: usize) -> Vec<(Word, Word)> {
    let words = enumerate_words(total_len.saturating_sub(1));
    let mut out = Vec::new();
    for u in &words {
        if u.is_empty() {
            continue;
        }
        for v in &words {
            if v.is_empty() || u.len() + v.len() > total_len {
                continue;
            }
            out.push((u.clone(), v.clone()));
        }
    }
    out
}
