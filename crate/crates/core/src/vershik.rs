//! A generative model for the random subgroups of the finitary symmetric
//! group of the integers: windowed Bernoulli colorings ω, the block
//! subgroups they induce, and the sign-kernel subgroups f^S(ω) of
//! block-preserving permutations fixing color 0 pointwise whose per-color
//! parity vector lies in S. Invariance and the degenerate dichotomies are
//! tested statistically, never asserted.
//!
//! Colorings are truncated to a window [-M, M] and probes whose support
//! leaks out raise an error; nothing is silently truncated or wrapped.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::permutation::FinSuppPerm;
use crate::{Error, Result};

/// A probability vector α = (α_0; α_1, ..., α_c) with finitely many colors.
/// The tail is kept sorted non-increasingly as a canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector {
    alpha0: f64,
    tail: Vec<f64>,
}

impl ProbVector {
    pub fn new(alpha0: f64, mut tail: Vec<f64>) -> Result<Self> {
        if tail.len() > 63 {
            return Err(Error::InvalidInput(format!(
                "at most 63 colors are supported, got {}",
                tail.len()
            )));
        }
        for &a in std::iter::once(&alpha0).chain(&tail) {
            if !(0.0..=1.0).contains(&a) || !a.is_finite() {
                return Err(Error::InvalidInput(format!("entry {a} outside [0, 1]")));
            }
        }
        let sum: f64 = alpha0 + tail.iter().sum::<f64>();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        tail.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
        Ok(ProbVector { alpha0, tail })
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    /// Number of non-zero colors, c.
    pub fn colors(&self) -> usize {
        self.tail.len()
    }

    pub fn nonzero_entries(&self) -> usize {
        std::iter::once(self.alpha0)
            .chain(self.tail.iter().copied())
            .filter(|&a| a > 0.0)
            .count()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        let u: f64 = rng.gen();
        let mut acc = self.alpha0;
        if u < acc {
            return 0;
        }
        for (i, &a) in self.tail.iter().enumerate() {
            acc += a;
            if u < acc {
                return (i + 1) as u8;
            }
        }
        self.tail.len() as u8
    }
}

impl FromStr for ProbVector {
    type Err = Error;

    /// Parses `0.3;0.5,0.2` (α_0 before the semicolon). `1;` has no colors.
    fn from_str(s: &str) -> Result<Self> {
        let Some((head, rest)) = s.split_once(';') else {
            return Err(Error::Parse(format!(
                "alpha literal {s:?} needs a ';' after alpha_0"
            )));
        };
        let alpha0: f64 = head
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad alpha_0 {head:?}")))?;
        let mut tail = Vec::new();
        for part in rest.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            tail.push(
                part.parse()
                    .map_err(|_| Error::Parse(format!("bad alpha entry {part:?}")))?,
            );
        }
        ProbVector::new(alpha0, tail)
    }
}

impl fmt::Display for ProbVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.alpha0)?;
        for (i, a) in self.tail.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// The restriction of a coloring ω of the integers to [-M, M].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    radius: i64,
    colors: Vec<u8>,
}

impl Coloring {
    /// Builds directly from the colors of -M, ..., M in order.
    pub fn from_colors(radius: i64, colors: Vec<u8>) -> Result<Self> {
        if colors.len() != (2 * radius + 1) as usize {
            return Err(Error::InvalidInput(format!(
                "expected {} colors, got {}",
                2 * radius + 1,
                colors.len()
            )));
        }
        Ok(Coloring { radius, colors })
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn color_at(&self, x: i64) -> u8 {
        assert!(x.abs() <= self.radius, "point {x} outside the window");
        self.colors[(x + self.radius) as usize]
    }

    /// Counts the points of the given color inside the window.
    pub fn block_size(&self, color: u8) -> usize {
        self.colors.iter().filter(|&&c| c == color).count()
    }
}

/// Draws an i.i.d. coloring of [-M, M].
///
/// Points are filled in the order 0, 1, -1, 2, -2, ..., so that for a fixed
/// RNG stream the coloring of a smaller window is the restriction of the
/// coloring of a larger one; shared-seed comparisons across window sizes
/// depend on this.
pub fn sample_coloring<R: Rng + ?Sized>(alpha: &ProbVector, radius: i64, rng: &mut R) -> Coloring {
    assert!(radius >= 0);
    let mut colors = vec![0u8; (2 * radius + 1) as usize];
    colors[radius as usize] = alpha.draw(rng);
    for k in 1..=radius {
        colors[(k + radius) as usize] = alpha.draw(rng);
        colors[(radius - k) as usize] = alpha.draw(rng);
    }
    Coloring { radius, colors }
}

/// A subgroup S of (ℤ/2)^c, stored as an independent basis of bit vectors
/// (bit i-1 is the parity of color i).
#[derive(Clone, Debug)]
pub struct SignSubgroup {
    colors: usize,
    basis: Vec<u64>,
    echelon: Vec<u64>,
}

impl SignSubgroup {
    pub fn new(colors: usize, basis: Vec<u64>) -> Result<Self> {
        if colors > 63 {
            return Err(Error::InvalidInput("at most 63 colors are supported".into()));
        }
        let mask = (1u64 << colors) - 1;
        let mut echelon: Vec<u64> = Vec::new();
        for &v in &basis {
            if v & !mask != 0 {
                return Err(Error::InvalidInput(format!(
                    "basis vector {v:#b} uses more than {colors} colors"
                )));
            }
            let reduced = reduce(v, &echelon);
            if reduced == 0 {
                return Err(Error::InvalidInput(
                    "basis vectors are not independent over Z/2".into(),
                ));
            }
            echelon.push(reduced);
            echelon.sort_unstable_by(|a, b| b.cmp(a));
        }
        Ok(SignSubgroup {
            colors,
            basis,
            echelon,
        })
    }

    /// As [`new`](Self::new), additionally requiring every basis vector to
    /// have even weight, so that f^S(ω) consists of even permutations.
    pub fn new_alt(colors: usize, basis: Vec<u64>) -> Result<Self> {
        for &v in &basis {
            if v.count_ones() % 2 != 0 {
                return Err(Error::InvalidInput(format!(
                    "basis vector {v:#b} has odd weight; even weight is required in alt mode"
                )));
            }
        }
        Self::new(colors, basis)
    }

    /// The trivial subgroup {0}.
    pub fn trivial(colors: usize) -> Self {
        Self::new(colors, vec![]).expect("empty basis")
    }

    /// All of (ℤ/2)^c.
    pub fn full(colors: usize) -> Self {
        Self::new(colors, (0..colors).map(|i| 1u64 << i).collect()).expect("standard basis")
    }

    /// The kernel of the total-parity map ε, spanned by e_i + e_{i+1}.
    pub fn even_weight(colors: usize) -> Self {
        let basis = (0..colors.saturating_sub(1))
            .map(|i| (1u64 << i) | (1u64 << (i + 1)))
            .collect();
        Self::new_alt(colors, basis).expect("adjacent sums are independent and even")
    }

    /// Parses comma-separated bit strings, e.g. `11,01` over two colors.
    pub fn parse(colors: usize, literal: &str) -> Result<Self> {
        let mut basis = Vec::new();
        for part in literal.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            if part.len() != colors {
                return Err(Error::Parse(format!(
                    "basis vector {part:?} must have exactly {colors} bits"
                )));
            }
            let mut v = 0u64;
            for (i, ch) in part.chars().enumerate() {
                match ch {
                    '1' => v |= 1 << i,
                    '0' => {}
                    _ => {
                        return Err(Error::Parse(format!(
                            "bad character {ch:?} in basis vector {part:?}"
                        )))
                    }
                }
            }
            basis.push(v);
        }
        Self::new(colors, basis)
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.echelon.len()
    }

    pub fn contains_vector(&self, v: u64) -> bool {
        reduce(v, &self.echelon) == 0
    }
}

fn reduce(mut v: u64, echelon: &[u64]) -> u64 {
    for &row in echelon {
        let lead = 63 - row.leading_zeros();
        if v & (1 << lead) != 0 {
            v ^= row;
        }
    }
    v
}

/// Classifies a probe against a coloring: `None` if it moves a color-0 point
/// or maps some point to a different color; otherwise its per-color sign
/// vector. Errors if the support leaks out of the window.
fn classify(omega: &Coloring, g: &FinSuppPerm) -> Result<Option<u64>> {
    for x in g.support() {
        if x.abs() > omega.radius() {
            return Err(Error::WindowTooSmall {
                point: x,
                radius: omega.radius(),
            });
        }
    }
    for x in g.support() {
        let cx = omega.color_at(x);
        if cx == 0 || omega.color_at(g.apply(x)) != cx {
            return Ok(None);
        }
    }
    // each cycle stays inside one block; a cycle of length L contributes
    // parity L - 1 to its color
    let mut mask = 0u64;
    for cycle in g.cycles() {
        if cycle.len() % 2 == 0 {
            let color = omega.color_at(cycle[0]);
            mask ^= 1 << (color - 1);
        }
    }
    Ok(Some(mask))
}

/// The per-color parity vector sgn_ω(g) of a block-preserving permutation.
pub fn sgn_vector(omega: &Coloring, g: &FinSuppPerm) -> Result<u64> {
    match classify(omega, g)? {
        Some(mask) => Ok(mask),
        None => Err(Error::NotBlockPreserving(format!(
            "{g} does not preserve the coloring blocks (or moves a color-0 point)"
        ))),
    }
}

/// Membership of g in f^S(ω): g fixes every color-0 point, maps each block
/// into itself, and its sign vector lies in S.
pub fn contains(omega: &Coloring, s: &SignSubgroup, g: &FinSuppPerm) -> Result<bool> {
    Ok(matches!(classify(omega, g)?, Some(mask) if s.contains_vector(mask)))
}

/// One probe/conjugator cell of an invariance test: the empirical membership
/// probabilities of g and g^x over fresh colorings, with a two-proportion
/// z-test of their equality.
#[derive(Clone, Debug)]
pub struct InvarianceRow {
    pub probe: FinSuppPerm,
    pub conjugator: FinSuppPerm,
    pub conjugated: FinSuppPerm,
    pub p_probe: f64,
    pub p_conjugated: f64,
    pub z: f64,
    pub p_value: f64,
    pub samples: u64,
}

/// Tests conjugation invariance of the push-forward law: for every probe g
/// and conjugator x, P(g ∈ f^S(ω)) should match P(g^x ∈ f^S(ω)). Each cell
/// uses its own pair of RNG substreams.
pub fn invariance_test(
    alpha: &ProbVector,
    s: &SignSubgroup,
    probes: &[FinSuppPerm],
    conjugators: &[FinSuppPerm],
    radius: i64,
    samples: u64,
    seed: u64,
) -> Result<Vec<InvarianceRow>> {
    let mut rows = Vec::with_capacity(probes.len() * conjugators.len());
    for (pi, probe) in probes.iter().enumerate() {
        for (ci, conjugator) in conjugators.iter().enumerate() {
            let conjugated = probe.conjugate(conjugator);
            let cell = (pi * conjugators.len() + ci) as u64;
            let p_probe = membership_rate(alpha, s, probe, radius, samples, seed, 2 * cell)?;
            let p_conjugated =
                membership_rate(alpha, s, &conjugated, radius, samples, seed, 2 * cell + 1)?;
            let (z, p_value) = two_proportion_test(p_probe, p_conjugated, samples);
            rows.push(InvarianceRow {
                probe: probe.clone(),
                conjugator: conjugator.clone(),
                conjugated,
                p_probe,
                p_conjugated,
                z,
                p_value,
                samples,
            });
        }
    }
    Ok(rows)
}

/// Empirical P(g ∈ f^S(ω)) over fresh colorings drawn on the given stream.
pub fn membership_rate(
    alpha: &ProbVector,
    s: &SignSubgroup,
    g: &FinSuppPerm,
    radius: i64,
    samples: u64,
    seed: u64,
    stream: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut hits = 0u64;
    for _ in 0..samples {
        let omega = sample_coloring(alpha, radius, &mut rng);
        if contains(&omega, s, g)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

fn two_proportion_test(p1: f64, p2: f64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let pooled = (p1 + p2) / 2.0;
    let var = pooled * (1.0 - pooled) * (2.0 / n);
    let z = if var > 0.0 { (p1 - p2) / var.sqrt() } else { 0.0 };
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p_value = 2.0 * (1.0 - normal.cdf(z.abs()));
    (z, p_value)
}

/// Empirical probability that the shift x -> x + k maps the coloring's block
/// structure to itself on the overlap [-M, M - k]: color 0 goes to color 0
/// and the induced map on the other colors is a consistent injection.
pub fn shift_structure_probability(
    alpha: &ProbVector,
    k: i64,
    radius: i64,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidInput(format!(
            "shift exponent {k} must be positive"
        )));
    }
    if alpha.tail.iter().filter(|&&a| a > 0.0).count() < 2 {
        return Err(Error::InvalidInput(
            "shift structure needs at least two colors of positive probability".into(),
        ));
    }
    let mut hits = 0u64;
    for sample in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample);
        let omega = sample_coloring(alpha, radius, &mut rng);
        if shift_is_structured(&omega, k) {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

fn shift_is_structured(omega: &Coloring, k: i64) -> bool {
    let m = omega.radius();
    let mut forward = [None::<u8>; 256];
    let mut used = [false; 256];
    forward[0] = Some(0);
    used[0] = true;
    let mut x = -m;
    while x <= m - k {
        let c1 = omega.color_at(x) as usize;
        let c2 = omega.color_at(x + k);
        match forward[c1] {
            Some(d) if d != c2 => return false,
            Some(_) => {}
            None => {
                if used[c2 as usize] {
                    return false;
                }
                forward[c1] = Some(c2);
                used[c2 as usize] = true;
            }
        }
        x += 1;
    }
    true
}
