//! Finitely supported permutations of the integers and dense permutations of
//! the symmetric windows [-r, r], with the normalized Hamming metric.
//!
//! One composition convention is used everywhere in this crate:
//! `a.compose(&b)` is "apply `a`, then `b`", and conjugation follows
//! `x^y = y^-1 x y`. Under this convention the conjugate of the 3-cycle
//! (-1,0,1) by the shift x -> x+1 is (0,1,2).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Rat, Result};

/// Parity of a permutation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_even(self) -> bool {
        self == Parity::Even
    }

    /// Parity of a product, i.e. addition mod 2.
    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Parity of a permutation moving `moved` points in `cycles` cycles.
    fn from_cycle_data(moved: usize, cycles: usize) -> Parity {
        if (moved - cycles).is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// A permutation of the integers moving only finitely many points.
///
/// Only moved points are stored; the stored map is a bijection of its key set
/// onto itself and no key maps to itself.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinSuppPerm {
    moves: BTreeMap<i64, i64>,
}

impl FinSuppPerm {
    pub fn identity() -> Self {
        FinSuppPerm::default()
    }

    /// Builds a permutation from an explicit point -> image map.
    ///
    /// Fixed points may be listed; they are dropped. Fails unless the map is
    /// a bijection from its key set onto the same set.
    pub fn from_moves(map: BTreeMap<i64, i64>) -> Result<Self> {
        let moves: BTreeMap<i64, i64> = map.into_iter().filter(|(k, v)| k != v).collect();
        let values: std::collections::BTreeSet<i64> = moves.values().copied().collect();
        if values.len() != moves.len() || !moves.keys().all(|k| values.contains(k)) {
            return Err(Error::InvalidInput(
                "moves must be a bijection of the support onto itself".into(),
            ));
        }
        Ok(FinSuppPerm { moves })
    }

    /// The cyclic permutation sending each listed point to its successor and
    /// the last point back to the first.
    pub fn cycle(points: &[i64]) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &p in points {
            if !seen.insert(p) {
                return Err(Error::InvalidCycle(p));
            }
        }
        if points.len() < 2 {
            return Ok(FinSuppPerm::identity());
        }
        let mut moves = BTreeMap::new();
        for (i, &p) in points.iter().enumerate() {
            moves.insert(p, points[(i + 1) % points.len()]);
        }
        Ok(FinSuppPerm { moves })
    }

    /// Product of the given cycles, applied left to right.
    pub fn from_cycles(cycles: &[Vec<i64>]) -> Result<Self> {
        let mut acc = FinSuppPerm::identity();
        for c in cycles {
            acc = acc.compose(&FinSuppPerm::cycle(c)?);
        }
        Ok(acc)
    }

    pub fn apply(&self, x: i64) -> i64 {
        self.moves.get(&x).copied().unwrap_or(x)
    }

    pub fn is_identity(&self) -> bool {
        self.moves.is_empty()
    }

    /// Moved points, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.moves.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.moves.len()
    }

    /// Least r such that the support is contained in [-r, r]; 0 for the
    /// identity.
    pub fn support_radius(&self) -> i64 {
        self.moves.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    /// "Apply `self`, then `other`."
    pub fn compose(&self, other: &FinSuppPerm) -> FinSuppPerm {
        let mut moves = BTreeMap::new();
        for &x in self.moves.keys().chain(other.moves.keys()) {
            let y = other.apply(self.apply(x));
            if y != x {
                moves.insert(x, y);
            }
        }
        FinSuppPerm { moves }
    }

    pub fn inverse(&self) -> FinSuppPerm {
        let moves = self.moves.iter().map(|(&k, &v)| (v, k)).collect();
        FinSuppPerm { moves }
    }

    /// The conjugate `self^by = by^-1 * self * by`.
    pub fn conjugate(&self, by: &FinSuppPerm) -> FinSuppPerm {
        let mut moves = BTreeMap::new();
        for (&x, &y) in &self.moves {
            moves.insert(by.apply(x), by.apply(y));
        }
        FinSuppPerm { moves }
    }

    /// Conjugate by the (infinitely supported) shift x -> x + d, which moves
    /// the support of `self` by +d. The shift itself is never materialized.
    pub fn translate(&self, d: i64) -> FinSuppPerm {
        let moves = self.moves.iter().map(|(&k, &v)| (k + d, v + d)).collect();
        FinSuppPerm { moves }
    }

    pub fn sign(&self) -> Parity {
        Parity::from_cycle_data(self.moves.len(), self.cycles().len())
    }

    /// Cycle decomposition; each cycle starts at its least point and cycles
    /// are sorted by that point.
    pub fn cycles(&self) -> Vec<Vec<i64>> {
        let mut done = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.moves.keys() {
            if done.contains(&start) {
                continue;
            }
            let mut cycle = vec![start];
            done.insert(start);
            let mut x = self.apply(start);
            while x != start {
                cycle.push(x);
                done.insert(x);
                x = self.apply(x);
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for FinSuppPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "()");
        }
        for cycle in self.cycles() {
            write!(f, "(")?;
            for (i, p) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FinSuppPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for FinSuppPerm {
    type Err = Error;

    /// Parses cycle notation such as `(-1,0,1)(3,4)`; `()` is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty permutation literal".into()));
        }
        let mut cycles = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let rest_trim = rest.trim_start();
            let Some(inner) = rest_trim.strip_prefix('(') else {
                return Err(Error::Parse(format!("expected '(' in permutation: {s:?}")));
            };
            let Some(close) = inner.find(')') else {
                return Err(Error::Parse(format!("unbalanced ')' in permutation: {s:?}")));
            };
            let body = &inner[..close];
            if !body.trim().is_empty() {
                let points: Result<Vec<i64>> = body
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<i64>()
                            .map_err(|_| Error::Parse(format!("bad integer {t:?} in cycle")))
                    })
                    .collect();
                cycles.push(points?);
            }
            rest = &inner[close + 1..];
        }
        FinSuppPerm::from_cycles(&cycles)
    }
}

/// A permutation of the window [-r, r], stored as a dense image table.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowPerm {
    radius: i64,
    images: Vec<i64>,
}

impl WindowPerm {
    pub fn identity(radius: i64) -> Self {
        assert!(radius >= 0);
        WindowPerm {
            radius,
            images: (-radius..=radius).collect(),
        }
    }

    /// Builds from the images of -r, ..., r in order.
    pub fn from_images(radius: i64, images: Vec<i64>) -> Result<Self> {
        let n = (2 * radius + 1) as usize;
        if images.len() != n {
            return Err(Error::DegreeMismatch {
                left: images.len(),
                right: n,
            });
        }
        let mut seen = vec![false; n];
        for &y in &images {
            if y.abs() > radius {
                return Err(Error::WindowTooSmall { point: y, radius });
            }
            let idx = (y + radius) as usize;
            if seen[idx] {
                return Err(Error::InvalidCycle(y));
            }
            seen[idx] = true;
        }
        Ok(WindowPerm { radius, images })
    }

    /// The full (2r+1)-cycle (-r, -r+1, ..., r).
    pub fn full_cycle(radius: i64) -> Self {
        Self::full_cycle_pow(radius, 1)
    }

    /// The k-th power of the full cycle: x -> x + k with wrap-around.
    pub fn full_cycle_pow(radius: i64, k: i64) -> Self {
        let n = 2 * radius + 1;
        let images = (-radius..=radius)
            .map(|x| (x + k - (-radius)).rem_euclid(n) - radius)
            .collect();
        WindowPerm { radius, images }
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    /// Degree of the window, n = 2r + 1.
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, x: i64) -> i64 {
        assert!(x.abs() <= self.radius, "point {x} outside window");
        self.images[(x + self.radius) as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &y)| y == i as i64 - self.radius)
    }

    /// "Apply `self`, then `other`." Both windows must share a radius.
    pub fn compose(&self, other: &WindowPerm) -> WindowPerm {
        assert_eq!(self.radius, other.radius, "window radius mismatch");
        let images = self.images.iter().map(|&y| other.apply(y)).collect();
        WindowPerm {
            radius: self.radius,
            images,
        }
    }

    pub fn inverse(&self) -> WindowPerm {
        let mut images = vec![0; self.images.len()];
        for (i, &y) in self.images.iter().enumerate() {
            images[(y + self.radius) as usize] = i as i64 - self.radius;
        }
        WindowPerm {
            radius: self.radius,
            images,
        }
    }

    /// The conjugate `self^by = by^-1 * self * by` inside the window group.
    pub fn conjugate(&self, by: &WindowPerm) -> WindowPerm {
        by.inverse().compose(self).compose(by)
    }

    pub fn fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|&(i, &y)| y == i as i64 - self.radius)
            .count()
    }

    pub fn sign(&self) -> Parity {
        self.to_fin_supp().sign()
    }

    /// Views the window permutation as a finitely supported permutation of
    /// the integers, fixing everything outside [-r, r].
    pub fn to_fin_supp(&self) -> FinSuppPerm {
        let moves = self
            .images
            .iter()
            .enumerate()
            .filter_map(|(i, &y)| {
                let x = i as i64 - self.radius;
                (x != y).then_some((x, y))
            })
            .collect();
        FinSuppPerm { moves }
    }

    /// Embeds a finitely supported permutation into the window [-r, r].
    /// Fails if the support does not fit; nothing is ever truncated.
    pub fn embed(perm: &FinSuppPerm, radius: i64) -> Result<WindowPerm> {
        if perm.support_radius() > radius {
            let point = perm
                .support()
                .max_by_key(|p| p.abs())
                .expect("nonempty support");
            return Err(Error::WindowTooSmall { point, radius });
        }
        let images = (-radius..=radius).map(|x| perm.apply(x)).collect();
        Ok(WindowPerm { radius, images })
    }
}

impl fmt::Display for WindowPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_fin_supp())
    }
}

impl fmt::Debug for WindowPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[r={}] {}", self.radius, self.to_fin_supp())
    }
}

/// The normalized Hamming distance d_n(a, b) = 1 - |Fix(a^-1 b)| / n on a
/// window of degree n = 2r + 1, as an exact rational.
pub fn hamming_distance(a: &WindowPerm, b: &WindowPerm) -> Result<Rat> {
    if a.radius != b.radius {
        return Err(Error::DegreeMismatch {
            left: a.degree(),
            right: b.degree(),
        });
    }
    let fixed = a
        .images
        .iter()
        .zip(&b.images)
        .filter(|(x, y)| x == y)
        .count();
    // Fix(a^-1 b) = points where a and b agree.
    Ok(Rat::new(
        (a.degree() - fixed) as i64,
        a.degree() as i64,
    ))
}
