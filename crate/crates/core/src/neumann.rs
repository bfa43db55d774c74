//! Exact normal-form arithmetic in the group G(P) = N(P) ⋊ <σ>.
//!
//! An element is written n·σ^k with n in the locally finite normal subgroup
//! N. The N-part is stored as a minimal prefix of window permutations
//! p_1, ..., p_m: coordinate j equals p_j for j <= m and p_m embedded in the
//! j-th window for j > m. Multiplication conjugates the right operand's
//! coordinates by powers of the window cycles (wrapping inside each window)
//! and re-canonicalizes; the prefix is extended far enough that beyond the
//! last explicit window no wrap can occur, which makes the minimal m
//! computable with a provable cutoff.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::permutation::{FinSuppPerm, WindowPerm};
use crate::{Error, Result};

/// The parameter sequence P = (n_1, n_2, ...) of odd integers with
/// n_1 >= 5, monotone increasing (strictly unless relaxed).
///
/// Only a finite prefix is stored; an optional arithmetic rule generates
/// further terms on demand. Operations requiring a term beyond the prefix of
/// a rule-less sequence fail with [`Error::SequenceExhausted`] rather than
/// inventing terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OddSequence {
    prefix: Vec<i64>,
    rule: Option<ArithRule>,
    strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct ArithRule {
    start: i64,
    step: i64,
}

impl OddSequence {
    /// A finite sequence with no extension rule.
    pub fn from_prefix(prefix: Vec<i64>) -> Result<Self> {
        Self::build(prefix, None, true)
    }

    /// A finite prefix followed by arithmetic continuation with the prefix's
    /// last step. Needs at least two prefix terms.
    pub fn from_prefix_extended(prefix: Vec<i64>) -> Result<Self> {
        if prefix.len() < 2 {
            return Err(Error::InvalidInput(
                "extension by '...' needs at least two prefix terms".into(),
            ));
        }
        let step = prefix[prefix.len() - 1] - prefix[prefix.len() - 2];
        let start = prefix[prefix.len() - 1] + step;
        Self::build(prefix, Some(ArithRule { start, step }), true)
    }

    /// The purely arithmetic sequence start, start + step, start + 2 step, ...
    pub fn arithmetic(start: i64, step: i64) -> Result<Self> {
        Self::build(vec![], Some(ArithRule { start, step }), true)
    }

    /// Permits equal consecutive terms (the sequence must still be monotone
    /// non-decreasing).
    pub fn allow_equal(mut self) -> Result<Self> {
        self.strict = false;
        // a non-strict rule may have step 0; re-validate
        Self::build(self.prefix, self.rule, false)
    }

    fn build(prefix: Vec<i64>, rule: Option<ArithRule>, strict: bool) -> Result<Self> {
        let first = match (prefix.first(), rule) {
            (Some(&n), _) => n,
            (None, Some(r)) => r.start,
            (None, None) => {
                return Err(Error::InvalidInput("sequence has no terms".into()));
            }
        };
        if first < 5 {
            return Err(Error::InvalidInput(format!(
                "first term must be at least 5, got {first}"
            )));
        }
        let monotone_ok = |a: i64, b: i64| if strict { b > a } else { b >= a };
        for (i, &n) in prefix.iter().enumerate() {
            if n % 2 == 0 {
                return Err(Error::InvalidInput(format!("term {n} is even")));
            }
            if i > 0 && !monotone_ok(prefix[i - 1], n) {
                return Err(Error::InvalidInput(format!(
                    "terms must be monotone increasing: {} then {n}",
                    prefix[i - 1]
                )));
            }
        }
        if let Some(r) = rule {
            if r.start % 2 == 0 {
                return Err(Error::InvalidInput(format!("rule start {} is even", r.start)));
            }
            if r.step % 2 != 0 || r.step < 0 {
                return Err(Error::InvalidInput(format!(
                    "rule step must be a non-negative even integer, got {}",
                    r.step
                )));
            }
            if strict && r.step == 0 {
                return Err(Error::InvalidInput(
                    "rule step 0 violates strict monotonicity".into(),
                ));
            }
            if let Some(&last) = prefix.last() {
                if !monotone_ok(last, r.start) {
                    return Err(Error::InvalidInput(format!(
                        "rule start {} does not continue the prefix monotonically",
                        r.start
                    )));
                }
            }
        }
        Ok(OddSequence { prefix, rule, strict })
    }

    /// The term n_i (1-based).
    pub fn term(&self, i: usize) -> Result<i64> {
        assert!(i >= 1, "terms are indexed from 1");
        if i <= self.prefix.len() {
            return Ok(self.prefix[i - 1]);
        }
        match self.rule {
            Some(r) => Ok(r.start + (i - self.prefix.len() - 1) as i64 * r.step),
            None => Err(Error::SequenceExhausted {
                index: i,
                available: self.prefix.len(),
            }),
        }
    }

    /// The window radius r_i = (n_i - 1) / 2.
    pub fn radius(&self, i: usize) -> Result<i64> {
        Ok((self.term(i)? - 1) / 2)
    }

    /// Least index i with r_i >= r.
    pub fn index_with_radius_at_least(&self, r: i64) -> Result<usize> {
        for (i, &n) in self.prefix.iter().enumerate() {
            if (n - 1) / 2 >= r {
                return Ok(i + 1);
            }
        }
        let Some(rule) = self.rule else {
            return Err(Error::SequenceExhausted {
                index: self.prefix.len() + 1,
                available: self.prefix.len(),
            });
        };
        let start_radius = (rule.start - 1) / 2;
        if start_radius >= r {
            return Ok(self.prefix.len() + 1);
        }
        if rule.step == 0 {
            return Err(Error::InvalidInput(format!(
                "sequence plateaus at {} below the required window radius {r}",
                rule.start
            )));
        }
        let deficit = 2 * r - (rule.start - 1);
        let extra = (deficit + rule.step - 1) / rule.step;
        Ok(self.prefix.len() + 1 + extra as usize)
    }

    /// Number of explicitly listed terms.
    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_infinite(&self) -> bool {
        self.rule.is_some()
    }
}

impl fmt::Display for OddSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.is_empty() {
            let r = self.rule.expect("sequence has terms");
            return write!(f, "arith:start={},step={}", r.start, r.step);
        }
        let terms: Vec<String> = self.prefix.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", terms.join(","))?;
        if self.rule.is_some() {
            write!(f, ",...")?;
        }
        Ok(())
    }
}

impl FromStr for OddSequence {
    type Err = Error;

    /// Parses `5,7,9`, `5,7,9,...` or `arith:start=5,step=2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rule_text) = s.strip_prefix("arith:") {
            let mut start = None;
            let mut step = None;
            for part in rule_text.split(',') {
                match part.trim().split_once('=') {
                    Some(("start", v)) => {
                        start = Some(v.parse::<i64>().map_err(|_| {
                            Error::Parse(format!("bad start value {v:?}"))
                        })?)
                    }
                    Some(("step", v)) => {
                        step = Some(v.parse::<i64>().map_err(|_| {
                            Error::Parse(format!("bad step value {v:?}"))
                        })?)
                    }
                    _ => return Err(Error::Parse(format!("bad rule component {part:?}"))),
                }
            }
            let (Some(start), Some(step)) = (start, step) else {
                return Err(Error::Parse("rule needs both start= and step=".into()));
            };
            return OddSequence::arithmetic(start, step);
        }
        let mut parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let extended = parts.last() == Some(&"...");
        if extended {
            parts.pop();
        }
        let prefix: Result<Vec<i64>> = parts
            .iter()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad sequence term {t:?}")))
            })
            .collect();
        let prefix = prefix?;
        if extended {
            OddSequence::from_prefix_extended(prefix)
        } else {
            OddSequence::from_prefix(prefix)
        }
    }
}

/// An element of V = Alt_fin(ℤ) ⋊ <σ̄>, the range of the extended tail map.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VElement {
    alt_part: FinSuppPerm,
    shift_exp: i64,
}

impl VElement {
    pub fn identity() -> Self {
        VElement {
            alt_part: FinSuppPerm::identity(),
            shift_exp: 0,
        }
    }

    pub fn new(alt_part: FinSuppPerm, shift_exp: i64) -> Result<Self> {
        if !alt_part.sign().is_even() {
            return Err(Error::InvalidInput(format!(
                "V-element finite part {alt_part} must be even"
            )));
        }
        Ok(VElement { alt_part, shift_exp })
    }

    pub fn alt_part(&self) -> &FinSuppPerm {
        &self.alt_part
    }

    pub fn shift_exp(&self) -> i64 {
        self.shift_exp
    }

    pub fn is_identity(&self) -> bool {
        self.shift_exp == 0 && self.alt_part.is_identity()
    }

    /// Semidirect product law: (a, j)(b, k) = (a · b^{σ̄^{-j}}, j + k).
    pub fn multiply(&self, other: &VElement) -> VElement {
        VElement {
            alt_part: self
                .alt_part
                .compose(&other.alt_part.translate(-self.shift_exp)),
            shift_exp: self.shift_exp + other.shift_exp,
        }
    }

    pub fn inverse(&self) -> VElement {
        VElement {
            alt_part: self.alt_part.inverse().translate(self.shift_exp),
            shift_exp: -self.shift_exp,
        }
    }
}

impl fmt::Display for VElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} shift^{}", self.alt_part, self.shift_exp)
    }
}

/// An element of G(P) in canonical normal form.
///
/// Equality, ordering and hashing look only at the sigma exponent and the
/// minimal window prefix; two elements over the same sequence are equal
/// exactly when those agree.
#[derive(Clone)]
pub struct GroupElement {
    seq: OddSequence,
    sigma_exp: i64,
    prefix: Vec<WindowPerm>,
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.sigma_exp == other.sigma_exp && self.prefix == other.prefix
    }
}

impl Eq for GroupElement {}

impl Hash for GroupElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sigma_exp.hash(state);
        self.prefix.hash(state);
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.sigma_exp, &self.prefix).cmp(&(other.sigma_exp, &other.prefix))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "e");
        }
        write!(f, "[")?;
        for (i, p) in self.prefix.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "] s^{}", self.sigma_exp)
    }
}

impl GroupElement {
    pub fn identity(seq: &OddSequence) -> Self {
        let r1 = seq.radius(1).expect("sequence has a first term");
        GroupElement {
            seq: seq.clone(),
            sigma_exp: 0,
            prefix: vec![WindowPerm::identity(r1)],
        }
    }

    /// The generator τ: the 3-cycle (-1, 0, 1) in every coordinate.
    pub fn tau(seq: &OddSequence) -> Self {
        let r1 = seq.radius(1).expect("sequence has a first term");
        let tau = FinSuppPerm::cycle(&[-1, 0, 1]).expect("distinct points");
        GroupElement {
            seq: seq.clone(),
            sigma_exp: 0,
            prefix: vec![WindowPerm::embed(&tau, r1).expect("r1 >= 2")],
        }
    }

    /// The generator σ: the full cycle in every coordinate.
    pub fn sigma(seq: &OddSequence) -> Self {
        Self::sigma_pow(seq, 1)
    }

    pub fn sigma_pow(seq: &OddSequence, k: i64) -> Self {
        let r1 = seq.radius(1).expect("sequence has a first term");
        GroupElement {
            seq: seq.clone(),
            sigma_exp: k,
            prefix: vec![WindowPerm::identity(r1)],
        }
    }

    /// The pair (τ, σ) generating G(P).
    pub fn generators(seq: &OddSequence) -> (Self, Self) {
        (Self::tau(seq), Self::sigma(seq))
    }

    /// Builds the element n·σ^k whose N-part has the given explicit
    /// coordinates (coordinate j of the prefix must be a permutation of the
    /// j-th window) and stabilizes from the last one on. Coordinates must be
    /// even; the prefix is re-canonicalized.
    pub fn from_coordinates(
        seq: &OddSequence,
        sigma_exp: i64,
        coords: Vec<WindowPerm>,
    ) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("at least one coordinate is required".into()));
        }
        for (idx, w) in coords.iter().enumerate() {
            let r = seq.radius(idx + 1)?;
            if w.radius() != r {
                return Err(Error::DegreeMismatch {
                    left: w.degree(),
                    right: (2 * r + 1) as usize,
                });
            }
            if !w.sign().is_even() {
                return Err(Error::InvalidInput(format!(
                    "coordinate {} is an odd permutation",
                    idx + 1
                )));
            }
        }
        Ok(Self::from_explicit(seq.clone(), sigma_exp, coords))
    }

    /// Builds the canonical form from explicit coordinates 1..=coords.len(),
    /// trimming the prefix while the last two windows agree as finitely
    /// supported permutations.
    fn from_explicit(seq: OddSequence, sigma_exp: i64, mut coords: Vec<WindowPerm>) -> Self {
        assert!(!coords.is_empty());
        while coords.len() >= 2
            && coords[coords.len() - 1].to_fin_supp() == coords[coords.len() - 2].to_fin_supp()
        {
            coords.pop();
        }
        GroupElement {
            seq,
            sigma_exp,
            prefix: coords,
        }
    }

    pub fn seq(&self) -> &OddSequence {
        &self.seq
    }

    pub fn sigma_exp(&self) -> i64 {
        self.sigma_exp
    }

    /// Length m of the canonical window prefix.
    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[WindowPerm] {
        &self.prefix
    }

    pub fn is_identity(&self) -> bool {
        self.sigma_exp == 0 && self.prefix.len() == 1 && self.prefix[0].is_identity()
    }

    /// True when the element lies in the derived subgroup N.
    pub fn is_in_n(&self) -> bool {
        self.sigma_exp == 0
    }

    /// The image under the abelianization G -> <σ̄> ≅ ℤ.
    pub fn abelianization(&self) -> i64 {
        self.sigma_exp
    }

    /// Coordinate j of the N-part (the window permutation p_j, implicit
    /// coordinates embedded on demand). `radius` must be r_j.
    fn n_coordinate(&self, j: usize, radius: i64) -> WindowPerm {
        if j <= self.prefix.len() {
            self.prefix[j - 1].clone()
        } else {
            let tail = self.prefix.last().expect("nonempty prefix").to_fin_supp();
            WindowPerm::embed(&tail, radius).expect("windows grow monotonically")
        }
    }

    /// The projection of the element to the coordinate A_j of A(P); for an
    /// element n·σ^k this is n_j·σ_j^k.
    pub fn coordinate(&self, j: usize) -> Result<WindowPerm> {
        let r = self.seq.radius(j)?;
        let n_part = self.n_coordinate(j, r);
        if self.sigma_exp == 0 {
            Ok(n_part)
        } else {
            Ok(n_part.compose(&WindowPerm::full_cycle_pow(r, self.sigma_exp)))
        }
    }

    /// The least i with g ∈ L_i, read off the canonical prefix length.
    /// Defined only on N.
    pub fn stabilization_index(&self) -> Result<usize> {
        if self.sigma_exp != 0 {
            return Err(Error::NotInDerivedSubgroup(self.sigma_exp));
        }
        Ok(self.prefix.len())
    }

    /// The eventual diagonal coordinate of the N-part, as a finitely
    /// supported permutation.
    pub fn tail_perm(&self) -> FinSuppPerm {
        self.prefix.last().expect("nonempty prefix").to_fin_supp()
    }

    /// The extended tail homomorphism t̃ : G -> V, sending n·σ^k to
    /// t(n)·σ̄^k.
    pub fn tail(&self) -> VElement {
        VElement {
            alt_part: self.tail_perm(),
            shift_exp: self.sigma_exp,
        }
    }

    /// Membership in U(P) = ker t̃ = ⊕_i A_i(P).
    pub fn in_u(&self) -> bool {
        self.tail().is_identity()
    }

    /// Least radius containing the tail's support shifted by d; zero for a
    /// trivial tail (conjugating the identity never wraps).
    fn shifted_tail_radius(&self, d: i64) -> i64 {
        let tail = self.prefix.last().expect("nonempty prefix");
        if tail.is_identity() {
            0
        } else {
            tail.to_fin_supp().support_radius() + d.abs()
        }
    }

    /// Canonical product g·h. Coordinates are computed explicitly up to a
    /// window M wide enough that no wrap can occur beyond it: r_M must
    /// contain both the support of g's tail and the support of h's tail
    /// shifted by k_g. From window M on, every coordinate of the product
    /// equals tail(g)·(tail(h) shifted by -k_g) embedded, which is also the
    /// product's tail.
    pub fn multiply(&self, other: &GroupElement) -> Result<GroupElement> {
        debug_assert_eq!(self.seq, other.seq, "elements over different sequences");
        let k1 = self.sigma_exp;
        let k2 = other.sigma_exp;
        let bound = self
            .shifted_tail_radius(0)
            .max(other.shifted_tail_radius(k1));
        let width = self
            .seq
            .index_with_radius_at_least(bound)?
            .max(self.prefix.len())
            .max(other.prefix.len());
        let mut coords = Vec::with_capacity(width);
        for j in 1..=width {
            let r = self.seq.radius(j).expect("width is available");
            let a = self.n_coordinate(j, r);
            let b = other.n_coordinate(j, r);
            // semidirect law: (n_g σ^k1)(n_h σ^k2) = n_g · n_h^{σ^{-k1}} · σ^{k1+k2}
            let b_twisted = if k1 == 0 {
                b
            } else {
                b.conjugate(&WindowPerm::full_cycle_pow(r, -k1))
            };
            coords.push(a.compose(&b_twisted));
        }
        Ok(Self::from_explicit(self.seq.clone(), k1 + k2, coords))
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let k = self.sigma_exp;
        let bound = self.shifted_tail_radius(k);
        let width = self
            .seq
            .index_with_radius_at_least(bound)?
            .max(self.prefix.len());
        let mut coords = Vec::with_capacity(width);
        for j in 1..=width {
            let r = self.seq.radius(j).expect("width is available");
            let inv = self.n_coordinate(j, r).inverse();
            // (n σ^k)^-1 = (n^-1)^{σ^k} · σ^{-k}
            let twisted = if k == 0 {
                inv
            } else {
                inv.conjugate(&WindowPerm::full_cycle_pow(r, k))
            };
            coords.push(twisted);
        }
        Ok(Self::from_explicit(self.seq.clone(), -k, coords))
    }

    /// The conjugate `self^by = by^-1 · self · by`.
    pub fn conjugate(&self, by: &GroupElement) -> Result<GroupElement> {
        by.inverse()?.multiply(self)?.multiply(by)
    }
}

/// A word in the generators, the exchange format for elements.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Tau,
    TauInv,
    Sigma,
    SigmaInv,
}

impl Letter {
    fn inverse(self) -> Letter {
        match self {
            Letter::Tau => Letter::TauInv,
            Letter::TauInv => Letter::Tau,
            Letter::Sigma => Letter::SigmaInv,
            Letter::SigmaInv => Letter::Sigma,
        }
    }
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn from_letters(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    /// Evaluates the word to a canonical group element.
    pub fn evaluate(&self, seq: &OddSequence) -> Result<GroupElement> {
        let tau = GroupElement::tau(seq);
        let sigma = GroupElement::sigma(seq);
        let tau_inv = tau.inverse()?;
        let sigma_inv = sigma.inverse()?;
        let mut acc = GroupElement::identity(seq);
        for letter in &self.0 {
            let factor = match letter {
                Letter::Tau => &tau,
                Letter::TauInv => &tau_inv,
                Letter::Sigma => &sigma,
                Letter::SigmaInv => &sigma_inv,
            };
            acc = acc.multiply(factor)?;
        }
        Ok(acc)
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses whitespace-separated tokens `t`, `s`, `t^-1`, `s^-3`, ...
    /// The empty string is the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for token in s.split_whitespace() {
            let (gen, exp) = match token.split_once('^') {
                None => (token, 1i64),
                Some((g, e)) => (
                    g,
                    e.parse::<i64>()
                        .map_err(|_| Error::Parse(format!("bad exponent in token {token:?}")))?,
                ),
            };
            let base = match gen {
                "t" => Letter::Tau,
                "s" => Letter::Sigma,
                _ => {
                    return Err(Error::Parse(format!(
                        "unknown generator {gen:?} in token {token:?}"
                    )))
                }
            };
            let letter = if exp >= 0 { base } else { base.inverse() };
            for _ in 0..exp.unsigned_abs() {
                letters.push(letter);
            }
        }
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    /// Renders with run-length exponents, e.g. `s^-2 t s^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        while i < self.0.len() {
            let letter = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == letter {
                run += 1;
            }
            let (name, sign) = match letter {
                Letter::Tau => ("t", 1),
                Letter::TauInv => ("t", -1),
                Letter::Sigma => ("s", 1),
                Letter::SigmaInv => ("s", -1),
            };
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let exp = sign * run as i64;
            if exp == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{exp}")?;
            }
            i += run;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

/// Convenience wrapper: parse and evaluate a word over the sequence.
pub fn evaluate_word(seq: &OddSequence, word: &str) -> Result<GroupElement> {
    word.parse::<Word>()?.evaluate(seq)
}
