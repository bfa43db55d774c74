//! The quantitative statistics of the Weiss-approximation construction:
//! Følner boundary ratios of the sets F_i, the adapted ratio over j ∈ [r_i],
//! and the approximation statistics q_i(g) and p_i(g), exact where feasible
//! and stratified Monte Carlo otherwise.
//!
//! Throughout, F_i = {σ^j l : j ∈ [r_i - 1], l ∈ L_i} is used in factored
//! form: the σ-exponent loop is always exact and only l ∈ L_i is ever
//! sampled. For q_i this is lossless since g^{σ^j l} ∈ L_i iff
//! g^{σ^j} ∈ L_i.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lattice::{self, FiniteSubgroup, FolnerSet, KMembership};
use crate::neumann::{GroupElement, OddSequence, Word};
use crate::{Error, Rat, Result};

/// z-quantile for two-sided 95% confidence.
const Z95: f64 = 1.959964;

/// |g F_i △ F_i| / |F_i| as an exact rational. The generators σ and τ use
/// the closed forms 2/(2r_i - 1) and 0; any other element requires an
/// enumerable F_i.
pub fn folner_boundary_ratio(
    seq: &OddSequence,
    i: usize,
    g: &GroupElement,
    cap: u64,
) -> Result<Rat> {
    let r = seq.radius(i)?;
    if *g == GroupElement::sigma(seq) {
        return Ok(Rat::new(2, 2 * r - 1));
    }
    if *g == GroupElement::tau(seq) {
        return Ok(Rat::new(0, 1));
    }
    folner_boundary_ratio_enumerated(seq, i, g, cap)
}

/// The boundary ratio by full enumeration of F_i and g·F_i, independent of
/// any closed form.
pub fn folner_boundary_ratio_enumerated(
    seq: &OddSequence,
    i: usize,
    g: &GroupElement,
    cap: u64,
) -> Result<Rat> {
    let folner = FolnerSet::new(seq, i)?;
    let elements = folner.elements(cap)?;
    let set: HashSet<&GroupElement> = elements.iter().collect();
    let mut left_only = 0i64;
    for f in &elements {
        let shifted = g.multiply(f)?;
        if !set.contains(&shifted) {
            left_only += 1;
        }
    }
    // |gF| = |F|, so |gF △ F| = 2 |gF \ F|
    Ok(Rat::new(2 * left_only, elements.len() as i64))
}

/// The adapted ratio |{j ∈ [r_i] : g^{σ^j} ∈ L_i}| / (2r_i + 1) for g ∈ N.
pub fn adapted_ratio(seq: &OddSequence, g: &GroupElement, i: usize) -> Result<Rat> {
    if !g.is_in_n() {
        return Err(Error::NotInDerivedSubgroup(g.sigma_exp()));
    }
    let r = seq.radius(i)?;
    let mut hits = 0i64;
    for j in -r..=r {
        if lattice::in_l(&g.conjugate(&GroupElement::sigma_pow(seq, j))?, i) {
            hits += 1;
        }
    }
    Ok(Rat::new(hits, 2 * r + 1))
}

/// The guaranteed lower bound (2(r_i - i(g)) + 1) / (2r_i + 1) for the
/// adapted ratio, clamped at zero.
pub fn adapted_ratio_lower_bound(
    seq: &OddSequence,
    g: &GroupElement,
    i: usize,
) -> Result<Rat> {
    let r = seq.radius(i)?;
    let idx = g.stabilization_index()? as i64;
    Ok(Rat::new((2 * (r - idx) + 1).max(0), 2 * r + 1))
}

/// q_i(g) = |{f ∈ F_i : g^f ∈ L_i}| / |F_i| for g ∈ N, computed exactly by
/// the σ-exponent loop alone: conjugation by l ∈ L_i preserves membership in
/// L_i, so the l-factor cancels.
pub fn q_statistic(seq: &OddSequence, g: &GroupElement, i: usize) -> Result<Rat> {
    if !g.is_in_n() {
        return Err(Error::NotInDerivedSubgroup(g.sigma_exp()));
    }
    let r = seq.radius(i)?;
    let mut hits = 0i64;
    for j in -(r - 1)..=(r - 1) {
        if lattice::in_l(&g.conjugate(&GroupElement::sigma_pow(seq, j))?, i) {
            hits += 1;
        }
    }
    Ok(Rat::new(hits, 2 * r - 1))
}

/// How p_i(g) gets computed.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PMode {
    /// Full enumeration of F_i, cap-guarded.
    Exact,
    /// Exact σ-exponent loop, uniform sampling of l ∈ L_i.
    MonteCarlo,
    /// Exact when |F_i| fits under the cap, Monte Carlo otherwise.
    Auto,
}

/// One value of p_i(g): an exact rational or a stratified estimate with a
/// 95% confidence halfwidth.
#[derive(Clone, Debug, PartialEq)]
pub enum PValue {
    Exact(Rat),
    Estimate {
        mean: f64,
        halfwidth: f64,
        samples: u64,
    },
}

impl PValue {
    pub fn value(&self) -> f64 {
        match self {
            PValue::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            PValue::Estimate { mean, .. } => *mean,
        }
    }

    pub fn halfwidth(&self) -> f64 {
        match self {
            PValue::Exact(_) => 0.0,
            PValue::Estimate { halfwidth, .. } => *halfwidth,
        }
    }

    pub fn samples(&self) -> u64 {
        match self {
            PValue::Exact(_) => 0,
            PValue::Estimate { samples, .. } => *samples,
        }
    }
}

/// p_i(g) = |{f ∈ F_i : g^f ∈ K_i △ H}| / |F_i| for K_i = (H∩L_i)(G_i∩D_i).
///
/// When g lies outside N and its abelianization is nonzero mod 2r_i - 1,
/// both memberships fail for every f and the statistic is exactly zero with
/// no enumeration at all.
pub fn p_statistic(
    h: &FiniteSubgroup,
    g: &GroupElement,
    i: usize,
    mode: PMode,
    samples: u64,
    seed: u64,
    cap: u64,
) -> Result<PValue> {
    let seq = h.seq().clone();
    let r = seq.radius(i)?;
    let modulus = 2 * r - 1;
    if !g.is_in_n() && g.abelianization().rem_euclid(modulus) != 0 {
        return Ok(PValue::Exact(Rat::new(0, 1)));
    }
    let folner = FolnerSet::new(&seq, i)?;
    let mode = match mode {
        PMode::Auto => {
            if folner.size() <= &num::BigUint::from(cap) {
                PMode::Exact
            } else {
                PMode::MonteCarlo
            }
        }
        other => other,
    };
    let k_test = KMembership::new(h, i)?;
    match mode {
        PMode::Exact => exact_p(h, g, i, &folner, &k_test, cap),
        PMode::MonteCarlo => {
            let l_subgroup = folner.l_subgroup();
            let strata = (2 * r - 1) as u64;
            let per_stratum = (samples / strata).max(1);
            let mut means = Vec::with_capacity(strata as usize);
            let mut halfwidths = Vec::with_capacity(strata as usize);
            for (stratum, j) in (-(r - 1)..=(r - 1)).enumerate() {
                let x = g.conjugate(&GroupElement::sigma_pow(&seq, j))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stratum as u64);
                let mut hits = 0u64;
                for _ in 0..per_stratum {
                    let l = l_subgroup.random_element(&mut rng);
                    let conj = x.conjugate(&l)?;
                    if k_test.contains(&conj) != h.contains(&conj) {
                        hits += 1;
                    }
                }
                let p_hat = hits as f64 / per_stratum as f64;
                means.push(p_hat);
                halfwidths.push(proportion_halfwidth(hits, per_stratum));
            }
            let mean = means.iter().sum::<f64>() / strata as f64;
            let halfwidth =
                halfwidths.iter().map(|w| w * w).sum::<f64>().sqrt() / strata as f64;
            Ok(PValue::Estimate {
                mean,
                halfwidth,
                samples: per_stratum * strata,
            })
        }
        PMode::Auto => unreachable!("resolved above"),
    }
}

/// The exact statistic over the factored set: for each σ-exponent j the
/// conjugate x = g^{σ^j} is fixed and l runs over L_i, so g^{σ^j l} = x^l is
/// evaluated as a permutation of a window stack deep enough to certify
/// stabilization (d at least bound(H), i, and every i(x_j)). Memberships
/// reduce to block-stability checks plus sifting of the projected prefixes.
fn exact_p(
    h: &FiniteSubgroup,
    g: &GroupElement,
    i: usize,
    folner: &FolnerSet,
    k_test: &KMembership,
    cap: u64,
) -> Result<PValue> {
    let seq = h.seq();
    if folner.size() > &num::BigUint::from(cap) {
        return Err(Error::EnumerationRefused {
            size: folner.size().clone(),
            cap,
        });
    }
    let l_sub = folner.l_subgroup();
    let xs: Vec<GroupElement> = folner
        .j_range()
        .map(|j| g.conjugate(&GroupElement::sigma_pow(seq, j)))
        .collect::<Result<_>>()?;
    let mut hits = 0i64;
    let mut total = 0i64;
    if g.is_in_n() {
        let b = h.bound();
        let depth = xs
            .iter()
            .map(|x| x.prefix_len())
            .max()
            .unwrap_or(1)
            .max(b)
            .max(i);
        let stack_d = lattice::WindowStack::new(seq, depth)?;
        let deg_b = h.stack().degree();
        let deg_i = k_test.stack().degree();
        let l_perms: Vec<_> = l_sub
            .chain_elements(cap)?
            .iter()
            .map(|p| stack_d.extend_from(l_sub.stack(), p))
            .collect();
        for x in &xs {
            let x_perm = stack_d.perm_of(x);
            for l in &l_perms {
                let y = x_perm.conjugate(l);
                let in_h = stack_d.stable_from(&y, b) && h.chain_contains(&y.restrict(deg_b));
                // abelianization is 0 here, so K-membership is the sift alone
                let in_k = k_test.chain_contains(&y.restrict(deg_i));
                if in_h != in_k {
                    hits += 1;
                }
                total += 1;
            }
        }
    } else {
        // g outside N with vanishing abelianization mod 2r_i - 1: conjugates
        // never meet H, so only K-membership of the depth-i projection counts
        let stack_i = k_test.stack();
        let l_perms: Vec<_> = l_sub
            .chain_elements(cap)?
            .iter()
            .map(|p| stack_i.extend_from(l_sub.stack(), p))
            .collect();
        for x in &xs {
            let x_perm = stack_i.perm_of(x);
            for l in &l_perms {
                if k_test.chain_contains(&x_perm.conjugate(l)) {
                    hits += 1;
                }
                total += 1;
            }
        }
    }
    Ok(PValue::Exact(Rat::new(hits, total)))
}

/// 95% halfwidth for a binomial proportion: normal approximation, falling
/// back to the Wilson interval when the observed proportion is extreme
/// (there the normal width degenerates to zero).
fn proportion_halfwidth(hits: u64, n: u64) -> f64 {
    let n_f = n as f64;
    let p = hits as f64 / n_f;
    if hits == 0 || hits == n || n_f * p * (1.0 - p) < 5.0 {
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n_f;
        let half = (Z95 / denom) * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
        half.max(z2 / (2.0 * n_f) / denom)
    } else {
        Z95 * (p * (1.0 - p) / n_f).sqrt()
    }
}

/// One probe's p_i values across a range of i.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub probe: Word,
    pub rows: Vec<ReportRow>,
    /// Values never increase along the tested range (within the reported
    /// confidence slack). Evidence, not a limit claim: p_i(g) is expected to
    /// tend to 0 but the report only states the computed values.
    pub trend_non_increasing: bool,
}

#[derive(Clone, Debug)]
pub struct ReportRow {
    pub i: usize,
    pub n_i: i64,
    pub value: PValue,
}

/// Runs p_i over every probe and every i in the range.
#[allow(clippy::too_many_arguments)]
pub fn weiss_report(
    h: &FiniteSubgroup,
    probes: &[Word],
    i_min: usize,
    i_max: usize,
    mode: PMode,
    samples: u64,
    seed: u64,
    cap: u64,
) -> Result<Vec<ConvergenceReport>> {
    let seq = h.seq();
    let mut reports = Vec::with_capacity(probes.len());
    for (pi, probe) in probes.iter().enumerate() {
        let g = probe.evaluate(seq)?;
        let mut rows = Vec::new();
        for i in i_min..=i_max {
            // independent substream per (probe, i) cell
            let cell_seed = seed
                .wrapping_add((pi as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
                .wrapping_add((i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
            let value = p_statistic(h, &g, i, mode, samples, cell_seed, cap)?;
            rows.push(ReportRow {
                i,
                n_i: seq.term(i)?,
                value,
            });
        }
        let trend_non_increasing = rows.windows(2).all(|w| {
            let slack = w[0].value.halfwidth() + w[1].value.halfwidth();
            w[1].value.value() <= w[0].value.value() + slack
        });
        reports.push(ConvergenceReport {
            probe: probe.clone(),
            rows,
            trend_non_increasing,
        });
    }
    Ok(reports)
}
