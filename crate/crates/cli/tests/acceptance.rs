//! Acceptance suite: one test per criterion, each printing a pass line.
//! Every tolerance and threshold is pinned here; nothing is deferred to
//! later calibration.

use std::collections::BTreeSet;
use std::time::Instant;

use num::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use neumann_groups::almosthom::{self, FiniteRep};
use neumann_groups::lattice::{
    self, FiniteSubgroup, KMembership, ENUMERATION_CAP,
};
use neumann_groups::neumann::{evaluate_word, GroupElement, Letter, OddSequence, Word};
use neumann_groups::permutation::{FinSuppPerm, WindowPerm};
use neumann_groups::vershik::{self, ProbVector, SignSubgroup};
use neumann_groups::weiss::{self, PMode, PValue};
use neumann_groups::Rat;

fn pass(number: u32, name: &str) {
    println!("acceptance {number:02} {name}: PASS");
}

#[test]
fn criterion_01_folner_ratios() {
    let start = Instant::now();
    let seq: OddSequence = "5,7,9,11".parse().unwrap();
    let sigma = GroupElement::sigma(&seq);
    let tau = GroupElement::tau(&seq);
    let expected = [Rat::new(2, 3), Rat::new(2, 5), Rat::new(2, 7), Rat::new(2, 9)];
    for (idx, want) in expected.iter().enumerate() {
        let i = idx + 1;
        assert_eq!(
            weiss::folner_boundary_ratio(&seq, i, &sigma, ENUMERATION_CAP).unwrap(),
            *want,
            "sigma ratio at i = {i}"
        );
        assert_eq!(
            weiss::folner_boundary_ratio(&seq, i, &tau, ENUMERATION_CAP).unwrap(),
            Rat::new(0, 1),
            "tau ratio at i = {i}"
        );
    }
    // independent full enumeration over the 180 elements of F_1
    assert_eq!(
        weiss::folner_boundary_ratio_enumerated(&seq, 1, &sigma, ENUMERATION_CAP).unwrap(),
        Rat::new(2, 3)
    );
    assert_eq!(
        weiss::folner_boundary_ratio_enumerated(&seq, 1, &tau, ENUMERATION_CAP).unwrap(),
        Rat::new(0, 1)
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(1, "folner_ratios");
}

#[test]
fn criterion_02_orders() {
    let start = Instant::now();
    let seq: OddSequence = "5,7,9".parse().unwrap();
    let expected: [(usize, u64); 3] = [(1, 60), (2, 151_200), (3, 60 * 2520 * 181_440)];
    for (i, want) in expected {
        let l = FiniteSubgroup::close(&seq, lattice::l_generators(&seq, i).unwrap()).unwrap();
        assert_eq!(l.order(), BigUint::from(want), "order of L_{i}");
        // equal to the product of n_j!/2
        let mut formula = BigUint::from(1u32);
        for j in 1..=i {
            let n = seq.term(j).unwrap() as u64;
            let mut fact = BigUint::from(1u32);
            for m in 2..=n {
                fact *= BigUint::from(m);
            }
            formula *= fact / BigUint::from(2u32);
        }
        assert_eq!(l.order(), formula);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(2, "orders");
}

fn random_word<R: Rng>(rng: &mut R, max_len: usize) -> Word {
    let letters = [Letter::Tau, Letter::TauInv, Letter::Sigma, Letter::SigmaInv];
    let len = rng.gen_range(0..=max_len);
    Word::from_letters((0..len).map(|_| letters[rng.gen_range(0..4)]).collect())
}

/// Direct single-window evaluation of a word, no normal form involved.
fn window_eval(seq: &OddSequence, word: &Word, j: usize) -> WindowPerm {
    let r = seq.radius(j).unwrap();
    let tau = WindowPerm::embed(&FinSuppPerm::cycle(&[-1, 0, 1]).unwrap(), r).unwrap();
    let sigma = WindowPerm::full_cycle(r);
    let mut acc = WindowPerm::identity(r);
    for letter in word.letters() {
        let factor = match letter {
            Letter::Tau => tau.clone(),
            Letter::TauInv => tau.inverse(),
            Letter::Sigma => sigma.clone(),
            Letter::SigmaInv => sigma.inverse(),
        };
        acc = acc.compose(&factor);
    }
    acc
}

#[test]
fn criterion_03_normal_form_vs_oracle() {
    let seq: OddSequence = "5,7,...".parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut recent: Vec<GroupElement> = Vec::new();
    for sample in 0..10_000 {
        let word = random_word(&mut rng, 20);
        let g = word.evaluate(&seq).unwrap();
        for j in 1..=g.prefix_len() + 3 {
            assert_eq!(
                g.coordinate(j).unwrap(),
                window_eval(&seq, &word, j),
                "sample {sample}, window {j}"
            );
        }
        // group laws on a rolling triple
        recent.push(g);
        if recent.len() == 3 {
            let (a, b, c) = (&recent[0], &recent[1], &recent[2]);
            assert_eq!(
                a.multiply(b).unwrap().multiply(c).unwrap(),
                a.multiply(&b.multiply(c).unwrap()).unwrap()
            );
            assert!(a.multiply(&a.inverse().unwrap()).unwrap().is_identity());
            assert_eq!(
                GroupElement::identity(&seq).multiply(a).unwrap(),
                a.clone()
            );
            recent.clear();
        }
    }
    pass(3, "normal_form_vs_oracle");
}

#[test]
fn criterion_04_tail_homomorphism() {
    let seq: OddSequence = "5,7,...".parse().unwrap();
    // the generators map as expected
    let sigma_tail = GroupElement::sigma(&seq).tail();
    assert!(sigma_tail.alt_part().is_identity());
    assert_eq!(sigma_tail.shift_exp(), 1);
    let tau_tail = GroupElement::tau(&seq).tail();
    assert_eq!(
        *tau_tail.alt_part(),
        FinSuppPerm::cycle(&[-1, 0, 1]).unwrap()
    );
    assert_eq!(tau_tail.shift_exp(), 0);

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for sample in 0..1_000 {
        let u = random_word(&mut rng, 14);
        let v = random_word(&mut rng, 14);
        let g = u.evaluate(&seq).unwrap();
        let h = v.evaluate(&seq).unwrap();
        assert_eq!(
            g.multiply(&h).unwrap().tail(),
            g.tail().multiply(&h.tail()),
            "sample {sample}"
        );
    }
    pass(4, "tail_homomorphism");
}

#[test]
fn criterion_05_adapted_ratio() {
    let seq: OddSequence = "5,7,...".parse().unwrap();
    let tau = GroupElement::tau(&seq);
    assert_eq!(
        weiss::adapted_ratio(&seq, &tau, 1).unwrap(),
        Rat::new(3, 5)
    );
    assert_eq!(
        weiss::adapted_ratio_lower_bound(&seq, &tau, 1).unwrap(),
        Rat::new(3, 5)
    );
    let mut last = Rat::new(0, 1);
    for i in 1..=6 {
        let value = weiss::adapted_ratio(&seq, &tau, i).unwrap();
        let bound = weiss::adapted_ratio_lower_bound(&seq, &tau, i).unwrap();
        assert!(value >= bound, "bound fails at i = {i}");
        assert!(value >= last, "not non-decreasing at i = {i}");
        assert!(value < Rat::new(1, 1));
        last = value;
    }
    assert_eq!(last, Rat::new(13, 15));
    pass(5, "adapted_ratio");
}

/// Fully independent brute force for p_1(g), H = <tau>: F_1 enumerated via
/// breadth-first closure of the L_1 generators (no stabilizer chain), H
/// enumerated by hand, K-membership from the definition h·(G_1 ∩ D_1).
fn brute_force_p1(seq: &OddSequence, g: &GroupElement) -> Rat {
    // L_1 by BFS closure over normal forms
    let gens: Vec<GroupElement> = lattice::l_generators(seq, 1)
        .unwrap()
        .into_iter()
        .flat_map(|g| [g.clone(), g.inverse().unwrap()])
        .collect();
    let mut l1: BTreeSet<GroupElement> = BTreeSet::new();
    let mut queue = vec![GroupElement::identity(seq)];
    l1.insert(GroupElement::identity(seq));
    while let Some(x) = queue.pop() {
        for gen in &gens {
            let next = x.multiply(gen).unwrap();
            if l1.insert(next.clone()) {
                queue.push(next);
            }
        }
    }
    assert_eq!(l1.len(), 60);
    // H = {e, tau, tau^2}
    let tau = GroupElement::tau(seq);
    let h_elements = [
        GroupElement::identity(seq),
        tau.clone(),
        tau.multiply(&tau).unwrap(),
    ];
    let in_h = |x: &GroupElement| h_elements.iter().any(|h| h == x);
    // K_1 membership straight from the definition
    let modulus = 2 * seq.radius(1).unwrap() - 1;
    let in_k = |x: &GroupElement| {
        h_elements.iter().any(|h| {
            if h.stabilization_index().unwrap() > 1 {
                return false;
            }
            let quot = h.inverse().unwrap().multiply(x).unwrap();
            quot.coordinate(1).unwrap().is_identity()
                && quot.abelianization().rem_euclid(modulus) == 0
        })
    };
    let mut hits = 0i64;
    let mut total = 0i64;
    for j in -1i64..=1 {
        let sigma_j = GroupElement::sigma_pow(seq, j);
        for l in &l1 {
            let f = sigma_j.multiply(l).unwrap();
            let conj = g.conjugate(&f).unwrap();
            if in_h(&conj) != in_k(&conj) {
                hits += 1;
            }
            total += 1;
        }
    }
    assert_eq!(total, 180);
    Rat::new(hits, total)
}

#[test]
fn criterion_06_weiss_statistic() {
    let seq: OddSequence = "5,7,...".parse().unwrap();
    let h = FiniteSubgroup::close(&seq, vec![GroupElement::tau(&seq)]).unwrap();

    // p_i(sigma) = 0 exactly for i <= 4
    let sigma = GroupElement::sigma(&seq);
    for i in 1..=4 {
        assert_eq!(
            weiss::p_statistic(&h, &sigma, i, PMode::Exact, 0, 0, ENUMERATION_CAP).unwrap(),
            PValue::Exact(Rat::new(0, 1)),
            "p_{i}(sigma)"
        );
    }

    // exact enumeration over the 180 elements of F_1 vs independent brute force
    let brute_probes = ["t", "s^-1 t s", "t t", "s^-2 t s^2", "s^3"];
    for text in brute_probes {
        let g = evaluate_word(&seq, text).unwrap();
        let exact = weiss::p_statistic(&h, &g, 1, PMode::Exact, 0, 0, ENUMERATION_CAP).unwrap();
        let brute = brute_force_p1(&seq, &g);
        assert_eq!(exact, PValue::Exact(brute), "probe {text}");
    }

    // Monte Carlo (1e5 samples) covers the exact value in >= 18 of 20 pairs
    let mc_probes = [
        "t",
        "t t",
        "s^-1 t s",
        "s t s^-1",
        "s^-2 t s^2",
        "s^2 t s^-2",
        "s^-1 t s t",
        "t s^-1 t s",
        "s^3",
        "s^-2 t s^2 t",
    ];
    let mut covered = 0;
    let mut pairs = 0;
    for (pi, text) in mc_probes.iter().enumerate() {
        let g = evaluate_word(&seq, text).unwrap();
        for i in [1usize, 2] {
            pairs += 1;
            let exact = match weiss::p_statistic(&h, &g, i, PMode::Exact, 0, 0, ENUMERATION_CAP)
                .unwrap()
            {
                PValue::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
                _ => unreachable!(),
            };
            let seed = 600 + (pi * 2 + i) as u64;
            let mc = weiss::p_statistic(
                &h,
                &g,
                i,
                PMode::MonteCarlo,
                100_000,
                seed,
                ENUMERATION_CAP,
            )
            .unwrap();
            let (mean, halfwidth) = match mc {
                PValue::Estimate {
                    mean, halfwidth, ..
                } => (mean, halfwidth),
                PValue::Exact(r) => (*r.numer() as f64 / *r.denom() as f64, 0.0),
            };
            if (mean - exact).abs() <= halfwidth {
                covered += 1;
            } else {
                println!(
                    "  probe {text}, i = {i}: exact {exact} outside {mean} ± {halfwidth}"
                );
            }
        }
    }
    assert_eq!(pairs, 20);
    assert!(covered >= 18, "only {covered} of 20 pairs covered");
    pass(6, "weiss_statistic");
}

#[test]
fn criterion_07_l_window_identity() {
    let seq: OddSequence = "5,7,...".parse().unwrap();
    let small = FiniteSubgroup::close(&seq, vec![GroupElement::tau(&seq)]).unwrap();
    let order60 =
        FiniteSubgroup::close(&seq, lattice::l_generators(&seq, 1).unwrap()).unwrap();
    assert_eq!(order60.order(), BigUint::from(60u32));
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for h in [&small, &order60] {
        for i in [1usize, 2] {
            let k_test = KMembership::new(h, i).unwrap();
            let l = FiniteSubgroup::close(&seq, lattice::l_generators(&seq, i).unwrap()).unwrap();
            for sample in 0..100 {
                let g = l.random_element(&mut rng);
                assert_eq!(
                    h.contains(&g),
                    k_test.contains(&g),
                    "i = {i}, sample {sample}"
                );
            }
        }
    }
    pass(7, "l_window_identity");
}

fn random_probe<R: Rng>(rng: &mut R, radius: i64) -> FinSuppPerm {
    loop {
        let kind = rng.gen_range(0..3);
        let a = rng.gen_range(-radius..=radius);
        let b = rng.gen_range(-radius..=radius);
        let c = rng.gen_range(-radius..=radius);
        let result = match kind {
            0 if a != b => FinSuppPerm::cycle(&[a, b]),
            1 if a != b && b != c && a != c => FinSuppPerm::cycle(&[a, b, c]),
            2 if a != b && b != c && a != c => Ok(FinSuppPerm::cycle(&[a, b])
                .unwrap()
                .compose(&FinSuppPerm::cycle(&[b, c]).unwrap())),
            _ => continue,
        };
        return result.unwrap();
    }
}

#[test]
fn criterion_08_vershik_degenerate_atoms() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let zero: ProbVector = "1;".parse().unwrap();
    let one: ProbVector = "0;1".parse().unwrap();
    let s_zero = SignSubgroup::even_weight(0);
    let s_even = SignSubgroup::even_weight(1);
    for _ in 0..10_000 {
        let probe = random_probe(&mut rng, 8);
        // alpha = (1;): the sampled subgroup is trivial
        let omega = vershik::sample_coloring(&zero, 10, &mut rng);
        assert!(!vershik::contains(&omega, &s_zero, &probe).unwrap());
        // alpha = (0;1), S = ker eps: membership is exactly evenness
        let omega = vershik::sample_coloring(&one, 10, &mut rng);
        assert_eq!(
            vershik::contains(&omega, &s_even, &probe).unwrap(),
            probe.sign().is_even()
        );
    }
    pass(8, "vershik_degenerate_atoms");
}

#[test]
fn criterion_09_vershik_invariance() {
    let alpha: ProbVector = "0.3;0.7".parse().unwrap();
    let s = SignSubgroup::trivial(1);
    let probe: FinSuppPerm = "(-1,0,1)".parse().unwrap();
    let conjugator: FinSuppPerm = "(1,5)".parse().unwrap();
    let expected: f64 = 0.343;
    let three_sigma = 3.0 * (expected * (1.0 - expected) / 100_000.0).sqrt();

    // canonical run: the membership probability is within 3 sigma of 0.7^3
    let rows = vershik::invariance_test(
        &alpha,
        &s,
        std::slice::from_ref(&probe),
        std::slice::from_ref(&conjugator),
        10,
        100_000,
        9001,
    )
    .unwrap();
    assert!(
        (rows[0].p_probe - expected).abs() < three_sigma,
        "p = {} vs {expected} ± {three_sigma}",
        rows[0].p_probe
    );

    // the two-proportion test passes at alpha = 0.01 in >= 4 of 5 seeds
    let mut passed = 0;
    for seed in 9001..=9005 {
        let rows = vershik::invariance_test(
            &alpha,
            &s,
            std::slice::from_ref(&probe),
            std::slice::from_ref(&conjugator),
            10,
            100_000,
            seed,
        )
        .unwrap();
        if rows[0].p_value > 0.01 {
            passed += 1;
        }
    }
    assert!(passed >= 4, "only {passed} of 5 seeds passed");
    pass(9, "vershik_invariance");
}

#[test]
fn criterion_10_shift_structure() {
    let alpha: ProbVector = "0;0.5,0.5".parse().unwrap();
    let estimate = vershik::shift_structure_probability(&alpha, 1, 50, 10_000, 1010).unwrap();
    assert!(estimate < 0.01, "estimate = {estimate}");
    // non-increasing across nested windows on shared seeds
    let mut last = 1.0f64;
    for m in [5i64, 10, 20, 50] {
        let p = vershik::shift_structure_probability(&alpha, 1, m, 10_000, 1010).unwrap();
        assert!(p <= last, "M = {m}: {p} > {last}");
        last = p;
    }
    pass(10, "shift_structure");
}

#[test]
fn criterion_11_defect_harness() {
    let start = Instant::now();
    let seq: OddSequence = "5,7,...".parse().unwrap();
    let depth = 2;
    let probes = almosthom::enumerate_words(5);
    let pairs = almosthom::enumerate_pairs(5);
    assert!(pairs.len() >= 1_000, "only {} pairs", pairs.len());
    let rep = FiniteRep::quotient(&seq, depth, &probes).unwrap();
    assert_eq!(rep.degree(), 12);
    assert_eq!(rep.defect(&pairs).unwrap(), Rat::new(0, 1));

    let n = rep.degree() as f64;
    let eps = 0.05;
    let perturbed = rep.perturb(eps, 1111).unwrap();
    // generator distance <= 2 eps + 2/n, counted pointwise
    let gen_words: Vec<Word> = vec!["t".parse().unwrap(), "s".parse().unwrap()];
    for w in &gen_words {
        let a = rep.image(w).unwrap();
        let b = perturbed.image(w).unwrap();
        let moved = a
            .images()
            .iter()
            .zip(b.images())
            .filter(|(x, y)| x != y)
            .count();
        let distance = moved as f64 / n;
        assert!(distance <= 2.0 * eps + 2.0 / n, "distance {distance}");
        assert_eq!(
            almosthom::hamming_distance(a, b).unwrap(),
            Rat::new(moved as i64, n as i64)
        );
    }
    // defect over generator pairs <= 3 eps + 3/n
    let gen_pairs: Vec<(Word, Word)> = pairs
        .iter()
        .filter(|(u, v)| u.len() == 1 && v.len() == 1)
        .cloned()
        .collect();
    assert_eq!(gen_pairs.len(), 16);
    let defect = perturbed.defect(&gen_pairs).unwrap();
    assert!(
        defect.to_f64() <= 3.0 * eps + 3.0 / n,
        "defect {defect} over bound"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(11, "defect_harness");
}

trait RatF64 {
    fn to_f64(&self) -> f64;
}

impl RatF64 for Rat {
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

#[test]
fn criterion_12_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_neumann-lab");
    let documented: &[&[&str]] = &[
        &["element", "--seq", "5,7,...", "--word", "s^-2 t s^2"],
        &["order", "--seq", "5,7", "--i", "2"],
        &["folner", "--seq", "5,7,9", "--i-max", "3", "--gen", "s"],
        &[
            "folner", "--seq", "5,7,9,11", "--i-max", "1", "--gen", "s", "--enumerate",
        ],
        &[
            "weiss", "--seq", "5,7,9", "--H", "t", "--probes", "s", "--i-max", "3", "--seed", "1",
        ],
        &[
            "weiss",
            "--seq",
            "5,7,...",
            "--H",
            "t",
            "--probes",
            "t, s^-1 t s",
            "--i-max",
            "2",
            "--mode",
            "mc",
            "--samples",
            "20000",
            "--seed",
            "7",
        ],
        &[
            "vershik",
            "--alpha",
            "0.3;0.7",
            "--window",
            "200",
            "--samples",
            "10000",
            "--seed",
            "7",
            "--test",
            "invariance",
            "--probes",
            "(-1,0,1)",
            "--conjugators",
            "(1,5)",
        ],
        &[
            "vershik",
            "--alpha",
            "0;0.5,0.5",
            "--window",
            "50",
            "--samples",
            "10000",
            "--seed",
            "7",
            "--test",
            "shift",
            "--k",
            "1",
        ],
        &[
            "vershik", "--alpha", "0;1", "--window", "8", "--samples", "1000", "--seed", "3",
            "--test", "degenerate", "--probes", "(-1,0,1);(0,1)",
        ],
        &[
            "defect",
            "--seq",
            "5,7,...",
            "--depth",
            "2",
            "--epsilon",
            "0.05",
            "--probe-depth",
            "4",
            "--seed",
            "7",
        ],
    ];
    for (idx, args) in documented.iter().enumerate() {
        for format in ["csv", "json"] {
            let run = |n: usize| {
                let out = std::process::Command::new(bin)
                    .args(*args)
                    .args(["--format", format])
                    .output()
                    .expect("binary runs");
                assert!(
                    out.status.success(),
                    "command {idx} run {n} failed: {}",
                    String::from_utf8_lossy(&out.stderr)
                );
                out.stdout
            };
            let first = run(1);
            let second = run(2);
            assert_eq!(
                first, second,
                "command {idx} ({format}) is not deterministic"
            );
            assert!(!first.is_empty());
        }
    }
    pass(12, "cli_determinism");
}
