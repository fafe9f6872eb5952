//! Embedding schemes against an exact enumeration of their exit trees.

use lundberg_core::embedding::{
    embed, embedding_frequencies, AtomicDistribution, EmbeddingStats, Scheme,
};
use lundberg_core::montecarlo::{chunk_rng, Sequential};

fn laws() -> Vec<Vec<(f64, f64)>> {
    vec![
        vec![(-1.0, 0.5), (1.0, 0.5)],
        vec![(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)],
        vec![(-1.0, 0.2), (0.5, 0.35), (1.5, 0.45)],
        vec![(-3.0, 0.1), (-1.0, 0.2), (0.0, 0.3), (1.0, 0.25), (4.0, 0.15)],
        vec![(-1.0, 1.0 / 11.0), (0.12, 10.0 / 11.0)],
    ]
}

/// One leaf of the exit tree.
#[derive(Debug, Clone, Copy)]
struct Leaf {
    prob: f64,
    stopped: f64,
    max: f64,
    min: f64,
    qt: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Rule {
    AtPosition,
    LowestAtom,
    HighestAtom,
}

fn mean(a: &[(f64, f64)]) -> f64 {
    a.iter().map(|(x, p)| x * p).sum::<f64>() / a.iter().map(|(_, p)| p).sum::<f64>()
}

/// Recursive enumeration over sub-slices, written from the scheme
/// definitions rather than shared with the sampler.
fn enumerate(a: &[(f64, f64)], scheme: Scheme) -> Vec<Leaf> {
    fn go(a: &[(f64, f64)], rule: Rule, day_first: bool, pos: f64, leaf: Leaf, out: &mut Vec<Leaf>) {
        if a.len() == 1 {
            out.push(Leaf { stopped: a[0].0, ..leaf });
            return;
        }
        let k = match rule {
            Rule::AtPosition => a.iter().position(|&(x, _)| x >= pos).unwrap().clamp(1, a.len() - 1),
            Rule::LowestAtom => 1,
            Rule::HighestAtom => a.len() - 1,
        };
        let (lo, hi) = a.split_at(k);
        let (l, h) = (mean(lo), mean(hi));
        let up = (pos - l) / (h - l);
        let qt = leaf.qt + (pos - l) * (h - pos);
        let (up_rule, down_rule) = if day_first { (Rule::LowestAtom, Rule::HighestAtom) } else { (rule, rule) };
        go(hi, up_rule, false, h, Leaf { prob: leaf.prob * up, max: leaf.max.max(h), qt, ..leaf }, out);
        go(lo, down_rule, false, l, Leaf { prob: leaf.prob * (1.0 - up), min: leaf.min.min(l), qt, ..leaf }, out);
    }
    let m = mean(a);
    let (rule, day_first) = match scheme {
        Scheme::Dubins => (Rule::AtPosition, false),
        Scheme::AzemaYor => (Rule::LowestAtom, false),
        Scheme::AzemaYorMinus => (Rule::HighestAtom, false),
        Scheme::Day => (Rule::AtPosition, true),
    };
    let mut out = Vec::new();
    go(a, rule, day_first, m, Leaf { prob: 1.0, stopped: f64::NAN, max: m, min: m, qt: 0.0 }, &mut out);
    out
}

fn cdf(leaves: &[Leaf], key: impl Fn(&Leaf) -> f64, t: f64) -> f64 {
    leaves.iter().filter(|l| key(l) <= t + 1e-12).map(|l| l.prob).sum()
}

#[test]
fn every_scheme_embeds_the_law_exactly() {
    for law in laws() {
        let f = AtomicDistribution::new(&law).unwrap();
        for scheme in Scheme::ALL {
            let leaves = enumerate(&law, scheme);
            for &(x, p) in &law {
                let mass: f64 = leaves.iter().filter(|l| l.stopped == x).map(|l| l.prob).sum();
                assert!((mass - p).abs() < 1e-12, "{scheme:?} {law:?} atom {x}: {mass}");
            }
            let wald: f64 = leaves.iter().map(|l| l.prob * l.qt).sum();
            assert!((wald - f.variance()).abs() < 1e-12, "{scheme:?} {law:?}: {wald}");
        }
    }
}

#[test]
fn azema_yor_maximum_dominates_exactly() {
    for law in laws() {
        let ay = enumerate(&law, Scheme::AzemaYor);
        let du = enumerate(&law, Scheme::Dubins);
        let ay_minus = enumerate(&law, Scheme::AzemaYorMinus);
        let grid: Vec<f64> = ay.iter().chain(&du).chain(&ay_minus).flat_map(|l| [l.max, l.min]).collect();
        for &t in &grid {
            assert!(cdf(&ay, |l| l.max, t) <= cdf(&du, |l| l.max, t) + 1e-12, "{law:?} at {t}");
            // The mirror scheme pushes the minimum down instead.
            assert!(cdf(&ay_minus, |l| l.min, t) >= cdf(&du, |l| l.min, t) - 1e-12, "{law:?} at {t}");
        }
    }
}

#[test]
fn symmetric_three_atom_law_under_dubins() {
    let law = [(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)];
    let f = AtomicDistribution::new(&law).unwrap();
    let n = 1_000_000;
    let s = embedding_frequencies(&f, Scheme::Dubins, n, 17, &Sequential).unwrap();
    for a in &s.atoms {
        assert!(a.within(4.0), "{a:?}");
    }
}

fn sampled(law: &[(f64, f64)], scheme: Scheme, n: u64, seed: u64) -> EmbeddingStats {
    let f = AtomicDistribution::new(law).unwrap();
    embedding_frequencies(&f, scheme, n, seed, &Sequential).unwrap()
}

#[test]
fn sampled_chain_extremes_follow_the_tree() {
    let n = 200_000;
    for (i, law) in laws().iter().enumerate() {
        for scheme in Scheme::ALL {
            let leaves = enumerate(law, scheme);
            let s = sampled(law, scheme, n, 100 + i as u64);
            let mut acc = 0u64;
            for &(v, c) in &s.chain_max {
                acc += c;
                let p = cdf(&leaves, |l| l.max, v);
                let se = (p * (1.0 - p) / n as f64).sqrt();
                let emp = acc as f64 / n as f64;
                assert!((emp - p).abs() <= 4.0 * se + 1e-12, "{scheme:?} {law:?} max {v}: {emp} vs {p}");
            }
            assert!(s.stopped_value.within(s.mean, s.mean, 4.0));
            assert!(s.quadratic_time.within(s.variance, s.variance, 4.0));
        }
    }
}

#[test]
fn single_draws_are_reproducible() {
    let f = AtomicDistribution::new(&laws()[3]).unwrap();
    for scheme in Scheme::ALL {
        let a = embed(&f, scheme, &mut chunk_rng(3, 9));
        let b = embed(&f, scheme, &mut chunk_rng(3, 9));
        assert_eq!(a, b);
        assert!(f.atoms().contains(&a.stopped_value));
        assert!(a.chain_min <= a.stopped_value && a.stopped_value <= a.chain_max);
    }
}
