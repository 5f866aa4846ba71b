//! Formula and model corpora for sweeps.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, Sentence};
use crate::kripke::{model_from_codes, KripkeModel};

/// Every closed normal-form sentence with at most `max_nodes` nodes and at
/// most `max_binders` binders. Binders take names from `labels`, each name
/// used at most once per sentence.
pub fn enumerate_sentences(max_nodes: usize, max_binders: usize, props: &[&str], labels: &[&str]) -> Vec<Sentence> {
    let mut out = Vec::new();
    for size in 1..=max_nodes {
        for (f, _) in grow(size, max_binders, &[], props, labels) {
            let s = Sentence::from_formula(&f).expect("only bound labels are generated");
            if s.is_normal() {
                out.push(s);
            }
        }
    }
    out
}

/// Formulas of exactly `size` nodes using at most `binders` binders, with
/// the label names in `scope` bound. Returns each formula with its binder
/// count.
fn grow(size: usize, binders: usize, scope: &[&str], props: &[&str], labels: &[&str]) -> Vec<(Formula, usize)> {
    let mut out = Vec::new();
    if size == 1 {
        for p in props {
            out.push((Formula::prop(p), 0));
            out.push((Formula::neg(p), 0));
        }
        for x in scope {
            out.push((Formula::label(x), 0));
        }
        return out;
    }
    for (f, b) in grow(size - 1, binders, scope, props, labels) {
        out.push((Formula::diamond(f.clone()), b));
        out.push((Formula::boxed(f), b));
    }
    if binders > 0 {
        for x in labels.iter().filter(|x| !scope.contains(x)) {
            let mut inner = scope.to_vec();
            inner.push(x);
            for (f, b) in grow(size - 1, binders - 1, &inner, props, labels) {
                out.push((Formula::mu(x, f.clone()), b + 1));
                out.push((Formula::nu(x, f), b + 1));
            }
        }
    }
    for left in 1..size - 1 {
        let right = size - 1 - left;
        let lefts = grow(left, binders, scope, props, labels);
        for (l, bl) in &lefts {
            for (r, br) in grow(right, binders - bl, scope, props, labels) {
                out.push((Formula::or(l.clone(), r.clone()), bl + br));
                out.push((Formula::and(l.clone(), r), bl + br));
            }
        }
    }
    out
}

/// `count` random closed normal-form sentences with 3 to `max_nodes` nodes
/// and at most `max_binders` binders, reproducible from `seed`.
pub fn random_sentences(
    count: usize,
    seed: u64,
    max_nodes: usize,
    max_binders: usize,
    props: &[&str],
    labels: &[&str],
) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let size = rng.gen_range(3..=max_nodes.max(3));
            let mut budget = max_binders.min(labels.len());
            let mut scope = Vec::new();
            let f = random_formula(&mut rng, size, &mut budget, &mut scope, props, labels);
            Sentence::from_formula(&f).expect("only bound labels are generated")
        })
        .collect()
}

fn random_formula(
    rng: &mut ChaCha8Rng,
    size: usize,
    binders: &mut usize,
    scope: &mut Vec<String>,
    props: &[&str],
    labels: &[&str],
) -> Formula {
    if size == 1 {
        if !scope.is_empty() && rng.gen_bool(0.5) {
            return Formula::Label(scope.choose(rng).unwrap().clone());
        }
        let p = props.choose(rng).unwrap();
        return if rng.gen_bool(0.5) {
            Formula::prop(p)
        } else {
            Formula::neg(p)
        };
    }
    // each binder takes the next label name, so sentences stay normal
    let next = labels.len() - labels.len().min(*binders);
    if *binders > 0 && rng.gen_bool(0.35) {
        let x = labels[next];
        *binders -= 1;
        scope.push(x.to_string());
        let body = random_formula(rng, size - 1, binders, scope, props, labels);
        scope.pop();
        return if rng.gen_bool(0.5) {
            Formula::mu(x, body)
        } else {
            Formula::nu(x, body)
        };
    }
    if size >= 3 && rng.gen_bool(0.5) {
        let left = rng.gen_range(1..size - 1);
        let l = random_formula(rng, left, binders, scope, props, labels);
        let r = random_formula(rng, size - 1 - left, binders, scope, props, labels);
        return if rng.gen_bool(0.5) {
            Formula::or(l, r)
        } else {
            Formula::and(l, r)
        };
    }
    let a = random_formula(rng, size - 1, binders, scope, props, labels);
    if rng.gen_bool(0.5) {
        Formula::diamond(a)
    } else {
        Formula::boxed(a)
    }
}

/// `count` random models with 1 to `max_states` states, each edge and each
/// valuation bit present with probability one half.
pub fn random_models(count: usize, seed: u64, max_states: usize, props: &[&str]) -> Vec<KripkeModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let props: Vec<String> = props.iter().map(|p| p.to_string()).collect();
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_states);
            let edges = rng.gen::<u64>() & mask(n * n);
            let val = rng.gen::<u64>() & mask(n * props.len());
            model_from_codes(n, &props, edges, val)
        })
        .collect()
}

fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}
