#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uvass::generators::{
    gen_bounded_oca, gen_partition, gen_partition_ambiguous, gen_unamb_check_variant, random_vass, BoundedOcaInstance,
    PartitionInstance, RandomParams,
};
use uvass::model::{Label, StateId, SymbolId, Vass, VassBuilder};

pub const CORPUS_SEED: u64 = 0x5eed;

/// Random corpus with `n ≤ 3`, `d ≤ 2`, `M ≤ 2`, `|Σ| ≤ 2`. The density is
/// picked so that each instance has a handful of transitions on average.
pub fn random_corpus(count: usize, seed: u64) -> Vec<(RandomParams, Vass)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let states = rng.gen_range(1..=3usize);
            let dim = rng.gen_range(0..=2usize);
            let norm = if dim == 0 { 0 } else { rng.gen_range(0..=2u32) };
            let symbols = rng.gen_range(1..=2usize);
            let candidates = states * (symbols + 1) * (2 * norm as usize + 1).pow(dim as u32) * states;
            let wanted = rng.gen_range(2..=7usize) as f64;
            let density = (wanted / candidates as f64).min(1.0);
            let p = RandomParams {
                states,
                dim,
                norm,
                symbols,
                density,
                seed: seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
            };
            let v = random_vass(&p).expect("random parameters are valid");
            (p, v)
        })
        .collect()
}

/// All multisets of size `1..=max_k` over `1..=max_elem`, each sorted.
pub fn multisets(max_k: usize, max_elem: u32) -> Vec<Vec<u32>> {
    fn rec(start: u32, max_elem: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for x in start..=max_elem {
            cur.push(x);
            rec(x, max_elem, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 1..=max_k {
        rec(1, max_elem, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Subset-sum enumeration: some subset sums to exactly half the total.
pub fn has_perfect_partition(s: &[u32]) -> bool {
    let total: u32 = s.iter().sum();
    if total % 2 == 1 {
        return false;
    }
    (0u32..(1 << s.len())).any(|mask| {
        let sum: u32 = s.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, x)| x).sum();
        2 * sum == total
    })
}

pub fn partition_instance(s: &[u32]) -> PartitionInstance {
    PartitionInstance::new(s.iter().map(|&x| BigInt::from(x)).collect()).unwrap()
}

pub fn partition_gadget(s: &[u32]) -> Vass {
    gen_partition(&partition_instance(s)).unwrap()
}

pub fn partition_ambiguous_gadget(s: &[u32]) -> Vass {
    gen_partition_ambiguous(&partition_instance(s)).unwrap()
}

/// Random bounded-reachability instance: a one-counter net with at most
/// three states and three transitions of effect in `[-2, 2]`, `N ≤ 6`.
pub fn random_oca_instance(rng: &mut ChaCha8Rng) -> BoundedOcaInstance {
    let n = rng.gen_range(1..=3usize);
    let mut b = VassBuilder::new(1);
    b.symbol("a");
    for q in 0..n {
        b.state(format!("a{q}"));
    }
    b.initial("a0");
    let t = rng.gen_range(1..=3usize);
    for _ in 0..t {
        let src = rng.gen_range(0..n);
        let dst = rng.gen_range(0..n);
        let h = rng.gen_range(-2..=2i64);
        b.transition(format!("a{src}"), Some("a"), [h], format!("a{dst}"));
    }
    let a = b.build().unwrap();
    let bound = rng.gen_range(0..=6i64);
    let m = rng.gen_range(0..=bound);
    let target = StateId(rng.gen_range(0..n));
    BoundedOcaInstance::new(a, BigInt::from(bound), target, BigInt::from(m)).unwrap()
}

pub fn oca_corpus(count: usize, seed: u64) -> Vec<BoundedOcaInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_oca_instance(&mut rng)).collect()
}

pub fn oca_gadget(inst: &BoundedOcaInstance) -> Vass {
    gen_bounded_oca(inst).unwrap()
}

pub fn oca_variant(inst: &BoundedOcaInstance) -> Vass {
    gen_unamb_check_variant(inst).unwrap()
}

/// Breadth-first search over `(state, counter)` with the counter kept in
/// `[0, N]`: is `p(m)` reachable from `q(0)`?
pub fn oca_reachable(inst: &BoundedOcaInstance) -> bool {
    let a = &inst.a;
    let bound = inst.bound.to_i64().unwrap();
    let m = inst.m.to_i64().unwrap();
    let start = (a.initial().0, 0i64);
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((q, c)) = queue.pop_front() {
        if q == inst.target.0 && c == m {
            return true;
        }
        for t in a.transitions().iter().filter(|t| t.src.0 == q) {
            let next = c + t.effect[0].to_i64().unwrap();
            if (0..=bound).contains(&next) && seen.insert((t.dst.0, next)) {
                queue.push_back((t.dst.0, next));
            }
        }
    }
    false
}

/// Subset simulation of a dimension-0 instance.
pub fn fa_accepts(fa: &Vass, word: &[SymbolId]) -> bool {
    assert_eq!(fa.dim(), 0);
    let closure = |set: BTreeSet<usize>| {
        let mut out = set.clone();
        let mut stack: Vec<usize> = set.into_iter().collect();
        while let Some(q) = stack.pop() {
            for t in fa.transitions().iter().filter(|t| t.src.0 == q && t.label == Label::Epsilon) {
                if out.insert(t.dst.0) {
                    stack.push(t.dst.0);
                }
            }
        }
        out
    };
    let mut cur = closure(BTreeSet::from([fa.initial().0]));
    for &a in word {
        let next = fa
            .transitions()
            .iter()
            .filter(|t| cur.contains(&t.src.0) && t.label == Label::Symbol(a))
            .map(|t| t.dst.0)
            .collect();
        cur = closure(next);
    }
    cur.iter().any(|&q| fa.is_final(StateId(q)))
}
