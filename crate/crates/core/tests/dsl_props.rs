use std::collections::HashMap;

use emq_core::baselines::emq as emq_closed_form;
use emq_core::dsl::fixtures::{random_stack, random_stats};
use emq_core::dsl::{
    canonical_hash, evaluate_layer, layer_scores, sample_genome, GenomeHash, ProxyGenome, Sampler, Slot, Structure,
    AGGREGATORS,
};
use emq_core::search::{crossover, mutate_traced};
use emq_core::tensor::{UnaryOp, EPSILON};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

#[test]
fn shipped_genome_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = ProxyGenome::emq();
    for i in 0..100 {
        let s = random_stats(&mut rng, i);
        let direct = {
            let log_v = s.v.data().iter().map(|v| v.abs().ln()).sum::<f64>() / s.v.numel() as f64;
            let l1 = s.w.data().iter().map(|w| w.abs()).sum::<f64>();
            log_v * (l1 / (s.w.numel() as f64 + EPSILON)).sqrt()
        };
        let got = evaluate_layer(&g, &s).unwrap();
        assert!(close(got, direct), "fixture {i}: {got} vs {direct}");
        assert!(close(emq_closed_form(&s), direct));
    }
}

/// Groups many random genomes by hash; within a group every genome must
/// score identically.
#[test]
fn equal_hash_implies_equal_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let stats = random_stack(&mut rng, 3);
    let mut groups: HashMap<GenomeHash, (ProxyGenome, Result<Vec<f64>, _>)> = HashMap::new();
    let mut collisions = 0;
    for structure in Structure::ALL {
        for _ in 0..4000 {
            let g = sample_genome(structure, true, &mut rng);
            let scores = layer_scores(&g, &stats);
            let h = canonical_hash(&g);
            match groups.get(&h) {
                Some((first, s)) => {
                    collisions += 1;
                    match (s, &scores) {
                        (Ok(a), Ok(b)) => {
                            assert!(a.iter().zip(b).all(|(x, y)| close(*x, *y)), "{first:?} vs {g:?}")
                        }
                        (a, b) => assert_eq!(a.is_ok(), b.is_ok(), "{first:?} vs {g:?}"),
                    }
                }
                None => {
                    groups.insert(h, (g, scores));
                }
            }
        }
    }
    assert!(collisions > 0, "the sample should contain equivalent genomes");
}

fn equivalent_variant(g: &ProxyGenome) -> ProxyGenome {
    match g.clone() {
        ProxyGenome::Sequential { input, ops, aggregate } => {
            // Push no_ops to the back.
            let mut kept: Vec<UnaryOp> = ops.iter().copied().filter(|o| *o != UnaryOp::NoOp).collect();
            kept.resize(ops.len(), UnaryOp::NoOp);
            ProxyGenome::Sequential { input, ops: kept.try_into().unwrap(), aggregate }
        }
        ProxyGenome::Branched { inputs, branch_a, branch_b, binary, aggregate } if binary.is_commutative() => {
            ProxyGenome::Branched {
                inputs: [inputs[1], inputs[0]],
                branch_a: branch_b,
                branch_b: branch_a,
                binary,
                aggregate,
            }
        }
        other => other,
    }
}

proptest! {
    #[test]
    fn rewrites_keep_hash_and_score(seed in any::<u64>(), structure in prop::sample::select(Structure::ALL.to_vec())) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = sample_genome(structure, true, &mut rng);
        let v = equivalent_variant(&g);
        prop_assert_eq!(canonical_hash(&g), canonical_hash(&v));
        let stats = random_stack(&mut rng, 2);
        match (layer_scores(&g, &stats), layer_scores(&v, &stats)) {
            (Ok(a), Ok(b)) => prop_assert!(a.iter().zip(&b).all(|(x, y)| close(*x, *y))),
            (a, b) => prop_assert_eq!(a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), structure in prop::sample::select(Structure::ALL.to_vec())) {
        let g = sample_genome(structure, seed % 2 == 0, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(ProxyGenome::from_json(&g.to_json()).unwrap(), g);
    }
}

#[test]
fn crossover_children_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..10_000 {
        let structure = Structure::ALL[i % 3];
        let a = sample_genome(structure, true, &mut rng);
        let b = sample_genome(structure, true, &mut rng);
        let c = crossover(&a, &b, 1.0, &mut rng).unwrap();
        assert_eq!(c.structure(), structure);
        c.validate().unwrap();
        if let (
            ProxyGenome::Branched { inputs, branch_a, branch_b, .. },
            ProxyGenome::Branched { inputs: ia, branch_a: aa, branch_b: ab, .. },
            ProxyGenome::Branched { inputs: ib, branch_a: ba, branch_b: bb, .. },
        ) = (&c, &a, &b)
        {
            let parent_branches = [(ia[0], *aa), (ia[1], *ab), (ib[0], *ba), (ib[1], *bb)];
            assert!(parent_branches.contains(&(inputs[0], *branch_a)));
            assert!(parent_branches.contains(&(inputs[1], *branch_b)));
        }
    }
}

#[test]
fn mutation_changes_at_most_one_slot_and_follows_osp() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sampler = Sampler { osp: true };
    let weights = sampler.unary_weights();
    let mut counts = [0usize; 24];
    let mut total = 0usize;
    let base = sample_genome(Structure::Branched, true, &mut rng);
    for _ in 0..100_000 {
        let (m, slot) = mutate_traced(&base, 1.0, sampler, &mut rng);
        let slot = slot.expect("mutation fires at p_m = 1");
        let diff = differing_slots(&base, &m);
        assert!(diff.len() <= 1 && diff.iter().all(|d| *d == slot));
        if let (Slot::Unary(i), ProxyGenome::Branched { branch_a, branch_b, .. }) = (slot, &m) {
            let op = if i < 2 { branch_a[i] } else { branch_b[i - 2] };
            counts[op.id() as usize] += 1;
            total += 1;
        }
        if let ProxyGenome::Branched { aggregate, .. } = &m {
            assert!(AGGREGATORS.contains(aggregate));
        }
    }
    for (k, &c) in counts.iter().enumerate() {
        let freq = c as f64 / total as f64;
        let sd = (weights[k] * (1.0 - weights[k]) / total as f64).sqrt();
        assert!((freq - weights[k]).abs() < 5.0 * sd, "op {k}: {freq} vs {}", weights[k]);
    }
}

fn differing_slots(a: &ProxyGenome, b: &ProxyGenome) -> Vec<Slot> {
    let (
        ProxyGenome::Branched { inputs: ia, branch_a: aa, branch_b: ab, binary: xa, aggregate: ga },
        ProxyGenome::Branched { inputs: ib, branch_a: ba, branch_b: bb, binary: xb, aggregate: gb },
    ) = (a, b)
    else {
        panic!("branched genomes expected");
    };
    let mut out = Vec::new();
    for i in 0..2 {
        if ia[i] != ib[i] {
            out.push(Slot::Input(i));
        }
        if aa[i] != ba[i] {
            out.push(Slot::Unary(i));
        }
        if ab[i] != bb[i] {
            out.push(Slot::Unary(i + 2));
        }
    }
    if xa != xb {
        out.push(Slot::Binary(0));
    }
    if ga != gb {
        out.push(Slot::Aggregate);
    }
    out
}
