use rand::seq::index::sample;
use rand::Rng;

use super::SearchError;
use crate::dsl::{ProxyGenome, Sampler, Slot, SEQUENTIAL_OPS};

/// Samples a pool of `max(2, ceil(r * n))` individuals, keeps its `top_k`
/// fittest, and returns two distinct parents drawn uniformly from those.
/// Fitness ties inside the pool keep the earlier-sampled individual first.
pub fn tournament_select<R: Rng + ?Sized>(
    fitness: &[f64],
    ratio: f64,
    top_k: usize,
    rng: &mut R,
) -> Result<(usize, usize), SearchError> {
    let n = fitness.len();
    if n < 2 {
        return Err(SearchError::Config(format!("tournament needs at least 2 individuals, got {n}")));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(SearchError::Config(format!("selection ratio {ratio} outside (0, 1]")));
    }
    let pool_size = ((ratio * n as f64).ceil() as usize).clamp(2, n);
    let mut pool: Vec<usize> = sample(rng, n, pool_size).into_vec();
    pool.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]));
    let k = top_k.clamp(2, pool_size);
    let picks = sample(rng, k, 2);
    Ok((pool[picks.index(0)], pool[picks.index(1)]))
}

/// Recombines two genomes of the same structure. With probability `1 - p_c`
/// the child is a copy of `a`.
///
/// Sequential genomes use one-point crossover over their input, four ops and
/// aggregation; a branched child keeps one random branch of `a` and takes a
/// random branch of `b` (binary op and aggregation from `a`); DAG children
/// take each input and node from either parent with equal odds.
pub fn crossover<R: Rng + ?Sized>(
    a: &ProxyGenome,
    b: &ProxyGenome,
    p_c: f64,
    rng: &mut R,
) -> Result<ProxyGenome, SearchError> {
    if a.structure() != b.structure() {
        return Err(SearchError::StructureMismatch(a.structure(), b.structure()));
    }
    if !rng.gen_bool(p_c.clamp(0.0, 1.0)) {
        return Ok(a.clone());
    }
    Ok(match (a, b) {
        (
            ProxyGenome::Sequential { input: ia, ops: oa, .. },
            ProxyGenome::Sequential { ops: ob, aggregate: gb, .. },
        ) => {
            // Slots are [input, op0..op3, aggregate]. The cut lies strictly
            // inside, so the input always comes from `a` and the aggregation
            // from `b`.
            let cut = rng.gen_range(1..=SEQUENTIAL_OPS + 1);
            let ops = std::array::from_fn(|i| if i + 1 < cut { oa[i] } else { ob[i] });
            ProxyGenome::Sequential { input: *ia, ops, aggregate: *gb }
        }
        (
            ProxyGenome::Branched { inputs: ia, branch_a: aa, branch_b: ab, binary, aggregate },
            ProxyGenome::Branched { inputs: ib, branch_a: ba, branch_b: bb, .. },
        ) => {
            let keep_first = rng.gen_bool(0.5);
            let take_first = rng.gen_bool(0.5);
            let (kept_in, kept) = if keep_first { (ia[0], *aa) } else { (ia[1], *ab) };
            let (got_in, got) = if take_first { (ib[0], *ba) } else { (ib[1], *bb) };
            // The donated branch replaces the one that was not kept.
            if keep_first {
                ProxyGenome::Branched {
                    inputs: [kept_in, got_in],
                    branch_a: kept,
                    branch_b: got,
                    binary: *binary,
                    aggregate: *aggregate,
                }
            } else {
                ProxyGenome::Branched {
                    inputs: [got_in, kept_in],
                    branch_a: got,
                    branch_b: kept,
                    binary: *binary,
                    aggregate: *aggregate,
                }
            }
        }
        (ProxyGenome::Dag { inputs: ia, nodes: na }, ProxyGenome::Dag { inputs: ib, nodes: nb }) => {
            let inputs = std::array::from_fn(|i| if rng.gen_bool(0.5) { ia[i] } else { ib[i] });
            let nodes = std::array::from_fn(|i| if rng.gen_bool(0.5) { na[i] } else { nb[i] });
            ProxyGenome::Dag { inputs, nodes }
        }
        _ => unreachable!("structures checked above"),
    })
}

/// With probability `p_m`, resamples one uniformly chosen slot (input, op
/// or aggregation) and reports which.
pub fn mutate_traced<R: Rng + ?Sized>(
    g: &ProxyGenome,
    p_m: f64,
    sampler: Sampler,
    rng: &mut R,
) -> (ProxyGenome, Option<Slot>) {
    if !rng.gen_bool(p_m.clamp(0.0, 1.0)) {
        return (g.clone(), None);
    }
    let slots = g.slots();
    let slot = slots[rng.gen_range(0..slots.len())];
    let mut out = g.clone();
    out.resample_slot(slot, sampler, rng);
    (out, Some(slot))
}

pub fn mutate<R: Rng + ?Sized>(g: &ProxyGenome, p_m: f64, sampler: Sampler, rng: &mut R) -> ProxyGenome {
    mutate_traced(g, p_m, sampler, rng).0
}
