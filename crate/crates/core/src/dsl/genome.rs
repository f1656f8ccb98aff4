use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DslError;
use crate::netzoo::StatKind;
use crate::tensor::{BinaryOp, UnaryOp};

/// Ops allowed in a final aggregation slot.
pub const AGGREGATORS: [UnaryOp; 5] =
    [UnaryOp::ToMeanScalar, UnaryOp::ToStdScalar, UnaryOp::FrobeniusNorm, UnaryOp::L1Norm, UnaryOp::NormalizedSum];

pub const SEQUENTIAL_OPS: usize = 4;
pub const BRANCH_OPS: usize = 2;
pub const DAG_NODES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Sequential,
    Branched,
    Dag,
}

impl Structure {
    pub const ALL: [Structure; 3] = [Structure::Sequential, Structure::Branched, Structure::Dag];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Sequential => "sequential",
            Structure::Branched => "branched",
            Structure::Dag => "dag",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = DslError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Structure::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| DslError::Parse(format!("unknown structure `{s}`")))
    }
}

/// A DAG middle node: folds all of its predecessors with `binary`, then
/// applies `unary`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DagNode {
    pub binary: BinaryOp,
    pub unary: UnaryOp,
}

/// A candidate proxy. Every template ends in a scalar per layer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProxyGenome {
    /// `aggregate(op4(op3(op2(op1(input)))))`.
    Sequential { input: StatKind, ops: [UnaryOp; SEQUENTIAL_OPS], aggregate: UnaryOp },
    /// `aggregate(binary(a2(a1(in0)), b2(b1(in1))))`.
    Branched {
        inputs: [StatKind; 2],
        branch_a: [UnaryOp; BRANCH_OPS],
        branch_b: [UnaryOp; BRANCH_OPS],
        binary: BinaryOp,
        aggregate: UnaryOp,
    },
    /// Two inputs and three middle nodes; each node reads every earlier
    /// input and node. The result is the mean over all middle-node outputs.
    Dag { inputs: [StatKind; 2], nodes: [DagNode; DAG_NODES] },
}

/// A mutable position in a genome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Input(usize),
    Unary(usize),
    Binary(usize),
    Aggregate,
}

/// Operation sampling weights. With prioritization on, `no_op` gets 0.2 of
/// the unary mass and the binary ops favour sum and difference; otherwise
/// sampling is uniform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampler {
    pub osp: bool,
}

pub const OSP_NO_OP_WEIGHT: f64 = 0.2;
pub const OSP_BINARY_WEIGHTS: [f64; 4] = [0.6, 0.3, 0.05, 0.05];

impl Sampler {
    pub fn unary_weights(self) -> [f64; 24] {
        let mut w = [1.0 / 24.0; 24];
        if self.osp {
            w = [(1.0 - OSP_NO_OP_WEIGHT) / 23.0; 24];
            w[UnaryOp::NoOp.id() as usize] = OSP_NO_OP_WEIGHT;
        }
        w
    }

    pub fn binary_weights(self) -> [f64; 4] {
        if self.osp {
            OSP_BINARY_WEIGHTS
        } else {
            [0.25; 4]
        }
    }

    pub fn unary<R: Rng + ?Sized>(self, rng: &mut R) -> UnaryOp {
        let dist = WeightedIndex::new(self.unary_weights()).expect("positive weights");
        UnaryOp::ALL[dist.sample(rng)]
    }

    pub fn binary<R: Rng + ?Sized>(self, rng: &mut R) -> BinaryOp {
        let dist = WeightedIndex::new(self.binary_weights()).expect("positive weights");
        BinaryOp::ALL[dist.sample(rng)]
    }

    pub fn input<R: Rng + ?Sized>(self, rng: &mut R) -> StatKind {
        *StatKind::ALL.choose(rng).expect("non-empty")
    }

    pub fn aggregate<R: Rng + ?Sized>(self, rng: &mut R) -> UnaryOp {
        *AGGREGATORS.choose(rng).expect("non-empty")
    }

    pub fn genome<R: Rng + ?Sized>(self, structure: Structure, rng: &mut R) -> ProxyGenome {
        match structure {
            Structure::Sequential => ProxyGenome::Sequential {
                input: self.input(rng),
                ops: std::array::from_fn(|_| self.unary(rng)),
                aggregate: self.aggregate(rng),
            },
            Structure::Branched => ProxyGenome::Branched {
                inputs: [self.input(rng), self.input(rng)],
                branch_a: std::array::from_fn(|_| self.unary(rng)),
                branch_b: std::array::from_fn(|_| self.unary(rng)),
                binary: self.binary(rng),
                aggregate: self.aggregate(rng),
            },
            Structure::Dag => ProxyGenome::Dag {
                inputs: [self.input(rng), self.input(rng)],
                nodes: std::array::from_fn(|_| DagNode { binary: self.binary(rng), unary: self.unary(rng) }),
            },
        }
    }
}

pub fn sample_genome<R: Rng + ?Sized>(structure: Structure, osp: bool, rng: &mut R) -> ProxyGenome {
    Sampler { osp }.genome(structure, rng)
}

impl ProxyGenome {
    /// The shipped searched proxy:
    /// `mean(log|V|) * sqrt(sum|W| / (numel + eps))`.
    pub fn emq() -> ProxyGenome {
        ProxyGenome::Branched {
            inputs: [StatKind::V, StatKind::W],
            branch_a: [UnaryOp::Abs, UnaryOp::Log],
            branch_b: [UnaryOp::L1Norm, UnaryOp::Sqrt],
            binary: BinaryOp::Product,
            aggregate: UnaryOp::ToMeanScalar,
        }
    }

    pub fn structure(&self) -> Structure {
        match self {
            ProxyGenome::Sequential { .. } => Structure::Sequential,
            ProxyGenome::Branched { .. } => Structure::Branched,
            ProxyGenome::Dag { .. } => Structure::Dag,
        }
    }

    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::new();
        match self {
            ProxyGenome::Sequential { .. } => {
                out.push(Slot::Input(0));
                out.extend((0..SEQUENTIAL_OPS).map(Slot::Unary));
                out.push(Slot::Aggregate);
            }
            ProxyGenome::Branched { .. } => {
                out.extend([Slot::Input(0), Slot::Input(1)]);
                out.extend((0..2 * BRANCH_OPS).map(Slot::Unary));
                out.push(Slot::Binary(0));
                out.push(Slot::Aggregate);
            }
            ProxyGenome::Dag { .. } => {
                out.extend([Slot::Input(0), Slot::Input(1)]);
                for i in 0..DAG_NODES {
                    out.push(Slot::Binary(i));
                    out.push(Slot::Unary(i));
                }
            }
        }
        out
    }

    /// Replaces the content of `slot` with a fresh sample.
    pub fn resample_slot<R: Rng + ?Sized>(&mut self, slot: Slot, sampler: Sampler, rng: &mut R) {
        match (self, slot) {
            (ProxyGenome::Sequential { input, .. }, Slot::Input(_)) => *input = sampler.input(rng),
            (ProxyGenome::Sequential { ops, .. }, Slot::Unary(i)) => ops[i] = sampler.unary(rng),
            (ProxyGenome::Sequential { aggregate, .. }, Slot::Aggregate)
            | (ProxyGenome::Branched { aggregate, .. }, Slot::Aggregate) => *aggregate = sampler.aggregate(rng),
            (ProxyGenome::Branched { inputs, .. }, Slot::Input(i))
            | (ProxyGenome::Dag { inputs, .. }, Slot::Input(i)) => inputs[i] = sampler.input(rng),
            (ProxyGenome::Branched { branch_a, branch_b, .. }, Slot::Unary(i)) => {
                if i < BRANCH_OPS {
                    branch_a[i] = sampler.unary(rng)
                } else {
                    branch_b[i - BRANCH_OPS] = sampler.unary(rng)
                }
            }
            (ProxyGenome::Branched { binary, .. }, Slot::Binary(_)) => *binary = sampler.binary(rng),
            (ProxyGenome::Dag { nodes, .. }, Slot::Binary(i)) => nodes[i].binary = sampler.binary(rng),
            (ProxyGenome::Dag { nodes, .. }, Slot::Unary(i)) => nodes[i].unary = sampler.unary(rng),
            (g, s) => panic!("slot {s:?} does not exist in a {} genome", g.structure()),
        }
    }

    /// Checks that aggregation slots hold aggregating ops.
    pub fn validate(&self) -> Result<(), DslError> {
        match self {
            ProxyGenome::Sequential { aggregate, .. } | ProxyGenome::Branched { aggregate, .. } => {
                if AGGREGATORS.contains(aggregate) {
                    Ok(())
                } else {
                    Err(DslError::Parse(format!("`{}` cannot be used as the aggregation", aggregate.name())))
                }
            }
            ProxyGenome::Dag { .. } => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("genome serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<ProxyGenome, DslError> {
        let g: ProxyGenome = serde_json::from_str(text).map_err(|e| DslError::Parse(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    /// Compact one-line rendering, e.g. for logs and reports.
    pub fn describe(&self) -> String {
        let names = |ops: &[UnaryOp]| ops.iter().map(|o| o.name()).collect::<Vec<_>>().join(" > ");
        match self {
            ProxyGenome::Sequential { input, ops, aggregate } => {
                format!("{}({} > {})", aggregate.name(), input, names(ops))
            }
            ProxyGenome::Branched { inputs, branch_a, branch_b, binary, aggregate } => format!(
                "{}({}({} > {}, {} > {}))",
                aggregate.name(),
                binary.name(),
                inputs[0],
                names(branch_a),
                inputs[1],
                names(branch_b)
            ),
            ProxyGenome::Dag { inputs, nodes } => {
                let n: Vec<String> = nodes.iter().map(|d| format!("{}/{}", d.binary.name(), d.unary.name())).collect();
                format!("dag({}, {}; {})", inputs[0], inputs[1], n.join(", "))
            }
        }
    }
}
