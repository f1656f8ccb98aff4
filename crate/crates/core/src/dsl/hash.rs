use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::genome::ProxyGenome;
use crate::tensor::{BinaryOp, UnaryOp};

/// Weisfeiler-Lehman refinement rounds.
pub const WL_ITERATIONS: usize = 3;

/// Structural fingerprint of a genome; equal hashes mean equivalent graphs
/// up to `no_op` nodes and operand order of commutative ops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenomeHash(pub [u8; 16]);

impl fmt::Display for GenomeHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{b:02x}"))
    }
}

impl FromStr for GenomeHash {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 32 || !s.is_ascii() {
            return Err(format!("expected 32 hex digits, got `{s}`"));
        }
        let mut out = [0u8; 16];
        for (i, b) in out.iter_mut().enumerate() {
            *b = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).map_err(|e| format!("bad hash `{s}`: {e}"))?;
        }
        Ok(GenomeHash(out))
    }
}

impl Serialize for GenomeHash {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GenomeHash {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

struct Node {
    label: String,
    children: Vec<usize>,
    commutative: bool,
}

#[derive(Default)]
struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    fn push(&mut self, label: String, children: Vec<usize>, commutative: bool) -> usize {
        self.nodes.push(Node { label, children, commutative });
        self.nodes.len() - 1
    }

    fn unary_chain(&mut self, mut at: usize, ops: &[UnaryOp]) -> usize {
        for &op in ops {
            if op != UnaryOp::NoOp {
                at = self.push(format!("u:{}", op.name()), vec![at], false);
            }
        }
        at
    }

    fn binary(&mut self, op: BinaryOp, children: Vec<usize>) -> usize {
        self.push(format!("b:{}", op.name()), children, op.is_commutative())
    }
}

fn build_graph(genome: &ProxyGenome) -> Graph {
    let mut g = Graph::default();
    match genome {
        ProxyGenome::Sequential { input, ops, aggregate } => {
            let leaf = g.push(format!("in:{input}"), vec![], false);
            let end = g.unary_chain(leaf, ops);
            g.unary_chain(end, &[*aggregate]);
        }
        ProxyGenome::Branched { inputs, branch_a, branch_b, binary, aggregate } => {
            let a = g.push(format!("in:{}", inputs[0]), vec![], false);
            let a = g.unary_chain(a, branch_a);
            let b = g.push(format!("in:{}", inputs[1]), vec![], false);
            let b = g.unary_chain(b, branch_b);
            let join = g.binary(*binary, vec![a, b]);
            g.unary_chain(join, &[*aggregate]);
        }
        ProxyGenome::Dag { inputs, nodes } => {
            let mut preds = vec![
                g.push(format!("in:{}", inputs[0]), vec![], false),
                g.push(format!("in:{}", inputs[1]), vec![], false),
            ];
            let mut middle = Vec::new();
            for node in nodes {
                let label = if node.unary == UnaryOp::NoOp {
                    format!("dag({})", node.binary.name())
                } else {
                    format!("dag({},{})", node.binary.name(), node.unary.name())
                };
                let id = g.push(label, preds.clone(), node.binary.is_commutative());
                preds.push(id);
                middle.push(id);
            }
            g.push("dag_mean".into(), middle, true);
        }
    }
    g
}

fn digest_hex(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Directed WL hash over [`WL_ITERATIONS`] rounds: each node's label is
/// refined from its operands' labels (sorted for commutative ops), and the
/// genome hash digests the sorted multiset of labels from every round.
pub fn canonical_hash(genome: &ProxyGenome) -> GenomeHash {
    let g = build_graph(genome);
    let mut labels: Vec<String> = g.nodes.iter().map(|n| n.label.clone()).collect();
    let mut all: Vec<String> = labels.clone();
    for _ in 0..WL_ITERATIONS {
        let next: Vec<String> = g
            .nodes
            .iter()
            .zip(&labels)
            .map(|(node, own)| {
                let mut kids: Vec<&str> = node.children.iter().map(|&c| labels[c].as_str()).collect();
                if node.commutative {
                    kids.sort_unstable();
                }
                let mut parts = vec![own.as_str(), "|"];
                parts.extend(kids);
                digest_hex(&parts)
            })
            .collect();
        all.extend(next.iter().cloned());
        labels = next;
    }
    all.sort_unstable();
    let refs: Vec<&str> = all.iter().map(String::as_str).collect();
    let mut h = Sha256::new();
    for r in refs {
        h.update(r.as_bytes());
        h.update([0u8]);
    }
    let full = h.finalize();
    let mut out = [0u8; 16];
    out.copy_from_slice(&full[..16]);
    GenomeHash(out)
}
