//! Reconvergence-driven cuts, their constrained MFFCs and the MDP state.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::aig::{AigNetwork, NodeId};
use crate::truth::{TruthError, TruthTable, MAX_VARS};

pub const DEFAULT_MAX_LEAVES: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub root: NodeId,
    /// Ascending node index; leaf `i` is truth-table variable `i`.
    pub leaves: Vec<NodeId>,
    /// Internal And nodes in topological order, root last.
    pub volume: Vec<NodeId>,
    pub mffc: Vec<NodeId>,
}

impl Cone {
    pub fn input_size(&self) -> usize {
        self.leaves.len()
    }

    /// Fewer than two leaves: nothing to rewrite.
    pub fn is_rewritable(&self) -> bool {
        self.leaves.len() >= 2
    }
}

/// Greedy cut growth from the root's fanins, cheapest expansion first.
pub fn reconvergence_driven_cut(net: &AigNetwork, root: NodeId, max_leaves: usize) -> Cone {
    assert!(net.is_and(root) && !net.is_deleted(root), "root {root} is not an And node");
    let mut leaves: Vec<NodeId> = Vec::new();
    let mut inside: HashSet<NodeId> = HashSet::from([root]);
    for l in net.fanins(root) {
        if !l.is_const() && !leaves.contains(&l.node()) {
            leaves.push(l.node());
        }
    }
    loop {
        let mut best: Option<(i32, std::cmp::Reverse<u32>, NodeId)> = None;
        for &l in &leaves {
            if !net.is_and(l) || net.level(l) == 0 {
                continue;
            }
            let mut added = 0;
            let fanins = net.fanins(l);
            for (k, f) in fanins.iter().enumerate() {
                let f = f.node();
                let dup = k == 1 && fanins[0].node() == f;
                if f != 0 && !dup && !leaves.contains(&f) && !inside.contains(&f) {
                    added += 1;
                }
            }
            let key = (added - 1, std::cmp::Reverse(net.level(l)), l);
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
        let Some((cost, _, l)) = best else { break };
        if leaves.len() as i32 + cost > max_leaves as i32 {
            break;
        }
        leaves.retain(|&x| x != l);
        inside.insert(l);
        for f in net.fanins(l) {
            let f = f.node();
            if f != 0 && !leaves.contains(&f) && !inside.contains(&f) {
                leaves.push(f);
            }
        }
    }
    leaves.sort_unstable();
    let volume = collect_volume(net, root, &leaves);
    let mut cone = Cone { root, leaves, volume, mffc: Vec::new() };
    cone.mffc = constrained_mffc(net, &cone);
    cone
}

/// Nodes between `leaves` and `root` in post-order, root last.
pub fn collect_volume(net: &AigNetwork, root: NodeId, leaves: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut seen: HashSet<NodeId> = leaves.iter().copied().collect();
    let mut stack = vec![(root, false)];
    while let Some((n, expanded)) = stack.pop() {
        if expanded {
            out.push(n);
            continue;
        }
        if !seen.insert(n) {
            continue;
        }
        stack.push((n, true));
        for l in net.fanins(n).iter().rev() {
            if !seen.contains(&l.node()) && l.node() != 0 {
                stack.push((l.node(), false));
            }
        }
    }
    out
}

/// Largest subset of the volume containing the root whose other members
/// are referenced only from inside the subset.
pub fn constrained_mffc(net: &AigNetwork, cone: &Cone) -> Vec<NodeId> {
    let mut by_level: Vec<NodeId> = cone.volume.iter().copied().filter(|&n| n != cone.root).collect();
    by_level.sort_by_key(|&n| (std::cmp::Reverse(net.level(n)), n));
    let mut member: HashSet<NodeId> = HashSet::from([cone.root]);
    let mut out = vec![cone.root];
    for v in by_level {
        let inner = net.fanouts(v).iter().filter(|&&f| member.contains(&(f as NodeId))).count();
        if inner as u32 == net.ref_count(v) {
            member.insert(v);
            out.push(v);
        }
    }
    out.sort_unstable();
    out
}

/// Function of the root over the leaves.
pub fn simulate_cone(net: &AigNetwork, cone: &Cone) -> Result<TruthTable, TruthError> {
    let k = cone.leaves.len();
    if k > MAX_VARS {
        return Err(TruthError::ConeTooLarge(k));
    }
    let mut val: HashMap<NodeId, TruthTable> = HashMap::with_capacity(k + cone.volume.len() + 1);
    val.insert(0, TruthTable::zero(k));
    for (i, &l) in cone.leaves.iter().enumerate() {
        val.insert(l, TruthTable::var(k, i));
    }
    if let Some(t) = val.get(&cone.root) {
        return Ok(*t);
    }
    for &n in &cone.volume {
        let [a, b] = net.fanins(n);
        let get = |l: crate::Lit| {
            let t = val[&l.node()];
            if l.is_complemented() {
                !t
            } else {
                t
            }
        };
        let t = get(a) & get(b);
        val.insert(n, t);
    }
    Ok(val[&cone.root])
}

/// The seven-integer state describing a cone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureVector {
    pub is_critical: u32,
    pub input_size: u32,
    pub node_size: u32,
    pub fanout_size: u32,
    pub positive_edges: u32,
    pub negative_edges: u32,
    pub max_depth: u32,
}

impl FeatureVector {
    pub const LEN: usize = 7;

    pub fn to_array(&self) -> [u32; 7] {
        [
            self.is_critical,
            self.input_size,
            self.node_size,
            self.fanout_size,
            self.positive_edges,
            self.negative_edges,
            self.max_depth,
        ]
    }

    pub fn from_array(a: [u32; 7]) -> Self {
        FeatureVector {
            is_critical: a[0],
            input_size: a[1],
            node_size: a[2],
            fanout_size: a[3],
            positive_edges: a[4],
            negative_edges: a[5],
            max_depth: a[6],
        }
    }
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.to_array();
        write!(f, "{},{},{},{},{},{},{}", a[0], a[1], a[2], a[3], a[4], a[5], a[6])
    }
}

impl FromStr for FeatureVector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<u32> = s
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let a: [u32; 7] = v.try_into().map_err(|v: Vec<u32>| format!("expected 7 features, got {}", v.len()))?;
        Ok(Self::from_array(a))
    }
}

fn clamp(name: &str, v: u32, lo: u32, hi: u32) -> u32 {
    let c = v.clamp(lo, hi);
    if c != v {
        log::debug!("feature {name}={v} clamped to {c}");
    }
    c
}

/// `critical` is the mask from [`AigNetwork::mark_critical_path`].
pub fn extract_features(net: &AigNetwork, cone: &Cone, critical: &[bool]) -> FeatureVector {
    let mut fanout = 0;
    let mut pos = 0;
    let mut neg = 0;
    for &n in &cone.volume {
        fanout += net.fanouts(n).len() as u32;
        for l in net.fanins(n) {
            if l.is_complemented() {
                neg += 1;
            } else {
                pos += 1;
            }
        }
    }
    let min_leaf = cone.leaves.iter().map(|&l| net.level(l)).min().unwrap_or(0);
    FeatureVector {
        is_critical: critical.get(cone.root).copied().unwrap_or(false) as u32,
        input_size: clamp("input_size", cone.leaves.len() as u32, 2, 10),
        node_size: clamp("node_size", cone.volume.len() as u32, 2, 16),
        fanout_size: fanout,
        positive_edges: pos,
        negative_edges: neg,
        max_depth: net.level(cone.root) - min_leaf,
    }
}
