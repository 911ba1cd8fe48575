//! Gain evaluation and local replacement of a cone by a candidate chain.
//!
//! Area is priced with reference counting: dereferencing the cone root
//! frees the constrained MFFC, then the candidate is referenced against the
//! remaining graph in a local overlay so structural sharing is counted
//! exactly. Depth is guarded by required times under unit delay.

use std::collections::HashMap;

use crate::aig::{AigNetwork, Lit, NodeId};
use crate::chain::{Chain, ChainLit};
use crate::cone::{simulate_cone, Cone};
use crate::learn::Action;
use crate::truth::{NpnTransform, TruthTable};

/// A replacement structure for a cone root. Chain input `k` is driven by
/// `leaves[port.perm[k]]` complemented by phase bit `k`; the root becomes
/// the chain output complemented by the output phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteCandidate {
    pub action: Action,
    pub chain: Chain,
    pub port: NpnTransform,
    /// Filled in by [`evaluate`].
    pub est_size_gain: i32,
    pub est_root_level: u32,
}

impl RewriteCandidate {
    pub fn new(action: Action, chain: Chain, port: NpnTransform) -> Self {
        assert_eq!(chain.num_inputs(), port.num_vars(), "port arity differs from chain arity");
        RewriteCandidate { action, chain, port, est_size_gain: 0, est_root_level: 0 }
    }

    /// Function of the cone root over its leaves once spliced in.
    pub fn function(&self) -> TruthTable {
        self.chain.simulate().apply_npn_transform(&self.port)
    }

    fn input_lit(&self, cone: &Cone, k: usize) -> Lit {
        let leaf = cone.leaves[self.port.perm()[k] as usize];
        Lit::new(leaf, self.port.phase(k))
    }
}

const INF: u32 = u32::MAX;

/// Required times for the depth gate. Arrival times are the network levels.
#[derive(Clone, Debug)]
pub struct TimingView {
    require: Vec<u32>,
    depth: u32,
}

impl TimingView {
    pub fn require(&self, n: NodeId) -> u32 {
        self.require.get(n).copied().unwrap_or(INF)
    }

    /// Reference depth the required times were derived from.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn arrive(&self, net: &AigNetwork, n: NodeId) -> u32 {
        net.level(n)
    }

    /// `None` for nodes with no path to an output.
    pub fn slack(&self, net: &AigNetwork, n: NodeId) -> Option<i64> {
        let r = self.require(n);
        (r != INF).then(|| r as i64 - net.level(n) as i64)
    }

    /// Re-establishes `require(fanin) ≤ require(node) − 1` after `touched`
    /// nodes gained fanouts or were created; values only decrease.
    pub fn tighten(&mut self, net: &AigNetwork, touched: &[NodeId]) {
        if self.require.len() < net.num_nodes() {
            self.require.resize(net.num_nodes(), INF);
        }
        let mut work: Vec<NodeId> = touched.to_vec();
        while let Some(n) = work.pop() {
            if net.is_deleted(n) || n == 0 {
                continue;
            }
            let mut r = self.require[n];
            for &f in net.fanouts(n) {
                let rf = self.require[f as usize];
                if rf != INF {
                    r = r.min(rf.saturating_sub(1));
                }
            }
            if net.ref_count(n) as usize > net.fanouts(n).len() {
                r = r.min(self.depth);
            }
            self.require[n] = r;
            if r != INF && net.is_and(n) {
                for l in net.fanins(n) {
                    let m = l.node();
                    if m != 0 && self.require[m] > r.saturating_sub(1) {
                        work.push(m);
                    }
                }
            }
        }
    }
}

pub fn compute_timing(net: &AigNetwork) -> TimingView {
    compute_timing_with_depth(net, net.depth())
}

/// Required times against a given reference depth.
pub fn compute_timing_with_depth(net: &AigNetwork, depth: u32) -> TimingView {
    let mut require = vec![INF; net.num_nodes()];
    for l in net.outputs() {
        require[l.node()] = depth;
    }
    let order = net.topological_order();
    for &n in order.iter().rev() {
        if !net.is_and(n) || require[n] == INF {
            continue;
        }
        let r = require[n].saturating_sub(1);
        for l in net.fanins(n) {
            let m = l.node();
            require[m] = require[m].min(r);
        }
    }
    require[0] = INF;
    TimingView { require, depth }
}

/// Dereferences the cone below `root` down to `leaves` and returns the
/// nodes that lose their last reference, root first.
fn deref_collect(net: &mut AigNetwork, root: NodeId, leaves: &[NodeId]) -> Vec<NodeId> {
    let mut dead = vec![root];
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        for l in net.fanins(n) {
            let m = l.node();
            if !net.is_and(m) || leaves.contains(&m) {
                continue;
            }
            if net.ref_dec(m) == 0 {
                dead.push(m);
                stack.push(m);
            }
        }
    }
    dead
}

/// Decrements reference counts below `root`, stopping at `leaves`; returns
/// how many nodes (root included) would die with the root.
pub fn deref_cut(net: &mut AigNetwork, root: NodeId, leaves: &[NodeId]) -> usize {
    deref_collect(net, root, leaves).len()
}

/// Inverse of [`deref_cut`]; returns the same count.
pub fn ref_cut(net: &mut AigNetwork, root: NodeId, leaves: &[NodeId]) -> usize {
    let mut count = 1;
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        for l in net.fanins(n) {
            let m = l.node();
            if !net.is_and(m) || leaves.contains(&m) {
                continue;
            }
            if net.ref_inc(m) == 1 {
                count += 1;
                stack.push(m);
            }
        }
    }
    count
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub preserve_depth: bool,
    pub allow_zero_gain: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RejectReason {
    NoGain,
    DepthViolation,
    Unverified,
    /// The candidate reuses the root itself inside its own structure.
    WouldCycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Accept(i32),
    Reject(RejectReason),
}

/// Literal of the dry run: an existing node or a node the candidate would add.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Sym {
    Real(Lit),
    New(u32, bool),
}

impl Sym {
    fn xor(self, c: bool) -> Sym {
        match self {
            Sym::Real(l) => Sym::Real(l.xor(c)),
            Sym::New(i, p) => Sym::New(i, p ^ c),
        }
    }
}

/// Reference-count changes made during a dry run, undone in reverse.
struct Journal<'a> {
    net: &'a mut AigNetwork,
    ops: Vec<(NodeId, bool)>,
}

impl Journal<'_> {
    fn inc(&mut self, n: NodeId) -> u32 {
        self.ops.push((n, true));
        self.net.ref_inc(n)
    }

    fn dec(&mut self, n: NodeId) -> u32 {
        self.ops.push((n, false));
        self.net.ref_dec(n)
    }

    /// References `n`; if it was unreferenced, it and its unreferenced
    /// fanins come back. Returns how many And nodes came back.
    fn revive(&mut self, n: NodeId) -> i32 {
        let mut count = 0;
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            if self.inc(m) == 1 && self.net.is_and(m) {
                count += 1;
                stack.extend(self.net.fanins(m).iter().map(|l| l.node()));
            }
        }
        count
    }

    /// Dereferences `n` fully (no leaf boundary); returns nodes freed.
    fn release(&mut self, n: NodeId) -> i32 {
        let mut count = 1;
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            for l in self.net.fanins(m) {
                let f = l.node();
                if self.net.is_and(f) && self.dec(f) == 0 {
                    count += 1;
                    stack.push(f);
                }
            }
        }
        count
    }

    fn undo(self) {
        for &(n, up) in self.ops.iter().rev() {
            if up {
                self.net.ref_dec(n);
            } else {
                self.net.ref_inc(n);
            }
        }
    }
}

/// Dry run of a replacement: size gain and the would-be root level, or
/// `None` as level when the candidate is the existing structure.
fn dry_run(net: &mut AigNetwork, cone: &Cone, cand: &RewriteCandidate) -> Result<(i32, Option<u32>), RejectReason> {
    let root = cone.root;
    let chain = &cand.chain;
    let n = chain.num_inputs();
    let mut used = vec![false; chain.size()];
    let mark = |used: &mut Vec<bool>, l: ChainLit| {
        if l.index as usize > n {
            used[l.index as usize - n - 1] = true;
        }
    };
    mark(&mut used, chain.output());
    for s in (0..chain.size()).rev() {
        if used[s] {
            let [a, b] = chain.steps()[s];
            mark(&mut used, a);
            mark(&mut used, b);
        }
    }

    let mut j = Journal { net, ops: Vec::new() };
    let freed = j.release(root);
    let mut level: HashMap<u32, u32> = HashMap::new();
    let mut local: HashMap<(Sym, Sym), u32> = HashMap::new();
    let mut vals: Vec<Sym> = Vec::with_capacity(chain.size());
    let mut added = 0u32;
    let mut revived = 0i32;
    let mut cycle = false;
    let sym_of = |vals: &[Sym], l: ChainLit| -> Sym {
        let i = l.index as usize;
        let base = if i == 0 {
            Sym::Real(Lit::FALSE)
        } else if i <= n {
            Sym::Real(cand.input_lit(cone, i - 1))
        } else {
            vals[i - n - 1]
        };
        base.xor(l.compl)
    };
    let out_step = chain.output().index as usize > n;
    for (s, st) in chain.steps().iter().enumerate() {
        if !used[s] {
            vals.push(Sym::Real(Lit::FALSE));
            continue;
        }
        let x = sym_of(&vals, st[0]);
        let y = sym_of(&vals, st[1]);
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        let simplified = match (a, b) {
            (Sym::Real(p), Sym::Real(q)) => j.net.lookup_and(p, q).map(Sym::Real),
            _ if a == Sym::Real(Lit::FALSE) || a == b.xor(true) => Some(Sym::Real(Lit::FALSE)),
            _ if a == Sym::Real(Lit::TRUE) || a == b => Some(b),
            _ => local.get(&(a, b)).map(|&id| Sym::New(id, false)),
        };
        let r = match simplified {
            Some(r) => r,
            None => {
                let id = added;
                added += 1;
                let mut lv = 0;
                for o in [a, b] {
                    match o {
                        Sym::Real(l) => {
                            revived += j.revive(l.node());
                            lv = lv.max(j.net.level(l.node()));
                        }
                        Sym::New(k, _) => lv = lv.max(level[&k]),
                    }
                }
                level.insert(id, lv + 1);
                local.insert((a, b), id);
                Sym::New(id, false)
            }
        };
        let is_out = out_step && s + n + 1 == chain.output().index as usize;
        if !is_out && matches!(r, Sym::Real(l) if l.node() == root) {
            cycle = true;
        }
        vals.push(r);
    }
    let out = sym_of(&vals, chain.output()).xor(cand.port.output_phase);
    let result = match out {
        Sym::Real(l) if l.node() == root => {
            if l.is_complemented() {
                Err(RejectReason::Unverified)
            } else {
                Ok((0, None))
            }
        }
        _ if cycle => Err(RejectReason::WouldCycle),
        Sym::Real(l) => {
            revived += j.revive(l.node());
            Ok((freed - revived - added as i32, Some(j.net.level(l.node()))))
        }
        Sym::New(k, _) => Ok((freed - revived - added as i32, Some(level[&k]))),
    };
    j.undo();
    result
}

/// Verifies the candidate, prices it, and applies the acceptance rule.
/// Fills `cand.est_size_gain` and `cand.est_root_level`.
pub fn evaluate(
    net: &mut AigNetwork,
    cone: &Cone,
    cand: &mut RewriteCandidate,
    timing: Option<&TimingView>,
    opts: EvalOptions,
) -> Decision {
    let Ok(cone_tt) = simulate_cone(net, cone) else {
        return Decision::Reject(RejectReason::Unverified);
    };
    if cand.chain.num_inputs() != cone.input_size() || cand.function() != cone_tt {
        return Decision::Reject(RejectReason::Unverified);
    }
    let (gain, level) = match dry_run(net, cone, cand) {
        Ok((g, l)) => (g, l.unwrap_or_else(|| net.level(cone.root))),
        Err(r) => return Decision::Reject(r),
    };
    cand.est_size_gain = gain;
    cand.est_root_level = level;
    if gain < 0 || (gain == 0 && !opts.allow_zero_gain) {
        return Decision::Reject(RejectReason::NoGain);
    }
    if opts.preserve_depth {
        let require = timing.map(|t| t.require(cone.root)).unwrap_or(INF);
        if level > require {
            return Decision::Reject(RejectReason::DepthViolation);
        }
    }
    Decision::Accept(gain)
}

/// What [`replace`] did to the network.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Replacement {
    pub realized_gain: i32,
    /// Extra merges from structural rehashing.
    pub merges: usize,
    /// Nodes created or newly referenced; feed to [`TimingView::tighten`].
    pub touched: Vec<NodeId>,
    pub new_root: Lit,
}

/// Splices the candidate in place of the cone root and deletes what died.
pub fn replace(net: &mut AigNetwork, cone: &Cone, cand: &RewriteCandidate) -> Replacement {
    let before = net.num_live_ands();
    let first_new = net.num_nodes();
    let chain = &cand.chain;
    let n = chain.num_inputs();
    let mut vals: Vec<Lit> = Vec::with_capacity(chain.size());
    let get = |vals: &[Lit], l: ChainLit| -> Lit {
        let i = l.index as usize;
        let base = if i == 0 {
            Lit::FALSE
        } else if i <= n {
            cand.input_lit(cone, i - 1)
        } else {
            vals[i - n - 1]
        };
        base.xor(l.compl)
    };
    let mut touched = Vec::new();
    for st in chain.steps() {
        let a = get(&vals, st[0]);
        let b = get(&vals, st[1]);
        let r = net.and2(a, b);
        touched.push(r.node());
        vals.push(r);
    }
    let new_root = get(&vals, chain.output()).xor(cand.port.output_phase);
    let mut rep = Replacement { new_root, ..Default::default() };
    if new_root == Lit::new(cone.root, false) {
        for k in first_new..net.num_nodes() {
            net.delete_if_dead(k);
        }
        rep.realized_gain = before as i32 - net.num_live_ands() as i32;
        return rep;
    }
    let sub = net
        .substitute_tracked(cone.root, new_root)
        .expect("candidate structure cannot reach the cone root");
    rep.merges = sub.merges;
    for &d in &sub.dead {
        net.delete_if_dead(d);
    }
    for k in first_new..net.num_nodes() {
        net.delete_if_dead(k);
    }
    touched.extend(sub.targets);
    touched.retain(|&t| !net.is_deleted(t));
    touched.sort_unstable();
    touched.dedup();
    rep.touched = touched;
    rep.realized_gain = before as i32 - net.num_live_ands() as i32;
    rep
}
