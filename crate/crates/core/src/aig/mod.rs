//! And-Inverter Graph with structural hashing and reference counting.
//!
//! Node 0 is the constant-false node. Node indices are never reused; deleted
//! nodes are tombstoned until [`AigNetwork::compact`] renumbers densely.
//! Substitution may point a low-index node's fanouts at a newer node, so
//! index order is not a topological order between compactions; use
//! [`AigNetwork::topological_order`].

mod sim;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Not;

use thiserror::Error;

pub use sim::simulate_words;

pub type NodeId = usize;

/// Node reference plus complement flag, packed as `index << 1 | compl`.
///
/// The derived order is (index, complemented) lexicographic.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Lit(u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    pub fn new(node: NodeId, complemented: bool) -> Lit {
        Lit(((node as u32) << 1) | complemented as u32)
    }

    pub fn from_raw(raw: u32) -> Lit {
        Lit(raw)
    }

    pub fn raw(self) -> u32 {
        self.0
    }

    pub fn node(self) -> NodeId {
        (self.0 >> 1) as NodeId
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn regular(self) -> Lit {
        Lit(self.0 & !1)
    }

    pub fn xor(self, c: bool) -> Lit {
        Lit(self.0 ^ c as u32)
    }

    pub fn is_const(self) -> bool {
        self.node() == 0
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!{}", self.node())
        } else {
            write!(f, "{}", self.node())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Const,
    Input,
    And,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AigError {
    #[error("substituting node {old} by {replacement:?} would create a cycle")]
    Cycle { old: NodeId, replacement: Lit },
}

#[derive(Clone, Debug)]
struct Node {
    kind: NodeKind,
    fanin: [Lit; 2],
    fanouts: Vec<u32>,
    refs: u32,
    level: u32,
    deleted: bool,
}

impl Node {
    fn new(kind: NodeKind) -> Node {
        Node { kind, fanin: [Lit::FALSE; 2], fanouts: Vec::new(), refs: 0, level: 0, deleted: false }
    }
}

/// Bookkeeping from [`AigNetwork::substitute_tracked`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    /// Extra merges triggered by rehashing.
    pub merges: usize,
    /// Nodes that took over references, one per redirect.
    pub targets: Vec<NodeId>,
    /// Nodes whose references all moved away.
    pub dead: Vec<NodeId>,
}

/// AIGER symbol table and comment section, carried through untouched.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Symbols {
    pub inputs: Vec<(usize, String)>,
    pub outputs: Vec<(usize, String)>,
    pub comment: Option<String>,
}

#[derive(Clone, Debug)]
pub struct AigNetwork {
    nodes: Vec<Node>,
    pis: Vec<NodeId>,
    pos: Vec<Lit>,
    strash: HashMap<(Lit, Lit), NodeId>,
    live_ands: usize,
    pub symbols: Symbols,
}

impl Default for AigNetwork {
    fn default() -> Self {
        Self::new()
    }
}

fn normalize(a: Lit, b: Lit) -> (Lit, Lit) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Result of `AND(a, b)` when a rule fires without a node.
fn simplify(a: Lit, b: Lit) -> Option<Lit> {
    let (a, b) = normalize(a, b);
    if a == Lit::FALSE || a == !b {
        Some(Lit::FALSE)
    } else if a == Lit::TRUE || a == b {
        Some(b)
    } else {
        None
    }
}

impl AigNetwork {
    pub fn new() -> Self {
        AigNetwork {
            nodes: vec![Node::new(NodeKind::Const)],
            pis: Vec::new(),
            pos: Vec::new(),
            strash: HashMap::new(),
            live_ands: 0,
            symbols: Symbols::default(),
        }
    }

    pub fn add_input(&mut self) -> Lit {
        let id = self.nodes.len();
        self.nodes.push(Node::new(NodeKind::Input));
        self.pis.push(id);
        Lit::new(id, false)
    }

    pub fn add_output(&mut self, lit: Lit) -> usize {
        self.nodes[lit.node()].refs += 1;
        self.pos.push(lit);
        self.pos.len() - 1
    }

    pub fn set_output(&mut self, i: usize, lit: Lit) {
        self.nodes[self.pos[i].node()].refs -= 1;
        self.nodes[lit.node()].refs += 1;
        self.pos[i] = lit;
    }

    pub fn and2(&mut self, a: Lit, b: Lit) -> Lit {
        if let Some(l) = simplify(a, b) {
            return l;
        }
        let key = normalize(a, b);
        if let Some(&n) = self.strash.get(&key) {
            return Lit::new(n, false);
        }
        let id = self.nodes.len();
        let mut node = Node::new(NodeKind::And);
        node.fanin = [key.0, key.1];
        node.level = 1 + self.level(key.0.node()).max(self.level(key.1.node()));
        self.nodes.push(node);
        for l in [key.0, key.1] {
            let f = &mut self.nodes[l.node()];
            f.refs += 1;
            f.fanouts.push(id as u32);
        }
        self.strash.insert(key, id);
        self.live_ands += 1;
        Lit::new(id, false)
    }

    pub fn or2(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and2(!a, !b)
    }

    pub fn xor2(&mut self, a: Lit, b: Lit) -> Lit {
        let p = self.and2(a, !b);
        let q = self.and2(!a, b);
        self.or2(p, q)
    }

    pub fn mux(&mut self, s: Lit, t: Lit, e: Lit) -> Lit {
        let p = self.and2(s, t);
        let q = self.and2(!s, e);
        self.or2(p, q)
    }

    /// Existing node for `AND(a, b)` without creating one.
    pub fn lookup_and(&self, a: Lit, b: Lit) -> Option<Lit> {
        if let Some(l) = simplify(a, b) {
            return Some(l);
        }
        self.strash.get(&normalize(a, b)).map(|&n| Lit::new(n, false))
    }

    /// Total node slots, including the constant, inputs and tombstones.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.pis.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.pos.len()
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.pis
    }

    pub fn outputs(&self) -> &[Lit] {
        &self.pos
    }

    pub fn kind(&self, n: NodeId) -> NodeKind {
        self.nodes[n].kind
    }

    pub fn is_and(&self, n: NodeId) -> bool {
        self.nodes[n].kind == NodeKind::And
    }

    pub fn is_input(&self, n: NodeId) -> bool {
        self.nodes[n].kind == NodeKind::Input
    }

    pub fn is_deleted(&self, n: NodeId) -> bool {
        self.nodes[n].deleted
    }

    /// Not tombstoned and still referenced.
    pub fn is_live_and(&self, n: NodeId) -> bool {
        let node = &self.nodes[n];
        node.kind == NodeKind::And && !node.deleted && node.refs > 0
    }

    pub fn fanins(&self, n: NodeId) -> [Lit; 2] {
        self.nodes[n].fanin
    }

    pub fn fanouts(&self, n: NodeId) -> &[u32] {
        &self.nodes[n].fanouts
    }

    /// Fanout references plus PO references.
    pub fn ref_count(&self, n: NodeId) -> u32 {
        self.nodes[n].refs
    }

    pub fn level(&self, n: NodeId) -> u32 {
        self.nodes[n].level
    }

    /// Non-deleted And nodes; equals [`size`](Self::size) once dead nodes are removed.
    pub fn num_live_ands(&self) -> usize {
        self.live_ands
    }

    /// And nodes reachable from the outputs.
    pub fn size(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = self.pos.iter().map(|l| l.node()).collect();
        let mut count = 0;
        while let Some(n) = stack.pop() {
            if seen[n] || !self.is_and(n) {
                continue;
            }
            seen[n] = true;
            count += 1;
            stack.extend(self.nodes[n].fanin.iter().map(|l| l.node()));
        }
        count
    }

    pub fn depth(&self) -> u32 {
        self.pos.iter().map(|l| self.level(l.node())).max().unwrap_or(0)
    }

    pub(crate) fn ref_inc(&mut self, n: NodeId) -> u32 {
        self.nodes[n].refs += 1;
        self.nodes[n].refs
    }

    pub(crate) fn ref_dec(&mut self, n: NodeId) -> u32 {
        self.nodes[n].refs -= 1;
        self.nodes[n].refs
    }

    /// True when `target` lies in the transitive fanout of `src`.
    pub fn in_transitive_fanout(&self, src: NodeId, target: NodeId) -> bool {
        if src == target {
            return true;
        }
        let limit = self.level(target);
        if limit <= self.level(src) {
            return false;
        }
        let mut seen = HashSet::new();
        let mut stack = vec![src];
        while let Some(n) = stack.pop() {
            for &f in &self.nodes[n].fanouts {
                let f = f as NodeId;
                if f == target {
                    return true;
                }
                if self.level(f) < limit && seen.insert(f) {
                    stack.push(f);
                }
            }
        }
        false
    }

    /// Redirects every reference to `old` to `replacement` and returns the
    /// number of extra merges that structural rehashing triggered.
    ///
    /// `old` and any merged nodes are left with zero references; they stay
    /// in place until [`remove_dead_nodes`](Self::remove_dead_nodes).
    pub fn substitute(&mut self, old: NodeId, replacement: Lit) -> Result<usize, AigError> {
        self.substitute_tracked(old, replacement).map(|s| s.merges)
    }

    /// [`substitute`](Self::substitute) that also reports which nodes
    /// gained references and which were left unreferenced.
    pub fn substitute_tracked(&mut self, old: NodeId, replacement: Lit) -> Result<Substitution, AigError> {
        let mut out = Substitution::default();
        if replacement.node() == old {
            if replacement.is_complemented() {
                return Err(AigError::Cycle { old, replacement });
            }
            return Ok(out);
        }
        if self.in_transitive_fanout(old, replacement.node()) {
            return Err(AigError::Cycle { old, replacement });
        }
        let mut forward: HashMap<NodeId, Lit> = HashMap::new();
        let mut queued: HashSet<NodeId> = HashSet::new();
        let mut work = vec![(old, replacement)];
        queued.insert(old);
        let mut touched = Vec::new();
        while let Some((o, r)) = work.pop() {
            let r = resolve(&forward, r);
            if r.node() == o {
                continue;
            }
            if o != old {
                out.merges += 1;
            }
            out.targets.push(r.node());
            out.dead.push(o);
            if self.nodes[o].refs as usize > self.nodes[o].fanouts.len() {
                for i in 0..self.pos.len() {
                    let l = self.pos[i];
                    if l.node() == o {
                        self.set_output(i, r.xor(l.is_complemented()));
                    }
                }
            }
            let fanouts = std::mem::take(&mut self.nodes[o].fanouts);
            for f in fanouts {
                let f = f as NodeId;
                let old_key = (self.nodes[f].fanin[0], self.nodes[f].fanin[1]);
                if self.strash.get(&old_key) == Some(&f) {
                    self.strash.remove(&old_key);
                }
                for k in 0..2 {
                    let l = self.nodes[f].fanin[k];
                    if l.node() == o {
                        self.nodes[f].fanin[k] = r.xor(l.is_complemented());
                        self.nodes[o].refs -= 1;
                        self.nodes[r.node()].refs += 1;
                        self.nodes[r.node()].fanouts.push(f as u32);
                    }
                }
                let [a, b] = self.nodes[f].fanin;
                let key = normalize(a, b);
                self.nodes[f].fanin = [key.0, key.1];
                touched.push(f);
                if queued.contains(&f) {
                    continue;
                }
                if let Some(l) = simplify(a, b) {
                    queued.insert(f);
                    work.push((f, l));
                } else if let Some(&g) = self.strash.get(&key) {
                    if g != f {
                        queued.insert(f);
                        work.push((f, Lit::new(g, false)));
                    }
                } else {
                    self.strash.insert(key, f);
                }
            }
            debug_assert_eq!(self.nodes[o].refs, 0);
            forward.insert(o, r);
        }
        self.update_levels(touched);
        Ok(out)
    }

    fn update_levels(&mut self, mut work: Vec<NodeId>) {
        while let Some(n) = work.pop() {
            let [a, b] = self.nodes[n].fanin;
            let lv = 1 + self.level(a.node()).max(self.level(b.node()));
            if lv != self.nodes[n].level {
                self.nodes[n].level = lv;
                work.extend(self.nodes[n].fanouts.iter().map(|&f| f as NodeId));
            }
        }
    }

    /// Deletes `n` if it is an unreferenced And node, then any fanins that
    /// become unreferenced. Returns the number of nodes deleted.
    pub fn delete_if_dead(&mut self, n: NodeId) -> usize {
        let mut count = 0;
        let mut stack = vec![n];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.kind != NodeKind::And || node.deleted || node.refs > 0 {
                continue;
            }
            let key = (node.fanin[0], node.fanin[1]);
            if self.strash.get(&key) == Some(&n) {
                self.strash.remove(&key);
            }
            self.nodes[n].deleted = true;
            self.live_ands -= 1;
            count += 1;
            for l in key_lits(key) {
                let f = &mut self.nodes[l.node()];
                f.refs -= 1;
                if let Some(pos) = f.fanouts.iter().position(|&x| x as NodeId == n) {
                    f.fanouts.swap_remove(pos);
                }
                if f.refs == 0 {
                    stack.push(l.node());
                }
            }
            self.nodes[n].fanouts.clear();
        }
        count
    }

    pub fn remove_dead_nodes(&mut self) -> usize {
        let mut count = 0;
        for n in (0..self.nodes.len()).rev() {
            count += self.delete_if_dead(n);
        }
        count
    }

    /// Inputs in creation order, then every non-deleted And node after both
    /// of its fanins.
    pub fn topological_order(&self) -> Vec<NodeId> {
        let mut order = self.pis.clone();
        let mut done = vec![false; self.nodes.len()];
        let mut stack: Vec<(NodeId, bool)> = Vec::new();
        for root in 0..self.nodes.len() {
            if !self.is_and(root) || self.nodes[root].deleted || done[root] {
                continue;
            }
            stack.push((root, false));
            while let Some((n, expanded)) = stack.pop() {
                if done[n] {
                    continue;
                }
                if expanded {
                    done[n] = true;
                    order.push(n);
                    continue;
                }
                stack.push((n, true));
                for l in self.nodes[n].fanin.iter().rev() {
                    let m = l.node();
                    if self.is_and(m) && !done[m] {
                        stack.push((m, false));
                    }
                }
            }
        }
        order
    }

    /// Recomputes every level from scratch.
    pub fn compute_levels(&mut self) {
        for n in self.topological_order() {
            if self.is_and(n) {
                let [a, b] = self.nodes[n].fanin;
                self.nodes[n].level = 1 + self.level(a.node()).max(self.level(b.node()));
            }
        }
    }

    /// Nodes lying on some longest input-to-output path, as a membership mask.
    pub fn mark_critical_path(&self) -> Vec<bool> {
        let mut crit = vec![false; self.nodes.len()];
        let depth = self.depth();
        let mut stack: Vec<NodeId> = Vec::new();
        for l in &self.pos {
            if self.level(l.node()) == depth && !l.is_const() {
                stack.push(l.node());
            }
        }
        while let Some(n) = stack.pop() {
            if crit[n] {
                continue;
            }
            crit[n] = true;
            if self.is_and(n) {
                let lv = self.level(n);
                for l in self.nodes[n].fanin {
                    if self.level(l.node()) + 1 == lv && !l.is_const() {
                        stack.push(l.node());
                    }
                }
            }
        }
        crit
    }

    /// Dense renumbering: inputs first, then the And nodes reachable from the
    /// outputs in depth-first post-order.
    pub fn compact(&self) -> AigNetwork {
        let mut out = AigNetwork::new();
        let mut map: Vec<Option<Lit>> = vec![None; self.nodes.len()];
        map[0] = Some(Lit::FALSE);
        for &p in &self.pis {
            map[p] = Some(out.add_input());
        }
        for &po in &self.pos {
            let mut stack = vec![(po.node(), false)];
            while let Some((n, expanded)) = stack.pop() {
                if map[n].is_some() {
                    continue;
                }
                let [a, b] = self.nodes[n].fanin;
                if expanded {
                    let la = map[a.node()].unwrap().xor(a.is_complemented());
                    let lb = map[b.node()].unwrap().xor(b.is_complemented());
                    map[n] = Some(out.and2(la, lb));
                } else {
                    stack.push((n, true));
                    stack.push((b.node(), false));
                    stack.push((a.node(), false));
                }
            }
            out.add_output(map[po.node()].unwrap().xor(po.is_complemented()));
        }
        out.symbols = self.symbols.clone();
        out
    }

    /// Recounts every derived field and reports the first inconsistency.
    pub fn check_integrity(&self) -> Result<(), String> {
        let n = self.nodes.len();
        let mut refs = vec![0u32; n];
        let mut fanouts: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut live = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind != NodeKind::And || node.deleted {
                continue;
            }
            live += 1;
            for l in node.fanin {
                if self.nodes[l.node()].deleted {
                    return Err(format!("node {i} points at deleted node {}", l.node()));
                }
                refs[l.node()] += 1;
                fanouts[l.node()].push(i as u32);
            }
            if node.fanin[0] > node.fanin[1] {
                return Err(format!("node {i} fanins not normalized"));
            }
        }
        for l in &self.pos {
            refs[l.node()] += 1;
        }
        if live != self.live_ands {
            return Err(format!("live count {} but {} stored", live, self.live_ands));
        }
        for i in 0..n {
            if self.nodes[i].deleted {
                continue;
            }
            if refs[i] != self.nodes[i].refs {
                return Err(format!("node {i}: {} refs counted, {} stored", refs[i], self.nodes[i].refs));
            }
            let mut a = fanouts[i].clone();
            let mut b = self.nodes[i].fanouts.clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(format!("node {i}: fanout list mismatch"));
            }
        }
        let mut keys = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind != NodeKind::And || node.deleted || node.refs == 0 {
                continue;
            }
            let key = (node.fanin[0], node.fanin[1]);
            if simplify(key.0, key.1).is_some() {
                return Err(format!("node {i} is trivially simplifiable"));
            }
            if let Some(j) = keys.insert(key, i) {
                return Err(format!("nodes {j} and {i} share fanins {key:?}"));
            }
            if self.strash.get(&key) != Some(&i) {
                return Err(format!("node {i} missing from the hash table"));
            }
        }
        for (key, &i) in &self.strash {
            let node = &self.nodes[i];
            if node.deleted || (node.fanin[0], node.fanin[1]) != *key {
                return Err(format!("stale hash entry for node {i}"));
            }
        }
        let order = self.topological_order();
        let mut pos = vec![usize::MAX; n];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind != NodeKind::And || node.deleted {
                continue;
            }
            let mut lv = 0;
            for l in node.fanin {
                let m = l.node();
                if self.is_and(m) && pos[m] >= pos[i] {
                    return Err(format!("cycle through node {i}"));
                }
                lv = lv.max(self.level(m));
            }
            if node.level != lv + 1 {
                return Err(format!("node {i}: level {} but fanins give {}", node.level, lv + 1));
            }
        }
        Ok(())
    }
}

fn key_lits(key: (Lit, Lit)) -> [Lit; 2] {
    [key.0, key.1]
}

fn resolve(forward: &HashMap<NodeId, Lit>, mut l: Lit) -> Lit {
    while let Some(&r) = forward.get(&l.node()) {
        l = r.xor(l.is_complemented());
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and2_simplifications() {
        let mut net = AigNetwork::new();
        let x = net.add_input();
        let y = net.add_input();
        assert_eq!(net.and2(x, Lit::FALSE), Lit::FALSE);
        assert_eq!(net.and2(Lit::TRUE, x), x);
        assert_eq!(net.and2(x, x), x);
        assert_eq!(net.and2(x, !x), Lit::FALSE);
        let a = net.and2(x, y);
        let b = net.and2(y, x);
        assert_eq!(a, b);
        assert_eq!(net.num_live_ands(), 1);
    }

    #[test]
    fn levels_and_critical_path() {
        let mut net = AigNetwork::new();
        let ins: Vec<Lit> = (0..6).map(|_| net.add_input()).collect();
        let mut acc = ins[0];
        for &i in &ins[1..] {
            acc = net.and2(acc, i);
        }
        let side = net.and2(ins[4], !ins[5]);
        net.add_output(acc);
        net.add_output(side);
        assert_eq!(net.depth(), 5);
        let crit = net.mark_critical_path();
        let mut n = acc.node();
        while net.is_and(n) {
            assert!(crit[n]);
            n = net.fanins(n)[0].node();
        }
        assert!(!crit[side.node()]);
    }

    #[test]
    fn substitute_counts_refs() {
        let mut net = AigNetwork::new();
        let a = net.add_input();
        let b = net.add_input();
        let c = net.add_input();
        let x = net.and2(a, b);
        let alt = net.and2(!a, c);
        let u = net.and2(x, c);
        let v = net.and2(!x, c);
        net.add_output(x);
        net.add_output(u);
        net.add_output(v);
        assert_eq!(net.ref_count(x.node()), 3);
        let before = net.ref_count(alt.node());
        net.substitute(x.node(), alt).unwrap();
        assert_eq!(net.ref_count(alt.node()), before + 3);
        assert_eq!(net.ref_count(x.node()), 0);
        net.check_integrity().unwrap();
    }

    #[test]
    fn cycle_is_rejected() {
        let mut net = AigNetwork::new();
        let a = net.add_input();
        let b = net.add_input();
        let x = net.and2(a, b);
        let y = net.and2(x, a);
        net.add_output(y);
        assert!(matches!(net.substitute(x.node(), y), Err(AigError::Cycle { .. })));
        assert!(matches!(net.substitute(x.node(), !x), Err(AigError::Cycle { .. })));
    }

    #[test]
    fn chain_removal_count() {
        let mut net = AigNetwork::new();
        let ins: Vec<Lit> = (0..5).map(|_| net.add_input()).collect();
        let mut acc = ins[0];
        for &i in &ins[1..] {
            acc = net.and2(acc, i);
        }
        net.add_output(acc);
        net.substitute(acc.node(), ins[0]).unwrap();
        assert_eq!(net.remove_dead_nodes(), 4);
        assert_eq!(net.size(), 0);
        net.check_integrity().unwrap();
    }
}
