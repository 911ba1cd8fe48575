//! Word-parallel and scalar simulation.

use super::{AigNetwork, Lit, NodeId};

/// One 64-bit pattern word per node, indexed by node id. `order` must be a
/// topological order such as [`AigNetwork::topological_order`].
pub fn simulate_words(net: &AigNetwork, order: &[NodeId], pi_words: &[u64]) -> Vec<u64> {
    assert_eq!(pi_words.len(), net.num_inputs());
    let mut val = vec![0u64; net.num_nodes()];
    for (&p, &w) in net.inputs().iter().zip(pi_words) {
        val[p] = w;
    }
    let lit = |val: &[u64], l: Lit| {
        let w = val[l.node()];
        if l.is_complemented() {
            !w
        } else {
            w
        }
    };
    for &n in order {
        if net.is_and(n) {
            let [a, b] = net.fanins(n);
            val[n] = lit(&val, a) & lit(&val, b);
        }
    }
    val
}

impl AigNetwork {
    /// Output words for 64 parallel input patterns.
    pub fn simulate(&self, pi_words: &[u64]) -> Vec<u64> {
        let order = self.topological_order();
        self.simulate_with_order(&order, pi_words)
    }

    pub fn simulate_with_order(&self, order: &[NodeId], pi_words: &[u64]) -> Vec<u64> {
        let val = simulate_words(self, order, pi_words);
        self.outputs()
            .iter()
            .map(|l| if l.is_complemented() { !val[l.node()] } else { val[l.node()] })
            .collect()
    }

    /// Single assignment, evaluated recursively node by node.
    pub fn evaluate(&self, inputs: &[bool]) -> Vec<bool> {
        assert_eq!(inputs.len(), self.num_inputs());
        let mut memo: Vec<Option<bool>> = vec![None; self.num_nodes()];
        memo[0] = Some(false);
        for (&p, &v) in self.inputs().iter().zip(inputs) {
            memo[p] = Some(v);
        }
        let mut out = Vec::with_capacity(self.num_outputs());
        for &po in self.outputs() {
            let mut stack = vec![po.node()];
            while let Some(&n) = stack.last() {
                if memo[n].is_some() {
                    stack.pop();
                    continue;
                }
                let [a, b] = self.fanins(n);
                match (memo[a.node()], memo[b.node()]) {
                    (Some(x), Some(y)) => {
                        memo[n] = Some((x ^ a.is_complemented()) && (y ^ b.is_complemented()));
                        stack.pop();
                    }
                    (x, y) => {
                        if x.is_none() {
                            stack.push(a.node());
                        }
                        if y.is_none() {
                            stack.push(b.node());
                        }
                    }
                }
            }
            out.push(memo[po.node()].unwrap() ^ po.is_complemented());
        }
        out
    }
}
