//! Combinational equivalence by simulation: exhaustive for small input
//! counts, random vectors otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aig::AigNetwork;

/// Input counts up to this are checked over all assignments.
pub const EXHAUSTIVE_MAX_INPUTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CecResult {
    /// Every assignment was simulated.
    Equivalent,
    LikelyEquivalent { vectors: u64 },
    Counterexample { assignment: Vec<bool>, output: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("interface mismatch: {a_inputs}/{a_outputs} vs {b_inputs}/{b_outputs} inputs/outputs")]
pub struct InterfaceMismatch {
    pub a_inputs: usize,
    pub a_outputs: usize,
    pub b_inputs: usize,
    pub b_outputs: usize,
}

/// Word `w` of the exhaustive enumeration for input `i`.
fn exhaustive_word(i: usize, w: u64) -> u64 {
    const PROJ: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    if i < 6 {
        PROJ[i]
    } else if (w >> (i - 6)) & 1 == 1 {
        !0
    } else {
        0
    }
}

pub fn check_equivalence(
    a: &AigNetwork,
    b: &AigNetwork,
    budget_vectors: u64,
    seed: u64,
) -> Result<CecResult, InterfaceMismatch> {
    if a.num_inputs() != b.num_inputs() || a.num_outputs() != b.num_outputs() {
        return Err(InterfaceMismatch {
            a_inputs: a.num_inputs(),
            a_outputs: a.num_outputs(),
            b_inputs: b.num_inputs(),
            b_outputs: b.num_outputs(),
        });
    }
    let n = a.num_inputs();
    let (oa, ob) = (a.topological_order(), b.topological_order());
    let exhaustive = n <= EXHAUSTIVE_MAX_INPUTS;
    let (words, valid_bits) = if exhaustive {
        let total = 1u64 << n;
        (total.div_ceil(64), total.min(64))
    } else {
        (budget_vectors.div_ceil(64), 64)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = if valid_bits == 64 { !0 } else { (1u64 << valid_bits) - 1 };
    let mut pis = vec![0u64; n];
    for w in 0..words {
        for (i, p) in pis.iter_mut().enumerate() {
            *p = if exhaustive { exhaustive_word(i, w) } else { rng.gen() };
        }
        let ya = a.simulate_with_order(&oa, &pis);
        let yb = b.simulate_with_order(&ob, &pis);
        for (k, (x, y)) in ya.iter().zip(&yb).enumerate() {
            let diff = (x ^ y) & mask;
            if diff != 0 {
                let bit = diff.trailing_zeros();
                let assignment: Vec<bool> = pis.iter().map(|p| (p >> bit) & 1 == 1).collect();
                debug_assert_ne!(a.evaluate(&assignment)[k], b.evaluate(&assignment)[k]);
                return Ok(CecResult::Counterexample { assignment, output: k });
            }
        }
    }
    Ok(if exhaustive { CecResult::Equivalent } else { CecResult::LikelyEquivalent { vectors: words * 64 } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Lit;

    fn pair() -> (AigNetwork, AigNetwork) {
        let mut a = AigNetwork::new();
        let x: Vec<Lit> = (0..3).map(|_| a.add_input()).collect();
        let t = a.xor2(x[0], x[1]);
        let o = a.and2(t, x[2]);
        a.add_output(o);
        let mut b = a.clone();
        let o2 = b.outputs()[0];
        b.set_output(0, !o2);
        (a, b)
    }

    #[test]
    fn copy_is_equivalent() {
        let (a, _) = pair();
        assert_eq!(check_equivalence(&a, &a.clone(), 1000, 1).unwrap(), CecResult::Equivalent);
    }

    #[test]
    fn complemented_output_found() {
        let (a, b) = pair();
        match check_equivalence(&a, &b, 64, 1).unwrap() {
            CecResult::Counterexample { assignment, output } => {
                assert_eq!(output, 0);
                assert_ne!(a.evaluate(&assignment), b.evaluate(&assignment));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn interface_checked() {
        let (a, _) = pair();
        let mut c = a.clone();
        c.add_input();
        assert!(check_equivalence(&a, &c, 64, 1).is_err());
    }
}
