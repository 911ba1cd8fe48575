use std::collections::BTreeSet;

use proptest::prelude::*;
use reconv::npn::npn_canonicalize;
use reconv::{NpnTransform, TruthTable};

/// `g(x) = o ^ f(y)`, `y_j = x[perm[j]] ^ phase_j`, evaluated point by point.
fn apply_naive(bits: u64, n: usize, perm: &[usize], phase: u16, out: bool) -> u64 {
    let mut g = 0;
    for x in 0..1u64 << n {
        let mut y = 0;
        for j in 0..n {
            let v = (x >> perm[j]) & 1 ^ (phase as u64 >> j) & 1;
            y |= v << j;
        }
        if ((bits >> y) & 1 == 1) ^ out {
            g |= 1 << x;
        }
    }
    g
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn naive_canonical(bits: u64, n: usize) -> u64 {
    let mut best = u64::MAX;
    for p in permutations(n) {
        for phase in 0..1u16 << n {
            for out in [false, true] {
                best = best.min(apply_naive(bits, n, &p, phase, out));
            }
        }
    }
    best
}

fn transform() -> impl Strategy<Value = NpnTransform> {
    (Just((0..4usize).collect::<Vec<_>>()).prop_shuffle(), 0u16..16, any::<bool>())
        .prop_map(|(p, ph, o)| NpnTransform::new(&p, ph, o))
}

#[test]
fn transform_matches_pointwise_definition() {
    let f = 0x1e2d_u64;
    for p in permutations(4) {
        for phase in [0u16, 5, 9, 15] {
            let t = NpnTransform::new(&p, phase, true);
            let got = TruthTable::from_u64(4, f).apply_npn_transform(&t).as_u64();
            assert_eq!(got, apply_naive(f, 4, &p, phase, true), "perm {p:?} phase {phase}");
        }
    }
}

#[test]
fn three_input_canonical_forms_match_brute_force() {
    for bits in 0..256u64 {
        let (c, t) = npn_canonicalize(&TruthTable::from_u64(3, bits)).unwrap();
        assert_eq!(c.as_u64(), naive_canonical(bits, 3), "function {bits:#04x}");
        assert_eq!(TruthTable::from_u64(3, bits).apply_npn_transform(&t), c);
    }
}

#[test]
fn class_counts_small_arities() {
    let count = |n: usize| {
        (0..1u64 << (1 << n))
            .map(|b| npn_canonicalize(&TruthTable::from_u64(n, b)).unwrap().0)
            .collect::<BTreeSet<_>>()
            .len()
    };
    assert_eq!(count(1), 2);
    assert_eq!(count(2), 4);
    let naive: BTreeSet<u64> = (0..256).map(|b| naive_canonical(b, 3)).collect();
    assert_eq!(count(3), naive.len());
    assert_eq!(naive.len(), 14);
}

#[test]
fn hex_and_cofactors() {
    let t = TruthTable::from_hex(4, "cafe").unwrap();
    assert_eq!(t.to_hex(), "cafe");
    let x2 = TruthTable::var(4, 2);
    assert_eq!((t.cofactor(2, true) & x2) | (t.cofactor(2, false) & !x2), t);
    assert!(TruthTable::from_hex(3, "1ff").is_err());
}

proptest! {
    #[test]
    fn canonical_form_is_class_invariant(bits in any::<u16>(), t in transform()) {
        let f = TruthTable::from_u64(4, bits as u64);
        let g = f.apply_npn_transform(&t);
        let (cf, tf) = npn_canonicalize(&f).unwrap();
        let (cg, _) = npn_canonicalize(&g).unwrap();
        prop_assert_eq!(cf, cg);
        prop_assert_eq!(f.apply_npn_transform(&tf), cf);
        prop_assert!(cf.as_u64() <= f.as_u64());
    }

    #[test]
    fn inverse_and_composition(bits in any::<u16>(), a in transform(), b in transform()) {
        let f = TruthTable::from_u64(4, bits as u64);
        prop_assert_eq!(f.apply_npn_transform(&a).apply_npn_transform(&a.inverse()), f);
        prop_assert_eq!(f.apply_npn_transform(&a).apply_npn_transform(&b), f.apply_npn_transform(&a.then(&b)));
    }

    #[test]
    fn boolean_identities(n in 1usize..=10, seed in any::<u64>()) {
        let words: Vec<u64> = (0..16).map(|i| seed.rotate_left(i * 7) ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)).collect();
        let k = if n <= 6 { 1 } else { 1 << (n - 6) };
        let f = TruthTable::from_words(n, &words[..k]);
        let g = TruthTable::from_words(n, &words[..k].iter().map(|w| w.rotate_right(13)).collect::<Vec<_>>());
        prop_assert_eq!(!(f & g), !f | !g);
        prop_assert_eq!(f ^ g, (f & !g) | (!f & g));
        prop_assert_eq!((f & g).count_ones() + (f | g).count_ones(), f.count_ones() + g.count_ones());
        prop_assert_eq!(TruthTable::from_hex(n, &f.to_hex()).unwrap(), f);
        for v in 0..n {
            prop_assert_eq!(f.depends_on(v), f.cofactor(v, false) != f.cofactor(v, true));
        }
    }
}
