mod common;

use common::{check_isop, covered};
use proptest::prelude::*;
use reconv::isop::{factor, isop, Cube};
use reconv::TruthTable;

fn sop_literals(cubes: &[Cube]) -> usize {
    cubes.iter().map(|c| c.num_literals() as usize).sum()
}

#[test]
fn all_three_input_functions() {
    for bits in 0..256u64 {
        let tt = TruthTable::from_u64(3, bits);
        let c = isop(&tt);
        check_isop(&tt, &c).unwrap_or_else(|e| panic!("{bits:#04x}: {e}"));
        let e = factor(&c);
        assert_eq!(e.eval(3), tt);
        assert!(e.num_literals() <= sop_literals(&c));
    }
}

#[test]
fn mux_example() {
    let (a, b, c) = (TruthTable::var(3, 0), TruthTable::var(3, 1), TruthTable::var(3, 2));
    let f = (a & b) | (!a & c);
    let cover = isop(&f);
    assert_eq!(cover.len(), 2);
    check_isop(&f, &cover).unwrap();
}

#[test]
fn factoring_shares_literal() {
    let cover = [Cube { pos: 0b011, neg: 0 }, Cube { pos: 0b101, neg: 0 }];
    let e = factor(&cover);
    assert_eq!(e.num_literals(), 3);
    assert_eq!(sop_literals(&cover), 4);
}

fn random_tt(n: usize, seed: u64) -> TruthTable {
    let k = if n <= 6 { 1 } else { 1 << (n - 6) };
    let mut s = seed | 1;
    let words: Vec<u64> = (0..k)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        })
        .collect();
    TruthTable::from_words(n, &words)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn random_functions(n in 2usize..=6, seed in any::<u64>()) {
        let tt = random_tt(n, seed);
        let c = isop(&tt);
        prop_assert!(check_isop(&tt, &c).is_ok(), "{:?}", check_isop(&tt, &c));
    }

    #[test]
    fn factoring_random_covers(n in 1usize..=6, raw in prop::collection::vec((any::<u16>(), any::<u16>()), 1..8)) {
        let mask = (1u16 << n) - 1;
        let cubes: Vec<Cube> = raw.iter().map(|&(p, q)| {
            let p = p & mask;
            Cube { pos: p, neg: q & mask & !p }
        }).collect();
        let e = factor(&cubes);
        let want = TruthTable::from_u64(n, (0..1u64 << n).filter(|&x| covered(&cubes, x)).fold(0, |a, x| a | 1 << x));
        prop_assert_eq!(e.eval(n), want);
        prop_assert!(e.num_literals() <= sop_literals(&cubes));
        let chain = e.to_chain(n);
        prop_assert_eq!(chain.simulate(), want);
    }

    #[test]
    fn ten_input_cover(seed in any::<u64>()) {
        let tt = random_tt(10, seed) & random_tt(10, seed.rotate_left(5)) & random_tt(10, !seed);
        let c = isop(&tt);
        let back = c.iter().fold(TruthTable::zero(10), |a, q| a | q.to_tt(10));
        prop_assert_eq!(back, tt);
    }
}
