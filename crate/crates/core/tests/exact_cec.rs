mod common;

use common::random_network;
use proptest::prelude::*;
use reconv::cec::{check_equivalence, CecResult};
use reconv::exact::{cache_key, exact_synthesize, synthesize, ExactCache, Synthesis};
use reconv::npn::NpnDatabase;
use reconv::pass::{optimize, Engines, PassOptions, Strategy};
use reconv::{Action, TruthTable};

#[test]
fn known_optimal_sizes() {
    let t = |n, b| TruthTable::from_u64(n, b);
    let size = |tt: TruthTable| exact_synthesize(&tt, 12).unwrap().unwrap().size();
    assert_eq!(size(t(2, 0x8)), 1);
    assert_eq!(size(t(2, 0x6)), 3);
    assert_eq!(size(t(3, 0xe8)), 4);
    assert_eq!(size(t(3, 0x96)), 6);
    assert_eq!(size(t(3, 0xca)), 3);
    assert_eq!(synthesize(&t(3, 0x96), 5, None).unwrap(), Synthesis::TooLarge);
}

#[test]
fn database_matches_class_count_and_sizes() {
    let db = NpnDatabase::builtin();
    assert_eq!(db.classes(4), 222);
    for (k, e) in db.entries() {
        assert_eq!(e.chain.simulate(), *k);
        assert_eq!(e.size, e.chain.size());
    }
}

#[test]
fn cache_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exact.cache");
    let v = |i| TruthTable::var(5, i);
    let tt = (v(0) & v(1)) | (v(2) ^ (v(3) & v(4)));
    let (key, _) = cache_key(&tt).unwrap();
    let chain = {
        let mut c = ExactCache::open(&path).unwrap();
        c.lookup_or_synthesize(&key).unwrap()
    };
    assert!(chain.is_some());
    let mut c = ExactCache::open(&path).unwrap();
    assert_eq!(c.get(&key).cloned(), chain);
    let before = c.searches();
    c.lookup_or_synthesize(&key).unwrap();
    assert_eq!(c.searches(), before);
}

#[test]
fn counterexample_on_wide_network() {
    let a = random_network(5, 24, 120, 6);
    let mut b = a.clone();
    let o = b.outputs()[2];
    b.set_output(2, !o);
    match check_equivalence(&a, &b, 64, 9).unwrap() {
        CecResult::Counterexample { assignment, output } => {
            assert_eq!(output, 2);
            assert_ne!(a.evaluate(&assignment)[2], b.evaluate(&assignment)[2]);
        }
        r => panic!("{r:?}"),
    }
    assert!(matches!(check_equivalence(&a, &a.clone(), 6400, 9).unwrap(), CecResult::LikelyEquivalent { vectors: 6400 }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_size_is_npn_invariant(bits in any::<u16>()) {
        let tt = TruthTable::from_u64(4, bits as u64);
        let (canon, _) = reconv::npn::npn_canonicalize(&tt).unwrap();
        let db = NpnDatabase::builtin();
        let want = db.lookup(&canon).unwrap().size;
        // proving optimality of the 8+ gate classes takes minutes each
        prop_assume!(want <= 7);
        let c = exact_synthesize(&tt, 12).unwrap().unwrap();
        prop_assert_eq!(c.simulate(), tt);
        prop_assert_eq!(c.size(), want);
    }

    #[test]
    fn optimized_networks_stay_equivalent(seed in any::<u64>(), which in 0usize..5) {
        let net = random_network(seed, 10, 90, 5);
        let mut eng = Engines::new();
        let s = match which {
            0 => Strategy::Fixed(Action::Isop),
            1 => Strategy::Fixed(Action::Exact),
            2 => Strategy::Fixed(Action::Npn),
            3 => Strategy::Random(seed),
            _ => Strategy::Adaptive(reconv::learn::Selector::Rule),
        };
        let mut out = net.clone();
        optimize(&mut out, &mut eng, &s, &PassOptions::default());
        prop_assert!(out.check_integrity().is_ok());
        prop_assert_eq!(check_equivalence(&net, &out, 0, 1).unwrap(), CecResult::Equivalent);
    }
}
