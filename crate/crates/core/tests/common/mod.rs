#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reconv::isop::Cube;
use reconv::{AigNetwork, Lit, TruthTable};

pub fn bench(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks/epfl").join(format!("{name}.aig"))
}

pub fn load(name: &str) -> AigNetwork {
    reconv::aiger::read_aiger_file(bench(name)).expect("benchmark present")
}

/// Random strashed network with `pis` inputs and about `ands` gates.
pub fn random_network(seed: u64, pis: usize, ands: usize, pos: usize) -> AigNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = AigNetwork::new();
    let mut lits: Vec<Lit> = (0..pis).map(|_| net.add_input()).collect();
    for _ in 0..ands {
        // bias towards recent nodes for depth and reconvergence
        let pick = |rng: &mut ChaCha8Rng, len: usize| {
            if rng.gen_bool(0.6) {
                len - 1 - rng.gen_range(0..len.min(8))
            } else {
                rng.gen_range(0..len)
            }
        };
        let a = lits[pick(&mut rng, lits.len())].xor(rng.gen());
        let b = lits[pick(&mut rng, lits.len())].xor(rng.gen());
        let x = net.and2(a, b);
        if !x.is_const() && !lits.contains(&x.regular()) {
            lits.push(x.regular());
        }
    }
    let k = lits.len();
    for i in 0..pos.min(k) {
        let l = lits[k - 1 - i * 3 % k];
        net.add_output(l.xor(rng.gen()));
    }
    net
}

/// All output words over `patterns` random input words.
pub fn signature(net: &AigNetwork, seed: u64, patterns: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..patterns {
        let pis: Vec<u64> = (0..net.num_inputs()).map(|_| rng.gen()).collect();
        out.extend(net.simulate(&pis));
    }
    out
}

/// Minimum number of two-input AND gates (complemented edges free) for
/// every 3-input function, by breadth-first search over sets of computed
/// gate functions. Index = the 8-bit truth table.
pub fn min_and_count_3() -> [u8; 256] {
    const VARS: [u8; 3] = [0xAA, 0xCC, 0xF0];
    let mut best = [u8::MAX; 256];
    let mut found = 0;
    let note = |f: u8, k: u8, best: &mut [u8; 256], found: &mut usize| {
        for g in [f, !f] {
            if best[g as usize] == u8::MAX {
                best[g as usize] = k;
                *found += 1;
            }
        }
    };
    note(0, 0, &mut best, &mut found);
    for v in VARS {
        note(v, 0, &mut best, &mut found);
    }
    let trivial = |f: u8| f == 0 || f == 0xFF || VARS.contains(&f) || VARS.contains(&!f);
    let literals = |set: &[u8]| -> Vec<u8> {
        let mut l: Vec<u8> = VARS.iter().chain(set).flat_map(|&f| [f, !f]).collect();
        l.sort_unstable();
        l.dedup();
        l
    };
    let mut level: HashSet<Vec<u8>> = HashSet::from([Vec::new()]);
    let mut k = 0u8;
    while found < 256 {
        k += 1;
        let mut next: HashSet<Vec<u8>> = HashSet::new();
        for set in &level {
            let lits = literals(set);
            for i in 0..lits.len() {
                for j in i + 1..lits.len() {
                    let g = lits[i] & lits[j];
                    let c = g.min(!g);
                    if trivial(g) || set.contains(&c) {
                        continue;
                    }
                    note(g, k, &mut best, &mut found);
                    let mut s = set.clone();
                    s.push(c);
                    s.sort_unstable();
                    next.insert(s);
                }
            }
        }
        level = next;
        assert!(k < 10, "search did not close");
    }
    best
}

pub fn in_cube(c: &Cube, x: u64) -> bool {
    (0..16).all(|v| {
        let b = (x >> v) & 1 == 1;
        !(c.pos >> v & 1 == 1 && !b) && !(c.neg >> v & 1 == 1 && b)
    })
}

pub fn covered(cubes: &[Cube], x: u64) -> bool {
    cubes.iter().any(|c| in_cube(c, x))
}

/// Exactness, cube irredundancy and literal irredundancy over all points.
pub fn check_isop(tt: &TruthTable, cubes: &[Cube]) -> Result<(), String> {
    let n = tt.num_vars();
    let points = 0..1u64 << n;
    for x in points.clone() {
        if covered(cubes, x) != tt.bit(x as usize) {
            return Err(format!("cover differs from the function at {x:#b}"));
        }
    }
    for (i, c) in cubes.iter().enumerate() {
        if c.pos & c.neg != 0 {
            return Err(format!("cube {i} has a variable in both polarities"));
        }
        let others: Vec<Cube> = cubes.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| *c).collect();
        if points.clone().all(|x| covered(&others, x) == tt.bit(x as usize)) {
            return Err(format!("cube {i} is redundant"));
        }
        for v in 0..n {
            if c.pos >> v & 1 == 1 || c.neg >> v & 1 == 1 {
                let wider = c.without(v);
                if points.clone().any(|x| in_cube(&wider, x) && !tt.bit(x as usize)) {
                    continue;
                }
                return Err(format!("literal x{v} of cube {i} is redundant"));
            }
        }
    }
    Ok(())
}
