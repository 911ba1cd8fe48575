//! Minimum-size AND chains by iterative deepening over a SAT encoding.
//!
//! For `r` steps over `n` inputs each step `i` selects one operand pair
//! `(j, k)`, `j < k < n + i`, plus a polarity per operand. Simulation
//! variables carry every step's value on all `2^n` rows and the last step,
//! optionally complemented, must equal the target. Every step but the last
//! must feed a later step, consecutive steps are ordered by `(k, j)`, and no
//! step repeats a constant, an input or an earlier step.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::aig::AigNetwork;
use crate::chain::{Chain, ChainLit};
use crate::cone::{simulate_cone, Cone};
use crate::learn::Action;
use crate::npn::{npn_canonicalize, NpnDatabase};
use crate::replace::RewriteCandidate;
use crate::truth::{NpnTransform, TruthTable};

pub const MAX_EXACT_VARS: usize = 5;
pub const DEFAULT_MAX_GATES: usize = 12;
/// Conflict budget per SAT query. About half a second of search on the
/// hardest 5-input instances; a conflict count keeps runs reproducible.
pub const DEFAULT_CONFLICT_LIMIT: u32 = 20_000;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("exact synthesis supports at most {MAX_EXACT_VARS} inputs, got {0}")]
    UnsupportedArity(usize),
    #[error("exact cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Synthesis {
    Found(Chain),
    /// No chain within the gate limit.
    TooLarge,
    /// A SAT query hit its conflict limit.
    OutOfBudget,
}

/// Minimum chain for `tt` with no conflict limit; `None` past `max_gates`.
pub fn exact_synthesize(tt: &TruthTable, max_gates: usize) -> Result<Option<Chain>, ExactError> {
    match synthesize(tt, max_gates, None)? {
        Synthesis::Found(c) => Ok(Some(c)),
        _ => Ok(None),
    }
}

pub fn synthesize(tt: &TruthTable, max_gates: usize, conflict_limit: Option<u32>) -> Result<Synthesis, ExactError> {
    let n = tt.num_vars();
    if n > MAX_EXACT_VARS {
        return Err(ExactError::UnsupportedArity(n));
    }
    let support = tt.support();
    let s = support.len();
    if s <= 1 {
        let mut c = Chain::new(n);
        if s == 0 {
            c.set_output(if tt.is_ones() { ChainLit::TRUE } else { ChainLit::FALSE });
        } else {
            let v = support[0];
            c.set_output(c.input(v).xor(!tt.bit(1 << v)));
        }
        return Ok(Synthesis::Found(c));
    }
    // work on the support only
    let mut small = TruthTable::zero(s);
    for x in 0..(1usize << s) {
        let mut y = 0;
        for (i, &v) in support.iter().enumerate() {
            y |= ((x >> i) & 1) << v;
        }
        small.set_bit(x, tt.bit(y));
    }
    let f = small.as_u64();
    for r in (s - 1)..=max_gates {
        match solve(s, r, f, conflict_limit) {
            Some(Some(chain)) => {
                let chain = chain.remap_inputs(n, &support);
                assert_eq!(chain.simulate(), *tt, "decoded chain disagrees with target");
                return Ok(Synthesis::Found(chain));
            }
            Some(None) => continue,
            None => return Ok(Synthesis::OutOfBudget),
        }
    }
    Ok(Synthesis::TooLarge)
}

struct Encoding {
    clauses: Vec<Vec<i32>>,
    num_vars: i32,
    // per step: (j, k, var)
    sel: Vec<Vec<(usize, usize, i32)>>,
    pol: Vec<[i32; 2]>,
    out_pol: i32,
}

fn encode(n: usize, r: usize, f: u64) -> Encoding {
    let rows = 1usize << n;
    let mut nv = 0i32;
    let mut fresh = || {
        nv += 1;
        nv
    };
    let x: Vec<Vec<i32>> = (0..r).map(|_| (0..rows).map(|_| fresh()).collect()).collect();
    let mut sel = Vec::with_capacity(r);
    let mut pol = Vec::with_capacity(r);
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    for i in 0..r {
        pol.push([fresh(), fresh()]);
        let mut s = Vec::new();
        for k in 1..n + i {
            for j in 0..k {
                s.push((j, k, fresh()));
            }
        }
        clauses.push(s.iter().map(|e| e.2).collect());
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                clauses.push(vec![-s[a].2, -s[b].2]);
            }
        }
        sel.push(s);
    }
    // operand value on a row: a constant for inputs, a variable for steps
    let val = |j: usize, t: usize| -> Result<bool, i32> {
        if j < n {
            Ok((t >> j) & 1 == 1)
        } else {
            Err(x[j - n][t])
        }
    };
    let lit = |v: i32, positive: bool| if positive { v } else { -v };
    for i in 0..r {
        let [p0, p1] = pol[i];
        for &(j, k, s) in &sel[i] {
            for t in 0..rows {
                for a in [false, true] {
                    for b in [false, true] {
                        for q0 in [false, true] {
                            for q1 in [false, true] {
                                let mut cl = vec![-s];
                                match val(j, t) {
                                    Ok(c) if c != a => continue,
                                    Ok(_) => {}
                                    Err(v) => cl.push(lit(v, !a)),
                                }
                                match val(k, t) {
                                    Ok(c) if c != b => continue,
                                    Ok(_) => {}
                                    Err(v) => cl.push(lit(v, !b)),
                                }
                                cl.push(lit(p0, !q0));
                                cl.push(lit(p1, !q1));
                                cl.push(lit(x[i][t], (a ^ q0) && (b ^ q1)));
                                clauses.push(cl);
                            }
                        }
                    }
                }
            }
        }
    }
    let out_pol = fresh();
    for t in 0..rows {
        let last = x[r - 1][t];
        if (f >> t) & 1 == 1 {
            clauses.push(vec![last, out_pol]);
            clauses.push(vec![-last, -out_pol]);
        } else {
            clauses.push(vec![-last, out_pol]);
            clauses.push(vec![last, -out_pol]);
        }
    }
    for i in 0..r.saturating_sub(1) {
        let mut cl = Vec::new();
        for later in &sel[i + 1..] {
            for &(j, k, s) in later {
                if j == n + i || k == n + i {
                    cl.push(s);
                }
            }
        }
        clauses.push(cl);
    }
    for i in 0..r.saturating_sub(1) {
        for &(j, k, s) in &sel[i] {
            for &(j2, k2, s2) in &sel[i + 1] {
                if (k2, j2) < (k, j) {
                    clauses.push(vec![-s, -s2]);
                }
            }
        }
    }
    // Optimal chains never reapply an operand of a step to that step, and
    // never compute a constant, an input literal or an earlier step again.
    for i in 0..r {
        for &(j, k, s) in &sel[i] {
            for later in &sel[i + 1..] {
                for &(a, b, s2) in later {
                    if b == n + i && (a == j || a == k) {
                        clauses.push(vec![-s, -s2]);
                    }
                }
            }
        }
    }
    for i in 0..r {
        clauses.push((0..rows).map(|t| x[i][t]).collect());
        clauses.push((0..rows).map(|t| -x[i][t]).collect());
        for v in 0..n {
            clauses.push((0..rows).map(|t| lit(x[i][t], (t >> v) & 1 == 0)).collect());
            clauses.push((0..rows).map(|t| lit(x[i][t], (t >> v) & 1 == 1)).collect());
        }
        for i2 in i + 1..r {
            let (mut differ, mut agree) = (Vec::with_capacity(rows), Vec::with_capacity(rows));
            for t in 0..rows {
                let (p, q) = (x[i][t], x[i2][t]);
                let d = fresh();
                clauses.push(vec![-d, p, q]);
                clauses.push(vec![-d, -p, -q]);
                differ.push(d);
                let e = fresh();
                clauses.push(vec![-e, p, -q]);
                clauses.push(vec![-e, -p, q]);
                agree.push(e);
            }
            clauses.push(differ);
            clauses.push(agree);
        }
    }
    Encoding { clauses, num_vars: nv, sel, pol, out_pol }
}

/// `Some(Some(chain))` sat, `Some(None)` unsat, `None` budget exhausted.
fn solve(n: usize, r: usize, f: u64, conflict_limit: Option<u32>) -> Option<Option<Chain>> {
    let enc = encode(n, r, f);
    let mut solver: cadical::Solver = cadical::Solver::new();
    solver.reserve(enc.num_vars);
    for c in &enc.clauses {
        solver.add_clause(c.iter().copied());
    }
    if let Some(limit) = conflict_limit {
        solver.set_limit("conflicts", limit.min(i32::MAX as u32) as i32).expect("cadical conflict limit");
    }
    match solver.solve() {
        Some(true) => {}
        Some(false) => return Some(None),
        None => return None,
    }
    let truth = |v: i32| solver.value(v).unwrap_or(false);
    let operand = |j: usize, compl: bool| ChainLit::new(j + 1, compl);
    let mut chain = Chain::new(n);
    let mut last = ChainLit::FALSE;
    for i in 0..enc.sel.len() {
        let &(j, k, _) = enc.sel[i].iter().find(|e| truth(e.2)).expect("one operand pair per step");
        let [p0, p1] = enc.pol[i];
        last = chain.add_step(operand(j, truth(p0)), operand(k, truth(p1)));
    }
    chain.set_output(last.xor(truth(enc.out_pol)));
    Some(Some(chain))
}

/// Semi-canonical form for 5-input functions: best over output phase and
/// input phases, each followed by sorting variables by positive-cofactor
/// weight. Returns the form and the transform producing it.
pub fn semi_canonicalize5(tt: &TruthTable) -> (TruthTable, NpnTransform) {
    let n = tt.num_vars();
    let mut best: Option<(TruthTable, NpnTransform)> = None;
    for out in [false, true] {
        for phase in 0..(1u16 << n) {
            let identity: Vec<usize> = (0..n).collect();
            let t1 = NpnTransform::new(&identity, phase, out);
            let f1 = tt.apply_npn_transform(&t1);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&v| (f1.cofactor(v, true).count_ones(), v));
            // new variable j is old variable order[j]
            let mut perm = vec![0; n];
            for (j, &v) in order.iter().enumerate() {
                perm[v] = j;
            }
            let t = t1.then(&NpnTransform::new(&perm, 0, false));
            let g = tt.apply_npn_transform(&t);
            if best.as_ref().map_or(true, |b| g < b.0) {
                best = Some((g, t));
            }
        }
    }
    best.unwrap()
}

/// Canonical key used by the exact cache: exact NPN up to 4 inputs,
/// semi-canonical at 5.
pub fn cache_key(tt: &TruthTable) -> Result<(TruthTable, NpnTransform), ExactError> {
    match tt.num_vars() {
        n if n <= 4 => Ok(npn_canonicalize(tt).expect("arity checked")),
        5 => Ok(semi_canonicalize5(tt)),
        n => Err(ExactError::UnsupportedArity(n)),
    }
}

/// Optimal chains keyed by canonical table, optionally persisted to an
/// append-only file. Failed searches are remembered for the session only.
#[derive(Debug)]
pub struct ExactCache {
    entries: HashMap<TruthTable, Chain>,
    failed: HashSet<TruthTable>,
    file: Option<File>,
    pub max_gates: usize,
    pub conflict_limit: Option<u32>,
    searches: usize,
}

impl Default for ExactCache {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactCache {
    pub fn new() -> Self {
        ExactCache {
            entries: HashMap::new(),
            failed: HashSet::new(),
            file: None,
            max_gates: DEFAULT_MAX_GATES,
            conflict_limit: Some(DEFAULT_CONFLICT_LIMIT),
            searches: 0,
        }
    }

    /// Loads `path` if it exists and appends new results to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ExactError> {
        let path = path.as_ref();
        let mut cache = Self::new();
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            for (no, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let (key, chain) = parse_record(line).map_err(|e| ExactError::Cache(format!("line {}: {e}", no + 1)))?;
                cache.entries.insert(key, chain);
            }
        }
        cache.file = Some(OpenOptions::new().create(true).append(true).open(path)?);
        Ok(cache)
    }

    /// Seeds the 2- to 4-input entries from an NPN database.
    pub fn seed_from(&mut self, db: &NpnDatabase) {
        for (key, entry) in db.entries() {
            self.entries.entry(*key).or_insert_with(|| entry.chain.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of synthesis runs so far (cache misses).
    pub fn searches(&self) -> usize {
        self.searches
    }

    pub fn get(&self, key: &TruthTable) -> Option<&Chain> {
        self.entries.get(key)
    }

    /// Chain for a canonical key, synthesizing on a miss.
    pub fn lookup_or_synthesize(&mut self, key: &TruthTable) -> Result<Option<Chain>, ExactError> {
        if let Some(c) = self.entries.get(key) {
            return Ok(Some(c.clone()));
        }
        if self.failed.contains(key) {
            return Ok(None);
        }
        self.searches += 1;
        match synthesize(key, self.max_gates, self.conflict_limit)? {
            Synthesis::Found(c) => {
                if let Some(f) = &mut self.file {
                    f.write_all(format_record(key, &c).as_bytes())?;
                }
                self.entries.insert(*key, c.clone());
                Ok(Some(c))
            }
            other => {
                log::debug!("exact synthesis of {key:?}: {other:?}");
                self.failed.insert(*key);
                Ok(None)
            }
        }
    }
}

fn format_record(key: &TruthTable, c: &Chain) -> String {
    format!("{} {} {} {}\n", key.num_vars(), key.to_hex(), c.size(), c.encode())
}

fn parse_record(line: &str) -> Result<(TruthTable, Chain), String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() < 4 {
        return Err("too few fields".into());
    }
    let n: usize = toks[0].parse().map_err(|_| "bad arity")?;
    let key = TruthTable::from_hex(n, toks[1]).map_err(|e| e.to_string())?;
    let size: usize = toks[2].parse().map_err(|_| "bad size")?;
    let chain = Chain::decode(n, &toks[3..]).map_err(|e| e.to_string())?;
    if chain.size() != size {
        return Err(format!("size field {size} but chain has {} steps", chain.size()));
    }
    if chain.simulate() != key {
        return Err("chain does not realize its key".into());
    }
    Ok((key, chain))
}

/// Exact-synthesis rewrite of a 2- to 5-input cone.
pub fn exact_rewrite_candidate(
    net: &AigNetwork,
    cone: &Cone,
    cache: &mut ExactCache,
) -> Result<Option<RewriteCandidate>, ExactError> {
    let k = cone.input_size();
    if !(2..=MAX_EXACT_VARS).contains(&k) {
        return Ok(None);
    }
    let tt = simulate_cone(net, cone).expect("at most 5 leaves");
    let (key, t) = cache_key(&tt)?;
    let Some(chain) = cache.lookup_or_synthesize(&key)? else {
        return Ok(None);
    };
    Ok(Some(RewriteCandidate::new(Action::Exact, chain, t.inverse())))
}
