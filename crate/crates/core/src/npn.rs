//! NPN canonical forms for up to four inputs and the optimal-structure
//! database keyed by them.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::aig::AigNetwork;
use crate::chain::Chain;
use crate::cone::{simulate_cone, Cone};
use crate::exact::{exact_synthesize, ExactError, DEFAULT_MAX_GATES};
use crate::learn::Action;
use crate::replace::RewriteCandidate;
use crate::truth::{NpnTransform, TruthTable};

pub const MAX_NPN_VARS: usize = 4;
pub const DB_VERSION: u32 = 1;
const DB_TAG: &str = "npn-db";
const DB_ORDER: &str = "order=min-unsigned,var0-fastest";
const BUILTIN_DB: &str = include_str!("../data/npn4.db");

#[derive(Debug, Error)]
pub enum NpnError {
    #[error("NPN canonicalization supports at most {MAX_NPN_VARS} inputs, got {0}")]
    UnsupportedArity(usize),
    #[error("NPN database: {0}")]
    Database(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const SWAP_KEEP: [u64; 3] = [0x9999_9999_9999_9999, 0xC3C3_C3C3_C3C3_C3C3, 0xF00F_F00F_F00F_F00F];
const SWAP_UP: [u64; 3] = [0x2222_2222_2222_2222, 0x0C0C_0C0C_0C0C_0C0C, 0x00F0_00F0_00F0_00F0];
const PROJ: [u64; 4] = [0xAAAA_AAAA_AAAA_AAAA, 0xCCCC_CCCC_CCCC_CCCC, 0xF0F0_F0F0_F0F0_F0F0, 0xFF00_FF00_FF00_FF00];

fn swap_adjacent(t: u64, i: usize) -> u64 {
    let s = 1 << i;
    (t & SWAP_KEEP[i]) | ((t & SWAP_UP[i]) << s) | ((t >> s) & SWAP_UP[i])
}

fn flip(t: u64, i: usize) -> u64 {
    let s = 1 << i;
    ((t & PROJ[i]) >> s) | ((t & !PROJ[i]) << s)
}

/// Positions of the adjacent transpositions that walk through all `n!`
/// permutations (Steinhaus–Johnson–Trotter), `n! - 1` entries.
fn sjt_swaps(n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut dir: Vec<i32> = vec![-1; n];
    let mut swaps = Vec::new();
    loop {
        // largest mobile element
        let mut best: Option<usize> = None;
        for i in 0..n {
            let j = i as i32 + dir[perm[i]];
            if j >= 0 && (j as usize) < n && perm[j as usize] < perm[i] && best.map_or(true, |b| perm[i] > perm[b]) {
                best = Some(i);
            }
        }
        let Some(i) = best else { break };
        let j = (i as i32 + dir[perm[i]]) as usize;
        let m = perm[i];
        perm.swap(i, j);
        swaps.push(i.min(j));
        for &v in &perm {
            if v > m {
                dir[v] = -dir[v];
            }
        }
    }
    swaps
}

/// Numerically smallest table over all `n!·2^(n+1)` transforms, and a
/// transform mapping `tt` onto it.
pub fn npn_canonicalize(tt: &TruthTable) -> Result<(TruthTable, NpnTransform), NpnError> {
    let n = tt.num_vars();
    if n > MAX_NPN_VARS {
        return Err(NpnError::UnsupportedArity(n));
    }
    if n == 0 {
        let out = tt.is_ones();
        return Ok((TruthTable::zero(0), NpnTransform::new(&[], 0, out)));
    }
    let mask = if n == 6 { !0 } else { (1u64 << (1 << n)) - 1 };
    let swaps = sjt_swaps(n);
    // cur = apply(tt, (perm, phase, out=false)) at every point
    let mut cur = tt.as_u64();
    let mut perm = [0u8, 1, 2, 3];
    let mut phase = 0u16;
    let mut best = (u64::MAX, perm, phase, false);
    let mut consider = |cur: u64, perm: &[u8; 4], phase: u16| {
        if cur < best.0 {
            best = (cur, *perm, phase, false);
        }
        let neg = !cur & mask;
        if neg < best.0 {
            best = (neg, *perm, phase, true);
        }
    };
    for p in 0..=swaps.len() {
        for g in 0..(1u32 << n) {
            if g > 0 {
                let v = g.trailing_zeros() as usize;
                cur = flip(cur, v) & mask;
                for j in 0..n {
                    if perm[j] as usize == v {
                        phase ^= 1 << j;
                    }
                }
            }
            consider(cur, &perm, phase);
        }
        if p < swaps.len() {
            let i = swaps[p];
            cur = swap_adjacent(cur, i) & mask;
            for x in perm.iter_mut().take(n) {
                if *x as usize == i {
                    *x = i as u8 + 1;
                } else if *x as usize == i + 1 {
                    *x = i as u8;
                }
            }
        }
    }
    let (bits, perm, phase, out) = best;
    let perm: Vec<usize> = perm[..n].iter().map(|&p| p as usize).collect();
    Ok((TruthTable::from_u64(n, bits), NpnTransform::new(&perm, phase, out)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NpnEntry {
    pub chain: Chain,
    pub size: usize,
    pub depth: usize,
}

/// One size-optimal chain per NPN class, for arities 0 through 4.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NpnDatabase {
    entries: BTreeMap<TruthTable, NpnEntry>,
}

impl NpnDatabase {
    /// The database shipped with the crate.
    pub fn builtin() -> NpnDatabase {
        Self::parse(BUILTIN_DB).expect("embedded NPN database is valid")
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TruthTable, &NpnEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of classes of the given arity.
    pub fn classes(&self, arity: usize) -> usize {
        self.entries.keys().filter(|k| k.num_vars() == arity).count()
    }

    pub fn lookup(&self, canonical: &TruthTable) -> Option<&NpnEntry> {
        self.entries.get(canonical)
    }

    pub fn parse(text: &str) -> Result<NpnDatabase, NpnError> {
        let bad = |no: usize, msg: &str| NpnError::Database(format!("line {}: {msg}", no + 1));
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| NpnError::Database("empty file".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let expect = [DB_TAG.to_string(), DB_VERSION.to_string(), format!("max_arity={MAX_NPN_VARS}"), DB_ORDER.to_string()];
        if h.len() != 4 || h.iter().zip(&expect).any(|(a, b)| a != b) {
            return Err(NpnError::Database(format!("header {header:?} does not match version {DB_VERSION}")));
        }
        let mut db = NpnDatabase::default();
        for (no, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks.len() < 5 {
                return Err(bad(no, "too few fields"));
            }
            let n: usize = toks[0].parse().map_err(|_| bad(no, "arity"))?;
            let key = TruthTable::from_hex(n, toks[1]).map_err(|e| bad(no, &e.to_string()))?;
            let size: usize = toks[toks.len() - 2].parse().map_err(|_| bad(no, "size"))?;
            let depth: usize = toks[toks.len() - 1].parse().map_err(|_| bad(no, "depth"))?;
            let chain = Chain::decode(n, &toks[2..toks.len() - 2]).map_err(|e| bad(no, &e.to_string()))?;
            if chain.size() != size || chain.depth() != depth {
                return Err(bad(no, "size or depth field disagrees with the chain"));
            }
            if chain.simulate() != key {
                return Err(bad(no, "chain does not realize its key"));
            }
            db.entries.insert(key, NpnEntry { chain, size, depth });
        }
        Ok(db)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{DB_TAG} {DB_VERSION} max_arity={MAX_NPN_VARS} {DB_ORDER}\n");
        for (k, e) in &self.entries {
            s += &format!("{} {} {} {} {}\n", k.num_vars(), k.to_hex(), e.chain.encode(), e.size, e.depth);
        }
        s
    }

    /// Canonicalizes every function of arity up to `max_n` and synthesizes
    /// one optimal chain per class.
    pub fn generate(max_n: usize) -> Result<NpnDatabase, NpnError> {
        Self::generate_from(max_n, NpnDatabase::default(), |_| Ok(()))
    }

    /// Like [`NpnDatabase::generate`], but keeps the classes already in
    /// `partial` and calls `progress` after each new one.
    pub fn generate_from(
        max_n: usize,
        partial: NpnDatabase,
        mut progress: impl FnMut(&NpnDatabase) -> Result<(), NpnError>,
    ) -> Result<NpnDatabase, NpnError> {
        if max_n > MAX_NPN_VARS {
            return Err(NpnError::UnsupportedArity(max_n));
        }
        let mut db = partial;
        for n in 0..=max_n {
            let mut classes = std::collections::BTreeSet::new();
            for bits in 0..(1u64 << (1 << n)) {
                classes.insert(npn_canonicalize(&TruthTable::from_u64(n, bits))?.0);
            }
            for key in classes {
                if db.entries.contains_key(&key) {
                    continue;
                }
                let t0 = std::time::Instant::now();
                let chain = exact_synthesize(&key, DEFAULT_MAX_GATES)?
                    .ok_or_else(|| NpnError::Database(format!("no chain within the gate limit for {key:?}")))?;
                log::info!("class {key:?}: {} gates in {:.1?}", chain.size(), t0.elapsed());
                let (size, depth) = (chain.size(), chain.depth());
                db.entries.insert(key, NpnEntry { chain, size, depth });
                progress(&db)?;
            }
        }
        Ok(db)
    }
}

/// Loads the database at `path` when its header matches, otherwise
/// generates it and writes it there.
pub fn build_npn_database(max_n: usize, path: Option<&Path>) -> Result<NpnDatabase, NpnError> {
    if let Some(p) = path {
        if p.exists() {
            match NpnDatabase::parse(&std::fs::read_to_string(p)?) {
                Ok(db) => return Ok(db),
                Err(e) => log::warn!("rebuilding {}: {e}", p.display()),
            }
        }
    }
    let db = NpnDatabase::generate(max_n)?;
    if let Some(p) = path {
        std::fs::write(p, db.to_text())?;
    }
    Ok(db)
}

/// Database rewrite of a 2- to 4-input cone.
pub fn npn_rewrite_candidate(net: &AigNetwork, cone: &Cone, db: &NpnDatabase) -> Option<RewriteCandidate> {
    if !(2..=MAX_NPN_VARS).contains(&cone.input_size()) {
        return None;
    }
    let tt = simulate_cone(net, cone).ok()?;
    let (canon, t) = npn_canonicalize(&tt).ok()?;
    let entry = db.lookup(&canon)?;
    Some(RewriteCandidate::new(Action::Npn, entry.chain.clone(), t.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sjt_visits_every_permutation() {
        for n in 1..=4 {
            let swaps = sjt_swaps(n);
            let mut p: Vec<usize> = (0..n).collect();
            let mut seen = std::collections::HashSet::from([p.clone()]);
            for &i in &swaps {
                p.swap(i, i + 1);
                seen.insert(p.clone());
            }
            assert_eq!(seen.len(), (1..=n).product::<usize>());
        }
    }

    #[test]
    fn bit_tricks_match_generic_transform() {
        let t = TruthTable::from_u64(4, 0x1e6b);
        for i in 0..3 {
            let mut perm = vec![0, 1, 2, 3];
            perm.swap(i, i + 1);
            let want = t.apply_npn_transform(&NpnTransform::new(&perm, 0, false));
            assert_eq!(swap_adjacent(t.as_u64(), i) & 0xffff, want.as_u64());
        }
        for i in 0..4 {
            assert_eq!(flip(t.as_u64(), i) & 0xffff, t.flip_var(i).as_u64());
        }
    }

    #[test]
    fn canonical_form_is_reached_by_transform() {
        for bits in [0x0u64, 0x8, 0x6, 0xe8, 0x96, 0x1e6b, 0x8000, 0x6996] {
            let n = if bits > 0xff { 4 } else if bits > 0xf { 3 } else { 2 };
            let tt = TruthTable::from_u64(n, bits);
            let (c, t) = npn_canonicalize(&tt).unwrap();
            assert_eq!(tt.apply_npn_transform(&t), c);
        }
        let (c, _) = npn_canonicalize(&TruthTable::from_u64(2, 0x8)).unwrap();
        assert_eq!(c.as_u64(), 0x1);
    }

    #[test]
    fn arity_five_is_rejected() {
        assert!(matches!(npn_canonicalize(&TruthTable::zero(5)), Err(NpnError::UnsupportedArity(5))));
    }
}
