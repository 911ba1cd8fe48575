//! Irredundant sum-of-products covers and algebraic factoring.

use std::fmt;

use crate::aig::AigNetwork;
use crate::chain::{Chain, ChainLit};
use crate::cone::{simulate_cone, Cone};
use crate::learn::Action;
use crate::replace::RewriteCandidate;
use crate::truth::{NpnTransform, TruthTable};

/// Product term; a variable in neither mask is absent.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cube {
    pub pos: u16,
    pub neg: u16,
}

impl Cube {
    pub const TAUTOLOGY: Cube = Cube { pos: 0, neg: 0 };

    pub fn is_tautology(&self) -> bool {
        self.pos == 0 && self.neg == 0
    }

    pub fn num_literals(&self) -> u32 {
        self.pos.count_ones() + self.neg.count_ones()
    }

    pub fn has(&self, var: usize, positive: bool) -> bool {
        let m = if positive { self.pos } else { self.neg };
        (m >> var) & 1 == 1
    }

    pub fn with(mut self, var: usize, positive: bool) -> Cube {
        if positive {
            self.pos |= 1 << var;
        } else {
            self.neg |= 1 << var;
        }
        self
    }

    pub fn without(mut self, var: usize) -> Cube {
        self.pos &= !(1 << var);
        self.neg &= !(1 << var);
        self
    }

    pub fn to_tt(&self, n: usize) -> TruthTable {
        let mut t = TruthTable::ones(n);
        for v in 0..n {
            if self.has(v, true) {
                t = t & TruthTable::var(n, v);
            }
            if self.has(v, false) {
                t = t & !TruthTable::var(n, v);
            }
        }
        t
    }
}

impl fmt::Debug for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_tautology() {
            return f.write_str("1");
        }
        for v in 0..16 {
            if self.has(v, true) {
                write!(f, "x{v}")?;
            }
            if self.has(v, false) {
                write!(f, "!x{v}")?;
            }
        }
        Ok(())
    }
}

pub fn cover_tt(cubes: &[Cube], n: usize) -> TruthTable {
    cubes.iter().fold(TruthTable::zero(n), |acc, c| acc | c.to_tt(n))
}

/// Minato–Morreale ISOP of a completely specified function.
pub fn isop(tt: &TruthTable) -> Vec<Cube> {
    let mut cubes = Vec::new();
    let covered = isop_rec(tt, tt, &mut cubes);
    debug_assert_eq!(covered, *tt);
    cubes
}

/// Appends a cover of some function between `lower` and `upper`; returns it.
fn isop_rec(lower: &TruthTable, upper: &TruthTable, out: &mut Vec<Cube>) -> TruthTable {
    let n = lower.num_vars();
    if lower.is_zero() {
        return TruthTable::zero(n);
    }
    if upper.is_ones() {
        out.push(Cube::TAUTOLOGY);
        return TruthTable::ones(n);
    }
    let x = (0..n)
        .find(|&v| lower.depends_on(v) || upper.depends_on(v))
        .expect("a non-constant interval depends on some variable");
    let (l0, l1) = (lower.cofactor(x, false), lower.cofactor(x, true));
    let (u0, u1) = (upper.cofactor(x, false), upper.cofactor(x, true));
    let start0 = out.len();
    let f0 = isop_rec(&(l0 & !u1), &u0, out);
    for c in &mut out[start0..] {
        *c = c.with(x, false);
    }
    let start1 = out.len();
    let f1 = isop_rec(&(l1 & !u0), &u1, out);
    for c in &mut out[start1..] {
        *c = c.with(x, true);
    }
    let rest = (l0 & !f0) | (l1 & !f1);
    let fs = isop_rec(&rest, &(u0 & u1), out);
    let xv = TruthTable::var(n, x);
    fs | (!xv & f0) | (xv & f1)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FactoredExpr {
    Const(bool),
    Lit { var: usize, positive: bool },
    And(Vec<FactoredExpr>),
    Or(Vec<FactoredExpr>),
}

impl FactoredExpr {
    pub fn num_literals(&self) -> usize {
        match self {
            FactoredExpr::Const(_) => 0,
            FactoredExpr::Lit { .. } => 1,
            FactoredExpr::And(c) | FactoredExpr::Or(c) => c.iter().map(|e| e.num_literals()).sum(),
        }
    }

    pub fn eval(&self, n: usize) -> TruthTable {
        match self {
            FactoredExpr::Const(b) => {
                if *b {
                    TruthTable::ones(n)
                } else {
                    TruthTable::zero(n)
                }
            }
            FactoredExpr::Lit { var, positive } => {
                let t = TruthTable::var(n, *var);
                if *positive {
                    t
                } else {
                    !t
                }
            }
            FactoredExpr::And(c) => c.iter().fold(TruthTable::ones(n), |a, e| a & e.eval(n)),
            FactoredExpr::Or(c) => c.iter().fold(TruthTable::zero(n), |a, e| a | e.eval(n)),
        }
    }

    fn and(parts: Vec<FactoredExpr>) -> FactoredExpr {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                FactoredExpr::Const(true) => {}
                FactoredExpr::And(c) => flat.extend(c),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => FactoredExpr::Const(true),
            1 => flat.pop().unwrap(),
            _ => FactoredExpr::And(flat),
        }
    }

    fn or(parts: Vec<FactoredExpr>) -> FactoredExpr {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                FactoredExpr::Or(c) => flat.extend(c),
                other => flat.push(other),
            }
        }
        match flat.len() {
            1 => flat.pop().unwrap(),
            _ => FactoredExpr::Or(flat),
        }
    }

    /// AND/OR trees become balanced AND chains; OR goes through De Morgan.
    pub fn to_chain(&self, n: usize) -> Chain {
        let mut c = Chain::new(n);
        let out = self.emit(&mut c);
        c.set_output(out);
        c
    }

    fn emit(&self, c: &mut Chain) -> ChainLit {
        match self {
            FactoredExpr::Const(b) => ChainLit::FALSE.xor(*b),
            FactoredExpr::Lit { var, positive } => c.input(*var).xor(!positive),
            FactoredExpr::And(ch) => {
                let lits: Vec<ChainLit> = ch.iter().map(|e| e.emit(c)).collect();
                balanced_and(c, lits)
            }
            FactoredExpr::Or(ch) => {
                let lits: Vec<ChainLit> = ch.iter().map(|e| e.emit(c).not()).collect();
                balanced_and(c, lits).not()
            }
        }
    }
}

fn balanced_and(c: &mut Chain, mut lits: Vec<ChainLit>) -> ChainLit {
    while lits.len() > 1 {
        let mut next = Vec::with_capacity(lits.len().div_ceil(2));
        for pair in lits.chunks(2) {
            next.push(if pair.len() == 2 { c.add_step(pair[0], pair[1]) } else { pair[0] });
        }
        lits = next;
    }
    lits.pop().unwrap_or(ChainLit::TRUE)
}

fn cube_expr(c: &Cube) -> FactoredExpr {
    let mut lits = Vec::new();
    for v in 0..16 {
        if c.has(v, true) {
            lits.push(FactoredExpr::Lit { var: v, positive: true });
        }
        if c.has(v, false) {
            lits.push(FactoredExpr::Lit { var: v, positive: false });
        }
    }
    FactoredExpr::and(lits)
}

/// Recursive division by the literal occurring in the most cubes.
pub fn factor(cubes: &[Cube]) -> FactoredExpr {
    if cubes.is_empty() {
        return FactoredExpr::Const(false);
    }
    if cubes.iter().any(|c| c.is_tautology()) {
        return FactoredExpr::Const(true);
    }
    if cubes.len() == 1 {
        return cube_expr(&cubes[0]);
    }
    let mut best = (0usize, 0usize, true);
    for v in 0..16 {
        for positive in [true, false] {
            let k = cubes.iter().filter(|c| c.has(v, positive)).count();
            if k > best.0 {
                best = (k, v, positive);
            }
        }
    }
    let (count, var, positive) = best;
    if count <= 1 {
        return FactoredExpr::or(cubes.iter().map(cube_expr).collect());
    }
    let (with, rest): (Vec<Cube>, Vec<Cube>) = cubes.iter().partition(|c| c.has(var, positive));
    let quotient: Vec<Cube> = with.iter().map(|c| c.without(var)).collect();
    let term = FactoredExpr::and(vec![FactoredExpr::Lit { var, positive }, factor(&quotient)]);
    if rest.is_empty() {
        term
    } else {
        FactoredExpr::or(vec![term, factor(&rest)])
    }
}

/// Factored form of `tt` or of its complement, whichever has fewer
/// literals; the flag is true when the complement was used.
pub fn factor_best_polarity(tt: &TruthTable) -> (FactoredExpr, bool) {
    let on = factor(&isop(tt));
    let off = factor(&isop(&!*tt));
    if off.num_literals() < on.num_literals() {
        (off, true)
    } else {
        (on, false)
    }
}

/// Refactoring rewrite of a 2- to 10-input cone; leaves keep their order.
pub fn isop_rewrite_candidate(net: &AigNetwork, cone: &Cone) -> Option<RewriteCandidate> {
    let k = cone.input_size();
    if !(2..=10).contains(&k) {
        return None;
    }
    let tt = simulate_cone(net, cone).ok()?;
    let (expr, complemented) = factor_best_polarity(&tt);
    let chain = expr.to_chain(k);
    let mut port = NpnTransform::identity(k);
    port.output_phase = complemented;
    Some(RewriteCandidate::new(Action::Isop, chain, port))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: usize, i: usize) -> TruthTable {
        TruthTable::var(n, i)
    }

    #[test]
    fn constants_and_single_cube() {
        assert_eq!(isop(&TruthTable::ones(3)), vec![Cube::TAUTOLOGY]);
        assert!(isop(&TruthTable::zero(3)).is_empty());
        let abc = v(3, 0) & v(3, 1) & v(3, 2);
        assert_eq!(isop(&abc), vec![Cube { pos: 0b111, neg: 0 }]);
    }

    #[test]
    fn mux_cover_has_two_cubes() {
        let f = (v(3, 0) & v(3, 1)) | (!v(3, 0) & v(3, 2));
        let c = isop(&f);
        assert_eq!(c.len(), 2);
        assert_eq!(cover_tt(&c, 3), f);
    }

    #[test]
    fn common_literal_is_factored() {
        let cubes = [Cube { pos: 0b011, neg: 0 }, Cube { pos: 0b101, neg: 0 }];
        let e = factor(&cubes);
        assert_eq!(e.num_literals(), 3);
        assert_eq!(e.eval(3), cover_tt(&cubes, 3));
        assert!(matches!(e, FactoredExpr::And(_)));
    }

    #[test]
    fn or_chain_is_balanced() {
        let e = FactoredExpr::Or((0..4).map(|i| FactoredExpr::Lit { var: i, positive: true }).collect());
        let c = e.to_chain(4);
        assert_eq!(c.size(), 3);
        assert_eq!(c.depth(), 2);
        assert_eq!(c.simulate(), e.eval(4));
    }
}
