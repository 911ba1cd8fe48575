//! Straight-line AND chains with complemented edges.
//!
//! Chain literal indices: 0 is constant false, `1..=n` are the inputs and
//! `n + j` is step `j` (1-based).

use std::fmt::Write as _;

use crate::truth::TruthTable;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct ChainLit {
    pub index: u16,
    pub compl: bool,
}

impl ChainLit {
    pub const FALSE: ChainLit = ChainLit { index: 0, compl: false };
    pub const TRUE: ChainLit = ChainLit { index: 0, compl: true };

    pub fn new(index: usize, compl: bool) -> Self {
        ChainLit { index: index as u16, compl }
    }

    pub fn not(self) -> Self {
        ChainLit { index: self.index, compl: !self.compl }
    }

    pub fn xor(self, c: bool) -> Self {
        ChainLit { index: self.index, compl: self.compl ^ c }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Chain {
    num_inputs: usize,
    steps: Vec<[ChainLit; 2]>,
    output: ChainLit,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("bad chain encoding: {0}")]
pub struct ChainParseError(pub String);

impl Chain {
    pub fn new(num_inputs: usize) -> Self {
        Chain { num_inputs, steps: Vec::new(), output: ChainLit::FALSE }
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn steps(&self) -> &[[ChainLit; 2]] {
        &self.steps
    }

    pub fn output(&self) -> ChainLit {
        self.output
    }

    pub fn size(&self) -> usize {
        self.steps.len()
    }

    pub fn input(&self, i: usize) -> ChainLit {
        assert!(i < self.num_inputs);
        ChainLit::new(i + 1, false)
    }

    pub fn add_step(&mut self, a: ChainLit, b: ChainLit) -> ChainLit {
        let next = self.num_inputs + self.steps.len() + 1;
        assert!((a.index as usize) < next && (b.index as usize) < next, "step refers forward");
        self.steps.push([a, b]);
        ChainLit::new(next, false)
    }

    pub fn set_output(&mut self, l: ChainLit) {
        assert!((l.index as usize) <= self.num_inputs + self.steps.len());
        self.output = l;
    }

    pub fn depth(&self) -> usize {
        let mut lv = vec![0usize; self.num_inputs + self.steps.len() + 1];
        for (j, s) in self.steps.iter().enumerate() {
            lv[self.num_inputs + j + 1] = 1 + lv[s[0].index as usize].max(lv[s[1].index as usize]);
        }
        lv[self.output.index as usize]
    }

    pub fn simulate(&self) -> TruthTable {
        let n = self.num_inputs;
        let mut val = Vec::with_capacity(n + self.steps.len() + 1);
        val.push(TruthTable::zero(n));
        val.extend((0..n).map(|i| TruthTable::var(n, i)));
        let get = |val: &[TruthTable], l: ChainLit| {
            let t = val[l.index as usize];
            if l.compl {
                !t
            } else {
                t
            }
        };
        for s in &self.steps {
            let t = get(&val, s[0]) & get(&val, s[1]);
            val.push(t);
        }
        get(&val, self.output)
    }

    /// Same steps over `m` inputs, input `i` renamed to `map[i]`.
    pub fn remap_inputs(&self, m: usize, map: &[usize]) -> Chain {
        assert_eq!(map.len(), self.num_inputs);
        let n = self.num_inputs;
        let tr = |l: ChainLit| {
            let i = l.index as usize;
            let index = if i == 0 {
                0
            } else if i <= n {
                map[i - 1] + 1
            } else {
                i - n + m
            };
            ChainLit::new(index, l.compl)
        };
        Chain {
            num_inputs: m,
            steps: self.steps.iter().map(|s| [tr(s[0]), tr(s[1])]).collect(),
            output: tr(self.output),
        }
    }

    /// Space-separated signed literals, step fanins pairwise, output last.
    /// Complemented constant (true) is written `-0`.
    pub fn encode(&self) -> String {
        let mut s = String::new();
        let lit = |s: &mut String, l: ChainLit| {
            if !s.is_empty() {
                s.push(' ');
            }
            if l.compl {
                s.push('-');
            }
            write!(s, "{}", l.index).unwrap();
        };
        for st in &self.steps {
            lit(&mut s, st[0]);
            lit(&mut s, st[1]);
        }
        lit(&mut s, self.output);
        s
    }

    pub fn decode(num_inputs: usize, toks: &[&str]) -> Result<Chain, ChainParseError> {
        if toks.len() % 2 != 1 {
            return Err(ChainParseError(format!("{} literals, expected an odd count", toks.len())));
        }
        let lits: Vec<ChainLit> = toks
            .iter()
            .map(|t| {
                let (compl, digits) = match t.strip_prefix('-') {
                    Some(d) => (true, d),
                    None => (false, *t),
                };
                digits
                    .parse::<u16>()
                    .map(|index| ChainLit { index, compl })
                    .map_err(|_| ChainParseError(format!("literal {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        let mut c = Chain::new(num_inputs);
        for pair in lits[..lits.len() - 1].chunks(2) {
            let limit = c.num_inputs + c.steps.len() + 1;
            if pair.iter().any(|l| l.index as usize >= limit) {
                return Err(ChainParseError(format!("forward reference in step {}", c.steps.len() + 1)));
            }
            c.steps.push([pair[0], pair[1]]);
        }
        let out = lits[lits.len() - 1];
        if out.index as usize > c.num_inputs + c.steps.len() {
            return Err(ChainParseError("output out of range".into()));
        }
        c.output = out;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor2() -> Chain {
        let mut c = Chain::new(2);
        let a = c.input(0);
        let b = c.input(1);
        let p = c.add_step(a, b.not());
        let q = c.add_step(a.not(), b);
        let r = c.add_step(p.not(), q.not());
        c.set_output(r.not());
        c
    }

    #[test]
    fn xor_chain() {
        let c = xor2();
        assert_eq!(c.simulate().as_u64(), 0x6);
        assert_eq!(c.size(), 3);
        assert_eq!(c.depth(), 2);
    }

    #[test]
    fn encoding_round_trip() {
        let c = xor2();
        assert_eq!(c.encode(), "1 -2 -1 2 -3 -4 -5");
        let toks: Vec<&str> = c.encode().leak().split(' ').collect();
        assert_eq!(Chain::decode(2, &toks).unwrap(), c);
        let mut t = Chain::new(3);
        t.set_output(ChainLit::TRUE);
        assert_eq!(t.encode(), "-0");
        assert!(Chain::decode(3, &["-0"]).unwrap().simulate().is_ones());
        assert!(Chain::decode(2, &["1", "4", "3"]).is_err());
    }

    #[test]
    fn remap_moves_inputs() {
        let c = xor2().remap_inputs(4, &[3, 1]);
        let want = TruthTable::var(4, 3) ^ TruthTable::var(4, 1);
        assert_eq!(c.simulate(), want);
    }
}
