//! Combinational AIGER reader and writer (`aag` and `aig`).

use std::path::Path;

use thiserror::Error;

use crate::aig::{AigNetwork, Lit};

#[derive(Debug, Error)]
pub enum AigerError {
    #[error("AIGER parse error: {0}")]
    Parse(String),
    #[error("unsupported AIGER content: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn perr<T>(msg: impl Into<String>) -> Result<T, AigerError> {
    Err(AigerError::Parse(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AigerFormat {
    Ascii,
    Binary,
}

impl AigerFormat {
    /// `.aag` means ASCII, anything else binary.
    pub fn from_path(path: &Path) -> AigerFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("aag") => AigerFormat::Ascii,
            _ => AigerFormat::Binary,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AigerHeader {
    pub max_var: usize,
    pub num_inputs: usize,
    pub num_latches: usize,
    pub num_outputs: usize,
    pub num_ands: usize,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Option<&'a str> {
        if self.pos >= self.data.len() {
            return None;
        }
        let rest = &self.data[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        self.pos += (end + 1).min(rest.len());
        std::str::from_utf8(&rest[..end]).ok().map(|s| s.trim_end_matches('\r'))
    }

    fn expect_line(&mut self, what: &str) -> Result<&'a str, AigerError> {
        match self.line() {
            Some(l) => Ok(l),
            None => perr(format!("unexpected end of file reading {what}")),
        }
    }

    fn varint(&mut self) -> Result<usize, AigerError> {
        let mut x: usize = 0;
        let mut shift = 0;
        loop {
            let Some(&b) = self.data.get(self.pos) else {
                return perr("truncated delta encoding");
            };
            self.pos += 1;
            if shift > 56 {
                return perr("delta encoding overflow");
            }
            x |= ((b & 0x7f) as usize) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
            shift += 7;
        }
    }
}

fn parse_num(tok: &str) -> Result<usize, AigerError> {
    tok.parse().map_err(|_| AigerError::Parse(format!("expected a number, got {tok:?}")))
}

fn parse_header(line: &str) -> Result<(AigerFormat, AigerHeader), AigerError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let format = match toks.first() {
        Some(&"aag") => AigerFormat::Ascii,
        Some(&"aig") => AigerFormat::Binary,
        _ => return perr(format!("bad header {line:?}")),
    };
    if toks.len() > 6 {
        return Err(AigerError::Unsupported(format!(
            "extended header {line:?} (bad states, constraints, justice or fairness)"
        )));
    }
    if toks.len() != 6 {
        return perr(format!("header needs five counts: {line:?}"));
    }
    let v: Vec<usize> = toks[1..].iter().map(|t| parse_num(t)).collect::<Result<_, _>>()?;
    let h = AigerHeader { max_var: v[0], num_inputs: v[1], num_latches: v[2], num_outputs: v[3], num_ands: v[4] };
    if h.num_latches > 0 {
        return Err(AigerError::Unsupported(format!("{} latches", h.num_latches)));
    }
    if h.max_var < h.num_inputs + h.num_ands {
        return perr(format!("max variable {} below {} inputs + {} ands", h.max_var, h.num_inputs, h.num_ands));
    }
    Ok((format, h))
}

pub fn read_aiger(data: &[u8]) -> Result<AigNetwork, AigerError> {
    let mut cur = Cursor { data, pos: 0 };
    let (format, h) = parse_header(cur.expect_line("header")?)?;
    let mut net = AigNetwork::new();
    // variable -> literal in `net`
    let mut map: Vec<Option<Lit>> = vec![None; h.max_var + 1];
    map[0] = Some(Lit::FALSE);
    let check_lit = |l: usize| -> Result<usize, AigerError> {
        if l / 2 > h.max_var {
            perr(format!("literal {l} exceeds max variable {}", h.max_var))
        } else {
            Ok(l)
        }
    };

    for i in 0..h.num_inputs {
        let var = match format {
            AigerFormat::Binary => i + 1,
            AigerFormat::Ascii => {
                let l = check_lit(parse_num(cur.expect_line("input")?.trim())?)?;
                if l < 2 || l % 2 == 1 {
                    return perr(format!("input literal {l} must be even and nonzero"));
                }
                l / 2
            }
        };
        if map[var].is_some() {
            return perr(format!("variable {var} defined twice"));
        }
        map[var] = Some(net.add_input());
    }
    let mut outs = Vec::with_capacity(h.num_outputs);
    for _ in 0..h.num_outputs {
        outs.push(check_lit(parse_num(cur.expect_line("output")?.trim())?)?);
    }

    let mut defs: Vec<Option<(usize, usize)>> = vec![None; h.max_var + 1];
    let mut and_vars = Vec::with_capacity(h.num_ands);
    for i in 0..h.num_ands {
        let (lhs, r0, r1) = match format {
            AigerFormat::Binary => {
                let lhs = 2 * (h.num_inputs + i + 1);
                let d0 = cur.varint()?;
                let d1 = cur.varint()?;
                if d0 == 0 || d0 > lhs || d1 > lhs - d0 {
                    return perr(format!("bad delta for and-gate {lhs}"));
                }
                (lhs, lhs - d0, lhs - d0 - d1)
            }
            AigerFormat::Ascii => {
                let line = cur.expect_line("and gate")?;
                let t: Vec<usize> = line.split_whitespace().map(parse_num).collect::<Result<_, _>>()?;
                if t.len() != 3 {
                    return perr(format!("and line needs three literals: {line:?}"));
                }
                (check_lit(t[0])?, check_lit(t[1])?, check_lit(t[2])?)
            }
        };
        if lhs < 2 || lhs % 2 == 1 {
            return perr(format!("and lhs {lhs} must be even and nonzero"));
        }
        let var = lhs / 2;
        if map[var].is_some() || defs[var].is_some() {
            return perr(format!("variable {var} defined twice"));
        }
        defs[var] = Some((r0, r1));
        and_vars.push(var);
    }

    for &root in &and_vars {
        // iterative resolve; ASCII files need not be sorted
        let mut stack = vec![(root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if map[v].is_some() {
                continue;
            }
            let Some((r0, r1)) = defs[v] else {
                return perr(format!("variable {v} used but never defined"));
            };
            if expanded {
                let get = |l: usize| map[l / 2].map(|x| x.xor(l % 2 == 1));
                let (Some(a), Some(b)) = (get(r0), get(r1)) else {
                    return perr(format!("cycle through variable {v}"));
                };
                map[v] = Some(net.and2(a, b));
            } else {
                if stack.len() > 2 * h.num_ands + 2 {
                    return perr(format!("cycle through variable {v}"));
                }
                stack.push((v, true));
                for l in [r1, r0] {
                    if map[l / 2].is_none() {
                        stack.push((l / 2, false));
                    }
                }
            }
        }
    }

    for l in outs {
        let Some(x) = map[l / 2] else {
            return perr(format!("output literal {l} is undefined"));
        };
        net.add_output(x.xor(l % 2 == 1));
    }

    // symbol table and comment section
    while let Some(line) = cur.line() {
        if line == "c" {
            let rest = &data[cur.pos.min(data.len())..];
            net.symbols.comment = Some(String::from_utf8_lossy(rest).into_owned());
            break;
        }
        if line.is_empty() {
            continue;
        }
        let (kind, rest) = line.split_at(1);
        let Some((idx, name)) = rest.split_once(' ') else {
            return perr(format!("bad symbol line {line:?}"));
        };
        let idx = parse_num(idx)?;
        match kind {
            "i" if idx < h.num_inputs => net.symbols.inputs.push((idx, name.to_string())),
            "o" if idx < h.num_outputs => net.symbols.outputs.push((idx, name.to_string())),
            "l" => return Err(AigerError::Unsupported("latch symbol".into())),
            "b" | "j" | "f" => return Err(AigerError::Unsupported(format!("symbol {line:?}"))),
            _ => return perr(format!("bad symbol line {line:?}")),
        }
    }
    Ok(net)
}

fn push_varint(out: &mut Vec<u8>, mut x: usize) {
    while x >= 0x80 {
        out.push((x as u8 & 0x7f) | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

/// Writes a compacted copy of `net`; And gates appear in topological order.
pub fn write_aiger(net: &AigNetwork, format: AigerFormat) -> Vec<u8> {
    let c = net.compact();
    let ni = c.num_inputs();
    let ands: Vec<usize> = (ni + 1..c.num_nodes()).collect();
    debug_assert!(ands.iter().all(|&n| c.is_and(n)));
    let m = ni + ands.len();
    let tag = match format {
        AigerFormat::Ascii => "aag",
        AigerFormat::Binary => "aig",
    };
    let mut out = format!("{tag} {m} {ni} 0 {} {}\n", c.num_outputs(), ands.len()).into_bytes();
    if format == AigerFormat::Ascii {
        for i in 0..ni {
            out.extend(format!("{}\n", 2 * (i + 1)).bytes());
        }
    }
    for l in c.outputs() {
        out.extend(format!("{}\n", l.raw()).bytes());
    }
    for &n in &ands {
        let [a, b] = c.fanins(n);
        let (lhs, r0, r1) = (2 * n, b.raw() as usize, a.raw() as usize);
        match format {
            AigerFormat::Ascii => out.extend(format!("{lhs} {r0} {r1}\n").bytes()),
            AigerFormat::Binary => {
                push_varint(&mut out, lhs - r0);
                push_varint(&mut out, r0 - r1);
            }
        }
    }
    for (i, name) in &c.symbols.inputs {
        out.extend(format!("i{i} {name}\n").bytes());
    }
    for (i, name) in &c.symbols.outputs {
        out.extend(format!("o{i} {name}\n").bytes());
    }
    if let Some(comment) = &c.symbols.comment {
        out.extend(b"c\n");
        out.extend(comment.bytes());
    }
    out
}

pub fn read_aiger_file(path: impl AsRef<Path>) -> Result<AigNetwork, AigerError> {
    read_aiger(&std::fs::read(path)?)
}

pub fn write_aiger_file(path: impl AsRef<Path>, net: &AigNetwork) -> Result<(), AigerError> {
    let path = path.as_ref();
    std::fs::write(path, write_aiger(net, AigerFormat::from_path(path)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_example() {
        let net = read_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n").unwrap();
        assert_eq!(net.num_inputs(), 2);
        assert_eq!(net.num_outputs(), 1);
        assert_eq!(net.size(), 1);
        for x in 0..4 {
            let v = [x & 1 == 1, x & 2 == 2];
            assert_eq!(net.evaluate(&v), vec![v[0] && v[1]]);
        }
    }

    #[test]
    fn empty_and_constant() {
        let net = read_aiger(b"aag 0 0 0 0 0\n").unwrap();
        assert_eq!((net.num_inputs(), net.num_outputs()), (0, 0));
        let mut net = AigNetwork::new();
        net.add_output(Lit::TRUE);
        assert_eq!(write_aiger(&net, AigerFormat::Ascii), b"aag 0 0 0 1 0\n1\n");
    }

    #[test]
    fn rejects_latches_and_garbage() {
        assert!(matches!(read_aiger(b"aag 1 0 1 0 0\n2 3\n"), Err(AigerError::Unsupported(_))));
        assert!(matches!(read_aiger(b"aag 1 0 0 0 0 1\n"), Err(AigerError::Unsupported(_))));
        assert!(matches!(read_aiger(b"aig 2 1 0 1 1\n4\n"), Err(AigerError::Parse(_))));
        assert!(matches!(read_aiger(b"aag 1 1 0 1 0\n2\n6\n"), Err(AigerError::Parse(_))));
        assert!(matches!(read_aiger(b"foo"), Err(AigerError::Parse(_))));
    }

    #[test]
    fn unsorted_ascii_and_symbols() {
        let src = b"aag 4 2 0 1 2\n2\n4\n9\n8 6 2\n6 2 5\ni0 a\ni1 b\no0 out\nc\nhello\n";
        let net = read_aiger(src).unwrap();
        assert_eq!(net.size(), 2);
        assert_eq!(net.symbols.inputs, vec![(0, "a".into()), (1, "b".into())]);
        assert_eq!(net.symbols.comment.as_deref(), Some("hello\n"));
        let again = read_aiger(&write_aiger(&net, AigerFormat::Binary)).unwrap();
        assert_eq!(again.symbols, net.symbols);
        assert_eq!(again.size(), 2);
    }
}
