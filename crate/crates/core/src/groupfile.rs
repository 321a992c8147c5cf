//! Text format for stabilizer groups.
//!
//! ```text
//! # comment
//! d = 9
//! party a = 0
//! party b = 1
//! party c = 2
//! gen = X0 X1 X2
//! gen = Z0 Z1^8
//! gen = w^1/2 X0 Z0
//! ```
//!
//! Qudit indices are 0-based and the parties must cover `0..N`. A generator
//! is the ordered product of its factors; `w^k` multiplies by `ω^k`, `w^k/2`
//! by `ω^{k/2}`, and `I` is the identity. Exponents may be negative.

use crate::error::{Error, Result};
use crate::linalg::RingParams;
use crate::pauli::PauliOp;
use crate::stabilizer::{Partition, Party, StabilizerGroup};

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(s: &str, offset: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(b)) => {
                out.push(Token { text: &s[b..i], column: offset + b + 1 });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push(Token { text: &s[b..], column: offset + b + 1 });
    }
    out
}

fn parse_int(t: &str, line: usize, column: usize) -> Result<i64> {
    t.parse::<i64>().map_err(|_| err(line, column, format!("expected an integer, found '{t}'")))
}

struct RawGen<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
}

/// Parses a group file. The result is not validated.
pub fn parse_group(text: &str) -> Result<StabilizerGroup> {
    let mut d: Option<(u64, usize)> = None;
    let mut parties: Vec<(Party, usize)> = Vec::new();
    let mut raw: Vec<RawGen> = Vec::new();
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let content = full.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let eq = content.find('=').ok_or_else(|| err(line, 1, "expected '='"))?;
        let lhs = tokens(&content[..eq], 0);
        let rhs_off = eq + 1;
        let rhs = &content[rhs_off..];
        match lhs.iter().map(|t| t.text).collect::<Vec<_>>().as_slice() {
            ["d"] => {
                let toks = tokens(rhs, rhs_off);
                let [t] = toks.as_slice() else {
                    return Err(err(line, rhs_off + 1, "expected a single dimension"));
                };
                let v = parse_int(t.text, line, t.column)?;
                if v < 2 {
                    return Err(err(line, t.column, "dimension must be at least 2"));
                }
                if d.is_some() {
                    return Err(err(line, 1, "dimension given twice"));
                }
                d = Some((v as u64, line));
            }
            ["party", label] => {
                if parties.iter().any(|(p, _)| p.label == *label) {
                    return Err(err(line, lhs[1].column, format!("party '{label}' defined twice")));
                }
                let mut qudits = Vec::new();
                let mut pos = rhs_off;
                for piece in rhs.split(',') {
                    let toks = tokens(piece, pos);
                    pos += piece.len() + 1;
                    match toks.as_slice() {
                        [] if rhs.trim().is_empty() => {}
                        [t] => {
                            let q = parse_int(t.text, line, t.column)?;
                            if q < 0 {
                                return Err(err(line, t.column, "qudit index must be nonnegative"));
                            }
                            qudits.push(q as usize);
                        }
                        _ => return Err(err(line, pos.saturating_sub(piece.len()), "expected one qudit index")),
                    }
                }
                parties.push((Party { label: label.to_string(), qudits }, line));
            }
            ["gen"] => {
                let toks = tokens(rhs, rhs_off);
                if toks.is_empty() {
                    return Err(err(line, rhs_off + 1, "empty generator"));
                }
                raw.push(RawGen { line, tokens: toks });
            }
            _ => return Err(err(line, 1, "expected 'd', 'party <label>' or 'gen'")),
        }
    }
    let (d, _) = d.ok_or_else(|| err(1, 1, "missing 'd = <int>' line"))?;
    let ring = RingParams::new(d).map_err(|e| err(1, 1, e.to_string()))?;
    if parties.is_empty() {
        return Err(err(1, 1, "no parties defined"));
    }
    let n = parties.iter().map(|(p, _)| p.qudits.len()).sum::<usize>();
    let last_line = parties.last().map_or(1, |(_, l)| *l);
    let partition = Partition::new(parties.into_iter().map(|(p, _)| p).collect(), n)
        .map_err(|e| err(last_line, 1, e.to_string()))?;
    let gens = raw.iter().map(|g| parse_gen(ring, n, g)).collect::<Result<Vec<_>>>()?;
    StabilizerGroup::new(ring, n, gens, partition)
}

fn parse_gen(ring: RingParams, n: usize, g: &RawGen) -> Result<PauliOp> {
    let d = ring.d() as i64;
    let line = g.line;
    let mut toks = g.tokens.iter().peekable();
    let mut gamma2: i64 = 0;
    if let Some(t) = toks.peek() {
        if let Some(rest) = t.text.strip_prefix("w^") {
            let (num, half) = match rest.strip_suffix("/2") {
                Some(k) => (k, true),
                None => (rest, false),
            };
            let k = parse_int(num, line, t.column + 2)?;
            gamma2 = if half { k } else { 2 * k };
            toks.next();
        }
    }
    let two_d = 2 * d;
    let start = PauliOp::new(ring, vec![0; n], vec![0; n], gamma2.rem_euclid(two_d))
        .map_err(|e| err(line, g.tokens[0].column, e.to_string()))?;
    let mut acc = start;
    let mut any = false;
    for t in toks {
        any = true;
        if t.text == "I" {
            continue;
        }
        let mut chars = t.text.chars();
        let letter = chars.next().unwrap();
        if letter != 'X' && letter != 'Z' {
            return Err(err(line, t.column, format!("unexpected factor '{}'", t.text)));
        }
        let body = &t.text[1..];
        let (idx, exp) = match body.split_once('^') {
            Some((i, e)) => (i, Some(e)),
            None => (body, None),
        };
        let q = parse_int(idx, line, t.column + 1)?;
        if q < 0 || q as usize >= n {
            return Err(err(line, t.column, format!("qudit index {q} out of range for N = {n}")));
        }
        let e = match exp {
            Some(e) => parse_int(e, line, t.column + 2 + idx.len())?,
            None => 1,
        };
        let e = e.rem_euclid(d) as u64;
        let (xe, ze) = if letter == 'X' { (e, 0) } else { (0, e) };
        acc = acc.multiply(&PauliOp::single(ring, n, q as usize, xe, ze))?;
    }
    if !any {
        return Err(err(line, g.tokens[0].column, "phase without operator factors"));
    }
    Ok(acc)
}

/// Prints a group in the format read by [`parse_group`].
pub fn print_group(s: &StabilizerGroup) -> String {
    let mut out = format!("d = {}\n", s.ring.d());
    for p in s.partition.parties() {
        let qs: Vec<String> = p.qudits.iter().map(|q| q.to_string()).collect();
        out.push_str(&format!("party {} = {}\n", p.label, qs.join(",")).replace(" = \n", " =\n"));
    }
    for g in &s.gens {
        out.push_str(&format!("gen = {g}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{random_stabilizer_group, RandomGroupParams};
    use proptest::prelude::*;

    const GHZ9: &str = "d = 9\nparty a = 0\nparty b = 1\nparty c = 2\ngen = X0 X1 X2\ngen = Z0 Z1^8\ngen = Z0 Z2^8\n";

    #[test]
    fn parses_ghz9() {
        let s = parse_group(GHZ9).unwrap();
        assert_eq!(s, crate::fixtures::ghz(RingParams::new(9).unwrap(), 3).unwrap());
        assert!(s.validate().pure);
        assert_eq!(print_group(&s), GHZ9);
    }

    #[test]
    fn half_phase() {
        let s = parse_group("d = 2\nparty a = 0\ngen = w^1/2 X0\n").unwrap();
        assert_eq!(s.gens[0].gamma2, 1);
        let s = parse_group("d = 4\nparty a = 0\ngen = w^-1 Z0^-1\n").unwrap();
        assert_eq!((s.gens[0].gamma2, s.gens[0].z[0]), (6, 3));
    }

    #[test]
    fn ordered_product() {
        // Z X = ω X Z.
        let s = parse_group("d = 3\nparty a = 0\ngen = Z0 X0\n").unwrap();
        assert_eq!((s.gens[0].x[0], s.gens[0].z[0], s.gens[0].gamma2), (1, 1, 2));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_group("d = 3\nparty a = 0,1,2\ngen = Z5\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, column: 7, message: "qudit index 5 out of range for N = 3".into() });
        assert!(matches!(parse_group("d = 3\nparty a = 0\ngen = w^1/2 X0\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_group("d = 3\nparty a = 0\ngen = Y0\n"), Err(Error::Parse { line: 3, column: 7, .. })));
        assert!(matches!(parse_group("party a = 0\ngen = X0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_group("d = 3\nparty a = 0,2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_group("d = 3\nfoo\n"), Err(Error::Parse { line: 2, column: 1, .. })));
    }

    #[test]
    fn empty_party_and_identity() {
        let s = parse_group("d = 3\nparty a = 0\nparty b =\ngen = I\n").unwrap();
        assert!(s.partition.qudits(1).is_empty());
        assert!(s.gens[0].is_identity_up_to_phase());
        assert_eq!(parse_group(&print_group(&s)).unwrap(), s);
    }

    proptest! {
        #[test]
        fn roundtrip(d in prop::sample::select(vec![2u64, 3, 4, 6, 8, 9, 12]), nq in 1usize..4, seed in any::<u64>()) {
            let s = random_stabilizer_group(&RandomGroupParams::new(RingParams::new(d).unwrap(), nq, 3), seed);
            prop_assert_eq!(parse_group(&print_group(&s)).unwrap(), s);
        }
    }
}
