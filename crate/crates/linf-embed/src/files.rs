//! Line-based file formats for metric spaces, embeddings, and covers.
//!
//! All formats are UTF-8 and diff-friendly: `#` starts a comment line, blank
//! lines are ignored, rationals are written canonically as `p/q` (plain `p`
//! when the denominator is 1) and parsed from `p/q`, integer, or exact
//! decimal notation. A cover file holds two lines per function: its values,
//! then its tight edges as `a>b` tokens (`-` when there are none, so the
//! line is never blank).

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::lipschitz::{EdgeCover, Embedding, LipschitzError, LipschitzFn};
use crate::metric::MetricSpace;

/// A parse failure with its 1-based line number (0 for whole-file problems).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.msg)
        } else {
            write!(f, "line {}: {}", self.line, self.msg)
        }
    }
}

impl std::error::Error for FileError {}

fn err(line: usize, msg: impl Into<String>) -> FileError {
    FileError {
        line,
        msg: msg.into(),
    }
}

/// Parses `p/q`, an integer, or an exact decimal such as `-3.25`.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".to_string());
    }
    if let Some((numer, denom)) = s.split_once('/') {
        let n = BigInt::from_str(numer).map_err(|_| format!("bad numerator {numer:?}"))?;
        let d = BigInt::from_str(denom).map_err(|_| format!("bad denominator {denom:?}"))?;
        if d.is_zero() {
            return Err("zero denominator".to_string());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let (negative, digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        let all_digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(digits) || !all_digits(frac_part) {
            return Err(format!("bad decimal {s:?}"));
        }
        let joined = format!("{digits}{frac_part}");
        let mut numer = BigInt::from_str(&joined).expect("digits only");
        if negative {
            numer = -numer;
        }
        let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
        return Ok(BigRational::new(numer, denom));
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| format!("bad number {s:?}"))
}

/// Canonical text form: reduced, `p/q`, or plain `p` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Data lines with their 1-based numbers; comments and blanks dropped.
fn data_lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input.lines().enumerate().filter_map(|(i, raw)| {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            None
        } else {
            Some((i + 1, t))
        }
    })
}

/// Reads `n` and then exactly `C(n, 2)` lines `i j d`; every pair must
/// appear exactly once. Metric axioms are re-validated after assembly.
pub fn parse_metric(input: &str) -> Result<MetricSpace, FileError> {
    let mut lines = data_lines(input);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(0, "empty file: expected a point count"))?;
    let n: usize = header
        .parse()
        .map_err(|_| err(hline, format!("expected a point count, got {header:?}")))?;
    if n == 0 {
        return Err(err(hline, "need at least one point"));
    }
    let total = n * (n - 1) / 2;
    let pos = |i: usize, j: usize| i * (2 * n - i - 1) / 2 + (j - i - 1);
    let mut upper: Vec<Option<BigRational>> = vec![None; total];
    let mut filled = 0usize;
    for (lno, line) in lines {
        if filled == total {
            return Err(err(lno, format!("expected {total} distance lines, found more")));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(err(lno, "expected: i j distance"));
        }
        let i: usize = toks[0]
            .parse()
            .map_err(|_| err(lno, format!("bad point index {:?}", toks[0])))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|_| err(lno, format!("bad point index {:?}", toks[1])))?;
        if i >= j || j >= n {
            return Err(err(lno, format!("need 0 <= i < j < {n}, got {i} {j}")));
        }
        let d = parse_rational(toks[2]).map_err(|m| err(lno, m))?;
        if !d.is_positive() {
            return Err(err(lno, "distances must be positive"));
        }
        let slot = &mut upper[pos(i, j)];
        if slot.is_some() {
            return Err(err(lno, format!("pair ({i}, {j}) appears twice")));
        }
        *slot = Some(d);
        filled += 1;
    }
    if filled < total {
        for i in 0..n {
            for j in i + 1..n {
                if upper[pos(i, j)].is_none() {
                    return Err(err(0, format!("missing distance for pair ({i}, {j})")));
                }
            }
        }
    }
    let upper: Vec<BigRational> = upper.into_iter().map(Option::unwrap).collect();
    MetricSpace::from_upper(n, upper).map_err(|e| err(0, e.to_string()))
}

pub fn write_metric(ms: &MetricSpace) -> String {
    let mut out = String::new();
    writeln!(out, "{}", ms.n()).unwrap();
    for (i, j) in ms.pairs() {
        writeln!(out, "{i} {j} {}", format_rational(ms.dist(i, j))).unwrap();
    }
    out
}

/// Reads an `n k` header and `n` rows of `k` rationals. `k = 0` embeddings
/// have no (non-blank) body.
pub fn parse_embedding(input: &str) -> Result<Embedding, FileError> {
    let mut lines = data_lines(input);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(0, "empty file: expected an 'n k' header"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(err(hline, "expected header: n k"));
    }
    let n: usize = toks[0]
        .parse()
        .map_err(|_| err(hline, format!("bad point count {:?}", toks[0])))?;
    let k: usize = toks[1]
        .parse()
        .map_err(|_| err(hline, format!("bad coordinate count {:?}", toks[1])))?;
    if n == 0 {
        return Err(err(hline, "need at least one point"));
    }
    let mut coords: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    if k == 0 {
        coords.resize(n, Vec::new());
    } else {
        for row in 0..n {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| err(0, format!("expected {n} coordinate rows, found {row}")))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != k {
                return Err(err(lno, format!("expected {k} coordinates, got {}", toks.len())));
            }
            let row: Vec<BigRational> = toks
                .iter()
                .map(|t| parse_rational(t).map_err(|m| err(lno, m)))
                .collect::<Result<_, _>>()?;
            coords.push(row);
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(err(lno, "unexpected data after the coordinate rows"));
    }
    Embedding::new(coords).map_err(|e| err(0, e.to_string()))
}

pub fn write_embedding(emb: &Embedding) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", emb.n(), emb.k()).unwrap();
    for p in 0..emb.n() {
        let row: Vec<String> = emb.coords(p).iter().map(format_rational).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

/// Two lines per function: dense values, then tight edges `a>b` in
/// lexicographic pair order (`-` for none). Fails on partial functions.
pub fn write_cover(ms: &MetricSpace, cover: &EdgeCover) -> Result<String, LipschitzError> {
    let mut out = String::new();
    for f in &cover.fns {
        let values = f.dense_values(ms.n())?;
        let row: Vec<String> = values.iter().map(format_rational).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
        let tg = f.tight_graph(ms)?;
        if tg.is_empty() {
            writeln!(out, "-").unwrap();
        } else {
            let toks: Vec<String> = tg
                .edges
                .iter()
                .map(|&(a, b)| format!("{a}>{b}"))
                .collect();
            writeln!(out, "{}", toks.join(" ")).unwrap();
        }
    }
    Ok(out)
}

/// Inverse of [`write_cover`] against the same metric. Each function is
/// re-validated as 1-Lipschitz and the recorded tight edges are checked
/// against the recomputed ones, so a tampered file cannot parse.
pub fn parse_cover(ms: &MetricSpace, input: &str) -> Result<EdgeCover, FileError> {
    let n = ms.n();
    let mut fns: Vec<LipschitzFn> = Vec::new();
    let mut lines = data_lines(input);
    while let Some((vline, vals_line)) = lines.next() {
        let toks: Vec<&str> = vals_line.split_whitespace().collect();
        if toks.len() != n {
            return Err(err(vline, format!("expected {n} values, got {}", toks.len())));
        }
        let values: BTreeMap<usize, BigRational> = toks
            .iter()
            .enumerate()
            .map(|(p, t)| parse_rational(t).map(|v| (p, v)).map_err(|m| err(vline, m)))
            .collect::<Result<_, _>>()?;
        let f = LipschitzFn::new(ms, values).map_err(|e| err(vline, e.to_string()))?;
        let (eline, edge_line) = lines
            .next()
            .ok_or_else(|| err(0, "missing tight-edge line for the last function"))?;
        let mut recorded: Vec<(usize, usize)> = Vec::new();
        if edge_line != "-" {
            for tok in edge_line.split_whitespace() {
                let (a, b) = tok
                    .split_once('>')
                    .ok_or_else(|| err(eline, format!("bad edge token {tok:?}")))?;
                let a: usize = a
                    .parse()
                    .map_err(|_| err(eline, format!("bad edge token {tok:?}")))?;
                let b: usize = b
                    .parse()
                    .map_err(|_| err(eline, format!("bad edge token {tok:?}")))?;
                recorded.push((a, b));
            }
        }
        let mut expected = f
            .tight_graph(ms)
            .map_err(|e| err(vline, e.to_string()))?
            .edges;
        expected.sort_unstable();
        recorded.sort_unstable();
        if recorded != expected {
            return Err(err(
                eline,
                "tight edges do not match the function values",
            ));
        }
        fns.push(f);
    }
    Ok(EdgeCover::new(fns))
}
