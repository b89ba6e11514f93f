// SPDX-License-Identifier: Apache-2.0

//! Text serialization of operators and operator sequences.
//!
//! ```text
//! op <n> <d> <stats>
//! <d^n rows of d^n entries re±imj>
//!
//! seq <N_max> <d> <stats>
//! f0 <re±imj>
//! <N_max op blocks, n = 1..N_max>
//! ```
//!
//! Entries are written with 17 significant digits so a write/read cycle
//! reproduces every double exactly.

use std::fmt::Write as _;
use std::path::Path;

use clusterdyn_core::{Complex64, ManyBodyOperator, Matrix, OperatorSequence, Statistics};

use crate::{CliError, Result};

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}j", z.re, sign, z.im.abs())
}

/// Parses `a`, `bj`, `a+bj` or `a-bj` (exponents allowed in both parts).
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('j').or_else(|| s.strip_suffix('i')) else {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re: f64 = body[..i].parse().ok()?;
            let im = match &body[i..] {
                "+" => 1.0,
                "-" => -1.0,
                t => t.parse().ok()?,
            };
            Some(Complex64::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                t => t.parse().ok()?,
            };
            Some(Complex64::new(0.0, im))
        }
    }
}

pub fn write_operator(out: &mut String, f: &ManyBodyOperator) {
    writeln!(out, "op {} {} {}", f.n(), f.d(), f.stats()).expect("writing to a String");
    let m = f.matrix();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format_complex(m[(r, c)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

pub fn operator_to_string(f: &ManyBodyOperator) -> String {
    let mut s = String::new();
    write_operator(&mut s, f);
    s
}

pub fn sequence_to_string(seq: &OperatorSequence) -> String {
    let mut s = format!("seq {} {} {}\nf0 {}\n", seq.n_max(), seq.d(), seq.stats(), format_complex(seq.f0()));
    for c in seq.components() {
        write_operator(&mut s, c);
    }
    s
}

/// Line cursor that skips blank lines and `#` comments and remembers
/// line numbers for error messages.
pub(crate) struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(path: &'a Path, text: &'a str) -> Self {
        Lines {
            path,
            inner: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    pub(crate) fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                self.last = i + 1;
                return Some((i + 1, t));
            }
        }
        None
    }

    pub(crate) fn error(&self, line: usize, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last = self.last;
        self.next_content()
            .ok_or_else(|| self.error(last + 1, format!("unexpected end of input, expected {what}")))
    }
}

pub(crate) fn parse_row(lines: &Lines<'_>, line: usize, text: &str) -> Result<Vec<Complex64>> {
    text.split_whitespace()
        .map(|tok| parse_complex(tok).ok_or_else(|| lines.error(line, format!("invalid complex entry `{tok}`"))))
        .collect()
}

fn parse_header<'a>(lines: &mut Lines<'a>, tag: &str) -> Result<(usize, Vec<&'a str>)> {
    let (line, text) = lines.expect(&format!("`{tag}` header"))?;
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.first() != Some(&tag) || parts.len() != 4 {
        return Err(lines.error(line, format!("expected `{tag} <count> <d> <stats>`")));
    }
    Ok((line, parts))
}

fn parse_usize(lines: &Lines<'_>, line: usize, s: &str, what: &str) -> Result<usize> {
    s.parse().map_err(|_| lines.error(line, format!("invalid {what} `{s}`")))
}

fn parse_stats(lines: &Lines<'_>, line: usize, s: &str) -> Result<Statistics> {
    s.parse().map_err(|_| lines.error(line, format!("unknown statistics `{s}`")))
}

fn read_operator(lines: &mut Lines<'_>) -> Result<ManyBodyOperator> {
    let (line, parts) = parse_header(lines, "op")?;
    let n = parse_usize(lines, line, parts[1], "particle count")?;
    let d = parse_usize(lines, line, parts[2], "dimension")?;
    let stats = parse_stats(lines, line, parts[3])?;
    let side = d
        .checked_pow(n as u32)
        .filter(|&s| s <= 1 << 16)
        .ok_or_else(|| lines.error(line, "operator too large"))?;
    let mut entries = Vec::with_capacity(side * side);
    for _ in 0..side {
        let (l, text) = lines.expect("matrix row")?;
        let row = parse_row(lines, l, text)?;
        if row.len() != side {
            return Err(lines.error(l, format!("expected {side} entries, found {}", row.len())));
        }
        entries.extend(row);
    }
    let m = Matrix::from_row_slice(side, side, &entries);
    ManyBodyOperator::new(n, d, stats, m).map_err(|e| lines.error(line, e.to_string()))
}

pub fn parse_operator(path: &Path, text: &str) -> Result<ManyBodyOperator> {
    let mut lines = Lines::new(path, text);
    let op = read_operator(&mut lines)?;
    if let Some((l, _)) = lines.next_content() {
        return Err(lines.error(l, "trailing content after operator"));
    }
    Ok(op)
}

pub fn parse_sequence(path: &Path, text: &str) -> Result<OperatorSequence> {
    let mut lines = Lines::new(path, text);
    let (line, parts) = parse_header(&mut lines, "seq")?;
    let n_max = parse_usize(&lines, line, parts[1], "truncation order")?;
    let d = parse_usize(&lines, line, parts[2], "dimension")?;
    let stats = parse_stats(&lines, line, parts[3])?;
    let (l, text) = lines.expect("`f0` line")?;
    let f0 = text
        .strip_prefix("f0")
        .and_then(parse_complex)
        .ok_or_else(|| lines.error(l, "expected `f0 <complex>`"))?;
    let mut comps = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let start = lines.last + 1;
        let op = read_operator(&mut lines)?;
        if op.n() != n || op.d() != d || op.stats() != stats {
            return Err(lines.error(start, format!("component {n} does not match `seq {n_max} {d} {stats}`")));
        }
        comps.push(op);
    }
    if let Some((l, _)) = lines.next_content() {
        return Err(lines.error(l, "trailing content after sequence"));
    }
    Ok(OperatorSequence::new(f0, comps)?)
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = |re, im| Some(Complex64::new(re, im));
        assert_eq!(parse_complex("1.5"), c(1.5, 0.0));
        assert_eq!(parse_complex("-2"), c(-2.0, 0.0));
        assert_eq!(parse_complex("1+2j"), c(1.0, 2.0));
        assert_eq!(parse_complex("1e-3-2.5e+2j"), c(1e-3, -250.0));
        assert_eq!(parse_complex("-j"), c(0.0, -1.0));
        assert_eq!(parse_complex("3j"), c(0.0, 3.0));
        assert_eq!(parse_complex("0.5-j"), c(0.5, -1.0));
        assert_eq!(parse_complex("1+"), None);
        assert_eq!(parse_complex("abc"), None);
    }

    #[test]
    fn negative_zero_survives() {
        let z = Complex64::new(-0.0, -0.0);
        let back = parse_complex(&format_complex(z)).unwrap();
        assert!(back.re.is_sign_negative() && back.im.is_sign_negative());
    }

    #[test]
    fn sequence_errors_carry_line_numbers() {
        let p = Path::new("x.txt");
        let text = "seq 1 2 bose\nf0 1\nop 1 2 bose\n1 0\n0 1 2\n";
        match parse_sequence(p, text) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let text = "seq 1 2 bose\nf0 1\nop 1 2 fermi\n1 0\n0 1\n";
        assert!(matches!(parse_sequence(p, text), Err(CliError::Parse { line: 3, .. })));
        let text = "op 1 2 bose\n1 0\n";
        assert!(matches!(parse_operator(p, text), Err(CliError::Parse { line: 3, .. })));
    }

    proptest::proptest! {
        #[test]
        fn complex_round_trip_is_exact(re in proptest::num::f64::ANY, im in proptest::num::f64::ANY) {
            proptest::prop_assume!(re.is_finite() && im.is_finite());
            let z = Complex64::new(re, im);
            let back = parse_complex(&format_complex(z)).unwrap();
            proptest::prop_assert_eq!(back.re.to_bits(), re.to_bits());
            proptest::prop_assert_eq!(back.im.to_bits(), im.to_bits());
        }
    }
}
