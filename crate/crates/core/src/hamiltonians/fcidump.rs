//! FCIDUMP reader and writer.
//!
//! Records after the `&FCI ... &END` namelist are `value i j k l` with 1-based
//! indices: `i j k l` is `(ij|kl)`, `i j 0 0` is `h_ij`, `i 0 0 0` is an
//! orbital energy (ignored) and `0 0 0 0` is the nuclear repulsion.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::MolecularIntegrals;
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Integer value of `KEY=...` in the namelist, matching `KEY` as a whole word.
fn header_int(header: &str, key: &str, line: usize) -> Result<Option<i64>> {
    let upper = header.to_ascii_uppercase();
    let bytes = upper.as_bytes();
    let mut from = 0;
    while let Some(pos) = upper[from..].find(key) {
        let start = from + pos;
        let end = start + key.len();
        from = end;
        let before_ok = start == 0 || !bytes[start - 1].is_ascii_alphanumeric();
        let rest = upper[end..].trim_start();
        if !before_ok || !rest.starts_with('=') {
            continue;
        }
        let value: String = rest[1..]
            .trim_start()
            .chars()
            .take_while(|c| c.is_ascii_digit() || *c == '-' || *c == '+')
            .collect();
        return value
            .parse::<i64>()
            .map(Some)
            .map_err(|_| parse_err(line, format!("{key} is not an integer")));
    }
    Ok(None)
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    tok.replace(['D', 'd'], "E")
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("`{tok}` is not a number")))
}

fn parse_index(tok: &str, norb: usize, line: usize) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| parse_err(line, format!("`{tok}` is not an orbital index")))?;
    if v > norb {
        return Err(parse_err(line, format!("orbital index {v} exceeds NORB={norb}")));
    }
    Ok(v)
}

pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let mut lines = text.lines().enumerate().peekable();
    let mut header = String::new();
    let mut header_end_line = 0;
    let mut started = false;
    for (no, raw) in lines.by_ref() {
        let line = raw.trim();
        if !started {
            if line.is_empty() {
                continue;
            }
            if !line.to_ascii_uppercase().starts_with("&FCI") {
                return Err(parse_err(no + 1, "expected `&FCI` namelist header"));
            }
            started = true;
        }
        header.push_str(line);
        header.push(' ');
        header_end_line = no + 1;
        let upper = line.to_ascii_uppercase();
        if upper.contains("&END") || line == "/" || line.ends_with('/') {
            break;
        }
    }
    if !started {
        return Err(parse_err(1, "empty FCIDUMP"));
    }
    let header_body = header
        .trim_start()
        .get(4..)
        .unwrap_or("")
        .to_string();
    let norb = header_int(&header_body, "NORB", header_end_line)?
        .ok_or_else(|| parse_err(header_end_line, "header lacks NORB"))?;
    if norb <= 0 {
        return Err(parse_err(header_end_line, "NORB must be positive"));
    }
    let nelec = header_int(&header_body, "NELEC", header_end_line)?
        .ok_or_else(|| parse_err(header_end_line, "header lacks NELEC"))?;
    let ms2 = header_int(&header_body, "MS2", header_end_line)?.unwrap_or(0);
    if nelec < 0 {
        return Err(parse_err(header_end_line, "NELEC must be non-negative"));
    }
    let norb = norb as usize;
    let mut ints = MolecularIntegrals::zeros(norb, nelec as usize, ms2.unsigned_abs() as usize)?;
    let mut h = DMatrix::zeros(norb, norb);

    for (no, raw) in lines {
        let line_no = no + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(parse_err(
                line_no,
                format!("expected `value i j k l`, found {} fields", toks.len()),
            ));
        }
        let v = parse_value(toks[0], line_no)?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&toks[1..]) {
            *slot = parse_index(tok, norb, line_no)?;
        }
        match idx {
            [0, 0, 0, 0] => ints.set_e_nuc(v),
            [i, j, 0, 0] if i > 0 && j > 0 => {
                h[(i - 1, j - 1)] = v;
                h[(j - 1, i - 1)] = v;
            }
            [_, 0, 0, 0] => {}
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                ints.set_eri(i - 1, j - 1, k - 1, l - 1, v)
            }
            _ => {
                return Err(parse_err(
                    line_no,
                    format!("unsupported index pattern {idx:?}"),
                ))
            }
        }
    }
    for i in 0..norb {
        for j in i..norb {
            ints.set_h(i, j, h[(i, j)]);
        }
    }
    Ok(ints)
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<MolecularIntegrals> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_fcidump(&text)
}

/// Serializes unique nonzero integrals; values use shortest round-trip formatting.
pub fn write_fcidump(ints: &MolecularIntegrals) -> String {
    let n = ints.n_spatial();
    let mut out = String::new();
    let _ = writeln!(
        out,
        " &FCI NORB={n},NELEC={},MS2={},",
        ints.n_electrons(),
        ints.ms2()
    );
    let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    let record = |out: &mut String, v: f64, i: usize, j: usize, k: usize, l: usize| {
        let _ = writeln!(out, "{v:>26e} {i:>4} {j:>4} {k:>4} {l:>4}");
    };
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if k * (k + 1) / 2 + l > i * (i + 1) / 2 + j {
                        continue;
                    }
                    let v = ints.eri(i, j, k, l);
                    if v != 0.0 {
                        record(&mut out, v, i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = ints.h()[(i, j)];
            if v != 0.0 {
                record(&mut out, v, i + 1, j + 1, 0, 0);
            }
        }
    }
    record(&mut out, ints.e_nuc(), 0, 0, 0, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nuclear_only() {
        let ints = parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n 0.5 0 0 0 0\n").unwrap();
        assert_eq!(ints.e_nuc(), 0.5);
        assert!(ints.h().iter().all(|&x| x == 0.0));
        assert_eq!(ints.n_electrons(), 2);
        assert_eq!(ints.ms2(), 0);
    }

    #[test]
    fn one_electron_record_is_symmetrized() {
        let ints = parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,\n/\n1.0 1 2 0 0\n").unwrap();
        assert_eq!(ints.h()[(0, 1)], 1.0);
        assert_eq!(ints.h()[(1, 0)], 1.0);
    }

    #[test]
    fn multiline_header_and_fortran_exponent() {
        let text = " &FCI NORB=  2,NELEC=  2,MS2=0,\n  ORBSYM=1,1,\n  ISYM=1,\n &END\n 0.25D+00 1 1 2 2\n";
        let ints = parse_fcidump(text).unwrap();
        assert_eq!(ints.eri(1, 1, 0, 0), 0.25);
        assert_eq!(ints.eri(0, 0, 1, 1), 0.25);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n1.0 1 3 0 0\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,\n&END\nabc 1 1 0 0\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_fcidump("NORB=2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_fcidump("&FCI NELEC=2,\n&END\n").is_err());
    }
}
