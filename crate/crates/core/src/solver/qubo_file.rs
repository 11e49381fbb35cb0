use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numfmt::g17;
use crate::qubo::Qubo;

/// Text form: `c offset` comment, problem line, every diagonal entry, then
/// the couplers in `(i, j)` order.
pub fn render_qubo(q: &Qubo) -> Result<String> {
    q.check()?;
    let mut out = String::new();
    let _ = writeln!(out, "c offset {}", g17(q.offset));
    let _ = writeln!(out, "p qubo 0 {} {} {}", q.size, q.size, q.num_couplers());
    for (i, &a) in q.linear.iter().enumerate() {
        let _ = writeln!(out, "{i} {i} {}", g17(a));
    }
    for (&(i, j), &b) in &q.quadratic {
        let _ = writeln!(out, "{i} {j} {}", g17(b));
    }
    Ok(out)
}

pub fn write_qubo_file(q: &Qubo, path: impl AsRef<Path>) -> Result<()> {
    let text = render_qubo(q)?;
    std::fs::write(path.as_ref(), text)
        .map_err(|e| Error::from(e).with_context(format!("writing {}", path.as_ref().display())))
}

pub fn read_qubo_file(path: impl AsRef<Path>) -> Result<Qubo> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::from(e).with_context(format!("reading {}", path.as_ref().display())))?;
    parse_qubo(&text)
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Header {
    line: usize,
    max_nodes: usize,
    nodes: usize,
    couplers: usize,
}

pub fn parse_qubo(text: &str) -> Result<Qubo> {
    let mut header: Option<Header> = None;
    let mut offset = 0.0;
    let mut q = Qubo::new(0);
    let (mut nodes, mut couplers) = (0usize, 0usize);
    let mut seen_diag = Vec::new();
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match fields.first().copied() {
            None => continue,
            Some("c") => {
                if fields.get(1) == Some(&"offset") {
                    if header.is_some() {
                        return Err(perr(line, "offset comment must precede the problem line"));
                    }
                    let v = fields.get(2).ok_or_else(|| perr(line, "missing offset value"))?;
                    offset = parse_f64(v, line)?;
                }
            }
            Some("p") => {
                if header.is_some() {
                    return Err(perr(line, "second problem line"));
                }
                if fields.len() != 6 || fields[1] != "qubo" || fields[2] != "0" {
                    return Err(perr(line, "expected `p qubo 0 <maxNodes> <nNodes> <nCouplers>`"));
                }
                let h = Header {
                    line,
                    max_nodes: parse_usize(fields[3], line)?,
                    nodes: parse_usize(fields[4], line)?,
                    couplers: parse_usize(fields[5], line)?,
                };
                q = Qubo::new(h.max_nodes);
                seen_diag = vec![false; h.max_nodes];
                header = Some(h);
            }
            Some(_) => {
                let h = header.as_ref().ok_or_else(|| perr(line, "entry before the problem line"))?;
                if fields.len() != 3 {
                    return Err(perr(line, "expected `i j value`"));
                }
                let i = parse_usize(fields[0], line)?;
                let j = parse_usize(fields[1], line)?;
                let v = parse_f64(fields[2], line)?;
                if i >= h.max_nodes || j >= h.max_nodes {
                    return Err(perr(line, format!("index out of range for {} nodes", h.max_nodes)));
                }
                if i == j {
                    if std::mem::replace(&mut seen_diag[i], true) {
                        return Err(perr(line, format!("duplicate diagonal entry {i}")));
                    }
                    q.linear[i] = v;
                    nodes += 1;
                } else {
                    if i > j {
                        return Err(perr(line, format!("coupler ({i}, {j}) must have i < j")));
                    }
                    if q.quadratic.insert((i as u32, j as u32), v).is_some() {
                        return Err(perr(line, format!("duplicate coupler ({i}, {j})")));
                    }
                    couplers += 1;
                }
            }
        }
    }
    let h = header.ok_or_else(|| perr(last_line.max(1), "missing problem line"))?;
    if nodes != h.nodes {
        return Err(perr(h.line, format!("header declares {} nodes, body has {nodes}", h.nodes)));
    }
    if couplers != h.couplers {
        return Err(perr(h.line, format!("header declares {} couplers, body has {couplers}", h.couplers)));
    }
    // zero couplers are kept in the file but not in memory
    q.quadratic.retain(|_, v| *v != 0.0);
    q.offset = offset;
    q.check().map_err(|e| perr(h.line, e.to_string()))?;
    Ok(q)
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| perr(line, format!("expected a non-negative integer, found `{s}`")))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(perr(line, format!("expected a finite number, found `{s}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "c offset 0\np qubo 0 2 2 1\n0 0 1\n1 1 1\n0 1 -2\n";

    fn two_var() -> Qubo {
        let mut q = Qubo::new(2);
        q.linear = vec![1.0, 1.0];
        q.add(0, 1, -2.0);
        q
    }

    #[test]
    fn golden_fixture() {
        assert_eq!(render_qubo(&two_var()).unwrap(), GOLDEN);
        assert_eq!(parse_qubo(GOLDEN).unwrap(), two_var());
    }

    #[test]
    fn coupler_count_mismatch() {
        let bad = "p qubo 0 2 2 3\n0 0 1\n1 1 1\n0 1 -2\n";
        match parse_qubo(bad) {
            Err(Error::Parse { line: 1, message }) => assert!(message.contains("3 couplers")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_line_numbers() {
        let bad = "c offset 0\np qubo 0 2 2 1\n0 0 1\n1 5 1\n";
        assert!(matches!(parse_qubo(bad), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_qubo("0 0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_qubo("p qubo 0 2 0 0\n1 0 3\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn offset_round_trips() {
        let mut q = two_var();
        q.offset = -1.0 / 3.0;
        q.linear[1] = 0.1;
        let back = parse_qubo(&render_qubo(&q).unwrap()).unwrap();
        assert_eq!(back.offset.to_bits(), q.offset.to_bits());
        assert_eq!(back.linear[1].to_bits(), q.linear[1].to_bits());
    }
}
