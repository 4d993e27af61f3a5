//! Plain-text instance files.
//!
//! ```text
//! [meta]
//! kind = ompc
//! m = 2
//! n = 3
//!
//! [packing]
//! # row col coefficient
//! 0 0 1
//! 1 2 0.5
//!
//! [covering]
//! # one row per line, col:coefficient
//! 0:1 2:2
//! ```
//!
//! Facility-location files use `kind = ccfl` with a `[facilities]` section
//! (`charge capacity` per line) and a `[clients]` section, one client per
//! line as `facility:demand:cost` entries. Demands are written before
//! dividing by capacity. Lines starting with `#` are ignored. Numbers are
//! written with Rust's shortest round-trip formatting.

use std::fmt::Write as _;

use crate::ccfl::CcflInstance;
use crate::penalty::{CoveringRow, PackingSystem};
use crate::{Error, Result};

/// Packing rows known offline plus the covering rows in arrival order.
#[derive(Clone, Debug, PartialEq)]
pub struct OmpcInstance {
    pub packing: PackingSystem,
    pub rows: Vec<CoveringRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Ompc(OmpcInstance),
    Ccfl(CcflInstance),
}

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse { line, field: field.to_string(), message: message.into() }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, field: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, field, format!("cannot parse {tok:?}")))
}

#[derive(Default)]
struct Sections<'a> {
    meta: Vec<(usize, &'a str)>,
    body: Vec<(String, Vec<(usize, &'a str)>)>,
}

fn split_sections(text: &str) -> Result<Sections<'_>> {
    let mut out = Sections::default();
    let mut current: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim().to_string();
            if name != "meta" {
                if out.body.iter().any(|(n, _)| *n == name) {
                    return Err(parse_err(line, &name, "section repeated"));
                }
                out.body.push((name.clone(), Vec::new()));
            }
            current = Some(name);
            continue;
        }
        match current.as_deref() {
            None => return Err(parse_err(line, "section", "content before the first section header")),
            Some("meta") => out.meta.push((line, s)),
            Some(_) => out.body.last_mut().expect("body section open").1.push((line, s)),
        }
    }
    Ok(out)
}

struct Meta {
    kind: String,
    m: usize,
    n: usize,
    line: usize,
}

fn parse_meta(lines: &[(usize, &str)]) -> Result<Meta> {
    let (mut kind, mut m, mut n) = (None, None, None);
    for &(line, s) in lines {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| parse_err(line, "meta", "expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "kind" => kind = Some(value.to_string()),
            "m" => m = Some(num(value, line, "m")?),
            "n" => n = Some(num(value, line, "n")?),
            other => return Err(parse_err(line, other, "unknown meta key")),
        }
    }
    let line = lines.first().map_or(1, |l| l.0);
    Ok(Meta {
        kind: kind.ok_or_else(|| parse_err(line, "kind", "missing required field"))?,
        m: m.ok_or_else(|| parse_err(line, "m", "missing required field"))?,
        n: n.ok_or_else(|| parse_err(line, "n", "missing required field"))?,
        line,
    })
}

fn section<'s, 'a>(sec: &'s Sections<'a>, name: &str, line: usize) -> Result<&'s [(usize, &'a str)]> {
    sec.body
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, l)| l.as_slice())
        .ok_or_else(|| parse_err(line, name, "missing required section"))
}

/// Parses an instance file.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let sec = split_sections(text)?;
    if sec.meta.is_empty() {
        return Err(parse_err(1, "meta", "missing required section"));
    }
    let meta = parse_meta(&sec.meta)?;
    let allowed: &[&str] = match meta.kind.as_str() {
        "ompc" => &["packing", "covering"],
        "ccfl" => &["facilities", "clients"],
        other => return Err(parse_err(meta.line, "kind", format!("unknown kind {other:?}"))),
    };
    if let Some((name, lines)) = sec.body.iter().find(|(n, _)| !allowed.contains(&n.as_str())) {
        let line = lines.first().map_or(meta.line, |l| l.0);
        return Err(parse_err(line, name, "unexpected section"));
    }
    match meta.kind.as_str() {
        "ompc" => parse_ompc(&sec, &meta).map(Instance::Ompc),
        _ => parse_ccfl(&sec, &meta).map(Instance::Ccfl),
    }
}

fn parse_ompc(sec: &Sections<'_>, meta: &Meta) -> Result<OmpcInstance> {
    let mut triplets = Vec::new();
    for &(line, s) in section(sec, "packing", meta.line)? {
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(line, "packing", "expected `row col coefficient`"));
        }
        let k: usize = num(toks[0], line, "row")?;
        let j: usize = num(toks[1], line, "col")?;
        let p: f64 = num(toks[2], line, "coefficient")?;
        if k >= meta.m || j >= meta.n {
            return Err(parse_err(line, "packing", format!("index ({k}, {j}) outside {}x{}", meta.m, meta.n)));
        }
        triplets.push((k, j, p));
    }
    let packing = PackingSystem::from_triplets(meta.m, meta.n, &triplets)
        .map_err(|e| parse_err(meta.line, "packing", e.to_string()))?;
    let mut rows = Vec::new();
    for &(line, s) in section(sec, "covering", meta.line)? {
        let mut entries = Vec::new();
        for tok in s.split_whitespace() {
            let (j, c) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(line, "covering", format!("expected col:coefficient, got {tok:?}")))?;
            let j: usize = num(j, line, "col")?;
            if j >= meta.n {
                return Err(parse_err(line, "col", format!("column {j} outside {}", meta.n)));
            }
            entries.push((j, num(c, line, "coefficient")?));
        }
        rows.push(CoveringRow::new(entries).map_err(|e| parse_err(line, "covering", e.to_string()))?);
    }
    Ok(OmpcInstance { packing, rows })
}

fn parse_ccfl(sec: &Sections<'_>, meta: &Meta) -> Result<CcflInstance> {
    let fac = section(sec, "facilities", meta.line)?;
    if fac.len() != meta.m {
        let line = fac.first().map_or(meta.line, |l| l.0);
        return Err(parse_err(line, "facilities", format!("{} lines for m = {}", fac.len(), meta.m)));
    }
    let (mut fixed, mut capacity) = (Vec::new(), Vec::new());
    for &(line, s) in fac {
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(line, "facilities", "expected `charge capacity`"));
        }
        fixed.push(num(toks[0], line, "charge")?);
        capacity.push(num(toks[1], line, "capacity")?);
    }
    let cl = section(sec, "clients", meta.line)?;
    if cl.len() != meta.n {
        let line = cl.first().map_or(meta.line, |l| l.0);
        return Err(parse_err(line, "clients", format!("{} lines for n = {}", cl.len(), meta.n)));
    }
    let mut clients = Vec::new();
    for &(line, s) in cl {
        let mut list = Vec::new();
        for tok in s.split_whitespace() {
            let parts: Vec<&str> = tok.split(':').collect();
            if parts.len() != 3 {
                return Err(parse_err(line, "clients", format!("expected facility:demand:cost, got {tok:?}")));
            }
            let i: usize = num(parts[0], line, "facility")?;
            if i >= meta.m {
                return Err(parse_err(line, "facility", format!("facility {i} outside {}", meta.m)));
            }
            list.push((i, num(parts[1], line, "demand")?, num(parts[2], line, "cost")?));
        }
        clients.push(list);
    }
    CcflInstance::new(fixed, capacity, clients).map_err(|e| parse_err(meta.line, "instance", e.to_string()))
}

/// Writes an instance in the format read by [`parse_instance`].
pub fn emit_instance(inst: &Instance) -> String {
    let mut out = String::new();
    match inst {
        Instance::Ompc(o) => {
            let p = &o.packing;
            let _ = writeln!(out, "[meta]\nkind = ompc\nm = {}\nn = {}\n\n[packing]", p.rows(), p.cols());
            for (k, j, v) in p.triplets() {
                let _ = writeln!(out, "{k} {j} {v}");
            }
            out.push_str("\n[covering]\n");
            for row in &o.rows {
                let line: Vec<String> = row.entries().iter().map(|(j, c)| format!("{j}:{c}")).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        Instance::Ccfl(c) => {
            let _ = writeln!(out, "[meta]\nkind = ccfl\nm = {}\nn = {}\n\n[facilities]", c.m(), c.n());
            for (f, u) in c.fixed().iter().zip(c.capacity()) {
                let _ = writeln!(out, "{f} {u}");
            }
            out.push_str("\n[clients]\n");
            for j in 0..c.n() {
                let line: Vec<String> = c.client(j).map(|(i, e)| format!("{i}:{}:{}", e.raw, e.a)).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
    }
    out
}
