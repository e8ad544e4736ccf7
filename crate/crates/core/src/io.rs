//! Text formats for node sets, membership maps and seed files.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses back
//! to the same `f64`.

use std::fmt::Write as _;

use crate::embedded::MembershipMap;
use crate::error::{Error, Result};
use crate::generator::{NodeClass, NodeSet};
use crate::points::PointSet;
use crate::sphere::{Manifold, ParametricNodeSet};

const AXES: [&str; 3] = ["x", "y", "z"];
const NORMAL_AXES: [&str; 3] = ["nx", "ny", "nz"];

fn fmt_f(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn parse_f(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("line {line}: `{s}` is not a number")))
}

fn parse_u32(s: &str, line: usize) -> Result<u32> {
    s.trim()
        .parse::<u32>()
        .map_err(|_| Error::Format(format!("line {line}: `{s}` is not an id")))
}

/// Non-empty lines with their 1-based numbers, `#` comments split off.
fn lines(text: &str) -> (Vec<(usize, &str)>, Vec<&str>) {
    let mut data = Vec::new();
    let mut comments = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() {
            continue;
        }
        match l.strip_prefix('#') {
            Some(c) => comments.push(c.trim()),
            None => data.push((i + 1, l)),
        }
    }
    (data, comments)
}

fn comment_value<'a>(comments: &[&'a str], key: &str) -> Option<&'a str> {
    comments
        .iter()
        .find_map(|c| c.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .map(str::trim)
}

fn parse_ids(s: Option<&str>) -> Result<Vec<u32>> {
    match s {
        None | Some("") => Ok(Vec::new()),
        Some(s) => s.split(',').map(|t| parse_u32(t, 0)).collect(),
    }
}

fn node_header(dim: usize) -> String {
    let mut cols: Vec<&str> = AXES[..dim].to_vec();
    cols.extend(["class", "owner"]);
    cols.extend(&NORMAL_AXES[..dim]);
    cols.join(",")
}

fn push_node_row(out: &mut String, nodes: &NodeSet, i: usize) {
    for &v in nodes.point(i) {
        fmt_f(out, v);
        out.push(',');
    }
    let _ = write!(out, "{},{}", nodes.class(i), nodes.owner(i));
    for &v in nodes.normal(i) {
        out.push(',');
        fmt_f(out, v);
    }
    out.push('\n');
}

/// Columns `x,y[,z],class,owner,nx,ny[,nz]` after a `# h=` line.
pub fn write_nodes(nodes: &NodeSet) -> String {
    let mut out = String::new();
    out.push_str("# h=");
    fmt_f(&mut out, nodes.h());
    out.push('\n');
    out.push_str(&node_header(nodes.dim()));
    out.push('\n');
    for i in 0..nodes.len() {
        push_node_row(&mut out, nodes, i);
    }
    out
}

/// Dimension from a header whose coordinate columns precede `class`.
fn header_dim(header: &str, line: usize) -> Result<usize> {
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let dim = cols
        .iter()
        .position(|&c| c == "class")
        .ok_or_else(|| Error::Format(format!("line {line}: header has no `class` column")))?;
    if !(2..=3).contains(&dim) || cols[..dim] != AXES[..dim] {
        return Err(Error::Format(format!(
            "line {line}: unexpected header `{header}`"
        )));
    }
    Ok(dim)
}

/// Parses `x,y[,z],class,owner[,nx,ny[,nz]]` from `fields` into `nodes`.
fn parse_node_fields(nodes: &mut NodeSet, fields: &[&str], line: usize) -> Result<()> {
    let dim = nodes.dim();
    if fields.len() != dim + 2 && fields.len() != 2 * dim + 2 {
        return Err(Error::Format(format!(
            "line {line}: expected {} or {} columns, found {}",
            dim + 2,
            2 * dim + 2,
            fields.len()
        )));
    }
    let x: Vec<f64> = fields[..dim]
        .iter()
        .map(|s| parse_f(s, line))
        .collect::<Result<_>>()?;
    let class: NodeClass = fields[dim].trim().parse()?;
    let owner = parse_u32(fields[dim + 1], line)?;
    let normal: Option<Vec<f64>> = if fields.len() > dim + 2 {
        Some(
            fields[dim + 2..]
                .iter()
                .map(|s| parse_f(s, line))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    if let Some(i) = x
        .iter()
        .chain(normal.iter().flatten())
        .position(|v| !v.is_finite())
    {
        return Err(Error::Format(format!(
            "line {line}: non-finite value in column {}",
            i + 1
        )));
    }
    nodes.push(&x, normal.as_deref(), class, owner);
    Ok(())
}

fn spacing(comments: &[&str]) -> Result<f64> {
    match comment_value(comments, "h") {
        Some(s) => parse_f(s, 0),
        None => Ok(0.0),
    }
}

/// Inverse of [`write_nodes`]; normal columns and the `# h=` line are optional.
pub fn read_nodes(text: &str) -> Result<NodeSet> {
    let (data, comments) = lines(text);
    let (&(hl, header), rows) = data
        .split_first()
        .ok_or_else(|| Error::Format("node file is empty".into()))?;
    let dim = header_dim(header, hl)?;
    let mut nodes = NodeSet::new(dim, spacing(&comments)?);
    for &(line, row) in rows {
        let fields: Vec<&str> = row.split(',').collect();
        parse_node_fields(&mut nodes, &fields, line)?;
    }
    Ok(nodes)
}

/// One row per original node, `index,flag,owner` followed by the node's
/// columns, after `# h=`, `# active=` and `# removed=` lines.
pub fn write_map(map: &MembershipMap) -> String {
    let ids = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    let originals = map.originals();
    let mut out = String::new();
    out.push_str("# h=");
    fmt_f(&mut out, originals.h());
    let _ = writeln!(out, "\n# active={}", ids(map.active_ids()));
    let _ = writeln!(out, "# removed={}", ids(map.removed_ids()));
    let _ = writeln!(out, "index,flag,owner,{}", node_header(originals.dim()));
    for i in 0..map.len() {
        let _ = write!(out, "{},{},{},", i, u8::from(map.flag(i)), map.owner(i));
        push_node_row(&mut out, originals, i);
    }
    out
}

/// Inverse of [`write_map`].
pub fn read_map(text: &str) -> Result<MembershipMap> {
    let (data, comments) = lines(text);
    let (&(hl, header), rows) = data
        .split_first()
        .ok_or_else(|| Error::Format("membership file is empty".into()))?;
    let rest = header
        .strip_prefix("index,flag,owner,")
        .ok_or_else(|| Error::Format(format!("line {hl}: unexpected header `{header}`")))?;
    let dim = header_dim(rest, hl)?;
    let mut originals = NodeSet::new(dim, spacing(&comments)?);
    let mut owners = Vec::with_capacity(rows.len());
    for (k, &(line, row)) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() < 3 {
            return Err(Error::Format(format!("line {line}: too few columns")));
        }
        if parse_u32(fields[0], line)? as usize != k {
            return Err(Error::Format(format!("line {line}: index out of sequence")));
        }
        let flag = parse_u32(fields[1], line)?;
        let owner = parse_u32(fields[2], line)?;
        if flag > 1 || (flag == 1) != (owner != 0) {
            return Err(Error::Format(format!(
                "line {line}: flag {flag} disagrees with owner {owner}"
            )));
        }
        owners.push(owner);
        parse_node_fields(&mut originals, &fields[3..], line)?;
    }
    let active = parse_ids(comment_value(&comments, "active"))?;
    let removed = parse_ids(comment_value(&comments, "removed"))?;
    MembershipMap::from_parts(originals, owners, active, removed)
}

/// Seed coordinates with optional parameters: columns `x,y` or `x,y,lambda`
/// in 2D, `x,y,z` or `x,y,z,lambda,theta` in 3D. A non-numeric first row is
/// treated as a header naming the columns.
pub fn read_seeds(text: &str) -> Result<(PointSet, Option<ParametricNodeSet>)> {
    let (data, _) = lines(text);
    let mut rows = data.as_slice();
    let mut names: Option<Vec<&str>> = None;
    if let Some(&(_, first)) = rows.first() {
        if first.split(',').any(|s| s.trim().parse::<f64>().is_err()) {
            names = Some(first.split(',').map(str::trim).collect());
            rows = &rows[1..];
        }
    }
    let width = match (&names, rows.first()) {
        (Some(n), _) => n.len(),
        (None, Some(&(_, r))) => r.split(',').count(),
        (None, None) => return Err(Error::Format("seed file is empty".into())),
    };
    let dim = match (&names, width) {
        (Some(n), _) => n.iter().take_while(|c| AXES.contains(c)).count(),
        (None, 2) | (None, 3) => width,
        (None, 5) => 3,
        (None, w) => {
            return Err(Error::Format(format!(
                "cannot infer dimension from {w} columns"
            )))
        }
    };
    let manifold = Manifold::for_dim(dim).map_err(|e| Error::Format(e.to_string()))?;
    let with_params = match width - dim {
        0 => false,
        k if k == manifold.param_count() => true,
        _ => return Err(Error::Format(format!("unexpected {width} seed columns"))),
    };
    let mut seeds = PointSet::with_capacity(dim, rows.len());
    let mut params = Vec::new();
    for &(line, row) in rows {
        let v: Vec<f64> = row
            .split(',')
            .map(|s| parse_f(s, line))
            .collect::<Result<_>>()?;
        if v.len() != width {
            return Err(Error::Format(format!(
                "line {line}: expected {width} columns, found {}",
                v.len()
            )));
        }
        seeds.try_push(&v[..dim])?;
        params.extend_from_slice(&v[dim..]);
    }
    let params = if with_params {
        Some(ParametricNodeSet::new(manifold, params)?)
    } else {
        None
    };
    Ok((seeds, params))
}

/// Plain `x,y[,z]` CSV of a point set.
pub fn write_points(points: &PointSet) -> String {
    let mut out = AXES[..points.dim()].join(",");
    out.push('\n');
    for p in points.iter() {
        for (k, &v) in p.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            fmt_f(&mut out, v);
        }
        out.push('\n');
    }
    out
}
