//! Plain-text hypergraph and community files.
//!
//! Edges file: a `# nodes: N` header, then one hyperedge per line as
//! space-separated 1-based node ids. Assignment file: one `node community`
//! pair per line, both 1-based. Lines starting with `#` are comments.

use std::io::{self, BufRead, Write};

use crate::assignment::CommunityAssignment;
use crate::generation::{EdgeOrigin, Hyperedge, Hypergraph};

fn invalid(line: usize, msg: impl std::fmt::Display) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"))
}

pub fn write_edges<W: Write>(h: &Hypergraph, mut out: W) -> io::Result<()> {
    writeln!(out, "# nodes: {}", h.n)?;
    let mut line = String::new();
    for e in &h.edges {
        line.clear();
        for (i, v) in e.members.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&(v + 1).to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

/// Reads an edges file. Without a `# nodes:` header the node count is the
/// largest id seen.
pub fn read_edges<R: BufRead>(input: R) -> io::Result<Hypergraph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut largest = 0usize;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if let Some(comment) = text.strip_prefix('#') {
            if let Some(count) = comment.trim().strip_prefix("nodes:") {
                n = Some(count.trim().parse().map_err(|e| invalid(i + 1, e))?);
            }
            continue;
        }
        if text.is_empty() {
            continue;
        }
        let members = text
            .split_whitespace()
            .map(|tok| match tok.parse::<u32>() {
                Ok(0) => Err(invalid(i + 1, "node ids are 1-based")),
                Ok(v) => Ok(v - 1),
                Err(e) => Err(invalid(i + 1, e)),
            })
            .collect::<io::Result<Vec<u32>>>()?;
        largest = largest.max(members.iter().map(|&v| v as usize + 1).max().unwrap_or(0));
        edges.push(Hyperedge::new(members, EdgeOrigin::Unknown));
    }
    let n = n.unwrap_or(largest);
    if largest > n {
        return Err(invalid(
            0,
            format!("node {largest} exceeds declared count {n}"),
        ));
    }
    Ok(Hypergraph::new(n, edges))
}

pub fn write_assignment<W: Write>(a: &CommunityAssignment, mut out: W) -> io::Result<()> {
    for (v, c) in a.member_of.iter().enumerate() {
        writeln!(out, "{} {}", v + 1, c + 1)?;
    }
    out.flush()
}

/// Reads `node community` pairs into 0-based community labels per node.
pub fn read_assignment<R: BufRead>(input: R) -> io::Result<Vec<u32>> {
    let mut pairs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut it = text.split_whitespace().map(|t| t.parse::<usize>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(v)), Some(Ok(c)), None) if v > 0 && c > 0 => {
                pairs.push((v - 1, (c - 1) as u32))
            }
            _ => return Err(invalid(i + 1, "expected `node community` with 1-based ids")),
        }
    }
    let mut labels = vec![u32::MAX; pairs.len()];
    for (v, c) in pairs {
        match labels.get_mut(v) {
            Some(slot) if *slot == u32::MAX => *slot = c,
            _ => return Err(invalid(0, format!("node {} missing or repeated", v + 1))),
        }
    }
    Ok(labels)
}
