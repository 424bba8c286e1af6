//! Edge-list text format: a `# nodes=<N>` header, then one `u<TAB>v` line
//! per edge with 0-based indices. Writing preserves edge order, so reading a
//! file and writing it back reproduces it byte for byte.

use std::io::{BufRead, Write};

use super::Graph;
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "# nodes={}", g.node_count())?;
    for &(u, v) in g.edges() {
        writeln!(out, "{u}\t{v}")?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing `# nodes=<N>` header".into(),
    })??;
    let node_count = header
        .strip_prefix("# nodes=")
        .and_then(|n| n.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("expected `# nodes=<N>`, found {header:?}"),
        })?;
    let mut edges = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        edges.push(parse_pair(&line, lineno)?);
    }
    Graph::new(node_count, edges).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })
}

pub(crate) fn parse_pair(line: &str, lineno: usize) -> Result<(u32, u32)> {
    let mut fields = line.split('\t');
    let mut next = |what: &str| -> Result<u32> {
        let field = fields.next().ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("missing {what}"),
        })?;
        field.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("bad {what} {field:?}"),
        })
    };
    Ok((next("source node")?, next("target node")?))
}
