//! Simple undirected graphs with bit-packed adjacency rows, plus edge-list
//! file i/o.
//!
//! The edge-list format is UTF-8 text with one edge per line: two
//! whitespace-separated 0-based node ids. Lines starting with `#` are
//! comments; an optional header `# n=<N>` declares the node count so that
//! trailing isolated nodes survive a round trip.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// An undirected simple graph on `n` nodes. Rows are bit-packed; the
/// adjacency is symmetric with a zero diagonal by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    words_per_row: usize,
    rows: Vec<u64>,
}

impl UndirectedGraph {
    pub fn empty(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        UndirectedGraph {
            n,
            words_per_row,
            rows: vec![0; n * words_per_row],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in 0..i {
                g.add_edge(i, j).unwrap();
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Insert the edge {u, v}. Rejects self-loops, duplicates, and
    /// out-of-range ids.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::Validation(format!(
                "edge ({u}, {v}) out of range for n={}",
                self.n
            )));
        }
        if u == v {
            return Err(Error::Validation(format!("self-loop at node {u}")));
        }
        if self.has_edge(u, v) {
            return Err(Error::Validation(format!("duplicate edge ({u}, {v})")));
        }
        self.rows[u * self.words_per_row + v / 64] |= 1 << (v % 64);
        self.rows[v * self.words_per_row + u / 64] |= 1 << (u % 64);
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u * self.words_per_row + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[u64] {
        &self.rows[u * self.words_per_row..(u + 1) * self.words_per_row]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// Number of common neighbors of u and v (two-hop paths between them).
    #[inline]
    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// The graph with node `x` removed; remaining nodes are renumbered to
    /// keep ids contiguous.
    pub fn delete_node(&self, x: usize) -> UndirectedGraph {
        let mut g = UndirectedGraph::empty(self.n - 1);
        for u in 0..self.n {
            if u == x {
                continue;
            }
            let gu = if u > x { u - 1 } else { u };
            for v in (u + 1)..self.n {
                if v == x || !self.has_edge(u, v) {
                    continue;
                }
                let gv = if v > x { v - 1 } else { v };
                g.add_edge(gu, gv).unwrap();
            }
        }
        g
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# n={}", self.n)?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_edge_list(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut declared_n: Option<usize> = None;
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        let mut max_id = 0usize;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                if let Some(val) = rest.trim().strip_prefix("n=") {
                    declared_n = Some(val.trim().parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("bad node count in header '{trimmed}'"),
                    })?);
                }
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let parse_id = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or(Error::Parse {
                    line: lineno,
                    message: "expected two node ids".into(),
                })?
                .parse()
                .map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad node id in '{trimmed}'"),
                })
            };
            let u = parse_id(it.next())?;
            let v = parse_id(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("trailing tokens in '{trimmed}'"),
                });
            }
            max_id = max_id.max(u).max(v);
            edges.push((u, v, lineno));
        }
        let n = match declared_n {
            Some(n) => {
                if !edges.is_empty() && max_id >= n {
                    return Err(Error::Validation(format!(
                        "node id {max_id} exceeds declared n={n}"
                    )));
                }
                n
            }
            None if edges.is_empty() => 0,
            None => max_id + 1,
        };
        let mut g = UndirectedGraph::empty(n);
        for (u, v, lineno) in edges {
            g.add_edge(u, v).map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
        }
        Ok(g)
    }
}

/// Write one block label per line, aligned with node ids.
pub fn save_labels(labels: &[usize], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for label in labels {
        writeln!(w, "{label}")?;
    }
    w.flush()?;
    Ok(())
}
