//! The bistar glyph family.
//!
//! A glyph describes a small subgraph built from two "center" vertices:
//! `l` pendant edges at the left center, `r` pendant edges at the right
//! center, `c` two-hop paths joining the centers, and an optional direct
//! bridge edge between them. Stars, cherries, paths, and triangles are all
//! members: a star with `j >= 1` edges is `(j-1, 0, 0, bridge)`, the single
//! vertex is `(0, 0, 0, no bridge)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which vertices of a glyph are distinguished as roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rooting {
    /// No roots; the density is a scalar.
    Unrooted,
    /// The left center is rooted; the density is a length-K vector.
    LeftRooted,
    /// Both centers are rooted; the density is a K-by-K matrix.
    BiRooted,
}

/// A member of the bistar-plus-bridge family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BistarGlyph {
    /// Pendant edges at the left center.
    pub left_edges: usize,
    /// Two-hop paths between the centers.
    pub mid_paths: usize,
    /// Pendant edges at the right center.
    pub right_edges: usize,
    /// Direct edge between the centers.
    pub bridge: bool,
    pub rooting: Rooting,
}

impl BistarGlyph {
    pub fn new(l: usize, c: usize, r: usize, bridge: bool, rooting: Rooting) -> Self {
        BistarGlyph {
            left_edges: l,
            mid_paths: c,
            right_edges: r,
            bridge,
            rooting,
        }
    }

    pub fn unrooted(l: usize, c: usize, r: usize, bridge: bool) -> Self {
        Self::new(l, c, r, bridge, Rooting::Unrooted)
    }

    pub fn birooted(l: usize, c: usize, r: usize, bridge: bool) -> Self {
        Self::new(l, c, r, bridge, Rooting::BiRooted)
    }

    /// The star with `j` edges, `(j-1, 0, 0, bridge)` for `j >= 1`;
    /// `j == 0` is the single vertex.
    pub fn star(j: usize) -> Self {
        if j == 0 {
            Self::unrooted(0, 0, 0, false)
        } else {
            Self::unrooted(j - 1, 0, 0, true)
        }
    }

    /// Bare birooted vertex pair, the multiplicative identity of the algebra.
    pub fn unit() -> Self {
        Self::birooted(0, 0, 0, false)
    }

    /// Birooted single edge; evaluates to the connectivity matrix B.
    pub fn bridge_edge() -> Self {
        Self::birooted(0, 0, 0, true)
    }

    /// Birooted two-hop path; evaluates to the two-hop matrix.
    pub fn two_hop() -> Self {
        Self::birooted(0, 1, 0, false)
    }

    pub fn vertex_count(&self) -> usize {
        2 + self.left_edges + self.mid_paths + self.right_edges
    }

    pub fn edge_count(&self) -> usize {
        self.left_edges + self.right_edges + 2 * self.mid_paths + usize::from(self.bridge)
    }

    /// Glue two glyphs at their roots: counts add, bridges may not stack
    /// (the result would carry a parallel edge, which simple graphs forbid).
    pub fn glue(&self, other: &BistarGlyph) -> Result<BistarGlyph> {
        if self.bridge && other.bridge {
            return Err(Error::Validation(
                "gluing two bridge-bearing glyphs would create a parallel edge".into(),
            ));
        }
        Ok(BistarGlyph {
            left_edges: self.left_edges + other.left_edges,
            mid_paths: self.mid_paths + other.mid_paths,
            right_edges: self.right_edges + other.right_edges,
            bridge: self.bridge || other.bridge,
            rooting: self.rooting,
        })
    }

    /// Canonical form for unrooted use: `l >= r` (swapping the two centers is
    /// an isomorphism once the roots are forgotten).
    pub fn canonical(&self) -> BistarGlyph {
        let mut g = *self;
        if g.left_edges < g.right_edges {
            std::mem::swap(&mut g.left_edges, &mut g.right_edges);
        }
        g
    }

    /// Mirror image, swapping the left and right centers.
    pub fn swapped(&self) -> BistarGlyph {
        BistarGlyph {
            left_edges: self.right_edges,
            right_edges: self.left_edges,
            ..*self
        }
    }

    /// Explicit vertex/edge lists. Vertex 0 is the left center, vertex 1 the
    /// right center, followed by left leaves, midpoints, and right leaves.
    pub fn to_edge_list(&self) -> (usize, Vec<(usize, usize)>) {
        let nv = self.vertex_count();
        let mut edges = Vec::with_capacity(self.edge_count());
        let mut next = 2;
        for _ in 0..self.left_edges {
            edges.push((0, next));
            next += 1;
        }
        for _ in 0..self.mid_paths {
            edges.push((0, next));
            edges.push((next, 1));
            next += 1;
        }
        for _ in 0..self.right_edges {
            edges.push((1, next));
            next += 1;
        }
        if self.bridge {
            edges.push((0, 1));
        }
        (nv, edges)
    }
}

impl fmt::Display for BistarGlyph {
    /// Text notation: `L<l> C<c> R<r> [E]`, omitting zero parts; the bare
    /// pair prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.left_edges > 0 {
            parts.push(format!("L{}", self.left_edges));
        }
        if self.mid_paths > 0 {
            parts.push(format!("C{}", self.mid_paths));
        }
        if self.right_edges > 0 {
            parts.push(format!("R{}", self.right_edges));
        }
        if self.bridge {
            parts.push("E".into());
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

impl FromStr for BistarGlyph {
    type Err = Error;

    /// Parse the `L<l> C<c> R<r> [E]` notation, e.g. `"L2 C1 E"` for
    /// `(2, 1, 0, bridge)`. Tokens may appear in any order, each at most
    /// once; `"1"` or the empty string is the bare pair. Parsing yields an
    /// unrooted glyph; set `rooting` afterwards if needed.
    fn from_str(s: &str) -> Result<BistarGlyph> {
        let mut l = None;
        let mut c = None;
        let mut r = None;
        let mut e = false;
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (head, rest) = tok.split_at(1);
            let slot = match head {
                "L" | "l" => Some(&mut l),
                "C" | "c" => Some(&mut c),
                "R" | "r" => Some(&mut r),
                "E" | "e" if rest.is_empty() => {
                    if e {
                        return Err(Error::Validation(format!("duplicate token '{tok}'")));
                    }
                    e = true;
                    None
                }
                _ => {
                    return Err(Error::Validation(format!(
                        "unrecognized glyph token '{tok}'"
                    )))
                }
            };
            if let Some(slot) = slot {
                let count: usize = rest.parse().map_err(|_| {
                    Error::Validation(format!("bad count in glyph token '{tok}'"))
                })?;
                if slot.replace(count).is_some() {
                    return Err(Error::Validation(format!("duplicate token '{tok}'")));
                }
            }
        }
        Ok(BistarGlyph::unrooted(
            l.unwrap_or(0),
            c.unwrap_or(0),
            r.unwrap_or(0),
            e,
        ))
    }
}

/// A formal linear combination of glyphs with real coefficients.
///
/// Needed for the symmetrized pencil basis entries; density evaluation is
/// linear, so a combination evaluates to the weighted sum of its terms.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphCombo {
    pub terms: Vec<(f64, BistarGlyph)>,
}

impl GlyphCombo {
    pub fn from_glyph(g: BistarGlyph) -> Self {
        GlyphCombo {
            terms: vec![(1.0, g)],
        }
    }

    /// Glue two combinations by distributing over the terms and collecting
    /// like glyphs.
    pub fn glue(&self, other: &GlyphCombo) -> Result<GlyphCombo> {
        let mut out: Vec<(f64, BistarGlyph)> = Vec::new();
        for &(ca, ga) in &self.terms {
            for &(cb, gb) in &other.terms {
                let glued = ga.glue(&gb)?;
                match out.iter_mut().find(|(_, g)| *g == glued) {
                    Some((coeff, _)) => *coeff += ca * cb,
                    None => out.push((ca * cb, glued)),
                }
            }
        }
        Ok(GlyphCombo { terms: out })
    }

    pub fn glue_glyph(&self, g: BistarGlyph) -> Result<GlyphCombo> {
        self.glue(&GlyphCombo::from_glyph(g))
    }
}

impl fmt::Display for GlyphCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(coeff, g)| {
                if (*coeff - 1.0).abs() < 1e-12 {
                    format!("({g})")
                } else {
                    format!("{coeff}({g})")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_and_edge_counts() {
        let g = BistarGlyph::unrooted(2, 1, 0, true);
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 5);
        let star3 = BistarGlyph::star(3);
        assert_eq!(star3.vertex_count(), 4);
        assert_eq!(star3.edge_count(), 3);
        assert_eq!(BistarGlyph::star(0).edge_count(), 0);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["L2 C1 E", "E", "1", "L1 R3", "C2"] {
            let g: BistarGlyph = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        let g: BistarGlyph = "L2 C1 E".parse().unwrap();
        assert_eq!(g, BistarGlyph::unrooted(2, 1, 0, true));
        assert!("L2 L3".parse::<BistarGlyph>().is_err());
        assert!("X4".parse::<BistarGlyph>().is_err());
    }

    #[test]
    fn gluing_adds_tuples_and_rejects_double_bridge() {
        let a = BistarGlyph::birooted(1, 0, 1, true);
        let b = BistarGlyph::birooted(0, 2, 1, false);
        let ab = a.glue(&b).unwrap();
        assert_eq!(ab, BistarGlyph::birooted(1, 2, 2, true));
        assert!(a.glue(&a).is_err());
    }

    #[test]
    fn combo_expansion_matches_binomial() {
        // (L + R) glued with itself expands to L^2 + 2 LR + R^2.
        let l = BistarGlyph::birooted(1, 0, 0, false);
        let r = BistarGlyph::birooted(0, 0, 1, false);
        let sum = GlyphCombo {
            terms: vec![(1.0, l), (1.0, r)],
        };
        let sq = sum.glue(&sum).unwrap();
        let mut coeffs: Vec<(usize, usize, f64)> = sq
            .terms
            .iter()
            .map(|(c, g)| (g.left_edges, g.right_edges, *c))
            .collect();
        coeffs.sort_by_key(|&(l, ..)| l);
        assert_eq!(coeffs, vec![(0, 2, 1.0), (1, 1, 2.0), (2, 0, 1.0)]);
    }

    #[test]
    fn canonical_prefers_left_heavy() {
        let g = BistarGlyph::unrooted(0, 1, 3, true);
        assert_eq!(g.canonical(), BistarGlyph::unrooted(3, 1, 0, true));
    }
}
