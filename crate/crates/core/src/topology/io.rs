//! Flat text serialization of networks.
//!
//! ```text
//! # csma-bethe network v1
//! kind sinr_spatial
//! radio <path_loss_exponent> <close_in_radius> <sinr_threshold_linear> <noise_power>
//! links <N>
//! <id> <tx_x> <tx_y> <rx_x> <rx_y> <power>      (N lines)
//! ```
//!
//! Conflict-graph networks replace the `radio` line with an edge block after
//! the links:
//!
//! ```text
//! kind conflict_graph
//! links <N>
//! <id> <tx_x> <tx_y> <rx_x> <rx_y> <power>      (N lines)
//! edges <M>
//! <i> <j>                                        (M lines, i < j)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Floats are written
//! in shortest round-trip form, so `parse(write(net))` reproduces `net`
//! exactly.

use super::{conflict_network_from_edges, Link, Network, NetworkKind, NetworkModel, Point, RadioParams};
use crate::error::{Error, Result};

pub const NETWORK_HEADER: &str = "# csma-bethe network v1";

impl Network {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(NETWORK_HEADER);
        out.push('\n');
        match self.model() {
            NetworkModel::Sinr(r) => {
                out.push_str("kind sinr_spatial\n");
                out.push_str(&format!(
                    "radio {} {} {} {}\n",
                    r.path_loss_exponent, r.close_in_radius, r.sinr_threshold, r.noise_power
                ));
            }
            NetworkModel::Conflict(_) => out.push_str("kind conflict_graph\n"),
        }
        out.push_str(&format!("links {}\n", self.n_links()));
        for l in self.links() {
            out.push_str(&format!("{} {} {} {} {} {}\n", l.id, l.tx.x, l.tx.y, l.rx.x, l.rx.y, l.power));
        }
        if self.kind() == NetworkKind::ConflictGraph {
            let edges = self.conflict_edges();
            out.push_str(&format!("edges {}\n", edges.len()));
            for (i, j) in edges {
                out.push_str(&format!("{i} {j}\n"));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let mut next = |what: &str| -> Result<(usize, Vec<&str>)> {
            lines
                .next()
                .map(|(n, l)| (n, l.split_whitespace().collect()))
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("unexpected end of input, expected {what}") })
        };

        let (ln, kind) = next("kind")?;
        let kind = match kind.as_slice() {
            ["kind", "sinr_spatial"] => NetworkKind::SinrSpatial,
            ["kind", "conflict_graph"] => NetworkKind::ConflictGraph,
            _ => return Err(Error::Parse { line: ln, msg: "expected `kind sinr_spatial|conflict_graph`".into() }),
        };

        let radio = if kind == NetworkKind::SinrSpatial {
            let (ln, toks) = next("radio")?;
            if toks.len() != 5 || toks[0] != "radio" {
                return Err(Error::Parse { line: ln, msg: "expected `radio <alpha> <R_I> <T> <N0>`".into() });
            }
            let v = parse_floats(ln, &toks[1..])?;
            Some(RadioParams {
                path_loss_exponent: v[0],
                close_in_radius: v[1],
                sinr_threshold: v[2],
                noise_power: v[3],
            })
        } else {
            None
        };

        let n = counted(next("links")?, "links")?;
        let mut links = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, toks) = next("link line")?;
            if toks.len() != 6 {
                return Err(Error::Parse { line: ln, msg: "expected `id tx_x tx_y rx_x rx_y power`".into() });
            }
            let id = parse_usize(ln, toks[0])?;
            let v = parse_floats(ln, &toks[1..])?;
            links.push(Link { id, tx: Point::new(v[0], v[1]), rx: Point::new(v[2], v[3]), power: v[4] });
        }

        match radio {
            Some(radio) => Network::sinr(links, radio),
            None => {
                let m = counted(next("edges")?, "edges")?;
                let mut edges = Vec::with_capacity(m);
                for _ in 0..m {
                    let (ln, toks) = next("edge line")?;
                    if toks.len() != 2 {
                        return Err(Error::Parse { line: ln, msg: "expected `i j`".into() });
                    }
                    edges.push((parse_usize(ln, toks[0])?, parse_usize(ln, toks[1])?));
                }
                let topo = conflict_network_from_edges(n, &edges)?;
                let neighbors = topo.conflict_neighbors().expect("conflict network").to_vec();
                Network::conflict(links, neighbors)
            }
        }
    }
}

fn counted((ln, toks): (usize, Vec<&str>), key: &str) -> Result<usize> {
    if toks.len() != 2 || toks[0] != key {
        return Err(Error::Parse { line: ln, msg: format!("expected `{key} <count>`") });
    }
    parse_usize(ln, toks[1])
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad integer `{tok}`") })
}

fn parse_floats(line: usize, toks: &[&str]) -> Result<Vec<f64>> {
    toks.iter().map(|t| t.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad number `{t}`") })).collect()
}
