//! Line-oriented text format for instances: one header block, one record per
//! edge, one record per non-zero field. Couplings are written as shortest
//! round-trip decimals, so `parse(serialize(x)) == x` bit for bit.
//!
//! ```text
//! qwa-instance v1
//! geometry ladder 5 2
//! seed 7
//! sites 10
//! edges 13
//! edge 0 1 -0.8571988459682
//! ...
//! field 3 0.000001
//! end
//! ```

use thiserror::Error;

use crate::instance::{Edge, Geometry, Instance, InstanceError};
use crate::Scalar;

pub const INSTANCE_MAGIC: &str = "qwa-instance v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        source: InstanceError,
    },
    #[error("document ended before the `end` record")]
    Truncated,
}

pub fn serialize_instance<S: Scalar>(inst: &Instance<S>) -> String {
    let mut out = String::new();
    out.push_str(INSTANCE_MAGIC);
    out.push('\n');
    out.push_str(&format!("geometry {}\n", inst.geometry().label()));
    out.push_str(&format!("seed {}\n", inst.seed()));
    out.push_str(&format!("sites {}\n", inst.n_sites()));
    out.push_str(&format!("edges {}\n", inst.edges().len()));
    for e in inst.edges() {
        out.push_str(&format!("edge {} {} {}\n", e.i, e.j, e.coupling));
    }
    for (i, h) in inst.fields_z().iter().enumerate() {
        if *h != S::zero() {
            out.push_str(&format!("field {i} {h}\n"));
        }
    }
    out.push_str("end\n");
    out
}

pub fn parse_instance<S: Scalar>(text: &str) -> Result<Instance<S>, FormatError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    let err = |line: usize, msg: String| FormatError::Malformed { line, msg };

    let (line, magic) = lines.next().ok_or(FormatError::Truncated)?;
    if magic != INSTANCE_MAGIC {
        return Err(err(line, format!("expected `{INSTANCE_MAGIC}` header, got `{magic}`")));
    }

    let mut geometry: Option<Geometry> = None;
    let mut seed: Option<u64> = None;
    let mut sites: Option<usize> = None;
    let mut n_edges: Option<usize> = None;
    let mut edges: Vec<Edge<S>> = Vec::new();
    let mut fields: Vec<(usize, S)> = Vec::new();
    let mut saw_end = false;
    let mut last_line = line;

    for (line, raw) in lines {
        last_line = line;
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut parts = raw.split_whitespace();
        let tag = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        match tag {
            "geometry" => {
                geometry = Some(parse_geometry(&rest).map_err(|msg| err(line, msg))?);
            }
            "seed" => {
                let v = one_field(&rest).and_then(|s| s.parse().map_err(|_| "not a u64".into()));
                seed = Some(v.map_err(|msg: String| err(line, msg))?);
            }
            "sites" => {
                let v = one_field(&rest).and_then(|s| s.parse().map_err(|_| "not a count".into()));
                sites = Some(v.map_err(|msg: String| err(line, msg))?);
            }
            "edges" => {
                let v = one_field(&rest).and_then(|s| s.parse().map_err(|_| "not a count".into()));
                n_edges = Some(v.map_err(|msg: String| err(line, msg))?);
            }
            "edge" => {
                if rest.len() != 3 {
                    return Err(err(line, "edge record needs `edge i j coupling`".into()));
                }
                let i = rest[0].parse().map_err(|_| err(line, "bad site index".into()))?;
                let j = rest[1].parse().map_err(|_| err(line, "bad site index".into()))?;
                let coupling = S::parse_text(rest[2])
                    .ok_or_else(|| err(line, format!("bad coupling `{}`", rest[2])))?;
                edges.push(Edge { i, j, coupling });
            }
            "field" => {
                if rest.len() != 2 {
                    return Err(err(line, "field record needs `field i h`".into()));
                }
                let i = rest[0].parse().map_err(|_| err(line, "bad site index".into()))?;
                let h = S::parse_text(rest[1])
                    .ok_or_else(|| err(line, format!("bad field `{}`", rest[1])))?;
                fields.push((i, h));
            }
            "end" => {
                saw_end = true;
                break;
            }
            other => return Err(err(line, format!("unknown record `{other}`"))),
        }
    }
    if !saw_end {
        return Err(FormatError::Truncated);
    }

    let geometry = geometry.ok_or_else(|| err(last_line, "missing geometry record".into()))?;
    let seed = seed.ok_or_else(|| err(last_line, "missing seed record".into()))?;
    if let Some(s) = sites {
        if s != geometry.n_sites() {
            return Err(err(
                last_line,
                format!("sites {} does not match geometry ({})", s, geometry.n_sites()),
            ));
        }
    }
    if let Some(ne) = n_edges {
        if ne != edges.len() {
            return Err(err(
                last_line,
                format!("header says {} edges, found {}", ne, edges.len()),
            ));
        }
    }
    let mut fields_z = vec![S::zero(); geometry.n_sites()];
    for (i, h) in fields {
        if i >= fields_z.len() {
            return Err(err(last_line, format!("field site {i} out of range")));
        }
        fields_z[i] = h;
    }
    Instance::new(geometry, seed, edges, fields_z)
        .map_err(|source| FormatError::Invalid { line: last_line, source })
}

fn parse_geometry(rest: &[&str]) -> Result<Geometry, String> {
    match rest {
        ["chain", l] => Ok(Geometry::Chain {
            length: l.parse().map_err(|_| "bad chain length".to_string())?,
        }),
        ["ladder", l, w] => Ok(Geometry::Ladder {
            length: l.parse().map_err(|_| "bad ladder length".to_string())?,
            width: w.parse().map_err(|_| "bad ladder width".to_string())?,
        }),
        ["rr", n, k] => Ok(Geometry::RandomRegular {
            n: n.parse().map_err(|_| "bad vertex count".to_string())?,
            degree: k.parse().map_err(|_| "bad degree".to_string())?,
        }),
        other => Err(format!("unknown geometry spec {other:?}")),
    }
}

fn one_field<'a>(rest: &[&'a str]) -> Result<&'a str, String> {
    if rest.len() == 1 {
        Ok(rest[0])
    } else {
        Err(format!("expected one value, got {}", rest.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let inst = Instance::<f64>::generate(Geometry::Ladder { length: 40, width: 2 }, 7).unwrap();
        let inst = inst.with_field(3, 1e-6);
        let text = serialize_instance(&inst);
        let back: Instance<f64> = parse_instance(&text).unwrap();
        assert_eq!(inst, back);
        assert_eq!(text, serialize_instance(&back));
    }

    #[test]
    fn duplicate_edge_rejected() {
        let text = "qwa-instance v1\ngeometry chain 3\nseed 0\nedge 0 1 0.5\nedge 1 0 0.25\nend\n";
        let got = parse_instance::<f64>(text);
        assert!(matches!(got, Err(FormatError::Invalid { .. })), "{got:?}");
    }

    #[test]
    fn out_of_range_coupling_rejected() {
        let text = "qwa-instance v1\ngeometry chain 3\nseed 0\nedge 0 1 1.5\nedge 1 2 0.25\nend\n";
        let got = parse_instance::<f64>(text);
        assert!(matches!(got, Err(FormatError::Invalid { .. })), "{got:?}");
    }

    #[test]
    fn malformed_line_reports_location() {
        let text = "qwa-instance v1\ngeometry chain 3\nseed 0\nedge 0 oops 0.5\nend\n";
        match parse_instance::<f64>(text) {
            Err(FormatError::Malformed { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn missing_end_rejected() {
        let text = "qwa-instance v1\ngeometry chain 2\nseed 0\nedge 0 1 0.5\n";
        assert!(matches!(parse_instance::<f64>(text), Err(FormatError::Truncated)));
    }

    #[test]
    fn header_counts_checked() {
        let text =
            "qwa-instance v1\ngeometry chain 3\nseed 0\nsites 4\nedge 0 1 0.1\nedge 1 2 0.2\nend\n";
        assert!(parse_instance::<f64>(text).is_err());
    }
}
