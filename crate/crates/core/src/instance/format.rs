//! Line-oriented instance files.
//!
//! ```text
//! TSPLAB v1 {"d":2,"t":10.0,"topology":"torus","precision_bits":52,"seed":7,"n":2,"plants":[]}
//! 1 3ff0000000000000 4000000000000000
//! 2 4008000000000000 4010000000000000
//! ```
//!
//! Coordinates are IEEE-754 bit patterns in hex, so a round trip is exact.
//! Indices in the file are 1-based.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GadgetHeader, Instance, PlantRecord};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, Topology};

const MAGIC: &str = "TSPLAB v1 ";

#[derive(Serialize, Deserialize)]
struct Header {
    d: usize,
    t: f64,
    topology: Topology,
    precision_bits: u32,
    seed: Option<u64>,
    n: usize,
    #[serde(default)]
    plants: Vec<PlantRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gadget: Option<GadgetHeader>,
}

fn one_based(rec: &PlantRecord) -> PlantRecord {
    PlantRecord { member_indices: rec.member_indices.iter().map(|i| i + 1).collect(), ..rec.clone() }
}

// Marked indices become 1-based; ranges become 1-based inclusive `(first, last)`.
fn gadget_one_based(g: &GadgetHeader) -> GadgetHeader {
    GadgetHeader {
        kind: g.kind.clone(),
        params: g.params.clone(),
        marked: g.marked.iter().map(|(k, &i)| (k.clone(), i + 1)).collect(),
        ranges: g.ranges.iter().map(|(k, &(a, b))| (k.clone(), (a + 1, b))).collect(),
        frames: g.frames.clone(),
    }
}

fn gadget_zero_based(g: GadgetHeader, n: usize) -> Result<GadgetHeader> {
    let bad = |msg: String| Error::Parse { line: 1, msg };
    let mut marked = std::collections::BTreeMap::new();
    for (k, i) in g.marked {
        if i == 0 || i > n {
            return Err(bad(format!("marked index `{k}` = {i} outside 1..={n}")));
        }
        marked.insert(k, i - 1);
    }
    let mut ranges = std::collections::BTreeMap::new();
    for (k, (a, b)) in g.ranges {
        if a == 0 || b > n || a > b + 1 {
            return Err(bad(format!("range `{k}` = {a}..={b} outside 1..={n}")));
        }
        ranges.insert(k, (a - 1, b));
    }
    Ok(GadgetHeader { kind: g.kind, params: g.params, marked, ranges, frames: g.frames })
}

pub fn to_text(inst: &Instance) -> Result<String> {
    let header = Header {
        d: inst.domain.d,
        t: inst.domain.t,
        topology: inst.domain.topology,
        precision_bits: inst.precision_bits,
        seed: inst.seed,
        n: inst.len(),
        plants: inst.plants.iter().map(one_based).collect(),
        gadget: inst.gadget.as_ref().map(gadget_one_based),
    };
    let mut out = String::with_capacity(32 + inst.len() * (18 * inst.domain.d + 8));
    out.push_str(MAGIC);
    out.push_str(&serde_json::to_string(&header)?);
    out.push('\n');
    for (i, p) in inst.points.iter().enumerate() {
        out.push_str(&(i + 1).to_string());
        for c in &p.coords {
            out.push(' ');
            out.push_str(&format!("{:016x}", c.to_bits()));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn save(inst: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(inst)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Instance> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn parse(text: &str) -> Result<Instance> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let json = first.strip_prefix(MAGIC).ok_or(Error::Parse { line: 1, msg: "missing `TSPLAB v1` header".into() })?;
    let header: Header =
        serde_json::from_str(json).map_err(|e| Error::Parse { line: 1, msg: format!("bad header: {e}") })?;
    let domain =
        Domain::new(header.d, header.t, header.topology).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;

    let mut slots: Vec<Option<Point>> = vec![None; header.n];
    for (lineno, line) in lines {
        let line_no = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: line_no, msg };
        let mut fields = line.split_ascii_whitespace();
        let idx: usize = fields
            .next()
            .expect("nonempty line")
            .parse()
            .map_err(|e| bad(format!("bad index: {e}")))?;
        if idx == 0 || idx > header.n {
            return Err(bad(format!("index {idx} outside 1..={}", header.n)));
        }
        let coords = fields
            .map(|f| u64::from_str_radix(f, 16).map(f64::from_bits).map_err(|e| bad(format!("bad coordinate `{f}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if coords.len() != header.d {
            return Err(bad(format!("expected {} coordinates, found {}", header.d, coords.len())));
        }
        if slots[idx - 1].is_some() {
            return Err(bad(format!("duplicate index {idx}")));
        }
        slots[idx - 1] = Some(Point::new(coords));
    }
    let points = slots
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or(Error::Parse { line: text.lines().count() + 1, msg: format!("index {} missing", i + 1) }))
        .collect::<Result<Vec<_>>>()?;

    let mut plants = Vec::with_capacity(header.plants.len());
    for rec in header.plants {
        let mut members = Vec::with_capacity(rec.member_indices.len());
        for i in rec.member_indices {
            if i == 0 || i > header.n {
                return Err(Error::Parse { line: 1, msg: format!("plant member {i} outside 1..={}", header.n) });
            }
            members.push(i - 1);
        }
        plants.push(PlantRecord { member_indices: members, ..rec });
    }
    let gadget = header.gadget.map(|g| gadget_zero_based(g, header.n)).transpose()?;
    Ok(Instance { points, domain, precision_bits: header.precision_bits, seed: header.seed, plants, gadget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_uniform, plant, PlantOptions};

    #[test]
    fn round_trip_random_instances() {
        for seed in 0..100 {
            let n = 1 + (seed as usize * 7) % 50;
            let topo = if seed % 2 == 0 { Topology::Torus } else { Topology::Cube };
            let inst = gen_uniform(n, 2, seed, topo).unwrap();
            assert_eq!(parse(&to_text(&inst).unwrap()).unwrap(), inst);
        }
    }

    #[test]
    fn round_trip_with_plants() {
        let inst = gen_uniform(400, 2, 1, Topology::Torus).unwrap();
        let g = vec![Point::xy(0.0, 1.5), Point::xy(1.2, -0.7)];
        let (inst, _) = plant(&inst, &g, &Point::xy(10.0, 10.0), &PlantOptions::new("pair", 2.0)).unwrap();
        let text = to_text(&inst).unwrap();
        assert!(text.lines().next().unwrap().contains("\"pair\""));
        assert_eq!(parse(&text).unwrap(), inst);
    }

    #[test]
    fn empty_instance_is_valid() {
        let inst = Instance::new(vec![], Domain::torus(2, 1.0));
        let text = to_text(&inst).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(parse(&text).unwrap(), inst);
    }

    #[test]
    fn corrupted_header() {
        assert!(matches!(parse("TSPLAB v2 {}\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("TSPLAB v1 {\"d\":2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn bad_coordinate_reports_line() {
        let inst = gen_uniform(3, 2, 1, Topology::Torus).unwrap();
        let mut text = to_text(&inst).unwrap();
        text = text.replacen("\n2 ", "\n2 zz", 1);
        assert!(matches!(parse(&text), Err(Error::Parse { line: 3, .. })));
    }
}
