//! OSM XML parsing with drivability filtering.
//!
//! Only ways whose `highway` tag is on the drivable allow-list are
//! retained; rail, foot and cycle infrastructure is dropped so the
//! search never wanders onto it. Ways without a usable `maxspeed` tag
//! get a per-class default so speed-limit pruning always has a limit.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::map::{HighwayClass, NodeId, RoadGraph, RoadNode, RoadWay, WayId};
use crate::units::{kmh_to_mps, mph_to_mps};

/// Which ways count as drivable.
#[derive(Debug, Clone)]
pub struct HighwayFilter {
    /// Drop ways tagged `access=private`.
    pub exclude_private: bool,
}

impl Default for HighwayFilter {
    fn default() -> Self {
        Self { exclude_private: true }
    }
}

impl HighwayFilter {
    fn classify(&self, tags: &BTreeMap<&str, &str>) -> Option<HighwayClass> {
        if self.exclude_private && tags.get("access") == Some(&"private") {
            return None;
        }
        tags.get("highway").and_then(|v| HighwayClass::from_tag(v))
    }
}

/// A parsed graph plus parse-time diagnostics.
#[derive(Debug)]
pub struct OsmParseResult {
    pub graph: RoadGraph,
    /// Ways dropped because they referenced nodes absent from the file.
    pub ways_missing_nodes: usize,
    /// Ways dropped by the drivability filter.
    pub ways_filtered: usize,
}

/// Parse an OSM XML document into a road graph.
pub fn parse_osm(xml: &str, filter: &HighwayFilter) -> Result<OsmParseResult> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| {
        let pos = e.pos();
        Error::OsmParse {
            line: pos.row,
            col: pos.col,
            message: e.to_string(),
        }
    })?;

    let mut raw_nodes: BTreeMap<NodeId, RoadNode> = BTreeMap::new();
    let mut ways: Vec<RoadWay> = Vec::new();
    let mut missing = 0usize;
    let mut filtered = 0usize;

    for el in doc.root_element().children().filter(|n| n.is_element()) {
        match el.tag_name().name() {
            "node" => {
                let id = NodeId(parse_attr(&el, "id")?);
                let lat: f64 = parse_attr(&el, "lat")?;
                let lon: f64 = parse_attr(&el, "lon")?;
                if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                    return Err(Error::InvalidValue {
                        what: "node coordinate",
                        value: format!("({lat}, {lon})"),
                    });
                }
                raw_nodes.insert(id, RoadNode { id, lat, lon });
            }
            "way" => {
                let id = WayId(parse_attr(&el, "id")?);
                let mut refs: Vec<NodeId> = Vec::new();
                let mut tags: BTreeMap<&str, &str> = BTreeMap::new();
                for child in el.children().filter(|n| n.is_element()) {
                    match child.tag_name().name() {
                        "nd" => {
                            if let Some(r) = child.attribute("ref") {
                                let v = r.parse().map_err(|_| Error::InvalidValue {
                                    what: "nd ref",
                                    value: r.to_string(),
                                })?;
                                refs.push(NodeId(v));
                            }
                        }
                        "tag" => {
                            if let (Some(k), Some(v)) =
                                (child.attribute("k"), child.attribute("v"))
                            {
                                tags.insert(k, v);
                            }
                        }
                        _ => {}
                    }
                }

                let Some(class) = HighwayFilter::classify(filter, &tags) else {
                    filtered += 1;
                    continue;
                };
                // Drop repeated consecutive refs; drop the way if any
                // referenced node is missing.
                refs.dedup();
                if refs.len() < 2 {
                    missing += 1;
                    continue;
                }
                if refs.iter().any(|r| !raw_nodes.contains_key(r)) {
                    missing += 1;
                    continue;
                }

                let (one_way, reversed) = parse_oneway(tags.get("oneway").copied());
                if reversed {
                    refs.reverse();
                }
                let max_speed = tags
                    .get("maxspeed")
                    .and_then(|v| parse_maxspeed_tag(v))
                    .unwrap_or_else(|| class.default_speed());
                let lanes = tags
                    .get("lanes")
                    .and_then(|v| v.parse::<u32>().ok())
                    .filter(|&l| l >= 1)
                    .unwrap_or(1);

                ways.push(RoadWay {
                    id,
                    node_sequence: refs,
                    max_speed,
                    lanes,
                    one_way,
                    highway_class: class,
                });
            }
            _ => {}
        }
    }

    // Keep only nodes referenced by a retained way.
    let used: BTreeSet<NodeId> = ways
        .iter()
        .flat_map(|w| w.node_sequence.iter().copied())
        .collect();
    let nodes: Vec<RoadNode> = used
        .iter()
        .map(|id| raw_nodes[id])
        .collect();

    Ok(OsmParseResult {
        graph: RoadGraph::build(nodes, ways),
        ways_missing_nodes: missing,
        ways_filtered: filtered,
    })
}

/// Parse the file at `path` as OSM XML.
pub fn parse_osm_file<P: AsRef<Path>>(path: P, filter: &HighwayFilter) -> Result<OsmParseResult> {
    let xml = std::fs::read_to_string(path)?;
    parse_osm(&xml, filter)
}

fn parse_attr<T: std::str::FromStr>(el: &roxmltree::Node, name: &'static str) -> Result<T> {
    el.attribute(name)
        .ok_or(Error::InvalidValue { what: name, value: "<absent>".into() })?
        .parse()
        .map_err(|_| Error::InvalidValue {
            what: name,
            value: el.attribute(name).unwrap_or_default().to_string(),
        })
}

/// (one_way, node order reversed)
fn parse_oneway(tag: Option<&str>) -> (bool, bool) {
    match tag {
        Some("yes") | Some("true") | Some("1") => (true, false),
        Some("-1") | Some("reverse") => (true, true),
        _ => (false, false),
    }
}

/// Convert an OSM `maxspeed` tag to m/s. Bare numbers are km/h per OSM
/// convention; an explicit `mph` suffix switches units. Unparseable
/// values yield `None` so the class default applies.
pub fn parse_maxspeed_tag(value: &str) -> Option<f64> {
    let v = value.trim();
    let (num, is_mph) = match v.strip_suffix("mph") {
        Some(rest) => (rest.trim(), true),
        None => match v.strip_suffix("km/h") {
            Some(rest) => (rest.trim(), false),
            None => (v, false),
        },
    };
    let parsed: f64 = num.parse().ok()?;
    if parsed <= 0.0 {
        return None;
    }
    Some(if is_mph { mph_to_mps(parsed) } else { kmh_to_mps(parsed) })
}
