//! Static GeoJSON export of a pathing outcome for map viewers.

use serde_json::{json, Value};

use crate::error::Result;
use crate::map::{NodeId, RoadGraph};
use crate::pathing::PathingOutcome;

/// Build a FeatureCollection: one LineString per returned complete
/// path (properties `rank`, `error_m`), an optional ground-truth
/// LineString (`role: truth`), and a start marker Point. Coordinates
/// are `[lon, lat]` per the GeoJSON convention.
pub fn export_geojson(
    graph: &RoadGraph,
    start: NodeId,
    outcome: &PathingOutcome,
    truth: Option<&[NodeId]>,
) -> Result<Value> {
    let mut features = Vec::new();

    for (rank, path) in outcome.completes.iter().enumerate() {
        let mut coords = Vec::with_capacity(path.nodes.len() + 1);
        for id in &path.nodes {
            let n = graph.node(*id)?;
            coords.push(vec![n.lon, n.lat]);
        }
        if path.edge.is_some() {
            let (lat, lon) = path.endpoint(graph)?;
            coords.push(vec![lon, lat]);
        }
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords },
            "properties": { "rank": rank + 1, "error_m": path.error },
        }));
    }

    if let Some(route) = truth {
        let mut coords = Vec::with_capacity(route.len());
        for id in route {
            let n = graph.node(*id)?;
            coords.push(vec![n.lon, n.lat]);
        }
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords },
            "properties": { "role": "truth" },
        }));
    }

    let s = graph.node(start)?;
    features.push(json!({
        "type": "Feature",
        "geometry": { "type": "Point", "coordinates": [s.lon, s.lat] },
        "properties": { "role": "start" },
    }));

    Ok(json!({ "type": "FeatureCollection", "features": features }))
}
