//! Text formats: graph files, coefficient CSV, lifting records, denoising
//! output and run manifests.
//!
//! Graph files are line oriented. `#` starts a comment, blank lines are
//! skipped and fields are separated by whitespace. The first directive is
//! `mode graph` or `mode stations`.
//!
//! ```text
//! mode graph
//! vertices
//! <id> [<x> <y>]
//! edges
//! <id> <u> <v> [<length|-> [<value|->]]
//!
//! mode stations
//! stations
//! <id> <x> <y> [<value|-> [<length>]]
//! links
//! <id> <id>
//! ```
//!
//! Numbers are written with 17 significant digits so `f64` values survive a
//! round trip bit for bit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, LineGraph, LineVertex, Vertex};
use crate::lifting::{CoefficientSet, LiftingRecord};
use crate::mst::{euclid, minimum_spanning_tree, WeightedEdge};
use crate::shrinkage::DenoiseResult;

/// Which kind of document a graph file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphMode {
    Graph,
    Stations,
}

/// A parsed graph file.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphFile {
    Graph(Graph<f64>),
    Stations(LineGraph<f64>),
}

impl GraphFile {
    pub fn mode(&self) -> GraphMode {
        match self {
            GraphFile::Graph(_) => GraphMode::Graph,
            GraphFile::Stations(_) => GraphMode::Stations,
        }
    }

    /// Line graph of a source graph, or the stations as given.
    pub fn line_graph(&self) -> Result<LineGraph<f64>> {
        match self {
            GraphFile::Graph(g) => crate::graph::build_line_graph(g),
            GraphFile::Stations(lg) => Ok(lg.clone()),
        }
    }
}

/// Writes `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), fmt_f64)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("{what} '{tok}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what} '{tok}' is not finite")));
    }
    Ok(v)
}

fn parse_opt(tok: Option<&&str>, line: usize, what: &str) -> Result<Option<f64>> {
    match tok {
        None | Some(&"-") => Ok(None),
        Some(t) => parse_num(t, line, what).map(Some),
    }
}

fn parse_id(tok: &str, line: usize, what: &str) -> Result<u64> {
    tok.parse().map_err(|_| parse_err(line, format!("{what} '{tok}' is not a non-negative integer")))
}

/// Options for reading station files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StationOptions {
    /// Join disconnected groups of stations by their closest pairs.
    pub complete_links: bool,
}

/// Parses a graph document. `complete_links` only affects station files.
pub fn parse_graph(text: &str, options: StationOptions) -> Result<GraphFile> {
    let mut mode = None;
    let mut section = "";
    let mut vertex_rows: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut edge_rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks[0] == "mode" {
            if mode.is_some() {
                return Err(parse_err(line, "mode declared twice"));
            }
            mode = Some(match toks.get(1) {
                Some(&"graph") if toks.len() == 2 => GraphMode::Graph,
                Some(&"stations") if toks.len() == 2 => GraphMode::Stations,
                _ => return Err(parse_err(line, "expected 'mode graph' or 'mode stations'")),
            });
            continue;
        }
        let Some(mode) = mode else {
            return Err(parse_err(line, "the file must start with a mode directive"));
        };
        let headers: &[&str] = match mode {
            GraphMode::Graph => &["vertices", "edges"],
            GraphMode::Stations => &["stations", "links"],
        };
        if toks.len() == 1 && headers.contains(&toks[0]) {
            section = if toks[0] == headers[0] { "first" } else { "second" };
            continue;
        }
        match section {
            "first" => vertex_rows.push((line, toks)),
            "second" => edge_rows.push((line, toks)),
            _ => return Err(parse_err(line, format!("row outside a '{}' or '{}' section", headers[0], headers[1]))),
        }
    }
    match mode {
        None => Err(parse_err(0, "empty document: no mode directive")),
        Some(GraphMode::Graph) => parse_graph_rows(&vertex_rows, &edge_rows).map(GraphFile::Graph),
        Some(GraphMode::Stations) => parse_station_rows(&vertex_rows, &edge_rows, options).map(GraphFile::Stations),
    }
}

fn parse_graph_rows(vertex_rows: &[(usize, Vec<&str>)], edge_rows: &[(usize, Vec<&str>)]) -> Result<Graph<f64>> {
    let mut index = HashMap::new();
    let mut vertices = Vec::with_capacity(vertex_rows.len());
    for (line, toks) in vertex_rows {
        let line = *line;
        if toks.len() != 1 && toks.len() != 3 {
            return Err(parse_err(line, "vertex rows are '<id>' or '<id> <x> <y>'"));
        }
        let id = parse_id(toks[0], line, "vertex id")?;
        if index.insert(id, vertices.len()).is_some() {
            return Err(parse_err(line, format!("duplicate vertex id {id}")));
        }
        let coord = if toks.len() == 3 {
            Some([parse_num(toks[1], line, "x")?, parse_num(toks[2], line, "y")?])
        } else {
            None
        };
        vertices.push(Vertex { id, coord });
    }
    let mut edges = Vec::with_capacity(edge_rows.len());
    let mut edge_ids = BTreeSet::new();
    for (line, toks) in edge_rows {
        let line = *line;
        if !(3..=5).contains(&toks.len()) {
            return Err(parse_err(line, "edge rows are '<id> <u> <v> [<length|-> [<value|->]]'"));
        }
        let id = parse_id(toks[0], line, "edge id")?;
        if !edge_ids.insert(id) {
            return Err(parse_err(line, format!("duplicate edge id {id}")));
        }
        let endpoint = |tok: &str| -> Result<usize> {
            let vid = parse_id(tok, line, "vertex id")?;
            index.get(&vid).copied().ok_or_else(|| parse_err(line, format!("edge {id} references unknown vertex {vid}")))
        };
        let (u, v) = (endpoint(toks[1])?, endpoint(toks[2])?);
        let length = parse_opt(toks.get(3), line, "length")?;
        if let Some(l) = length {
            if l <= 0.0 {
                return Err(parse_err(line, format!("edge {id} has non-positive length {l}")));
            }
        }
        let value = parse_opt(toks.get(4), line, "value")?;
        edges.push(Edge { id, u, v, length, value });
    }
    Graph::new(vertices, edges).map_err(|e| match e {
        Error::InvalidGraph(msg) => {
            // point at the first edge row named in the message when possible
            let line = edge_rows
                .iter()
                .find(|(_, t)| msg.contains(&format!("edge {} ", t[0])))
                .map_or(0, |(l, _)| *l);
            parse_err(line, msg)
        }
        other => other,
    })
}

fn parse_station_rows(
    station_rows: &[(usize, Vec<&str>)],
    link_rows: &[(usize, Vec<&str>)],
    options: StationOptions,
) -> Result<LineGraph<f64>> {
    let mut index = HashMap::new();
    let mut vertices = Vec::with_capacity(station_rows.len());
    for (line, toks) in station_rows {
        let line = *line;
        if !(3..=5).contains(&toks.len()) {
            return Err(parse_err(line, "station rows are '<id> <x> <y> [<value|-> [<length>]]'"));
        }
        let id = parse_id(toks[0], line, "station id")?;
        if index.insert(id, vertices.len()).is_some() {
            return Err(parse_err(line, format!("duplicate station id {id}")));
        }
        let coord = [parse_num(toks[1], line, "x")?, parse_num(toks[2], line, "y")?];
        let value = parse_opt(toks.get(3), line, "value")?;
        let length = parse_opt(toks.get(4), line, "length")?;
        if let Some(l) = length {
            if l <= 0.0 {
                return Err(parse_err(line, format!("station {id} has non-positive length {l}")));
            }
        }
        vertices.push(LineVertex { id, source_edge: None, coord: Some(coord), length, value });
    }
    let mut links = Vec::with_capacity(link_rows.len());
    let mut seen = BTreeSet::new();
    for (line, toks) in link_rows {
        let line = *line;
        if toks.len() != 2 {
            return Err(parse_err(line, "link rows are '<id> <id>'"));
        }
        let pos = |tok: &str| -> Result<usize> {
            let sid = parse_id(tok, line, "station id")?;
            index.get(&sid).copied().ok_or_else(|| parse_err(line, format!("link references unknown station {sid}")))
        };
        let (a, b) = (pos(toks[0])?, pos(toks[1])?);
        if a == b {
            return Err(parse_err(line, "a station cannot link to itself"));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(parse_err(line, "duplicate link"));
        }
        links.push((a, b));
    }
    if options.complete_links {
        let coords: Vec<[f64; 2]> = vertices.iter().map(|v| v.coord.expect("stations carry coordinates")).collect();
        links.extend(completion_links(&coords, &links)?);
    }
    LineGraph::from_parts(vertices, &links)
}

/// Links joining the connected groups of stations, closest pairs first.
///
/// Existing links are kept; the returned links are the extra ones a Kruskal
/// sweep over all station pairs needs to connect everything.
pub fn completion_links(coords: &[[f64; 2]], links: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    let n = coords.len();
    let existing: BTreeSet<(usize, usize)> = links.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut candidates: Vec<WeightedEdge<f64>> = existing.iter().map(|&(a, b)| WeightedEdge::new(a, b, 0.0)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if !existing.contains(&(i, j)) {
                // offset keeps every new pair behind the existing links
                candidates.push(WeightedEdge::new(i, j, 1.0 + euclid(coords[i], coords[j])));
            }
        }
    }
    let tree = minimum_spanning_tree(n, &candidates)?;
    Ok(tree.iter().map(|e| e.key()).filter(|k| !existing.contains(k)).collect())
}

pub fn read_graph(path: &Path, options: StationOptions) -> Result<GraphFile> {
    parse_graph(&std::fs::read_to_string(path)?, options)
}

/// Serializes a source graph.
pub fn write_graph(graph: &Graph<f64>) -> String {
    let mut out = String::from("mode graph\nvertices\n");
    for v in graph.vertices() {
        match v.coord {
            Some(c) => {
                let _ = writeln!(out, "{} {} {}", v.id, fmt_f64(c[0]), fmt_f64(c[1]));
            }
            None => {
                let _ = writeln!(out, "{}", v.id);
            }
        }
    }
    out.push_str("edges\n");
    for e in graph.edges() {
        let (u, v) = (graph.vertices()[e.u].id, graph.vertices()[e.v].id);
        let _ = writeln!(out, "{} {u} {v} {} {}", e.id, fmt_opt(e.length), fmt_opt(e.value));
    }
    out
}

/// Serializes a station line graph.
pub fn write_stations(lg: &LineGraph<f64>) -> Result<String> {
    let mut out = String::from("mode stations\nstations\n");
    for v in lg.vertices() {
        let c = v.coord.ok_or_else(|| Error::MetricUnavailable(format!("station {} has no coordinates", v.id)))?;
        let _ = write!(out, "{} {} {} {}", v.id, fmt_f64(c[0]), fmt_f64(c[1]), fmt_opt(v.value));
        if let Some(l) = v.length {
            let _ = write!(out, " {}", fmt_f64(l));
        }
        out.push('\n');
    }
    out.push_str("links\n");
    for (a, b) in lg.edges() {
        let _ = writeln!(out, "{} {}", lg.vertices()[a].id, lg.vertices()[b].id);
    }
    Ok(out)
}

pub fn write_graph_file(file: &GraphFile) -> Result<String> {
    match file {
        GraphFile::Graph(g) => Ok(write_graph(g)),
        GraphFile::Stations(lg) => write_stations(lg),
    }
}

/// Coefficients as CSV: `kind,position,vertex,value,scale,level`.
///
/// `vertex` is the line-graph vertex index; details come in removal order.
pub fn write_coefficients(c: &CoefficientSet<f64>) -> String {
    let mut out = String::from("kind,position,vertex,value,scale,level\n");
    for (i, ((&id, &d), &s)) in c.detail_ids.iter().zip(&c.details).zip(&c.scales).enumerate() {
        let level = c.levels.as_ref().map_or(String::new(), |l| l[i].to_string());
        let _ = writeln!(out, "detail,{i},{id},{},{},{level}", fmt_f64(d), fmt_f64(s));
    }
    for (i, (&id, &v)) in c.scaling_ids.iter().zip(&c.scaling).enumerate() {
        let _ = writeln!(out, "scaling,{i},{id},{},,", fmt_f64(v));
    }
    out
}

pub fn parse_coefficients(text: &str) -> Result<CoefficientSet<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "kind,position,vertex,value,scale,level" => {}
        _ => return Err(parse_err(1, "missing coefficient header")),
    }
    let mut c = CoefficientSet {
        detail_ids: Vec::new(),
        details: Vec::new(),
        scales: Vec::new(),
        scaling_ids: Vec::new(),
        scaling: Vec::new(),
        levels: None,
    };
    let mut levels = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let f: Vec<&str> = raw.trim().split(',').collect();
        if f.len() != 6 {
            return Err(parse_err(line, "expected 6 comma-separated fields"));
        }
        let position: usize = f[1].parse().map_err(|_| parse_err(line, "bad position"))?;
        let vertex: usize = f[2].parse().map_err(|_| parse_err(line, "bad vertex index"))?;
        let value = parse_num(f[3], line, "value")?;
        match f[0] {
            "detail" => {
                if position != c.details.len() || !c.scaling.is_empty() {
                    return Err(parse_err(line, "details must come first, in order"));
                }
                c.detail_ids.push(vertex);
                c.details.push(value);
                c.scales.push(parse_num(f[4], line, "scale")?);
                if !f[5].is_empty() {
                    levels.push(f[5].parse().map_err(|_| parse_err(line, "bad level"))?);
                }
            }
            "scaling" => {
                if position != c.scaling.len() {
                    return Err(parse_err(line, "scaling rows out of order"));
                }
                c.scaling_ids.push(vertex);
                c.scaling.push(value);
            }
            other => return Err(parse_err(line, format!("unknown row kind '{other}'"))),
        }
    }
    if !levels.is_empty() {
        if levels.len() != c.details.len() {
            return Err(parse_err(0, "levels must be given for every detail or none"));
        }
        c.levels = Some(levels);
    }
    Ok(c)
}

pub fn write_record(record: &LiftingRecord<f64>) -> Result<String> {
    Ok(serde_json::to_string_pretty(record)?)
}

pub fn parse_record(text: &str) -> Result<LiftingRecord<f64>> {
    Ok(serde_json::from_str(text)?)
}

/// Values by line-graph vertex: `vertex,id,value`.
pub fn write_values(lg: &LineGraph<f64>, values: &[f64]) -> String {
    let mut out = String::from("vertex,id,value\n");
    for (k, (v, x)) in lg.vertices().iter().zip(values).enumerate() {
        let _ = writeln!(out, "{k},{},{}", v.id, fmt_f64(*x));
    }
    out
}

/// Reads the `value` column of a `vertex,id,value` file, ordered by vertex.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut rows = BTreeMap::new();
    for (i, raw) in text.lines().enumerate().skip(1) {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.trim().split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(line, "expected 'vertex,id,value'"));
        }
        let k: usize = f[0].parse().map_err(|_| parse_err(line, "bad vertex index"))?;
        if rows.insert(k, parse_num(f[2], line, "value")?).is_some() {
            return Err(parse_err(line, format!("vertex {k} listed twice")));
        }
    }
    if rows.keys().copied().ne(0..rows.len()) {
        return Err(parse_err(0, "vertex indices must be 0..m without gaps"));
    }
    Ok(rows.into_values().collect())
}

/// Denoising output: a diagnostics block of `#` lines, then one row per edge.
pub fn write_denoise(lg: &LineGraph<f64>, noisy: &[f64], result: &DenoiseResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# sigma,{}", fmt_f64(result.sigma));
    let _ = writeln!(out, "# weight,{}", fmt_f64(result.weight));
    let _ = writeln!(out, "# level,count,min_scale,max_scale,zeroed");
    if let Some(levels) = &result.coefficients.levels {
        for l in 0..result.level_count {
            let members: Vec<usize> = (0..levels.len()).filter(|&i| levels[i] == l).collect();
            let scales = members.iter().map(|&i| result.coefficients.scales[i]);
            let lo = scales.clone().fold(f64::INFINITY, f64::min);
            let hi = scales.fold(f64::NEG_INFINITY, f64::max);
            let zeroed = members.iter().filter(|&&i| result.shrunk[i] == 0.0).count();
            let _ = writeln!(out, "# {l},{},{},{},{zeroed}", members.len(), fmt_f64(lo), fmt_f64(hi));
        }
    }
    out.push_str("edge_id,noisy,estimate,residual\n");
    for ((v, &y), &g) in lg.vertices().iter().zip(noisy).zip(&result.estimates) {
        let _ = writeln!(out, "{},{},{},{}", v.id, fmt_f64(y), fmt_f64(g), fmt_f64(y - g));
    }
    out
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub variant: String,
    pub stopping_time: usize,
    pub levels: Option<usize>,
    pub keep_coarsest: usize,
    pub trajectories: Option<usize>,
    pub seed: u64,
    pub input: Option<String>,
    pub outputs: Vec<String>,
    /// Command-specific settings.
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
    pub version: String,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Matrix as CSV with the coefficient ordering in the first column and the
/// vertex index of each column in the header.
pub fn write_matrix(matrix: &[f64], m: usize, row_labels: &[String]) -> String {
    let mut out = String::from("row");
    for j in 0..m {
        let _ = write!(out, ",v{j}");
    }
    out.push('\n');
    for (i, label) in row_labels.iter().enumerate() {
        out.push_str(label);
        for x in &matrix[i * m..(i + 1) * m] {
            let _ = write!(out, ",{}", fmt_f64(*x));
        }
        out.push('\n');
    }
    out
}
