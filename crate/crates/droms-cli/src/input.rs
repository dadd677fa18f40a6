//! Query-file parsing: a graph, named subgroups and an optional query, in
//! either a line-oriented text format or a JSON mirror.
//!
//! Text format:
//!
//! ```text
//! vertices: a b t
//! edges: a-t b-t
//! subgroup H = a ; b
//! subgroup K = t a ; b
//! query intersect H K
//! query coset-intersect H K = a b ; b a
//! ```
//!
//! JSON mirror:
//!
//! ```json
//! {"vertices": ["a","b","t"], "edges": [["a","t"],["b","t"]],
//!  "subgroups": {"H": ["a","b"]},
//!  "query": {"op": "intersect", "args": ["H","K"], "words": []}}
//! ```

use std::collections::BTreeMap;

/// A parsed query file, still at the string level (word parsing needs the
/// validated graph).
#[derive(Debug, Clone, Default)]
pub struct QueryFile {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub subgroups: BTreeMap<String, Vec<String>>,
    pub query: Option<Query>,
}

/// The optional `query` line: an operation name, subgroup-name arguments
/// and word arguments.
#[derive(Debug, Clone)]
pub struct Query {
    pub op: String,
    pub args: Vec<String>,
    pub words: Vec<String>,
}

/// Parses either format, chosen by the first non-blank character.
pub fn parse(text: &str) -> Result<QueryFile, String> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text)
    }
}

fn parse_text(text: &str) -> Result<QueryFile, String> {
    let mut file = QueryFile::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| format!("line {}: {msg}: {line}", lineno + 1);
        if let Some(rest) = line.strip_prefix("vertices:") {
            file.vertices = rest.split_whitespace().map(str::to_string).collect();
        } else if let Some(rest) = line.strip_prefix("edges:") {
            for pair in rest.split_whitespace() {
                let (u, v) = pair
                    .split_once('-')
                    .ok_or_else(|| err("edge must be name-name"))?;
                file.edges.push((u.to_string(), v.to_string()));
            }
        } else if let Some(rest) = line.strip_prefix("subgroup ") {
            let (name, gens) = rest
                .split_once('=')
                .ok_or_else(|| err("subgroup line must contain '='"))?;
            let name = name.trim().to_string();
            if name.is_empty() {
                return Err(err("missing subgroup name"));
            }
            let gens: Vec<String> = split_words(gens);
            file.subgroups.insert(name, gens);
        } else if let Some(rest) = line.strip_prefix("query ") {
            let (head, words) = match rest.split_once('=') {
                Some((head, words)) => (head, split_words(words)),
                None => (rest, Vec::new()),
            };
            let mut tokens = head.split_whitespace().map(str::to_string);
            let op = tokens.next().ok_or_else(|| err("missing query operation"))?;
            file.query = Some(Query {
                op,
                args: tokens.collect(),
                words,
            });
        } else {
            return Err(err("unrecognised line"));
        }
    }
    Ok(file)
}

/// Splits a `;`-separated word list, dropping empty entries.
fn split_words(text: &str) -> Vec<String> {
    text.split(';')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_json(text: &str) -> Result<QueryFile, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("top-level JSON must be an object")?;
    let mut file = QueryFile::default();
    if let Some(v) = obj.get("vertices") {
        file.vertices = string_list(v, "vertices")?;
    }
    if let Some(v) = obj.get("edges") {
        let arr = v.as_array().ok_or("edges must be an array")?;
        for e in arr {
            let pair = string_list(e, "edge")?;
            if pair.len() != 2 {
                return Err(format!("edge must have two endpoints: {e}"));
            }
            file.edges.push((pair[0].clone(), pair[1].clone()));
        }
    }
    if let Some(v) = obj.get("subgroups") {
        let map = v.as_object().ok_or("subgroups must be an object")?;
        for (name, gens) in map {
            file.subgroups
                .insert(name.clone(), string_list(gens, "subgroup generators")?);
        }
    }
    if let Some(v) = obj.get("query") {
        let q = v.as_object().ok_or("query must be an object")?;
        let op = q
            .get("op")
            .and_then(|o| o.as_str())
            .ok_or("query.op must be a string")?
            .to_string();
        let args = match q.get("args") {
            Some(a) => string_list(a, "query.args")?,
            None => Vec::new(),
        };
        let words = match q.get("words") {
            Some(w) => string_list(w, "query.words")?,
            None => Vec::new(),
        };
        file.query = Some(Query { op, args, words });
    }
    Ok(file)
}

fn string_list(value: &serde_json::Value, what: &str) -> Result<Vec<String>, String> {
    let arr = value
        .as_array()
        .ok_or_else(|| format!("{what} must be an array"))?;
    arr.iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| format!("{what} entries must be strings"))
        })
        .collect()
}
