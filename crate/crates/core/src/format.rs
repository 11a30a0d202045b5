//! File formats: frames and models (text or JSON), point maps, and verdict
//! records.
//!
//! Text frames look like
//!
//! ```text
//! points: x xp y z
//! leq: y<=x y<=xp z<=x z<=xp   # reflexive pairs are implied
//! val: p = y
//! ```
//!
//! Transitive pairs must be listed; a non-transitive relation is rejected.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::FinOrder;
use crate::pmorphism::OrderMap;
use crate::semantics::{Model, Verdict};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Text,
    Structured,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub points: Vec<String>,
    /// `(below, above)` pairs.
    #[serde(default)]
    pub leq: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRecord {
    #[serde(flatten)]
    pub frame: FrameRecord,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub val: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictRecord {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valuation: Option<BTreeMap<String, Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
}

fn format_err(file: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn check_name(name: &str) -> std::result::Result<(), String> {
    let bad = name.is_empty()
        || name.contains(['#', '=', '<', '>', ','])
        || name.chars().any(char::is_whitespace);
    if bad {
        Err(format!("invalid point name `{name}`"))
    } else {
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Reads a model in either format; input starting with `{` is JSON.
pub fn parse_model(text: &str, file: &str) -> Result<Model> {
    let record = if text.trim_start().starts_with('{') {
        let rec: ModelRecord =
            serde_json::from_str(text).map_err(|e| format_err(file, e.line(), e.to_string()))?;
        for p in &rec.frame.points {
            check_name(p).map_err(|m| format_err(file, 0, m))?;
        }
        rec
    } else {
        parse_text(text, file)?
    };
    record_to_model(&record, file)
}

/// Reads a frame; valuation lines, if present, are ignored.
pub fn parse_frame(text: &str, file: &str) -> Result<FinOrder> {
    parse_model(text, file).map(|m| m.frame)
}

fn parse_text(text: &str, file: &str) -> Result<ModelRecord> {
    let mut points: Vec<String> = Vec::new();
    let mut leq = Vec::new();
    let mut val = BTreeMap::new();
    let mut seen_points = false;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| format_err(file, lineno, "expected `points:`, `leq:` or `val:`"))?;
        match key.trim() {
            "points" => {
                seen_points = true;
                for p in rest.split_whitespace() {
                    check_name(p).map_err(|m| format_err(file, lineno, m))?;
                    points.push(p.to_string());
                }
            }
            "leq" => {
                let spaced = rest.replace("<=", " <= ");
                let toks: Vec<&str> = spaced.split_whitespace().collect();
                let mut k = 0;
                while k < toks.len() {
                    if toks.get(k + 1) != Some(&"<=") || k + 2 >= toks.len() || toks[k] == "<=" {
                        return Err(format_err(file, lineno, "expected pairs of the form a<=b"));
                    }
                    leq.push((toks[k].to_string(), toks[k + 2].to_string()));
                    k += 3;
                }
            }
            "val" => {
                let (letter, pts) = rest
                    .split_once('=')
                    .ok_or_else(|| format_err(file, lineno, "expected `val: letter = points`"))?;
                let letter = letter.trim();
                let ok = letter.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                    && letter.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !ok {
                    return Err(format_err(file, lineno, format!("invalid letter `{letter}`")));
                }
                if val.contains_key(letter) {
                    return Err(format_err(file, lineno, format!("letter `{letter}` assigned twice")));
                }
                val.insert(
                    letter.to_string(),
                    pts.split_whitespace().map(String::from).collect(),
                );
            }
            other => return Err(format_err(file, lineno, format!("unknown directive `{other}`"))),
        }
    }
    if !seen_points {
        return Err(format_err(file, 0, "missing `points:` line"));
    }
    Ok(ModelRecord {
        frame: FrameRecord { points, leq },
        val,
    })
}

fn record_to_model(rec: &ModelRecord, file: &str) -> Result<Model> {
    let names = &rec.frame.points;
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    if index.len() != names.len() {
        return Err(format_err(file, 0, "duplicate point name"));
    }
    let look = |p: &str| index.get(p).copied().ok_or_else(|| Error::UnknownPoint(p.to_string()));
    let pairs = rec
        .frame
        .leq
        .iter()
        .map(|(a, b)| Ok((look(a)?, look(b)?)))
        .collect::<Result<Vec<_>>>()?;
    let frame = FinOrder::from_pairs(names.clone(), &pairs)?;
    let mut model = Model::new(frame);
    for (letter, pts) in &rec.val {
        let mut set = model.frame.empty_set();
        for p in pts {
            set.insert(look(p)?);
        }
        model.valuation.insert(letter.clone(), set);
    }
    Ok(model)
}

pub fn frame_record(frame: &FinOrder) -> FrameRecord {
    FrameRecord {
        points: frame.names().to_vec(),
        leq: frame
            .strict_pairs()
            .into_iter()
            .map(|(a, b)| (frame.name(a).to_string(), frame.name(b).to_string()))
            .collect(),
    }
}

fn valuation_record(model: &Model) -> BTreeMap<String, Vec<String>> {
    model
        .valuation
        .iter()
        .map(|(k, set)| (k.clone(), set.ones().map(|i| model.frame.name(i).to_string()).collect()))
        .collect()
}

pub fn model_record(model: &Model) -> ModelRecord {
    ModelRecord {
        frame: frame_record(&model.frame),
        val: valuation_record(model),
    }
}

/// Writes a model; frames are models with an empty valuation.
pub fn write_model(model: &Model, format: OutputFormat) -> String {
    match format {
        OutputFormat::Structured => {
            let mut s = serde_json::to_string(&model_record(model)).expect("serializable");
            s.push('\n');
            s
        }
        OutputFormat::Text => {
            let frame = &model.frame;
            let mut out = format!("points: {}\n", frame.names().join(" "));
            let pairs = frame.strict_pairs();
            if !pairs.is_empty() {
                let body: Vec<String> = pairs
                    .iter()
                    .map(|&(a, b)| format!("{}<={}", frame.name(a), frame.name(b)))
                    .collect();
                out.push_str(&format!("leq: {}\n", body.join(" ")));
            }
            for (letter, pts) in valuation_record(model) {
                if pts.is_empty() {
                    out.push_str(&format!("val: {letter} =\n"));
                } else {
                    out.push_str(&format!("val: {letter} = {}\n", pts.join(" ")));
                }
            }
            out
        }
    }
}

pub fn write_frame(frame: &FinOrder, format: OutputFormat) -> String {
    write_model(&Model::new(frame.clone()), format)
}

/// Reads `source_point -> target_point` lines. Every source point must be
/// mapped exactly once.
pub fn parse_map(text: &str, file: &str, source: &FinOrder, target: &FinOrder) -> Result<OrderMap> {
    let mut map = vec![None; source.len()];
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once("->")
            .ok_or_else(|| format_err(file, lineno, "expected `source -> target`"))?;
        let x = source
            .index_of(a.trim())
            .map_err(|e| format_err(file, lineno, e.to_string()))?;
        let y = target
            .index_of(b.trim())
            .map_err(|e| format_err(file, lineno, e.to_string()))?;
        if map[x].replace(y).is_some() {
            return Err(format_err(file, lineno, format!("point `{}` mapped twice", a.trim())));
        }
    }
    let map = map
        .into_iter()
        .enumerate()
        .map(|(x, y)| y.ok_or_else(|| Error::Map(format!("point `{}` is not mapped", source.name(x)))))
        .collect::<Result<Vec<_>>>()?;
    OrderMap::new(source.clone(), target.clone(), map)
}

pub fn write_map(map: &OrderMap) -> String {
    (0..map.source.len())
        .map(|x| format!("{} -> {}\n", map.source.name(x), map.target.name(map.apply(x))))
        .collect()
}

pub fn verdict_record(verdict: &Verdict) -> VerdictRecord {
    match &verdict.countermodel {
        None => VerdictRecord {
            valid: verdict.valid,
            frame: None,
            valuation: None,
            point: None,
        },
        Some(cm) => VerdictRecord {
            valid: verdict.valid,
            frame: Some(frame_record(&cm.model.frame)),
            valuation: Some(valuation_record(&cm.model)),
            point: Some(cm.model.frame.name(cm.point).to_string()),
        },
    }
}
