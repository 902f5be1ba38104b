//! Minimal reader for the GML files used by common network datasets.
//!
//! Only the subset needed to recover an undirected graph is interpreted:
//! `node [ id .. label .. <attrs> ]` and `edge [ source .. target .. ]` inside
//! a top-level `graph [ .. ]`. Unknown keys are kept as attributes or skipped.

use std::collections::BTreeMap;

use crate::error::{GcError, Result};
use crate::graph::{GraphBuilder, LoadedGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum GmlValue {
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<(String, GmlValue)>),
}

impl GmlValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            GmlValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    /// Scalar rendered as text, used for grouping by attribute.
    pub fn as_text(&self) -> Option<String> {
        match self {
            GmlValue::Int(v) => Some(v.to_string()),
            GmlValue::Float(v) => Some(v.to_string()),
            GmlValue::Str(s) => Some(s.clone()),
            GmlValue::List(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmlNode {
    pub id: i64,
    pub label: Option<String>,
    pub attributes: BTreeMap<String, GmlValue>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GmlGraph {
    pub directed: bool,
    pub nodes: Vec<GmlNode>,
    pub edges: Vec<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Key(String),
    Int(i64),
    Float(f64),
    Str(String),
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '[' => {
                tokens.push((line, Token::Open));
                chars.next();
            }
            ']' => {
                tokens.push((line, Token::Close));
                chars.next();
            }
            '"' => {
                let start = line;
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some(c) => {
                            if c == '\n' {
                                line += 1;
                            }
                            s.push(c);
                        }
                        None => {
                            return Err(GcError::Parse { line: start, message: "unterminated string".into() })
                        }
                    }
                }
                tokens.push((start, Token::Str(s)));
            }
            _ => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '[' || c == ']' || c == '"' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                let token = if word.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
                    Token::Key(word)
                } else if let Ok(v) = word.parse::<i64>() {
                    Token::Int(v)
                } else if let Ok(v) = word.parse::<f64>() {
                    Token::Float(v)
                } else {
                    return Err(GcError::Parse { line, message: format!("unexpected token {word:?}") });
                };
                tokens.push((line, token));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map_or(1, |(l, _)| *l)
    }

    fn error(&self, message: impl Into<String>) -> GcError {
        GcError::Parse { line: self.line(), message: message.into() }
    }

    /// Key/value pairs until `]` (nested) or end of input (top level).
    fn list(&mut self, nested: bool) -> Result<Vec<(String, GmlValue)>> {
        let mut items = Vec::new();
        loop {
            let Some((_, token)) = self.tokens.get(self.pos).cloned() else {
                if nested {
                    return Err(self.error("missing closing ]"));
                }
                return Ok(items);
            };
            self.pos += 1;
            let key = match token {
                Token::Close if nested => return Ok(items),
                Token::Key(k) => k,
                other => {
                    self.pos -= 1;
                    return Err(self.error(format!("expected a key, found {other:?}")));
                }
            };
            let Some((_, token)) = self.tokens.get(self.pos).cloned() else {
                return Err(self.error(format!("key {key:?} has no value")));
            };
            self.pos += 1;
            let value = match token {
                Token::Int(v) => GmlValue::Int(v),
                Token::Float(v) => GmlValue::Float(v),
                Token::Str(s) => GmlValue::Str(s),
                Token::Open => GmlValue::List(self.list(true)?),
                other => {
                    self.pos -= 1;
                    return Err(self.error(format!("key {key:?} has invalid value {other:?}")));
                }
            };
            items.push((key, value));
        }
    }
}

fn field<'a>(items: &'a [(String, GmlValue)], key: &str) -> Option<&'a GmlValue> {
    items.iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

/// Parses GML text.
pub fn parse_gml(text: &str) -> Result<GmlGraph> {
    let mut parser = Parser { tokens: tokenize(text)?, pos: 0 };
    let top = parser.list(false)?;
    let Some(GmlValue::List(body)) = field(&top, "graph") else {
        return Err(GcError::Parse { line: 1, message: "no graph [ ... ] block".into() });
    };
    let mut graph = GmlGraph {
        directed: field(body, "directed").and_then(GmlValue::as_int).unwrap_or(0) != 0,
        ..GmlGraph::default()
    };
    for (key, value) in body {
        let GmlValue::List(items) = value else { continue };
        match key.as_str() {
            "node" => {
                let id = field(items, "id")
                    .and_then(GmlValue::as_int)
                    .ok_or_else(|| GcError::Parse { line: 0, message: "node without integer id".into() })?;
                let label = match field(items, "label") {
                    Some(GmlValue::Str(s)) => Some(s.clone()),
                    Some(other) => other.as_text(),
                    None => None,
                };
                let attributes = items
                    .iter()
                    .filter(|(k, _)| k != "id" && k != "label")
                    .cloned()
                    .collect();
                graph.nodes.push(GmlNode { id, label, attributes });
            }
            "edge" => {
                let end = |name: &str| {
                    field(items, name).and_then(GmlValue::as_int).ok_or_else(|| GcError::Parse {
                        line: 0,
                        message: format!("edge without integer {name}"),
                    })
                };
                graph.edges.push((end("source")?, end("target")?));
            }
            _ => {}
        }
    }
    Ok(graph)
}

impl GmlGraph {
    /// Builds an undirected graph named by node labels (or ids when a label is
    /// missing). With `group_attribute`, nodes are grouped by the attribute's
    /// value, renamed through `group_names` when given.
    pub fn to_loaded(
        &self,
        group_attribute: Option<&str>,
        group_names: Option<&BTreeMap<String, String>>,
    ) -> Result<LoadedGraph> {
        let mut by_id = BTreeMap::new();
        let mut builder = GraphBuilder::new();
        for node in &self.nodes {
            let name = node.label.clone().unwrap_or_else(|| node.id.to_string());
            if by_id.insert(node.id, name.clone()).is_some() {
                return Err(GcError::Parse { line: 0, message: format!("duplicate node id {}", node.id) });
            }
            let before = by_id.len();
            let id = builder.add_node(&name);
            if id + 1 != before {
                return Err(GcError::Parse { line: 0, message: format!("duplicate node label {name:?}") });
            }
            if let Some(attr) = group_attribute {
                if let Some(value) = node.attributes.get(attr).and_then(GmlValue::as_text) {
                    let group = match group_names {
                        Some(names) => match names.get(&value) {
                            Some(g) => g.clone(),
                            None => continue,
                        },
                        None => value,
                    };
                    builder.add_to_group(&group, id)?;
                }
            }
        }
        for &(s, t) in &self.edges {
            let lookup = |id: i64| {
                by_id.get(&id).ok_or_else(|| GcError::Parse {
                    line: 0,
                    message: format!("edge refers to unknown node {id}"),
                })
            };
            let (a, b) = (lookup(s)?.clone(), lookup(t)?.clone());
            builder.add_edge(&a, &b);
        }
        Ok(builder.build())
    }
}
