//! Line-oriented file formats for forests, update streams, queries and
//! Cartesian op streams.

use crate::CliError;
use dynsld::oracle::{Order, Update};
use dynsld::{Edge, EdgeKey, VertexId, Weight};
use std::fmt::Write as _;

/// A parse failure at a 1-based line and column.
fn at(line: usize, col: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("line {line}, col {col}: {msg}"))
}

struct Tokens<'a> {
    line: usize,
    items: Vec<(usize, &'a str)>,
    next: usize,
}

impl<'a> Tokens<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        let mut items = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    items.push((s + 1, &text[s..i]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            items.push((s + 1, &text[s..]));
        }
        Tokens { line, items, next: 0 }
    }

    fn col(&self) -> usize {
        self.items.get(self.next).map_or_else(|| self.items.last().map_or(1, |(c, t)| c + t.len()), |(c, _)| *c)
    }

    fn word(&mut self, what: &str) -> Result<&'a str, CliError> {
        let col = self.col();
        let t = self.items.get(self.next).ok_or_else(|| at(self.line, col, format!("missing {what}")))?;
        self.next += 1;
        Ok(t.1)
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, CliError> {
        let col = self.col();
        let t = self.word(what)?;
        t.parse().map_err(|_| at(self.line, col, format!("invalid {what} `{t}`")))
    }

    fn weight(&mut self) -> Result<Weight, CliError> {
        let col = self.col();
        let w: f64 = self.parse("weight")?;
        Weight::new(w).map_err(|e| at(self.line, col, e))
    }

    fn key(&mut self) -> Result<EdgeKey, CliError> {
        let col = self.col();
        let u: VertexId = self.parse("vertex")?;
        let v: VertexId = self.parse("vertex")?;
        EdgeKey::new(u, v).map_err(|e| at(self.line, col, e))
    }

    fn edge(&mut self) -> Result<Edge, CliError> {
        let key = self.key()?;
        Ok(Edge { weight: self.weight()?, key })
    }

    fn end(&self) -> Result<(), CliError> {
        match self.items.get(self.next) {
            Some((c, t)) => Err(at(self.line, *c, format!("unexpected `{t}`"))),
            None => Ok(()),
        }
    }
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('#')
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForestFile {
    pub num_vertices: usize,
    pub edges: Vec<Edge>,
}

pub fn parse_forest(text: &str) -> Result<ForestFile, CliError> {
    let mut n = None;
    let mut edges = Vec::new();
    for (no, l) in lines(text) {
        let mut t = Tokens::new(no, l);
        let col = t.col();
        match t.word("record")? {
            "n" if n.is_none() => n = Some(t.parse::<usize>("vertex count")?),
            "n" => return Err(at(no, col, "repeated header")),
            "e" if n.is_some() => edges.push(t.edge()?),
            "e" => return Err(at(no, col, "edge before `n` header")),
            other => return Err(at(no, col, format!("unknown record `{other}`"))),
        }
        t.end()?;
    }
    let num_vertices = n.ok_or_else(|| CliError::Input("missing `n` header".into()))?;
    Ok(ForestFile { num_vertices, edges })
}

pub fn write_forest(n: usize, edges: &[Edge]) -> String {
    let mut s = format!("n {n}\n");
    for e in edges {
        writeln!(s, "e {} {} {}", e.key.lo, e.key.hi, e.weight).expect("string write");
    }
    s
}

/// Updates with the line each one starts on.
pub fn parse_updates(text: &str) -> Result<Vec<(usize, Update)>, CliError> {
    let mut out = Vec::new();
    let mut it = lines(text);
    while let Some((no, l)) = it.next() {
        let mut t = Tokens::new(no, l);
        let col = t.col();
        let u = match t.word("update")? {
            "+" => Update::Insert(t.edge()?),
            "-" => Update::Delete(t.key()?),
            op @ ("B+" | "B-") => {
                let k: usize = t.parse("batch size")?;
                t.end()?;
                let mut edges = Vec::with_capacity(k);
                let mut keys = Vec::with_capacity(k);
                for _ in 0..k {
                    let (bno, bl) = it.next().ok_or_else(|| at(no, col, format!("batch of {k} ends early")))?;
                    let mut b = Tokens::new(bno, bl);
                    if op == "B+" {
                        edges.push(b.edge()?);
                    } else {
                        keys.push(b.key()?);
                    }
                    b.end()?;
                }
                out.push((no, if op == "B+" { Update::BatchInsert(edges) } else { Update::BatchDelete(keys) }));
                continue;
            }
            other => return Err(at(no, col, format!("unknown update `{other}`"))),
        };
        t.end()?;
        out.push((no, u));
    }
    Ok(out)
}

pub fn write_updates(updates: &[Update]) -> String {
    let mut s = String::new();
    for u in updates {
        match u {
            Update::Insert(e) => writeln!(s, "+ {} {} {}", e.key.lo, e.key.hi, e.weight),
            Update::Delete(k) => writeln!(s, "- {} {}", k.lo, k.hi),
            Update::BatchInsert(es) => {
                writeln!(s, "B+ {}", es.len()).expect("string write");
                es.iter().try_for_each(|e| writeln!(s, "{} {} {}", e.key.lo, e.key.hi, e.weight))
            }
            Update::BatchDelete(ks) => {
                writeln!(s, "B- {}", ks.len()).expect("string write");
                ks.iter().try_for_each(|k| writeln!(s, "{} {}", k.lo, k.hi))
            }
        }
        .expect("string write");
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Query {
    Threshold(VertexId, VertexId, Weight),
    Size(VertexId, Weight),
    Report(VertexId, Weight),
    Flat(Weight),
}

pub fn parse_queries(text: &str) -> Result<Vec<(usize, Query)>, CliError> {
    let mut out = Vec::new();
    for (no, l) in lines(text) {
        let mut t = Tokens::new(no, l);
        let col = t.col();
        let q = match t.word("query")? {
            "qt" => Query::Threshold(t.parse("vertex")?, t.parse("vertex")?, t.weight()?),
            "qs" => Query::Size(t.parse("vertex")?, t.weight()?),
            "qr" => Query::Report(t.parse("vertex")?, t.weight()?),
            "flat" => Query::Flat(t.weight()?),
            other => return Err(at(no, col, format!("unknown query `{other}`"))),
        };
        t.end()?;
        out.push((no, q));
    }
    Ok(out)
}

/// `{0} {1 2 3}`
pub fn format_clusters(clusters: &[Vec<VertexId>]) -> String {
    clusters.iter().map(|c| format_set(c)).collect::<Vec<_>>().join(" ")
}

pub fn format_set(c: &[VertexId]) -> String {
    let inner: Vec<String> = c.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", inner.join(" "))
}

#[derive(Clone, Debug, PartialEq)]
pub enum CartesianOp {
    PushFront(Weight),
    PushBack(Weight),
    PopFront,
    PopBack,
    InsertAt(usize, Weight),
    DeleteAt(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CartesianFile {
    pub order: Order,
    pub values: Vec<Weight>,
    pub ops: Vec<(usize, CartesianOp)>,
}

/// A `build min|max v...` line followed by one op per line.
pub fn parse_cartesian(text: &str) -> Result<CartesianFile, CliError> {
    let mut it = lines(text);
    let (no, l) = it.next().ok_or_else(|| CliError::Input("missing `build` line".into()))?;
    let mut t = Tokens::new(no, l);
    let col = t.col();
    if t.word("build")? != "build" {
        return Err(at(no, col, "expected `build`"));
    }
    let col = t.col();
    let order = match t.word("order")? {
        "min" => Order::MinRoot,
        "max" => Order::MaxRoot,
        other => return Err(at(no, col, format!("unknown order `{other}`"))),
    };
    let mut values = Vec::new();
    while t.next < t.items.len() {
        values.push(t.weight()?);
    }
    let mut ops = Vec::new();
    for (no, l) in it {
        let mut t = Tokens::new(no, l);
        let col = t.col();
        let op = match t.word("op")? {
            "push_front" => CartesianOp::PushFront(t.weight()?),
            "push_back" => CartesianOp::PushBack(t.weight()?),
            "pop_front" => CartesianOp::PopFront,
            "pop_back" => CartesianOp::PopBack,
            "insert" => CartesianOp::InsertAt(t.parse("position")?, t.weight()?),
            "delete" => CartesianOp::DeleteAt(t.parse("position")?),
            other => return Err(at(no, col, format!("unknown op `{other}`"))),
        };
        t.end()?;
        ops.push((no, op));
    }
    Ok(CartesianFile { order, values, ops })
}
