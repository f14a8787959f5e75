//! Text file formats.
//!
//! ```text
//! cc-instance v1 <n> <m>        cc-truth v1 <n> <epsilon>
//! <u> <v> <cost> <+|->          <label_0> ... <label_{n-1}>
//! ...                           <count> <i_1> ... <i_count>
//!
//! cc-sdp v1 <n> <r> <objective> cc-labels v1 <n>
//! <x_1> ... <x_r>               <label>
//! ...                           ...
//! ```
//!
//! Reals are written in Rust's shortest round-trip form (SDP rows use 17
//! significant digits), so every format reloads bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::{Clustering, Edge, GroundTruth, Instance, Sign};
use crate::sdp::SdpSolution;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            if !line.trim().is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next()
            .ok_or_else(|| Error::parse(self.last + 1, format!("unexpected end of file, expected {what}")))
    }

    fn finish(mut self) -> Result<()> {
        match self.next() {
            Some((line, _)) => Err(Error::parse(line, "trailing content")),
            None => Ok(()),
        }
    }
}

fn field<T: FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{token}'")))
}

fn header<'a>(line: usize, text: &'a str, magic: &str) -> Result<std::str::SplitWhitespace<'a>> {
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some(magic) || tokens.next() != Some("v1") {
        return Err(Error::parse(line, format!("expected header '{magic} v1'")));
    }
    Ok(tokens)
}

pub fn format_instance(instance: &Instance) -> String {
    let mut out = format!("cc-instance v1 {} {}\n", instance.n(), instance.m());
    for e in instance.edges() {
        writeln!(out, "{} {} {} {}", e.u, e.v, e.cost, e.sign).unwrap();
    }
    out
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let (hl, h) = lines.expect("header")?;
    let mut tokens = header(hl, h, "cc-instance")?;
    let n: usize = field(hl, tokens.next(), "vertex count")?;
    let m: usize = field(hl, tokens.next(), "edge count")?;
    let mut seen = std::collections::HashMap::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, text) = lines.expect("edge line")?;
        let mut t = text.split_whitespace();
        let u: usize = field(ln, t.next(), "endpoint")?;
        let v: usize = field(ln, t.next(), "endpoint")?;
        let cost: f64 = field(ln, t.next(), "cost")?;
        let sign = match t.next() {
            Some("+") => Sign::Plus,
            Some("-") => Sign::Minus,
            other => {
                return Err(Error::parse(ln, format!("invalid sign {:?}", other.unwrap_or(""))))
            }
        };
        if t.next().is_some() {
            return Err(Error::parse(ln, "too many fields"));
        }
        if u == v || u.max(v) >= n {
            return Err(Error::parse(ln, format!("invalid edge ({u}, {v}) for n = {n}")));
        }
        if !(0.0..=1.0).contains(&cost) {
            return Err(Error::parse(ln, format!("cost {cost} outside [0, 1]")));
        }
        if let Some(first) = seen.insert((u.min(v), u.max(v)), ln) {
            return Err(Error::parse(
                ln,
                format!("duplicate edge ({u}, {v}), first given on line {first}"),
            ));
        }
        edges.push(Edge::new(u, v, cost, sign));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(ln, format!("more edge lines than the header count {m}")));
    }
    Instance::new(n, edges)
}

pub fn format_truth(truth: &GroundTruth) -> String {
    let labels: Vec<String> = truth.planted.labels().iter().map(|l| l.to_string()).collect();
    let mut out = format!("cc-truth v1 {} {}\n{}\n", truth.planted.n(), truth.epsilon, labels.join(" "));
    out.push_str(&truth.random_edges.len().to_string());
    for i in &truth.random_edges {
        write!(out, " {i}").unwrap();
    }
    out.push('\n');
    out
}

pub fn parse_truth(text: &str) -> Result<GroundTruth> {
    // The label line is empty when n = 0, so blank lines are significant here.
    let all: Vec<&str> = text.lines().collect();
    let get = |i: usize| -> Result<&str> {
        all.get(i)
            .copied()
            .ok_or_else(|| Error::parse(i + 1, "unexpected end of file"))
    };
    let mut tokens = header(1, get(0)?, "cc-truth")?;
    let n: usize = field(1, tokens.next(), "vertex count")?;
    let epsilon: f64 = field(1, tokens.next(), "epsilon")?;
    let labels = get(1)?
        .split_whitespace()
        .map(|t| field(2, Some(t), "label"))
        .collect::<Result<Vec<usize>>>()?;
    if labels.len() != n {
        return Err(Error::parse(2, format!("expected {n} labels, found {}", labels.len())));
    }
    let planted = Clustering::new(labels).map_err(|e| Error::parse(2, e.to_string()))?;
    let mut t = get(2)?.split_whitespace();
    let count: usize = field(3, t.next(), "random edge count")?;
    let random_edges = t.map(|s| field(3, Some(s), "edge index")).collect::<Result<Vec<usize>>>()?;
    if random_edges.len() != count {
        return Err(Error::parse(
            3,
            format!("header says {count} random edges, found {}", random_edges.len()),
        ));
    }
    if random_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::parse(3, "random edge indices must be strictly increasing"));
    }
    if let Some(pos) = all.iter().skip(3).position(|l| !l.trim().is_empty()) {
        return Err(Error::parse(pos + 4, "trailing content"));
    }
    Ok(GroundTruth {
        planted,
        random_edges,
        epsilon,
    })
}

/// `<stem>.truth` next to an instance file.
pub fn truth_path(instance_path: &Path) -> PathBuf {
    instance_path.with_extension("truth")
}

pub fn save_instance(path: &Path, instance: &Instance, truth: Option<&GroundTruth>) -> Result<()> {
    fs::write(path, format_instance(instance))?;
    if let Some(truth) = truth {
        fs::write(truth_path(path), format_truth(truth))?;
    }
    Ok(())
}

/// Loads an instance and, when a `.truth` sidecar exists, its ground truth.
pub fn load_instance(path: &Path) -> Result<(Instance, Option<GroundTruth>)> {
    let instance = parse_instance(&fs::read_to_string(path)?)?;
    let sidecar = truth_path(path);
    let truth = if sidecar.exists() {
        let truth = parse_truth(&fs::read_to_string(&sidecar)?)?;
        truth.validate(&instance)?;
        Some(truth)
    } else {
        None
    };
    Ok((instance, truth))
}

pub fn format_labels(clustering: &Clustering) -> String {
    let mut out = format!("cc-labels v1 {}\n", clustering.n());
    for l in clustering.labels() {
        writeln!(out, "{l}").unwrap();
    }
    out
}

pub fn parse_labels(text: &str) -> Result<Clustering> {
    let mut lines = Lines::new(text);
    let (hl, h) = lines.expect("header")?;
    let n: usize = field(hl, header(hl, h, "cc-labels")?.next(), "vertex count")?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, t) = lines.expect("label")?;
        labels.push(field(ln, Some(t.trim()), "label")?);
    }
    lines.finish()?;
    Clustering::new(labels).map_err(|e| Error::parse(1, e.to_string()))
}

pub fn format_solution(solution: &SdpSolution) -> String {
    let mut out = format!(
        "cc-sdp v1 {} {} {:.16e}\n",
        solution.n(),
        solution.rank(),
        solution.objective
    );
    for u in 0..solution.n() {
        let row: Vec<String> = solution.row(u).iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Reads a solution dump. Only the embedding and objective are stored; the
/// solver trace comes back empty.
pub fn parse_solution(text: &str) -> Result<SdpSolution> {
    let mut lines = Lines::new(text);
    let (hl, h) = lines.expect("header")?;
    let mut tokens = header(hl, h, "cc-sdp")?;
    let n: usize = field(hl, tokens.next(), "vertex count")?;
    let r: usize = field(hl, tokens.next(), "rank")?;
    let objective: f64 = field(hl, tokens.next(), "objective")?;
    let mut embedding = Vec::with_capacity(n * r);
    for _ in 0..n {
        let (ln, t) = lines.expect("embedding row")?;
        let row = t
            .split_whitespace()
            .map(|s| field(ln, Some(s), "coordinate"))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != r {
            return Err(Error::parse(ln, format!("expected {r} coordinates, found {}", row.len())));
        }
        embedding.extend(row);
    }
    lines.finish()?;
    Ok(SdpSolution::from_parts(n, r, embedding, objective))
}
