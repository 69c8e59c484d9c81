//! Text formats: `.forest`, `.mtl` and `.lforest`.
//!
//! All three are line based. Blank lines and anything after `#` are ignored.
//! Writers are deterministic and their output parses back to the same value.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::construct::{ConstructError, LabeledForest};
use crate::duality::lukasiewicz_name;
use crate::mtl::{FiniteMtl, MtlError, MtlTables};
use crate::poset::{Forest, Poset, PosetError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Algebra { line: usize, source: MtlError },
    #[error("line {line}: {source}")]
    Forest { line: usize, source: PosetError },
    #[error("line {line}: {source}")]
    Label { line: usize, source: ConstructError },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Nested { path: PathBuf, source: Box<IoError> },
}

impl IoError {
    fn parse(line: usize, message: impl Into<String>) -> IoError {
        IoError::Parse { line, message: message.into() }
    }
}

// (line number, tokens) for every non-empty line
fn lines(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(k, l)| {
            let l = l.split('#').next().unwrap_or("");
            let toks: Vec<&str> = l.split_whitespace().collect();
            (!toks.is_empty()).then_some((k + 1, toks))
        })
        .collect()
}

fn number(line: usize, tok: &str, what: &str) -> Result<usize, IoError> {
    tok.parse().map_err(|_| IoError::parse(line, format!("{what}: expected a number, found `{tok}`")))
}

fn arity(line: usize, toks: &[&str], want: usize) -> Result<(), IoError> {
    if toks.len() != want {
        return Err(IoError::parse(line, format!("`{}` takes {} argument(s)", toks[0], want - 1)));
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

struct ForestBlock {
    n: usize,
    names: Vec<Option<String>>,
    edges: Vec<(usize, usize)>,
    last_line: usize,
}

// Consumes `nodes`, `name` and `edge` lines; returns the unused lines.
fn forest_block<'a>(rows: &'a [(usize, Vec<&'a str>)]) -> Result<(ForestBlock, Vec<&'a (usize, Vec<&'a str>)>), IoError> {
    let mut n = None;
    let mut names = Vec::new();
    let mut edges = Vec::new();
    let mut rest = Vec::new();
    let mut last_line = 0;
    for row in rows {
        let (line, toks) = (row.0, &row.1);
        last_line = line;
        match toks[0] {
            "nodes" => {
                arity(line, toks, 2)?;
                if n.is_some() {
                    return Err(IoError::parse(line, "duplicate `nodes` header"));
                }
                let k = number(line, toks[1], "nodes")?;
                if k > crate::poset::MAX_NODES {
                    return Err(IoError::parse(line, format!("at most {} nodes are supported", crate::poset::MAX_NODES)));
                }
                n = Some(k);
                names = vec![None; k];
            }
            "name" => {
                let k = n.ok_or_else(|| IoError::parse(line, "`name` before `nodes`"))?;
                arity(line, toks, 3)?;
                let i = number(line, toks[1], "node")?;
                if i >= k {
                    return Err(IoError::parse(line, format!("node {i} out of range")));
                }
                names[i] = Some(toks[2].to_string());
            }
            "edge" => {
                let k = n.ok_or_else(|| IoError::parse(line, "`edge` before `nodes`"))?;
                arity(line, toks, 3)?;
                let i = number(line, toks[1], "node")?;
                let j = number(line, toks[2], "node")?;
                if i >= k || j >= k {
                    return Err(IoError::parse(line, format!("edge {i} {j} out of range")));
                }
                edges.push((i, j));
                // remember where the edge came from for error reporting
                last_line = line;
            }
            _ => rest.push(row),
        }
    }
    let n = n.ok_or_else(|| IoError::parse(1, "missing `nodes` header"))?;
    Ok((ForestBlock { n, names, edges, last_line }, rest))
}

fn build_forest(b: &ForestBlock) -> Result<Forest, IoError> {
    let poset = Poset::from_covers(b.n, &b.edges)
        .map_err(|source| IoError::Forest { line: b.last_line, source })?
        .with_names(b.names.clone());
    Forest::new(poset).map_err(|source| IoError::Forest { line: b.last_line, source })
}

pub fn parse_forest(text: &str) -> Result<Forest, IoError> {
    let rows = lines(text);
    let (block, rest) = forest_block(&rows)?;
    if let Some((line, toks)) = rest.first() {
        return Err(IoError::parse(*line, format!("unknown directive `{}`", toks[0])));
    }
    build_forest(&block)
}

pub fn write_forest(f: &Forest) -> String {
    let mut s = String::new();
    write_forest_block(&mut s, f);
    s
}

fn write_forest_block(s: &mut String, f: &Forest) {
    writeln!(s, "nodes {}", f.len()).unwrap();
    for (i, name) in f.names().iter().enumerate() {
        if let Some(name) = name {
            writeln!(s, "name {i} {name}").unwrap();
        }
    }
    for (i, j) in f.cover_edges() {
        writeln!(s, "edge {i} {j}").unwrap();
    }
}

pub fn parse_mtl(text: &str) -> Result<FiniteMtl, IoError> {
    let rows = lines(text);
    let mut n = None;
    let mut bot = None;
    let mut top = None;
    let mut tables: [Option<Vec<Vec<usize>>>; 4] = Default::default();
    let mut k = 0;
    let mut last = 1;
    while k < rows.len() {
        let (line, toks) = (rows[k].0, &rows[k].1);
        last = line;
        k += 1;
        match toks[0] {
            "n" | "bot" | "top" => {
                arity(line, toks, 2)?;
                let v = number(line, toks[1], toks[0])?;
                let slot = match toks[0] {
                    "n" => &mut n,
                    "bot" => &mut bot,
                    _ => &mut top,
                };
                if slot.replace(v).is_some() {
                    return Err(IoError::parse(line, format!("duplicate `{}`", toks[0])));
                }
            }
            "mul" | "imp" | "meet" | "join" => {
                arity(line, toks, 1)?;
                let size = n.ok_or_else(|| IoError::parse(line, "table before `n`"))?;
                let slot = ["mul", "imp", "meet", "join"].iter().position(|t| *t == toks[0]).unwrap();
                if tables[slot].is_some() {
                    return Err(IoError::parse(line, format!("duplicate table `{}`", toks[0])));
                }
                let mut rows_out = Vec::with_capacity(size);
                for r in 0..size {
                    let Some((rl, rt)) = rows.get(k) else {
                        return Err(IoError::parse(line, format!("table `{}` has {r} of {size} rows", toks[0])));
                    };
                    if rt.len() != size {
                        return Err(IoError::parse(*rl, format!("row has {} entries, expected {size}", rt.len())));
                    }
                    let row = rt.iter().map(|t| number(*rl, t, "entry")).collect::<Result<Vec<_>, _>>()?;
                    if let Some(v) = row.iter().find(|&&v| v >= size) {
                        return Err(IoError::parse(*rl, format!("entry {v} out of range")));
                    }
                    rows_out.push(row);
                    k += 1;
                }
                tables[slot] = Some(rows_out);
            }
            other => return Err(IoError::parse(line, format!("unknown directive `{other}`"))),
        }
    }
    let need = |v: Option<usize>, what: &str| v.ok_or_else(|| IoError::parse(last, format!("missing `{what}`")));
    let [mul, imp, meet, join] = tables;
    let t = MtlTables {
        n: need(n, "n")?,
        bot: need(bot, "bot")?,
        top: need(top, "top")?,
        mul: mul.ok_or_else(|| IoError::parse(last, "missing table `mul`"))?,
        imp: imp.ok_or_else(|| IoError::parse(last, "missing table `imp`"))?,
        meet,
        join,
    };
    FiniteMtl::validate(&t).map_err(|source| IoError::Algebra { line: last, source })
}

/// Writes `n`, `bot`, `top`, `mul` and `imp`; the lattice tables are left
/// to be derived on reading.
pub fn write_mtl(a: &FiniteMtl) -> String {
    let t = a.tables();
    let mut s = String::new();
    writeln!(s, "n {}", t.n).unwrap();
    writeln!(s, "bot {}", t.bot).unwrap();
    writeln!(s, "top {}", t.top).unwrap();
    for (name, table) in [("mul", &t.mul), ("imp", &t.imp)] {
        writeln!(s, "{name}").unwrap();
        for row in table {
            let row: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{}", row.join(" ")).unwrap();
        }
    }
    s
}

/// Parses a `.lforest` file. `@file` labels are resolved against `base`.
/// Unlabelled nodes get the two-element chain.
pub fn parse_labeled_forest(text: &str, base: Option<&Path>) -> Result<LabeledForest, IoError> {
    let rows = lines(text);
    let (block, rest) = forest_block(&rows)?;
    let forest = build_forest(&block)?;
    let mut labels: Vec<Option<FiniteMtl>> = vec![None; block.n];
    let mut last = block.last_line;
    for (line, toks) in rest {
        let line = *line;
        last = line;
        if toks[0] != "label" {
            return Err(IoError::parse(line, format!("unknown directive `{}`", toks[0])));
        }
        if toks.len() != 4 || toks[2] != "=" {
            return Err(IoError::parse(line, "expected `label <node> = L<k>` or `label <node> = @<file>`"));
        }
        let node = match toks[1].parse::<usize>() {
            Ok(i) if i < block.n => i,
            Ok(i) => return Err(IoError::parse(line, format!("node {i} out of range"))),
            Err(_) => forest
                .node_by_name(toks[1])
                .ok_or_else(|| IoError::parse(line, format!("no node named `{}`", toks[1])))?,
        };
        let chain = if let Some(k) = toks[3].strip_prefix('L') {
            let k = number(line, k, "chain size")?;
            if k < 2 {
                return Err(IoError::parse(line, "L<k> needs k >= 2"));
            }
            FiniteMtl::lukasiewicz(k)
        } else if let Some(file) = toks[3].strip_prefix('@') {
            let path = base.map(|b| b.join(file)).unwrap_or_else(|| PathBuf::from(file));
            read_mtl(&path).map_err(|e| IoError::Parse { line, message: e.to_string() })?
        } else {
            return Err(IoError::parse(line, format!("unknown label `{}`", toks[3])));
        };
        let single = LabeledForest::new(
            Forest::new(Poset::antichain(1)).expect("a point is a forest"),
            vec![chain.clone()],
        );
        if let Err(source) = single {
            return Err(IoError::Label { line, source: relabel_node(source, node) });
        }
        if labels[node].replace(chain).is_some() {
            return Err(IoError::parse(line, format!("node {node} labelled twice")));
        }
    }
    let labels = labels.into_iter().map(|l| l.unwrap_or_else(FiniteMtl::boolean)).collect();
    LabeledForest::new(forest, labels).map_err(|source| IoError::Label { line: last, source })
}

fn relabel_node(e: ConstructError, node: usize) -> ConstructError {
    match e {
        ConstructError::TrivialLabel { .. } => ConstructError::TrivialLabel { node },
        ConstructError::LabelNotChain { .. } => ConstructError::LabelNotChain { node },
        ConstructError::LabelNotArchimedean { .. } => ConstructError::LabelNotArchimedean { node },
        other => other,
    }
}

/// Writes a `.lforest`. Łukasiewicz labels are written inline; any other
/// label is referenced as `@label<i>.mtl` and returned with its file name.
pub fn write_labeled_forest(l: &LabeledForest) -> (String, Vec<(String, String)>) {
    let mut s = String::new();
    let mut files = Vec::new();
    write_forest_block(&mut s, l.forest());
    for (i, label) in l.labels().iter().enumerate() {
        match lukasiewicz_name(label) {
            Some(name) => writeln!(s, "label {i} = {name}").unwrap(),
            None => {
                let file = format!("label{i}.mtl");
                writeln!(s, "label {i} = @{file}").unwrap();
                files.push((file, write_mtl(label)));
            }
        }
    }
    (s, files)
}

pub fn read_forest(path: &Path) -> Result<Forest, IoError> {
    parse_forest(&read(path)?).map_err(|e| nest(path, e))
}

pub fn read_mtl(path: &Path) -> Result<FiniteMtl, IoError> {
    parse_mtl(&read(path)?).map_err(|e| nest(path, e))
}

pub fn read_labeled_forest(path: &Path) -> Result<LabeledForest, IoError> {
    parse_labeled_forest(&read(path)?, path.parent()).map_err(|e| nest(path, e))
}

fn nest(path: &Path, e: IoError) -> IoError {
    match e {
        e @ (IoError::File { .. } | IoError::Nested { .. }) => e,
        e => IoError::Nested { path: path.to_path_buf(), source: Box::new(e) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forest_roundtrip() {
        let text = "nodes 3\nname 0 r\nedge 0 1\nedge 0 2\n";
        let f = parse_forest(text).unwrap();
        assert_eq!(f.upper_covers(0).len(), 2);
        assert_eq!(write_forest(&f), text);
    }

    #[test]
    fn forest_errors_carry_lines() {
        let e = parse_forest("nodes 2\n\nedge 0 5\n").unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 3, .. }));
        // a diamond is not a forest
        let e = parse_forest("nodes 4\nedge 0 1\nedge 0 2\nedge 1 3\nedge 2 3\n").unwrap_err();
        assert!(matches!(e, IoError::Forest { line: 5, source: PosetError::NotAForest { .. } }));
        assert!(matches!(parse_forest("edge 0 1\n"), Err(IoError::Parse { line: 1, .. })));
    }

    #[test]
    fn mtl_roundtrip() {
        let b = FiniteMtl::boolean();
        let text = write_mtl(&b);
        assert_eq!(text, "n 2\nbot 0\ntop 1\nmul\n0 0\n0 1\nimp\n1 1\n0 1\n");
        assert_eq!(parse_mtl(&text).unwrap(), b);
        let w = FiniteMtl::non_representable_w();
        assert_eq!(write_mtl(&parse_mtl(&write_mtl(&w)).unwrap()), write_mtl(&w));
    }

    #[test]
    fn mtl_residuation_error() {
        let text = write_mtl(&FiniteMtl::lukasiewicz(3));
        let bad = text.replace("imp\n2 2 2\n1 2 2\n0 1 2\n", "imp\n2 2 2\n1 2 2\n0 0 2\n");
        assert_ne!(bad, text);
        let e = parse_mtl(&bad).unwrap_err();
        assert!(matches!(e, IoError::Algebra { source: MtlError::ResiduationFails { .. }, .. }), "{e}");
        let e = parse_mtl("n 2\nbot 0\ntop 1\nmul\n0 0\n").unwrap_err();
        assert!(matches!(e, IoError::Parse { line: 4, .. }), "{e}");
    }

    #[test]
    fn lforest_labels() {
        let l = parse_labeled_forest("nodes 2\nname 1 x\nedge 0 1\nlabel x = L3\n", None).unwrap();
        assert_eq!(*l.label(0), FiniteMtl::boolean());
        assert_eq!(*l.label(1), FiniteMtl::lukasiewicz(3));
        let (text, files) = write_labeled_forest(&l);
        assert!(files.is_empty());
        assert_eq!(text, "nodes 2\nname 1 x\nedge 0 1\nlabel 0 = L2\nlabel 1 = L3\n");
        assert_eq!(parse_labeled_forest(&text, None).unwrap(), l);
    }

    #[test]
    fn lforest_rejects_goedel_label() {
        let dir = std::env::temp_dir().join(format!("mtlforest-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("g3.mtl"), write_mtl(&FiniteMtl::goedel(3))).unwrap();
        let e = parse_labeled_forest("nodes 1\n\nlabel 0 = @g3.mtl\n", Some(&dir)).unwrap_err();
        assert!(
            matches!(e, IoError::Label { line: 3, source: ConstructError::LabelNotArchimedean { node: 0 } }),
            "{e}"
        );
        fs::remove_dir_all(&dir).unwrap();
    }
}
