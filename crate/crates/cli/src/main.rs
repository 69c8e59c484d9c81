//! `mtlforest` command line.
//!
//! Exit status: 0 verified, 1 verified negative (e.g. not representable),
//! 2 error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use mtlforest::construct::LabeledForest;
use mtlforest::corpus::{build_corpus, CorpusConfig};
use mtlforest::duality::{enumerate_archimedean_chains, functor_g, functor_h, label_summary, roundtrip, MAX_CHAIN_SIZE};
use mtlforest::io::{read_labeled_forest, read_mtl, write_labeled_forest, write_mtl};
use mtlforest::kconstruct::{k_of_forest, verify_k_iso};
use mtlforest::mtl::{find_isomorphism, FiniteMtl};
use mtlforest::sheaf::sheaf_check;

#[derive(Parser)]
#[command(name = "mtlforest", version, about = "Finite MTL-algebras and labeled forests")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// Print reports as JSON
    #[arg(long, global = true)]
    json: bool,
    /// Largest input algebra (for enumerate-archimedean: largest chain, at most 6)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    max_size: Option<u64>,
    /// Largest forest, input or computed
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    max_nodes: u64,
    /// Seed for sampled or generated data
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check an .mtl or .lforest file
    Validate { file: PathBuf },
    /// G: the labeled forest of an algebra
    Decompose {
        file: PathBuf,
        /// Write the .lforest (and any label files) here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// H: the forest product of a labeled forest
    Reconstruct {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// G then H, with the isomorphism verdict
    Roundtrip { file: PathBuf },
    /// Recursive ordinal sum / product construction and its plan
    Kbuild {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Isomorphism between two algebras
    Iso { a: PathBuf, b: PathBuf },
    /// Gluing, stalks and quotients of the presheaf of forest products
    SheafCheck {
        file: PathBuf,
        /// Largest cover
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        arity: u64,
    },
    /// Finite archimedean chains up to --max-size elements
    EnumerateArchimedean,
    /// Build the test corpus
    Corpus {
        /// Corpus config (TOML); the bundled one otherwise
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the corpus as files under this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const DEFAULT_MAX_SIZE: usize = 12;

enum Verdict {
    Yes,
    No,
}

struct Report {
    verdict: Verdict,
    json: Value,
    text: String,
}

fn yes(json: Value, text: String) -> Report {
    Report { verdict: Verdict::Yes, json, text }
}

fn verdict(ok: bool, json: Value, text: String) -> Report {
    Report { verdict: if ok { Verdict::Yes } else { Verdict::No }, json, text }
}

impl Opts {
    fn max_size(&self) -> usize {
        self.max_size.map_or(DEFAULT_MAX_SIZE, |n| n as usize)
    }

    fn algebra(&self, path: &Path) -> Result<FiniteMtl> {
        let a = read_mtl(path)?;
        if a.len() > self.max_size() {
            bail!("{}: {} elements exceeds --max-size {}", path.display(), a.len(), self.max_size());
        }
        Ok(a)
    }

    fn forest(&self, path: &Path) -> Result<LabeledForest> {
        let l = read_labeled_forest(path)?;
        self.check_nodes(l.len())?;
        Ok(l)
    }

    fn check_nodes(&self, n: usize) -> Result<()> {
        if n > self.max_nodes as usize {
            bail!("forest has {n} nodes, exceeds --max-nodes {}", self.max_nodes);
        }
        Ok(())
    }
}

fn is_lforest(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "lforest")
}

fn labels_json(l: &LabeledForest) -> Value {
    json!(l.labels().iter().map(label_summary).collect::<Vec<_>>())
}

fn save_lforest(out: &Path, l: &LabeledForest) -> Result<()> {
    let (text, files) = write_labeled_forest(l);
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    let dir = out.parent().unwrap_or(Path::new("."));
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn save(out: &Path, text: &str) -> Result<()> {
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))
}

fn run(cmd: &Cmd, o: &Opts) -> Result<Report> {
    match cmd {
        Cmd::Validate { file } if is_lforest(file) => {
            let l = o.forest(file)?;
            let text = format!("ok: labeled forest, {} nodes, labels {}", l.len(), labels_json(&l));
            Ok(yes(json!({"kind": "lforest", "nodes": l.len(), "labels": labels_json(&l)}), text))
        }
        Cmd::Validate { file } => {
            let a = o.algebra(file)?;
            let idem = a.idempotents().len();
            let text = format!("ok: MTL-algebra, {} elements, {idem} idempotents, chain: {}", a.len(), a.is_chain());
            Ok(yes(json!({"kind": "mtl", "size": a.len(), "idempotents": idem, "chain": a.is_chain()}), text))
        }
        Cmd::Decompose { file, out } => {
            let a = o.algebra(file)?;
            let g = functor_g(&a)?;
            o.check_nodes(g.labeled.len())?;
            let (lforest, files) = write_labeled_forest(&g.labeled);
            if let Some(out) = out {
                save_lforest(out, &g.labeled)?;
            }
            let mut text = lforest.clone();
            for (name, body) in &files {
                text.push_str(&format!("# {name}\n"));
                text.extend(body.lines().map(|l| format!("# {l}\n")));
            }
            let js = json!({
                "nodes": g.labeled.len(),
                "covers": g.labeled.forest().cover_edges(),
                "labels": labels_json(&g.labeled),
                "lforest": lforest,
            });
            Ok(yes(js, text))
        }
        Cmd::Reconstruct { file, out } => {
            let l = o.forest(file)?;
            let p = functor_h(&l)?;
            let mtl = write_mtl(p.algebra());
            if let Some(out) = out {
                save(out, &mtl)?;
            }
            let text = format!("# forest product, {} elements\n{mtl}", p.len());
            Ok(yes(json!({"size": p.len(), "mtl": mtl}), text))
        }
        Cmd::Roundtrip { file } => {
            let a = o.algebra(file)?;
            let r = roundtrip(&a)?;
            let mut text = format!(
                "representable: {}\n|M| = {}, |H(G(M))| = {}\nisomorphic: {}\n",
                r.representable, r.size, r.reconstructed_size, r.iso
            );
            if let Some((e, y)) = r.witness {
                text.push_str(&format!("witness: e = {e}, y = {y} (e*y != e^y)\n"));
            }
            if let Some(c) = r.counit_iso {
                text.push_str(&format!("counit bijective: {c}\n"));
            }
            text.push_str(&format!("forest: {} nodes, covers {:?}, labels {:?}", r.forest_nodes, r.forest_covers, r.labels));
            let ok = r.representable && r.iso && r.counit_iso == Some(true);
            Ok(verdict(ok, serde_json::to_value(&r)?, text))
        }
        Cmd::Kbuild { file, out } => {
            let l = o.forest(file)?;
            let v = verify_k_iso(&l)?;
            let (k, _) = k_of_forest(&l)?;
            let mtl = write_mtl(&k);
            if let Some(out) = out {
                save(out, &mtl)?;
            }
            let text = format!(
                "plan: {}\n|K| = {}, |P| = {}, isomorphic: {}\n{mtl}",
                v.plan,
                v.k_size,
                v.p_size,
                v.isomorphism.is_some()
            );
            let js = json!({
                "plan": v.plan,
                "k_size": v.k_size,
                "p_size": v.p_size,
                "isomorphic": v.isomorphism.is_some(),
                "mtl": mtl,
            });
            Ok(verdict(v.ok(), js, text))
        }
        Cmd::Iso { a, b } => {
            let (x, y) = (o.algebra(a)?, o.algebra(b)?);
            let map = find_isomorphism(&x, &y);
            let text = match &map {
                Some(m) => format!("isomorphic: {m:?}"),
                None => "not isomorphic".to_string(),
            };
            Ok(verdict(map.is_some(), json!({"isomorphic": map.is_some(), "map": map}), text))
        }
        Cmd::SheafCheck { file, arity } => {
            let l = o.forest(file)?;
            let r = sheaf_check(&l, o.max_nodes as usize, *arity as usize)?;
            let fails: Vec<&String> =
                r.failures.iter().chain(r.downsets.iter().flat_map(|d| &d.failures)).collect();
            let mut text = format!(
                "{} downsets, {} covers, {} matching families, {} stalks, {} quotients; {} failures",
                r.downsets.len(),
                r.covers,
                r.families,
                r.stalks_checked,
                r.quotients_checked,
                fails.len()
            );
            for f in &fails {
                text.push_str(&format!("\n  {f}"));
            }
            Ok(verdict(r.ok(), serde_json::to_value(&r)?, text))
        }
        Cmd::EnumerateArchimedean => {
            let n = o.max_size.map_or(MAX_CHAIN_SIZE, |n| n as usize);
            let reg = enumerate_archimedean_chains(n)?;
            let names: Vec<String> = reg.chains().iter().map(label_summary).collect();
            let text = format!("{} archimedean chains with at most {n} elements: {}", names.len(), names.join(" "));
            let tables: Vec<String> = reg.chains().iter().map(write_mtl).collect();
            Ok(yes(json!({"max_size": n, "chains": names, "mtl": tables}), text))
        }
        Cmd::Corpus { config, out } => {
            let cfg = match config {
                Some(p) => {
                    let t = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    CorpusConfig::from_toml(&t)?
                }
                None => CorpusConfig::default(),
            };
            let c = build_corpus(&cfg, o.seed)?;
            if let Some(dir) = out {
                for sub in ["chains", "labeled", "algebras"] {
                    fs::create_dir_all(dir.join(sub)).with_context(|| format!("creating {}", dir.display()))?;
                }
                for (i, a) in c.chains.iter().enumerate() {
                    save(&dir.join(format!("chains/chain{i:03}.mtl")), &write_mtl(a))?;
                }
                for (i, l) in c.labeled.iter().enumerate() {
                    let sub = dir.join(format!("labeled/{i:03}"));
                    fs::create_dir_all(&sub).with_context(|| format!("creating {}", sub.display()))?;
                    save_lforest(&sub.join("forest.lforest"), l)?;
                }
                for a in &c.algebras {
                    save(&dir.join(format!("algebras/{}.mtl", a.name)), &write_mtl(&a.algebra))?;
                }
            }
            let js = json!({
                "seed": c.seed,
                "chains": c.chains.len(),
                "forests": c.forests.len(),
                "labeled": c.labeled.len(),
                "algebras": c.algebras.len(),
            });
            let text = format!(
                "seed {}: {} chains, {} forests, {} labeled forests, {} algebras",
                c.seed,
                c.chains.len(),
                c.forests.len(),
                c.labeled.len(),
                c.algebras.len()
            );
            Ok(yes(js, text))
        }
    }
}

// library errors already print their sources, so skip repeats
fn message(e: &anyhow::Error) -> String {
    let mut s = String::new();
    for cause in e.chain() {
        let m = cause.to_string();
        if !s.contains(&m) {
            if !s.is_empty() {
                s.push_str(": ");
            }
            s.push_str(&m);
        }
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.cmd, &cli.opts) {
        Ok(r) => {
            // a closed pipe (`| head`) is not an error
            let mut out = std::io::stdout().lock();
            let _ = if cli.opts.json {
                writeln!(out, "{}", r.json)
            } else {
                writeln!(out, "{}", r.text.trim_end())
            };
            match r.verdict {
                Verdict::Yes => ExitCode::SUCCESS,
                Verdict::No => ExitCode::from(1),
            }
        }
        Err(e) => {
            if cli.opts.json {
                println!("{}", json!({"error": message(&e)}));
            } else {
                eprintln!("error: {}", message(&e));
            }
            ExitCode::from(2)
        }
    }
}
