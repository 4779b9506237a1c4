use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use unijoin::corpus::corpus;
use unijoin::storage::generate::{gen_adversarial_triangle, gen_job_like, seeded_rng};
use unijoin::storage::{to_csv, Relation};

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub what: What,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Subcommand)]
pub enum What {
    /// One directory per corpus query with a random instance.
    Corpus {
        /// Maximum rows per relation.
        #[arg(long, default_value_t = 30)]
        rows: usize,
        /// Values are drawn from 0..domain.
        #[arg(long, default_value_t = 5)]
        domain: i64,
    },
    /// The triangle instance whose R-S join is quadratic in n.
    Triangle {
        #[arg(long, default_value_t = 160)]
        n: usize,
    },
    /// Fact and dimension tables shaped like a movie database.
    Job {
        #[arg(long, default_value_t = 100_000)]
        rows: usize,
    },
}

/// Writes each relation as `<name>.csv`, a `catalog` file naming them, and `query`.
fn write_instance<'a>(
    dir: &Path,
    rels: impl IntoIterator<Item = &'a Relation>,
    query: &str,
    tree: Option<&str>,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut catalog = String::new();
    for rel in rels {
        let file = format!("{}.csv", rel.name());
        fs::write(dir.join(&file), to_csv(rel)).with_context(|| format!("writing {file}"))?;
        let schema: Vec<String> = (0..rel.arity()).map(|i| format!("{}:{}", rel.attrs()[i], rel.kind(i))).collect();
        catalog.push_str(&format!("{} {file} {}", rel.name(), schema.join(",")));
        if let Some(keys) = rel.sorted_by() {
            catalog.push_str(&format!(" sorted_by={}", keys.join(",")));
        }
        catalog.push('\n');
    }
    fs::write(dir.join("catalog"), catalog)?;
    let mut q = format!("{query}\n");
    if let Some(t) = tree {
        q.push_str(&format!("tree {t}\n"));
    }
    fs::write(dir.join("query"), q)?;
    Ok(())
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let mut rng = seeded_rng(args.seed);
    match args.what {
        What::Corpus { rows, domain } => {
            for cq in corpus() {
                let cat = cq.instance(&mut rng, rows, domain);
                let rels: Vec<_> = cq.parse().query.atoms.iter().map(|a| cat.get(&a.relation).unwrap().clone()).collect();
                write_instance(&args.out.join(cq.name), rels.iter().map(|r| r.as_ref()), cq.text, cq.tree)?;
            }
        }
        What::Triangle { n } => {
            let rels = gen_adversarial_triangle(n)?;
            write_instance(&args.out, &rels, "Q(a,b,c) :- R(a,b), S(b,c), T(c,a)", None)?;
        }
        What::Job { rows } => {
            let (rels, query) = gen_job_like(&mut rng, rows);
            write_instance(&args.out, &rels, &query, None)?;
        }
    }
    Ok(())
}
