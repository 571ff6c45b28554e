use std::fs::File;
use std::io::Write;

use anyhow::{bail, Context, Result};
use bmabo::report::{read_results, summarize_rows, write_comparison};

use crate::args::CompareArgs;

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    if !args.labels.is_empty() && args.labels.len() != args.results.len() {
        bail!("{} labels given for {} results files", args.labels.len(), args.results.len());
    }
    let mut rows = Vec::with_capacity(args.results.len());
    for (i, path) in args.results.iter().enumerate() {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let results = read_results(file).with_context(|| format!("reading {}", path.display()))?;
        let summary = summarize_rows(&results).with_context(|| format!("summarizing {}", path.display()))?;
        let label = args.labels.get(i).cloned().unwrap_or_else(|| path.display().to_string());
        rows.push((label, summary));
    }
    match &args.out {
        Some(p) => write_comparison(File::create(p).with_context(|| format!("creating {}", p.display()))?, &rows)?,
        None => {
            let mut buf = Vec::new();
            write_comparison(&mut buf, &rows)?;
            std::io::stdout().write_all(&buf)?;
        }
    }
    Ok(())
}
