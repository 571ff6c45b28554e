use std::fs::File;
use std::io::BufWriter;

use anyhow::{anyhow, Context, Result};
use bmabo::dataset::{load_spec_config, synth_table, ModelSpec, NIMS_RESPONSE};

use crate::args::SynthArgs;

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let specs = match &args.specs {
        Some(p) => load_spec_config(p).with_context(|| format!("loading model config {}", p.display()))?,
        None => ModelSpec::nims_models(),
    };
    let spec = match &args.model {
        Some(name) => {
            specs.iter().find(|s| &s.name == name).ok_or_else(|| anyhow!("no model named `{name}` in the config"))?
        }
        None => &specs[0],
    };
    let table = synth_table(args.rows, spec, args.noise, args.seed)?;
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    table.write_csv(BufWriter::new(file), NIMS_RESPONSE)?;
    println!("{} rows generated from model `{}` written to {}", args.rows, spec.name, args.out.display());
    Ok(())
}
