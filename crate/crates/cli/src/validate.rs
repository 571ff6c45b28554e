use anyhow::Result;
use bmabo::dataset::{load_table, read_header, Schema};
use bmabo::engine::Mode;
use bmabo::Error;

use crate::args::ValidateArgs;
use crate::data;

/// Prints every problem found and returns `Ok(true)` when there are none.
pub fn cmd_validate(args: &ValidateArgs) -> Result<bool> {
    let mut problems: Vec<String> = Vec::new();
    let report = |problems: &[String]| {
        for p in problems {
            println!("error: {p}");
        }
        println!("{} problem(s) found", problems.len());
    };

    let input = match data::read_data(&args.data.data) {
        Ok(d) => d,
        Err(e) => {
            report(&[format!("{e:#}")]);
            return Ok(false);
        }
    };
    let mode = Mode::from(args.mode);
    let specs = match data::model_specs(args.data.specs.as_deref(), mode) {
        Ok(s) => s,
        Err(e) => {
            report(&[format!("{e:#}")]);
            return Ok(false);
        }
    };
    if mode == Mode::Bo && specs.len() != 1 {
        problems.push(format!("mode bo needs exactly one model, the config has {}", specs.len()));
    }

    let header = match read_header(input.bytes.as_slice()) {
        Ok(h) => h,
        Err(e) => {
            report(&[e.to_string()]);
            return Ok(false);
        }
    };
    if !header.contains(&args.data.response) {
        problems.push(format!("response column `{}` is not in the data", args.data.response));
    }
    for spec in &specs {
        for f in spec.features.iter().filter(|f| !header.contains(f)) {
            problems.push(format!("model `{}` uses feature `{f}`, which is not a column of the data", spec.name));
        }
    }

    let full = data::schema_for(&specs, &args.data.response);
    let present = Schema::new(full.features.iter().filter(|f| header.contains(f)).cloned(), args.data.response.clone());
    let n_rows = if header.contains(&args.data.response) {
        match load_table(input.bytes.as_slice(), &present) {
            Ok(t) => Some(t.n_rows()),
            Err(Error::BadRows(rows)) => {
                for r in rows {
                    problems.push(format!("line {}: {}", r.line, r.reason));
                }
                None
            }
            Err(e) => {
                problems.push(e.to_string());
                None
            }
        }
    } else {
        None
    };

    let budget = args.budget.unwrap_or(args.n_init + args.batch * args.iters);
    if args.n_init < 2 {
        problems.push(format!("n-init {} is below the minimum of 2", args.n_init));
    }
    if args.batch == 0 {
        problems.push("batch must be at least 1".into());
    }
    if budget < args.n_init {
        problems.push(format!("budget {budget} is smaller than n-init {}", args.n_init));
    }
    if let Some(n) = n_rows {
        if budget >= n {
            problems.push(format!(
                "budget {budget} is not feasible: the data has {n} rows and at least one must remain for testing"
            ));
        }
    }

    if problems.is_empty() {
        println!("ok: {} rows, {} model(s), budget {budget}", n_rows.unwrap_or(0), specs.len());
        Ok(true)
    } else {
        report(&problems);
        Ok(false)
    }
}
