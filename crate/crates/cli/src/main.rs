mod args;
mod compare;
mod data;
mod run;
mod synth;
mod validate;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log_level).parse_default_env().init();

    let outcome = match &cli.command {
        Command::Run(a) => run::cmd_run(a),
        Command::Compare(a) => compare::cmd_compare(a).map(|()| true),
        Command::Validate(a) => validate::cmd_validate(a),
        Command::Synth(a) => synth::cmd_synth(a).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
