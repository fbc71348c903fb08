use clap::Parser;

use wfpg_core::cli::{run, RunConfig};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok(summary) => {
            if let (Some(m), Some(d)) = (summary.mse, summary.mean_abs_diff) {
                println!("mse={m:.6e} mean_abs_diff={d:.6e}");
            }
        }
        Err(e) => {
            eprintln!("wfpg: {e}");
            std::process::exit(1);
        }
    }
}
