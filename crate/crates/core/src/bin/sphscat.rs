use clap::Parser;
use sphscat::cli::{run, thread_count, Cli};

fn main() {
    let cli = Cli::parse();
    let code = thread_count(&cli)
        .and_then(|n| {
            if let Some(n) = n {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| sphscat::Error::Config(e.to_string()))?;
            }
            run(&cli)
        })
        .unwrap_or_else(|e| {
            eprintln!("error: {e}");
            e.exit_code()
        });
    std::process::exit(code);
}
