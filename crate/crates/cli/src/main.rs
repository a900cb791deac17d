use clap::Parser;

use tcam_cli::commands::{run, Cli};
use tcam_cli::error::EXIT_VALIDATION;

fn main() {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot build thread pool: {e}");
            std::process::exit(EXIT_VALIDATION);
        }
    };
    if let Err(e) = pool.install(|| run(cli)) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
