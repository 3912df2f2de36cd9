use clap::Parser;

fn main() {
    let cli = shapelab::cli::Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: could not configure {jobs} worker threads: {e}");
            std::process::exit(2);
        }
    }
    if let Err(e) = shapelab::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
