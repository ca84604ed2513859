use clap::Parser;
use fbvp::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FBVP_LOG", "warn")).init();
    std::process::exit(fbvp::run(Cli::parse()));
}
