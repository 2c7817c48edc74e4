use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("FVKIT_LOG", "info")).init();
    let cli = fvkit_cli::Cli::parse();
    if let Err(e) = fvkit_cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(fvkit_cli::error::exit_code(&e));
    }
}
