use clap::Parser;

fn main() {
    let cli = hiersmooth_cli::Cli::parse();
    if let Err(e) = hiersmooth_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
