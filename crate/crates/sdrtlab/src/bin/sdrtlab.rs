use clap::Parser;

fn main() {
    let cli = sdrtlab::cli::Cli::parse();
    std::process::exit(sdrtlab::cli::run(cli));
}
