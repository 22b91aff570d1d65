use clap::Parser;

fn main() {
    let cli = isinglab_cli::Cli::parse();
    std::process::exit(isinglab_cli::run(&cli));
}
