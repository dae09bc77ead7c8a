use clap::Parser;

fn main() {
    let cli = cavity_filter::cli::Cli::parse();
    std::process::exit(cavity_filter::cli::run(&cli));
}
