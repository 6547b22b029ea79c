use clap::Parser;

fn main() {
    let cli = pucopula::cli::Cli::parse();
    std::process::exit(pucopula::cli::main_with(cli));
}
