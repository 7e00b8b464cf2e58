use clap::Parser;

fn main() {
    let cli = glider::cli::Cli::parse();
    if let Err(err) = glider::cli::execute(cli) {
        println!("{}", glider::cli::error_json(&err));
        std::process::exit(1);
    }
}
