use std::process::exit;

fn main() {
    exit(pdltab::cli::run(std::env::args_os()));
}
