use std::io::{stderr, stdout};
use std::process::exit;

fn main() {
    let code = pdptw_cli::run_cli(std::env::args(), &mut stdout().lock(), &mut stderr().lock());
    exit(code);
}
