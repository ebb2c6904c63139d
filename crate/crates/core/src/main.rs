use clap::Parser;
use sketchlab::cli::{execute, Args};

fn main() {
    let (code, out) = execute(&Args::parse());
    print!("{out}");
    std::process::exit(code);
}
