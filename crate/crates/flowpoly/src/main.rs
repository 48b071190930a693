use std::io::{stderr, stdout};
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    ExitCode::from(flowpoly::cli::run(
        &args,
        &mut stdout().lock(),
        &mut stderr().lock(),
    ))
}
