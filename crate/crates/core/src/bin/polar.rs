use std::process::ExitCode;

fn main() -> ExitCode {
    polarkit::harness::run(std::env::args_os())
}
