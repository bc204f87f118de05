use std::process::ExitCode;

fn main() -> ExitCode {
    ppsurv::cli::main_with_args(std::env::args_os())
}
