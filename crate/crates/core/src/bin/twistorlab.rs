use std::process::ExitCode;

fn main() -> ExitCode {
    let status = twistorlab::cli::main_with_args(std::env::args_os().skip(1));
    ExitCode::from(status as u8)
}
