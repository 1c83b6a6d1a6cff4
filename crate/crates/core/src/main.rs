use std::process::ExitCode;

fn main() -> ExitCode {
    hammersley_lab::cli::main_entry()
}
