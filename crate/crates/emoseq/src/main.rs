use std::process::ExitCode;

fn main() -> ExitCode {
    emoseq::cli::main_entry()
}
