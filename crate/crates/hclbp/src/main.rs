use std::process::ExitCode;

fn main() -> ExitCode {
    hclbp::cli::main()
}
