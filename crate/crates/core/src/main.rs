fn main() -> std::process::ExitCode {
    qchaos::cli::main_with_args(std::env::args_os())
}
