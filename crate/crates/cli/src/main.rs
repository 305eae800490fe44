fn main() -> std::process::ExitCode {
    qsdc_cli::main_with_args(std::env::args_os())
}
