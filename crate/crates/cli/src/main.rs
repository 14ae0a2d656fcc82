fn main() -> std::process::ExitCode {
    momenta_cli::run(std::env::args_os())
}
