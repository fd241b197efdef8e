fn main() -> std::process::ExitCode {
    qinstr::cli::run(std::env::args_os())
}
