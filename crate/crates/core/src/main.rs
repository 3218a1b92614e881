fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(afair::cli::main_exit_code(std::env::args_os()))
}
