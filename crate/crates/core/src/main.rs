fn main() -> std::process::ExitCode {
    sinrgrid::cli::run()
}
