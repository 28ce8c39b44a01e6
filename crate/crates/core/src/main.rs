fn main() {
    std::process::exit(efsolve::cli::run_cli(std::env::args_os()));
}
