fn main() {
    std::process::exit(ecsim::cli::run_from_args(std::env::args_os()));
}
