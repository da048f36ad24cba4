fn main() {
    std::process::exit(cubevar::cli::run_from_args(std::env::args_os()));
}
