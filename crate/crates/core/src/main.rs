fn main() {
    std::process::exit(subspace_cohom::cli::run_from_args(std::env::args_os()));
}
