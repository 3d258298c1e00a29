fn main() {
    std::process::exit(sparseiv::cli::run_from_env());
}
