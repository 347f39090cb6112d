fn main() {
    std::process::exit(mcig::cli::main_with_args());
}
