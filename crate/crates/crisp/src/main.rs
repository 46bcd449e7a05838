fn main() {
    std::process::exit(crisp::cli::main());
}
