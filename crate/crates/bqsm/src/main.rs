fn main() {
    std::process::exit(bqsm::cli::main());
}
