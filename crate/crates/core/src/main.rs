fn main() {
    std::process::exit(uqrel::cli::main());
}
