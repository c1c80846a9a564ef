fn main() {
    std::process::exit(anamorph::cli::main());
}
