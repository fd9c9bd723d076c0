fn main() {
    std::process::exit(isoconf::cli::main());
}
