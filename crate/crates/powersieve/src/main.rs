fn main() {
    std::process::exit(powersieve::cli::run());
}
