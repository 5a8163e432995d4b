fn main() {
    std::process::exit(oamlens::cli::run());
}
