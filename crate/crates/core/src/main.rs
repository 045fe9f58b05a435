fn main() {
    std::process::exit(echogeo::cli::run());
}
