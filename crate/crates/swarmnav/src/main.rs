fn main() {
    std::process::exit(swarmnav::cli::run());
}
