fn main() {
    std::process::exit(stable_mallows::cli::run());
}
