fn main() {
    std::process::exit(kfuse::cli::run(std::env::args()));
}
