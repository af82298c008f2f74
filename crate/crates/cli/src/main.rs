fn main() {
    std::process::exit(trussketch_cli::run(std::env::args_os()));
}
