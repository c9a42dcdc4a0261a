fn main() {
    std::process::exit(metap::cli::run(std::env::args_os()));
}
