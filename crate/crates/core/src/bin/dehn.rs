fn main() {
    std::process::exit(dehn::cli::run(std::env::args_os()));
}
