fn main() {
    std::process::exit(symground::cli::run(std::env::args_os()));
}
