fn main() {
    std::process::exit(amol::cli::run(std::env::args_os()));
}
