fn main() {
    std::process::exit(instab::cli::run(std::env::args_os()));
}
