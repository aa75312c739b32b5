fn main() {
    std::process::exit(intermittency::cli::run(std::env::args_os()));
}
