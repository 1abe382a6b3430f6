fn main() {
    std::process::exit(kacwild::cli::run(std::env::args_os()));
}
