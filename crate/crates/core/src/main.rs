fn main() {
    std::process::exit(uvass::cli::run(std::env::args_os()));
}
