fn main() {
    std::process::exit(segloc::cli::run(std::env::args_os()));
}
