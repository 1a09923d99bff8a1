fn main() {
    std::process::exit(largevol::cli::run(std::env::args_os()));
}
