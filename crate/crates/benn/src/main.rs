fn main() {
    std::process::exit(benn::cli::run(std::env::args().skip(1)));
}
