fn main() {
    std::process::exit(propkoszul::cli::run(std::env::args_os()));
}
