fn main() {
    std::process::exit(cvriqp::cli::run(std::env::args_os()));
}
