fn main() {
    std::process::exit(qconvex::cli::run(std::env::args_os()));
}
