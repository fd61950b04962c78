fn main() {
    std::process::exit(riesz_one::cli::run(std::env::args_os()));
}
