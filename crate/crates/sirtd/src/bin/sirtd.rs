fn main() {
    std::process::exit(sirtd::cli::run(std::env::args_os()));
}
