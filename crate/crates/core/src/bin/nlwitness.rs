fn main() {
    std::process::exit(nlwitness::cli::run(std::env::args_os()));
}
