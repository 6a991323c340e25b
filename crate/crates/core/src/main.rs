fn main() {
    std::process::exit(nilwalk::cli::run(std::env::args_os()));
}
