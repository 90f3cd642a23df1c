fn main() {
    std::process::exit(bht_cli::run(std::env::args_os()));
}
