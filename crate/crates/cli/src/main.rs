fn main() {
    std::process::exit(martinet_cli::run(std::env::args_os()));
}
