fn main() {
    std::process::exit(digitcast_cli::run(std::env::args_os()));
}
