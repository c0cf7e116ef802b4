fn main() {
    std::process::exit(dyncoh_cli::run(std::env::args_os()));
}
