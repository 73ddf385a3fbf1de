fn main() {
    std::process::exit(seadet_cli::run(std::env::args_os()));
}
