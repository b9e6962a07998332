fn main() {
    std::process::exit(kcircles_cli::run(std::env::args_os()));
}
