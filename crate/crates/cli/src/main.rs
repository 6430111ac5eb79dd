fn main() {
    std::process::exit(thztomo_cli::run(std::env::args_os()));
}
