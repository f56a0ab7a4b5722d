fn main() {
    std::process::exit(mtrepair_cli::run(std::env::args_os()));
}
