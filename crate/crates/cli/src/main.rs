fn main() {
    std::process::exit(holegrasp_cli::run(std::env::args_os()));
}
