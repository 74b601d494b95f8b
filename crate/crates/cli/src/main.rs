fn main() {
    std::process::exit(gabor_lab_cli::run_from(std::env::args_os()));
}
