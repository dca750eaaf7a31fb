fn main() {
    std::process::exit(inttsp_cli::run(std::env::args_os()));
}
