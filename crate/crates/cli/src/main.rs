fn main() {
    std::process::exit(dpfl_cli::run(std::env::args_os()));
}
