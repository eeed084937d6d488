fn main() {
    std::process::exit(tensor_gauge::cli::run(std::env::args_os()));
}
