fn main() {
    std::process::exit(xfer::cli::main_with(std::env::args_os()));
}
