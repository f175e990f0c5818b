fn main() {
    std::process::exit(mocv::cli::main_with(std::env::args_os()));
}
