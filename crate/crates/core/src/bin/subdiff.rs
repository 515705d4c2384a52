fn main() {
    std::process::exit(subdiff::cli::parse_and_dispatch(std::env::args_os()));
}
