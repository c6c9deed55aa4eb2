fn main() {
    std::process::exit(peerlab::cli::main_with_args(std::env::args_os()));
}
