fn main() {
    std::process::exit(tsne_forensics::cli::main_with_args(std::env::args_os()));
}
