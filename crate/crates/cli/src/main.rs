fn main() {
    std::process::exit(invlab_cli::run(std::env::args_os()));
}
