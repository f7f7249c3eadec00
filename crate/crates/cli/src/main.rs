fn main() {
    std::process::exit(f2reglab_cli::run(std::env::args_os()));
}
