fn main() {
    std::process::exit(qampenc::cli::run(std::env::args_os()));
}
