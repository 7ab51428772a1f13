fn main() {
    std::process::exit(symdistill::cli::run(std::env::args_os()));
}
