fn main() {
    std::process::exit(refkernel::cli::run(std::env::args_os()));
}
