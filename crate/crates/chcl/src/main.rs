fn main() {
    std::process::exit(chcl::cli::run(std::env::args_os()));
}
