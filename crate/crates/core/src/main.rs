fn main() {
    std::process::exit(cplr::cli::run(std::env::args_os()));
}
