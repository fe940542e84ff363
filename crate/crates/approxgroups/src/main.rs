fn main() {
    std::process::exit(approxgroups::cli::run(std::env::args_os()));
}
