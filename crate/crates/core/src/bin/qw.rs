fn main() {
    std::process::exit(qw::cli::run(std::env::args_os()));
}
