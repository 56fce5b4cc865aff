fn main() {
    std::process::exit(gensemcom::cli::run_command(std::env::args_os()));
}
