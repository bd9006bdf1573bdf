fn main() {
    std::process::exit(hgm_cli::run(std::env::args_os()));
}
