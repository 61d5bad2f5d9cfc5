fn main() {
    std::process::exit(lgcn::cli::run_cli(std::env::args_os()));
}
