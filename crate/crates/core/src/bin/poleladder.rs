fn main() {
    std::process::exit(pole_ladder::experiments::run_cli(std::env::args_os()));
}
