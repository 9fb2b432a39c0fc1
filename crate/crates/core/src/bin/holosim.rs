fn main() {
    std::process::exit(holosim::sweep::run_cli(std::env::args_os()));
}
