fn main() {
    std::process::exit(wsn_routing::io::run_cli(std::env::args_os()));
}
