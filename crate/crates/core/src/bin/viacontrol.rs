fn main() {
    std::process::exit(viacontrol::cli::run(std::env::args()));
}
