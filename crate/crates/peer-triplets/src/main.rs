fn main() {
    std::process::exit(peer_triplets::run_cli(std::env::args().skip(1).collect()));
}
