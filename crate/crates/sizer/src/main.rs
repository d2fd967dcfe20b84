fn main() {
    std::process::exit(sizer::harness::cli_main(std::env::args()));
}
