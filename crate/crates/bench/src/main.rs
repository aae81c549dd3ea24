fn main() {
    std::process::exit(esgbench::cli_main(std::env::args_os()));
}
