fn main() {
    std::process::exit(pfmix::io::cli_main(std::env::args_os()));
}
