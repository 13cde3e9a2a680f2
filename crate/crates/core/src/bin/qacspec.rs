fn main() {
    std::process::exit(qacspec::harness::main_with_args(std::env::args_os()));
}
