fn main() {
    let code = capmkit_cli::run(std::env::args_os());
    std::process::exit(code);
}
