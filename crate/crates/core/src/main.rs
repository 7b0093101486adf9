fn main() {
    let code = emgmix::cli::run(std::env::args_os());
    std::process::exit(code);
}
