fn main() {
    let code = stinet_cli::command::main_with(std::env::args_os(), std::env::vars().collect());
    std::process::exit(code);
}
