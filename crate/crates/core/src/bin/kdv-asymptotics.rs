fn main() {
    std::process::exit(kdv_asymptotics::cli::main_with_args(std::env::args_os()));
}
