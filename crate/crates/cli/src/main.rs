fn main() {
    std::process::exit(euler_workbench_cli::run(std::env::args_os()));
}
