fn main() -> std::process::ExitCode {
    vpt_cli::main_entry()
}
