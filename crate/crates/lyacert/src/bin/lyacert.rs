fn main() {
    std::process::exit(lyacert::cli::main_entry());
}
