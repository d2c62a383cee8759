fn main() {
    megflood::cli::main()
}
