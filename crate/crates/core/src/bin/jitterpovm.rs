fn main() {
    jitterpovm::cli::main()
}
