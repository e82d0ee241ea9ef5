fn main() {
    if let Some(threads) = std::env::var("DERIVLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    std::process::exit(derivlab::cli::run(std::env::args_os()));
}
