fn main() {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let quiet = args.iter().any(|a| a == "--quiet" || a == "-q");
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if quiet { "error" } else { "info" }))
        .format_timestamp(None)
        .init();
    std::process::exit(facefuse::cli::dispatch(args));
}
