use clap::Parser;

fn main() {
    let cli = soaguard_cli::Cli::parse();
    if let Err(e) = soaguard_cli::run(cli) {
        let mut message = String::new();
        for cause in e.chain().map(|c| c.to_string()) {
            if !message.contains(&cause) {
                message = if message.is_empty() { cause } else { format!("{message}: {cause}") };
            }
        }
        eprintln!("error: {message}");
        std::process::exit(1);
    }
}
