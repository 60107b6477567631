// SPDX-License-Identifier: Apache-2.0

use clap::Parser;
use qsde_core::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = run(&cli, &mut std::io::stdout().lock());
    std::process::exit(code);
}
