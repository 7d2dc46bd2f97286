// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Drive the experiment runner from an in-memory config and print the
//! resulting records.

use qkpse::runner::{parse_config, run_config};

const CONFIG: &str = r#"
[experiment]
scenario = "algorithm1_lon"
epsilon = 0.05
delta = 0.05
seed = 1
runs = 5

[encoding]
modes = 2
input = "cat"
gamma = 0.8
eta = 0.9
s = "auto"
"#;

fn main() {
    let cfg = match parse_config(CONFIG) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    match run_config(&cfg, None) {
        Ok(records) => {
            for r in records {
                println!("{}", serde_json::to_string(&r).expect("records serialize"));
            }
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
