#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_groupaug"))
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("GROUPAUG_OUTPUT_DIR")
        .output()
        .expect("spawn groupaug")
}
