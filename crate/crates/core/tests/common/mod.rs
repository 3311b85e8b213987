#![allow(dead_code)]

use std::path::PathBuf;

use wellsep::problem::{Problem, ProblemSpec};

pub fn spec_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("specs")
        .join(format!("{name}.spec"))
}

pub fn bundled(name: &str) -> Problem {
    let spec = ProblemSpec::load(&spec_path(name)).expect("bundled spec parses");
    Problem::build(&spec).expect("bundled spec builds")
}

pub fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_wellsep"))
}
