use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("lidkit.h");
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("LIDKIT_H".into()),
        cpp_compat: true,
        documentation: true,
        header: Some("/* C interface of the lidkit eyelid-angle blink analysis library. */".into()),
        enumeration: cbindgen::EnumConfig {
            prefix_with_name: true,
            ..Default::default()
        },
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen header generation")
        .write_to_file(header);
    println!("cargo:rerun-if-changed=src/lib.rs");
}
