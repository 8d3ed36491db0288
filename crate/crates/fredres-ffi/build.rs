use std::env;
use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    let mut config = cbindgen::Config::default();
    config.enumeration.prefix_with_name = true;
    let bindings = cbindgen::Builder::new()
        .with_config(config)
        .with_crate(&dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("FREDRES_H")
        .with_cpp_compat(true)
        .with_documentation(true)
        .generate()
        .expect("cbindgen failed on src/lib.rs");
    let out = PathBuf::from(env::var("OUT_DIR").unwrap()).join("fredres.h");
    bindings.write_to_file(&out);
    bindings.write_to_file(dir.join("include").join("fredres.h"));
}
