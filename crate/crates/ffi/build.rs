use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let config = cbindgen::Config::from_file(dir.join("cbindgen.toml")).expect("cbindgen.toml");
    match cbindgen::generate_with_config(&dir, config) {
        // Only touches the file when the contents change.
        Ok(bindings) => {
            bindings.write_to_file(dir.join("include/phonon_qsim.h"));
        }
        Err(e) => println!("cargo:warning=header not regenerated: {e}"),
    }
}
