//! Builds and runs a C program against the generated header and the static
//! library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "phonon_qsim.h"

int main(void) {
    PqModel *m = NULL;
    if (pq_holstein_new(2, 1.0, 1.0, 0.0, 3, false, &m) != PQ_STATUS_OK) return 1;
    PqCircuit *c = NULL;
    if (pq_trotter_circuit(m, 0.1, 1, 2, &c) != PQ_STATUS_OK) return 2;
    PqResources r;
    if (pq_circuit_resources(c, &r) != PQ_STATUS_OK || r.total == 0) return 3;
    PqModel *bad = NULL;
    if (pq_holstein_new(0, 1.0, 1.0, 0.0, 3, false, &bad) != PQ_STATUS_INVALID_ARGUMENT) return 4;
    char msg[256];
    if (pq_last_error_message(msg, sizeof msg) == 0) return 5;
    printf("%zu %zu\n", pq_model_n_qubits(m), r.depth);
    pq_circuit_free(c);
    pq_model_free(m);
    return 0;
}
"#;

/// `target/<profile>` from the test binary in `target/<profile>/deps`.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib = profile_dir().join("libphonon_qsim_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).split_whitespace().next(), Some("8"));
}
