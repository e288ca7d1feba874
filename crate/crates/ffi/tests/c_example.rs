//! Compiles and runs `examples/crossing.c` against the generated header and
//! the static library when a C compiler is available.

use std::path::{Path, PathBuf};
use std::process::Command;

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/c_example-<hash>
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libqmpemba_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_example_finds_the_crossing() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let Some(lib) = static_lib() else {
        eprintln!("static library not found; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("crossing");
    let compiled = Command::new("cc")
        .args(["-std=c11", "-D_DEFAULT_SOURCE", "-Wall", "-Werror"])
        .arg(root.join("examples/crossing.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status();
    match compiled {
        Err(_) => eprintln!("no C compiler; skipping"),
        Ok(st) => {
            assert!(st.success(), "C example failed to compile");
            let out = Command::new(&bin).output().unwrap();
            assert!(out.status.success());
            let text = String::from_utf8_lossy(&out.stdout);
            assert!(text.contains("K0 t = 0.5640"), "{text}");
            assert!(text.contains("classification 2"), "{text}");
        }
    }
}
