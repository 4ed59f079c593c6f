//! The generated header declares every exported symbol and compiles as C.

use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn header() -> String {
    std::fs::read_to_string(crate_dir().join("include/ngpkit.h")).expect("header is generated by the build script")
}

#[test]
fn declares_every_export() {
    let h = header();
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20, "found {exports:?}");
    for name in exports {
        assert!(
            h.contains(&format!(" {name}(")) || h.contains(&format!("*{name}(")),
            "{name} missing from header"
        );
    }
    for ty in [
        "typedef struct NgpVocabulary NgpVocabulary;",
        "NGP_STATUS_BUFFER_TOO_SMALL = 7",
        "NGP_LOSS_DL2",
    ] {
        assert!(h.contains(ty), "{ty} missing from header");
    }
    assert!(h.starts_with("#ifndef NGPKIT_H"));
}

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| {
        Command::new(c)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
    })
}

/// Directory holding the built library: the parent of `deps/`.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_demo_builds_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib = artifact_dir().join("libngpkit_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("demo");
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("examples/demo.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C demo failed to compile");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    // Allowed facts 0,0,0 and 1,1,1 out of eight; likelihood order puts
    // s0 p0 o1 (0.336) first and s1 p0 o1 (0.224) second; the best allowed
    // fact is s1 p1 o1 (0.096 against 0.084).
    assert!(stdout.contains("ics 6\n"), "{stdout}");
    assert!(stdout.contains("selected 0 0 1\nselected 1 0 1\n"), "{stdout}");
    assert!(stdout.contains("projected 1 1 1 1\n"), "{stdout}");
    assert!(stdout.contains("error out_prediction is null"), "{stdout}");
}
