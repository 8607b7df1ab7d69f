//! Compiles a small C program against the generated header and the static
//! library. Skipped when no C compiler or static archive is available.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "gelfree.h"

int main(void) {
    GfMeasure *m = NULL;
    GfEvaluator *ev = NULL;
    double v = 0.0;
    char msg[128];
    if (gf_measure_parse("exp:1", &m) != GF_STATUS_OK) return 10;
    if (gf_evaluator_new(m, 1.0, &ev) != GF_STATUS_OK) return 11;
    if (gf_evaluator_l(ev, 2.0, 0.0, &v) != GF_STATUS_OK) return 12;
    if (fabs(v - 1.0) > 1e-12) return 13;
    if (gf_evaluator_l(ev, 0.0, 1.0, &v) != GF_STATUS_DOMAIN) return 14;
    if (gf_last_error_message(msg, sizeof msg) == 0) return 15;
    gf_evaluator_free(ev);
    gf_measure_free(m);
    printf("ok %s\n", gf_version());
    return 0;
}
"#;

fn target_profile_dir() -> PathBuf {
    // tests run from target/<profile>/deps/
    let exe = std::env::current_exe().expect("test executable path");
    exe.parent().and_then(Path::parent).expect("profile directory").to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let archive = target_profile_dir().join("libgelfree_ffi.a");
    if !archive.exists() {
        eprintln!("skipped: {} not built", archive.display());
        return;
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipped: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/gelfree.h")).unwrap();
    for name in [
        "GELFREE_H",
        "GF_STATUS_OK",
        "GF_STATUS_EXPLOSION_DETECTED",
        "gf_measure_parse",
        "gf_evaluator_l",
        "gf_profile_m_star",
        "gf_simulation_run_until",
        "gf_last_error_message",
        "typedef struct GfMeasure GfMeasure",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
