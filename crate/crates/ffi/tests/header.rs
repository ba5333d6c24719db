//! The generated header compiles as C and as C++ against a caller that uses
//! every exported declaration.

use std::path::PathBuf;
use std::process::Command;

const CALLER: &str = r#"
#include "cesaro.h"
#include <stdio.h>

int run(const char *path) {
    CesaroModel *m = NULL;
    if (cesaro_model_from_file(path, &m) != CESARO_STATUS_OK) {
        fprintf(stderr, "%s\n", cesaro_last_error());
        return 1;
    }
    double re, im, d, l1, linf, sum;
    uint32_t t;
    size_t failed;
    char *report = NULL;
    cesaro_floor_log3(81, &t);
    (void)cesaro_sign_flip_count(1, 8);
    (void)cesaro_sigma(1, 8);
    (void)cesaro_model_chain_count(m);
    cesaro_iterate(m, 0, 1, 2, &re, &im);
    cesaro_average(m, 0, 1, 7, &re, &im);
    cesaro_diameter(m, 0, 2, 8, &d);
    cesaro_margin(m, 2, 8, &d);
    cesaro_norms(m, &l1, &linf, &sum);
    cesaro_verify(m, CESARO_SUITE_NORMS, &report, &failed);
    cesaro_string_free(report);
    cesaro_model_free(m);
    return 0;
}
"#;

fn compile(compiler: &str, extension: &str, extra: &[&str]) {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join(format!("caller.{extension}"));
    std::fs::write(&source, CALLER).unwrap();
    let output = Command::new(compiler)
        .args(extra)
        .arg("-Wall")
        .arg("-Werror")
        .arg("-c")
        .arg("-I")
        .arg(&include)
        .arg(&source)
        .arg("-o")
        .arg(dir.path().join("caller.o"))
        .output()
        .unwrap_or_else(|e| panic!("cannot run {compiler}: {e}"));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn header_compiles_as_c() {
    compile("cc", "c", &["-std=c99"]);
}

#[test]
fn header_compiles_as_cpp() {
    compile("c++", "cpp", &[]);
}
