//! Golden files. Set `UPDATE_GOLDEN=1` to rewrite them after a reviewed change.

mod common;

use std::path::{Path, PathBuf};

use common::fixture_path;
use niaas::graphstore::{parse_document, serialize_document};
use niaas::vocab::builtin_schema;

fn check(golden: &Path, actual: &str) {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(golden, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(golden).unwrap_or_else(|e| panic!("{}: {e}", golden.display()));
    assert!(expected == actual, "{} differs from the current output", golden.display());
}

/// Copies the fixtures into a fresh directory so scripts can write beside them.
pub fn scratch_fixtures(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("niaas-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    for e in std::fs::read_dir(fixture_path("")).unwrap() {
        let p = e.unwrap().path();
        if p.is_file() {
            std::fs::copy(&p, dir.join(p.file_name().unwrap())).unwrap();
        }
    }
    dir
}

#[test]
fn schema_matches_golden() {
    let text = serialize_document(&builtin_schema());
    check(&fixture_path("schema.golden.ndl"), &text);
    assert_eq!(serialize_document(&parse_document(&text).unwrap()), text);
}

#[test]
fn demo_manifest_matches_golden() {
    let dir = scratch_fixtures("golden");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = niaas::cli::run(["niaas", "run", dir.join("demo.scn").to_str().unwrap()], &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    let manifest = std::fs::read_to_string(dir.join("out/demo.manifest.ndl")).unwrap();
    check(&fixture_path("demo.manifest.golden.ndl"), &manifest);
    check(&fixture_path("demo.log.golden"), &String::from_utf8(out).unwrap());
    std::fs::remove_dir_all(dir).unwrap();
}
