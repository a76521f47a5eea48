//! Artifact manifests.
//!
//! Every command finishes by writing a `manifest` file into the output
//! directory: one `<sha256-hex>  <name>` line per artifact, sorted by name
//! (the same layout `sha256sum` expects). Artifacts are hashed by content,
//! and commands emit no timestamps or machine-dependent bytes, so identical
//! configs produce byte-identical manifests.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write;
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

/// Hash `artifacts` (paths inside `out_dir`) and write `out_dir/manifest`.
///
/// Returns the manifest text so callers can compare runs without re-reading.
pub fn write_manifest(out_dir: &Path, artifacts: &[PathBuf]) -> io::Result<String> {
    let mut lines = Vec::with_capacity(artifacts.len());
    for path in artifacts {
        let bytes = fs::read(path)?;
        let name = path
            .strip_prefix(out_dir)
            .unwrap_or(path.as_path())
            .to_string_lossy()
            .into_owned();
        lines.push(format!("{}  {}", sha256_hex(&bytes), name));
    }
    lines.sort();
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(out_dir.join(MANIFEST_NAME), &text)?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_known_vector() {
        // FIPS 180-2 appendix B.1: SHA-256("abc").
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_is_sorted_and_stable() {
        let dir = tempfile::tempdir().unwrap();
        let b = dir.path().join("b.csv");
        let a = dir.path().join("a.csv");
        fs::write(&b, "2\n").unwrap();
        fs::write(&a, "1\n").unwrap();
        let text1 = write_manifest(dir.path(), &[b.clone(), a.clone()]).unwrap();
        let text2 = write_manifest(dir.path(), &[a, b]).unwrap();
        assert_eq!(text1, text2);
        let names: Vec<&str> =
            text1.lines().map(|l| l.split_whitespace().last().unwrap()).collect();
        assert_eq!(names, ["a.csv", "b.csv"]);
        assert_eq!(fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap(), text1);
    }
}
