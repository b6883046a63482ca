use std::path::Path;
use std::process::Command;

fn main() {
    let fallback = format!("v{}", std::env::var("CARGO_PKG_VERSION").unwrap_or_default());
    let id = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or(fallback);
    println!("cargo:rustc-env=MEREO_BUILD_ID={id}");
    for p in ["../../.git/HEAD", "../../.git/index"] {
        if Path::new(p).exists() {
            println!("cargo:rerun-if-changed={p}");
        }
    }
}
