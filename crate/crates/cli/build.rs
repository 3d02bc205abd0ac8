use std::process::Command;

fn main() {
    let v = Command::new("git")
        .args(["describe", "--tags", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_default();
    let v = if v.is_empty() {
        format!("v{}", std::env::var("CARGO_PKG_VERSION").unwrap())
    } else {
        format!("v{}-g{}", std::env::var("CARGO_PKG_VERSION").unwrap(), v)
    };
    println!("cargo:rustc-env=QE_VERSION={v}");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
}
