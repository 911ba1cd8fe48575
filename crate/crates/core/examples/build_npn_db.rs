//! Regenerates the embedded NPN structure database.
//!
//! Usage: cargo run --release -p reconv --example build_npn_db [OUT]
//!
//! The file is rewritten after every class, and a partial file at OUT is
//! picked up again on the next run.

use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/npn4.db"));
    let partial = std::fs::read_to_string(&out)
        .ok()
        .and_then(|t| reconv::npn::NpnDatabase::parse(&t).ok())
        .unwrap_or_default();
    println!("resuming with {} classes", partial.len());
    let t0 = std::time::Instant::now();
    let db = reconv::npn::NpnDatabase::generate_from(reconv::npn::MAX_NPN_VARS, partial, |db| {
        std::fs::write(&out, db.to_text())?;
        Ok(())
    })?;
    std::fs::write(&out, db.to_text())?;
    for n in 0..=reconv::npn::MAX_NPN_VARS {
        println!("arity {n}: {} classes", db.classes(n));
    }
    println!("wrote {} entries to {} in {:.1?}", db.len(), out.display(), t0.elapsed());
    Ok(())
}
