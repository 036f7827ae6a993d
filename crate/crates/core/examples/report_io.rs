//! Writes a report to disk, reads it back bit for bit and prints it as CSV.
//!
//! cargo run --example report_io

use tilepic::report::{read_report, report_to_csv, write_report};
use tilepic::{GridReport, Result};

pub fn demo(dir: &std::path::Path) -> Result<String> {
    let nx = 4;
    let ny = 3;
    let r = GridReport {
        name: "bz".into(),
        step: 42,
        nx,
        ny,
        dx: 0.1,
        dy: 0.1,
        time: 42.0 * 0.07,
        data: (0..nx * ny).map(|k| (k as f64 * 0.7).sin()).collect(),
    };
    let path = dir.join("bz_000042.tpic");
    write_report(std::fs::File::create(&path)?, &r)?;
    let back = read_report(std::fs::File::open(&path)?)?;
    assert!(back.bit_eq(&r));
    println!("{}: {} bytes, round trip exact", path.display(), std::fs::metadata(&path)?.len());
    let mut csv = Vec::new();
    report_to_csv(&mut csv, &back)?;
    let csv = String::from_utf8(csv).expect("csv is ascii");
    print!("{csv}");
    Ok(csv)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    demo(&std::env::temp_dir())?;
    Ok(())
}
