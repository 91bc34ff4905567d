//! Key-holding adversary reconstructing words at decreasing M.
//!
//!   cargo run --release --example privacy_audit -- [WORD,WORD,...] [M,M,...]

use std::path::Path;

use blindprint::dataset::render_word;
use blindprint::harness::{privacy_audit, AuditConfig, AuditSample};

fn main() -> blindprint::Result<()> {
    let mut args = std::env::args().skip(1);
    let words = args.next().unwrap_or_else(|| "INK,TAB,FOX,JAM,RUG".into());
    let mut cfg = AuditConfig::default();
    if let Some(ms) = args.next() {
        cfg.m_list = ms.split(',').map(|m| m.parse().expect("M")).collect();
    }
    let samples: Vec<AuditSample> = words
        .split(',')
        .map(|w| Ok(AuditSample { image_id: format!("good-{w}"), word: Some(w.to_string()), image: render_word(w)? }))
        .collect::<blindprint::Result<_>>()?;
    let report = privacy_audit(&cfg, &samples, Some(Path::new("out/privacy_audit")))?;
    for (m, p) in &report.mean_psnr {
        let (illegible, n) = report.illegible_at(*m);
        println!("M={m:>4}  mean PSNR {p:6.2} dB  illegible {illegible}/{n}");
    }
    println!("threshold {:.1} dB: {}", report.threshold_db, if report.pass { "PASS" } else { "FAIL" });
    println!("grid: out/privacy_audit/grid.pgm");
    Ok(())
}
