//! Classifies good/bad prints from measurements alone at several M.
//!
//! Usage:
//!   cargo run --release --example compressive_classify -- [words] [M,M,...]
//!
//! Defaults to the desk-scale sweep (2500 words, M = 200,100,50,20,10).

use blindprint::classify::ClassifierKind;
use blindprint::dataset::Scale;
use blindprint::harness::{run_experiment, ExperimentConfig};

fn main() -> blindprint::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig { output_dir: "out/compressive_classify".into(), ..ExperimentConfig::default() };
    if let Some(words) = args.next() {
        let words: usize = words.parse().expect("word count");
        cfg.scale = Scale::Words(words);
    }
    if let Some(ms) = args.next() {
        cfg.m_list = ms.split(',').map(|m| m.parse().expect("M")).collect();
    }
    let record = run_experiment(&cfg)?;

    print!("{:>5}", "M");
    for k in &cfg.classifiers {
        print!("{:>14}", k.as_str());
    }
    println!();
    let mut ms = cfg.m_list.clone();
    ms.sort_unstable_by(|a, b| b.cmp(a));
    for m in ms {
        print!("{m:>5}");
        for &k in &cfg.classifiers {
            match record.accuracy(k, m) {
                Some(a) => print!("{a:>14.2}"),
                None => print!("{:>14}", "failed"),
            }
        }
        println!();
    }
    for s in &record.misclass {
        if s.classifier == Some(ClassifierKind::CubicSvm) {
            println!("cubic_svm M={}: bad->good {} good->bad {}", s.m, s.bad_as_good, s.good_as_bad);
        }
    }
    for t in record.stage_times.iter().filter(|t| t.seconds > 1.0) {
        println!("{:<28} {:>8.1}s", t.stage, t.seconds);
    }
    for f in &record.failures {
        println!("failure: {} at M={}: {}", f.classifier, f.m, f.error);
    }
    Ok(())
}
