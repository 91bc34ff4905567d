//! Renders a small good/bad corpus and writes it as PGM files plus a manifest.
//!
//!   cargo run --release --example render_dataset -- [words] [out_dir]

use std::collections::BTreeMap;
use std::path::PathBuf;

use blindprint::dataset::{generate_dataset, write_dataset, Scale};
use blindprint::image::GrayImage;

fn main() -> blindprint::Result<()> {
    let mut args = std::env::args().skip(1);
    let words: usize = args.next().map_or(40, |w| w.parse().expect("word count"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/render_dataset".into()));

    let ds = generate_dataset(2019, Scale::Words(words))?;
    write_dataset(&ds, &out)?;

    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    for e in &ds.manifest.entries {
        *kinds.entry(format!("{}/{}", e.label, e.error)).or_default() += 1;
    }
    for (k, n) in &kinds {
        println!("{k:<16} {n}");
    }

    // first few good/bad pairs side by side
    let rows: Vec<GrayImage> = ds
        .images
        .chunks(2)
        .take(6)
        .map(|pair| GrayImage::stack_horizontal(pair, 4))
        .collect::<blindprint::Result<_>>()?;
    GrayImage::stack_vertical(&rows, 4)?.write_pgm(&out.join("preview.pgm"))?;
    println!("{} images in {}", ds.len(), out.display());
    Ok(())
}
