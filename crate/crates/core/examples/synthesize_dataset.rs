//! Generate a small seeded dataset of phantom sinograms and show that the
//! manifest hash is reproducible.

use oatk_core::acoustic::EirSpec;
use oatk_core::synthesis::{generate_dataset, PhantomKind, SourceItem, SynthesisConfig};
use oatk_core::ArrayGeometry;

fn main() -> oatk_core::Result<()> {
    let geometry = ArrayGeometry {
        n_detectors: 32,
        ..ArrayGeometry::default().with_time_window(640, 700)
    };
    let cfg = SynthesisConfig {
        image_size: 48,
        fov_m: 0.0048,
        rng_seed: 42,
        ..SynthesisConfig::default()
    };
    let sources: Vec<SourceItem> = ["disks:3", "points:2", "cartoon"]
        .iter()
        .map(|k| k.parse::<PhantomKind>().map(SourceItem::Phantom))
        .collect::<oatk_core::Result<_>>()?;

    let root = std::env::temp_dir().join("oatk_synthesize_example");
    let a = generate_dataset(&sources, root.join("a"), &geometry, Some(&EirSpec::default()), &cfg)?;
    let b = generate_dataset(&sources, root.join("b"), &geometry, Some(&EirSpec::default()), &cfg)?;
    for it in &a.items {
        println!("{}: sos {} m/s, scale {:.2}, {}", it.index, it.sos_mps, it.scale, it.sinogram_file);
    }
    println!("hash {}\nsame on rerun: {}", a.hash, a.hash == b.hash);
    std::fs::remove_dir_all(&root).ok();
    Ok(())
}
