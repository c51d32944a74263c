//! Cross-module property tests: invariants that must hold for any valid
//! combination of geometry, extractor configuration, and image content.

use hclbp::bench::{build_dataset_index, extract_samples};
use hclbp::fusion::{extract, BlockSelection, ExtractorConfig};
use hclbp::noise::{apply_impulse_noise, NoiseSpec};
use hclbp::opcount::{measure_ops, OperatorKind};
use hclbp::raster::{GrayPlane, OperatorParams, RgbImage};
use hclbp::sps::LsvMode;
use hclbp::synth::{write_corpus, SynthSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rgb(width: u32, height: u32, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planes = [(); 3].map(|_| {
        let data: Vec<u8> = (0..width as u64 * height as u64).map(|_| rng.random()).collect();
        GrayPlane::new(width, height, data).unwrap()
    });
    RgbImage::new(planes).unwrap()
}

fn ring() -> impl Strategy<Value = (u32, u32)> {
    prop_oneof![Just((4u32, 1u32)), Just((8, 1)), Just((12, 2)), Just((16, 2)), Just((8, 3))]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// The instrumented labeling loops and the closed-form model agree for
    /// every geometry, operator, and selection setting.
    #[test]
    fn modeled_counts_match_the_closed_form_for_any_geometry(
        (p, r) in ring(),
        size in 24u32..64,
        seed in any::<u64>(),
        fused in any::<bool>(),
        sps in any::<bool>(),
    ) {
        let image = rgb(size, size, seed);
        let params = OperatorParams::new(p, r).unwrap();
        let operator = if fused { OperatorKind::Hclbp } else { OperatorKind::PerPlaneLbp };
        let selection = if sps { Some(LsvMode::Absolute) } else { None };
        let report = measure_ops(&image, operator, &params, selection).unwrap();
        prop_assert_eq!(&report.modeled, &report.predicted);
        if !sps {
            let interior = (size - 2 * r) as u64;
            prop_assert_eq!(report.context.neighborhoods, interior * interior);
        } else {
            prop_assert!(report.context.neighborhoods >= 1);
        }
    }

    /// Every histogram block of every descriptor sums to 1 and the total
    /// length matches the configuration's advertised size.
    #[test]
    fn every_descriptor_block_is_normalized_for_any_config(
        rings in proptest::sample::subsequence(
            vec![(4u32, 1u32), (8, 1), (12, 2), (16, 2)], 1..=3),
        block_choice in 0usize..3,
        sps in any::<bool>(),
        signed in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let schedule: Vec<OperatorParams> =
            rings.iter().map(|&(p, r)| OperatorParams::new(p, r).unwrap()).collect();
        let config = ExtractorConfig {
            schedule,
            blocks: [BlockSelection::Full, BlockSelection::PerPlane, BlockSelection::FusedOnly]
                [block_choice],
            sps,
            lsv_mode: if signed { LsvMode::Signed } else { LsvMode::Absolute },
        };
        let image = rgb(40, 40, seed);
        let d = extract(&image, &config).unwrap();
        prop_assert_eq!(d.bins.len(), config.descriptor_len());
        for b in 0..d.blocks.len() {
            let sum: f64 = d.block_bins(b).iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "block {} sums to {}", b, sum);
        }
    }

    /// The same noise spec always produces the same image.
    #[test]
    fn noise_is_reproducible_for_any_spec(
        seed in any::<u64>(),
        ratio in 0.0f64..=1.0,
        image_seed in any::<u64>(),
    ) {
        let image = rgb(24, 24, image_seed);
        let spec = NoiseSpec::new(ratio, seed).unwrap();
        let a = apply_impulse_noise(&image, &spec).unwrap();
        let b = apply_impulse_noise(&image, &spec).unwrap();
        for plane in 0..3 {
            prop_assert_eq!(a.plane(plane).data(), b.plane(plane).data());
        }
    }
}

#[test]
fn noise_ratio_zero_is_the_identity() {
    let image = rgb(32, 32, 5);
    let spec = NoiseSpec::new(0.0, 99).unwrap();
    let noisy = apply_impulse_noise(&image, &spec).unwrap();
    for plane in 0..3 {
        assert_eq!(noisy.plane(plane).data(), image.plane(plane).data());
    }
}

#[test]
fn noise_ratio_one_saturates_every_cell() {
    let image = rgb(32, 32, 6);
    let spec = NoiseSpec::new(1.0, 99).unwrap();
    let noisy = apply_impulse_noise(&image, &spec).unwrap();
    for plane in 0..3 {
        assert!(noisy.plane(plane).data().iter().all(|&v| v == 0 || v == 255));
    }
    // Both salt and pepper must actually occur.
    assert!(noisy.plane(0).data().contains(&0));
    assert!(noisy.plane(0).data().contains(&255));
}

#[test]
fn descriptor_rows_follow_the_index_order() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec { width: 32, height: 32, per_class: 3, seed: 5 };
    write_corpus(dir.path(), &spec).unwrap();
    let index = build_dataset_index(dir.path(), None).unwrap();
    let config = ExtractorConfig {
        schedule: vec![OperatorParams::new(8, 1).unwrap()],
        blocks: BlockSelection::Full,
        sps: false,
        lsv_mode: LsvMode::Absolute,
    };
    let samples = extract_samples(&index, &config, None).unwrap();
    assert_eq!(samples.len(), index.entries.len());
    for (sample, entry) in samples.iter().zip(&index.entries) {
        assert_eq!(sample.id, entry.id);
        assert_eq!(sample.class, entry.class);
        assert_eq!(sample.bins.len(), config.descriptor_len());
    }
}
