use cosenet::formatting::compute_layout;
use cosenet::matrix::segmentation_to_blocks;
use cosenet::merge::MergeConfig;
use cosenet::pipeline::{segment, PipelineConfig};
use cosenet::regressor::{train_ridge, RidgeModel, Split, TrainingSet};
use cosenet::scaling::ScalingParams;
use cosenet::synth::{generate_dataset, SynthSpec};
use cosenet::{CorrelationMatrix, SegmentationVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise_free_model() -> RidgeModel {
    let spec = SynthSpec::new(8, 0.0, 0.0, 3.0, 1.0, 4096, 1);
    let data = generate_dataset(&spec).unwrap();
    train_ridge(&TrainingSet::from_dataset(&data, 8, Split::Train).unwrap(), 1.0, false).unwrap()
}

fn random_model(t: usize, rng: &mut ChaCha8Rng) -> RidgeModel {
    let w = Array2::from_shape_fn((t * t + 1, t), |_| rng.random_range(-0.1..0.1));
    RidgeModel::from_parts(t, w, 1.0, None).unwrap()
}

fn blocks(bits: &[u8]) -> CorrelationMatrix {
    CorrelationMatrix::new(segmentation_to_blocks(&SegmentationVector::from_u8(bits).unwrap())).unwrap()
}

#[test]
fn noise_free_two_blocks() {
    let model = noise_free_model();
    let out = segment(
        &blocks(&[1, 0, 0, 0, 1, 0, 0, 0]),
        &PipelineConfig::with_defaults(&model),
    )
    .unwrap();
    assert_eq!(out.segmentation.to_u8(), [1, 0, 0, 0, 1, 0, 0, 0]);
    assert_eq!(out.denoised, segmentation_to_blocks(&out.segmentation));
}

#[test]
fn size_law_and_threshold_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for t in [8, 16, 32] {
        let model = random_model(t, &mut rng);
        let th = rng.random::<f64>();
        let cfg = PipelineConfig::new(
            ScalingParams::new(0.3, 0.4, 0.2).unwrap(),
            MergeConfig::new(th).unwrap(),
            &model,
        );
        for m_in in 1..=256 {
            let raw = Array2::from_shape_fn((m_in, m_in), |(i, j)| if i == j { 1.0 } else { 0.5 });
            let out = segment(&CorrelationMatrix::new(raw).unwrap(), &cfg).unwrap();
            assert_eq!(out.segmentation.len(), m_in);
            assert_eq!(out.probabilities.len(), m_in);
            assert_eq!(out.denoised, segmentation_to_blocks(&out.segmentation));
            for (g, &p) in out.probabilities.as_slice().iter().enumerate() {
                assert_eq!(out.segmentation.get(g), g == 0 || p >= th);
            }
        }
    }
}

/// Trained on windows cut from 32×32 matrices, so window-local position 0
/// is not always a group start.
fn windowed_noise_free_model() -> RidgeModel {
    let spec = SynthSpec::new(32, 0.0, 0.0, 8.0, 2.0, 1500, 2);
    let data = generate_dataset(&spec).unwrap();
    train_ridge(&TrainingSet::from_dataset(&data, 8, Split::Train).unwrap(), 1.0, false).unwrap()
}

#[test]
fn padding_neutrality() {
    let model = windowed_noise_free_model();
    let cfg = PipelineConfig::with_defaults(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..40 {
        let m_in = rng.random_range(2..40);
        let extra = rng.random_range(1..12);
        let mut bits: Vec<u8> = (0..m_in).map(|_| u8::from(rng.random_bool(0.3))).collect();
        bits[0] = 1;
        let small = blocks(&bits);
        // embed inside a larger input whose extra elements are singletons
        let mut big = Array2::<f64>::eye(m_in + extra);
        big.slice_mut(ndarray::s![..m_in, ..m_in]).assign(&small.values());
        let a = segment(&small, &cfg).unwrap().segmentation;
        let b = segment(&CorrelationMatrix::new(big).unwrap(), &cfg)
            .unwrap()
            .segmentation;
        assert_eq!(a.bits(), &b.bits()[..m_in], "m_in={m_in} extra={extra}");
        assert_eq!(a.to_u8(), bits);
    }
}

#[test]
fn deterministic() {
    let model = noise_free_model();
    let spec = SynthSpec::preset(8, 0.3, 1, 4).unwrap();
    let data = generate_dataset(&spec).unwrap();
    let rec = data.train.first().or(data.test.first()).unwrap();
    let cfg = PipelineConfig::with_defaults(&model);
    assert_eq!(segment(&rec.matrix, &cfg).unwrap(), segment(&rec.matrix, &cfg).unwrap());
}

#[test]
fn layouts_cover_every_input_size() {
    for t in [8, 16, 32] {
        for m_in in 1..=256 {
            let l = compute_layout(m_in, t).unwrap();
            assert!(l.m0 >= m_in);
        }
    }
}
