use std::collections::BTreeMap;

use rotlab::engine::{enumerate_joint, sample_trace};
use rotlab::prob::to_f64;
use rotlab::protolib::lookup;
use rotlab::sampling::SampleChooser;
use rotlab::Value;

const SAMPLES: u64 = 100_000;

#[test]
fn sampled_outputs_match_exact_law_within_three_sigma() {
    for (seed, label) in ["passthrough_rot", "erasure_rot:n=6,k=2", "leaky_rot", "clear_choice_rot"].iter().enumerate() {
        let p = lookup(label).unwrap();
        let exact = enumerate_joint(&p.alice, &p.bob, &p.channel, &p.limits, 1 << 30)
            .unwrap()
            .marginal_dist(&["output_A", "output_B"])
            .unwrap();
        let mut counts: BTreeMap<Value, u64> = BTreeMap::new();
        let mut ch = SampleChooser::new(1000 + seed as u64);
        for _ in 0..SAMPLES {
            let t = sample_trace(&p.alice, &p.bob, &p.channel, &p.limits, &mut ch).unwrap();
            *counts.entry(Value::tuple([t.output_a, t.output_b])).or_default() += 1;
        }
        for v in counts.keys() {
            assert!(to_f64(&exact.weight(v)) > 0.0, "{label}: sampled impossible outcome {v}");
        }
        for (v, w) in exact.iter() {
            let p = to_f64(w);
            let freq = *counts.get(v).unwrap_or(&0) as f64 / SAMPLES as f64;
            let sigma = (p * (1.0 - p) / SAMPLES as f64).sqrt();
            assert!((freq - p).abs() <= 3.0 * sigma, "{label} {v}: freq {freq} vs {p} (3σ = {})", 3.0 * sigma);
        }
    }
}
