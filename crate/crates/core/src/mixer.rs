//! Synthetic combined-motion samples built as convex combinations of basic
//! motion representations at a chosen network layer.
//!
//! Features and soft labels share one ratio vector drawn from a symmetric
//! Dirichlet distribution, sampled as normalized unit-scale gamma variates.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::dataset::{MotionVocabulary, Pattern};
use crate::error::{Error, Result};
use crate::network::Mlp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Layer whose representations are mixed; 0 mixes raw input patterns.
    pub layer: usize,
    /// Symmetric Dirichlet concentration.
    pub alpha: f64,
    /// Number of synthetic samples; `None` matches the number of basic patterns.
    pub total_count: Option<usize>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            layer: 0,
            alpha: 50.0,
            total_count: None,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self, field: &str) -> Result<()> {
        if self.alpha.is_nan() || self.alpha <= 0.0 || !self.alpha.is_finite() {
            return Err(Error::config(
                format!("{field}.alpha"),
                "must be a finite value > 0",
            ));
        }
        Ok(())
    }

    pub fn resolved_count(&self, n_basic_patterns: usize) -> usize {
        self.total_count.unwrap_or(n_basic_patterns)
    }
}

/// One synthetic sample at layer `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSample {
    pub z: Vec<f64>,
    pub y_soft: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Indices into the basic pattern list, one per constituent.
    pub sources: Vec<usize>,
    pub combined_class: usize,
}

/// Splits `total` as evenly as possible; the remainder goes to the lowest indices.
pub fn per_class_allocation(total: usize, n_classes: usize) -> Vec<usize> {
    if n_classes == 0 {
        return Vec::new();
    }
    let (base, extra) = (total / n_classes, total % n_classes);
    (0..n_classes)
        .map(|c| base + usize::from(c < extra))
        .collect()
}

/// Draws `lambda ~ Dirichlet(alpha, ..., alpha)` of length `k`.
pub fn sample_mixing_ratios<R: Rng + ?Sized>(
    alpha: f64,
    k: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if alpha.is_nan() || alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::Mixer(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    if k == 0 {
        return Err(Error::Mixer("need at least one component".into()));
    }
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::Mixer(e.to_string()))?;
    let mut draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    if sum > 0.0 {
        draws.iter_mut().for_each(|v| *v /= sum);
    } else {
        // every variate underflowed: the limit for tiny alpha is a random vertex
        let hot = rng.random_range(0..k);
        draws
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = f64::from(u8::from(i == hot)));
    }
    Ok(draws)
}

fn check_lambda(lambda: &[f64], k: usize) -> Result<()> {
    if lambda.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: lambda.len(),
        });
    }
    let sum: f64 = lambda.iter().sum();
    if lambda.iter().any(|&l| !(0.0..=1.0).contains(&l)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Mixer("mixing ratios must lie on the simplex".into()));
    }
    Ok(())
}

/// `sum_k lambda_k * rep_k`.
pub fn mix_at_layer(representations: &[&[f64]], lambda: &[f64]) -> Result<Vec<f64>> {
    check_lambda(lambda, representations.len())?;
    let width = representations.first().map_or(0, |r| r.len());
    let mut z = vec![0.0; width];
    for (rep, &l) in representations.iter().zip(lambda) {
        if rep.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                actual: rep.len(),
            });
        }
        for (acc, &v) in z.iter_mut().zip(rep.iter()) {
            *acc += l * v;
        }
    }
    Ok(z)
}

/// Soft label from distinct one-hot labels and the same ratios used for features.
pub fn mix_labels(one_hot_labels: &[&[f64]], lambda: &[f64]) -> Result<Vec<f64>> {
    let mut hot = Vec::with_capacity(one_hot_labels.len());
    for y in one_hot_labels {
        let ones: Vec<usize> = y
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect();
        if ones.len() != 1 || y[ones[0]] != 1.0 {
            return Err(Error::Mixer("label is not one-hot".into()));
        }
        if hot.contains(&ones[0]) {
            return Err(Error::Mixer(format!("duplicate hot index {}", ones[0])));
        }
        hot.push(ones[0]);
    }
    mix_at_layer(one_hot_labels, lambda)
}

/// Generates the synthetic combined-motion set at `config.layer`.
///
/// Per sample: one source pattern drawn uniformly (with replacement) from each
/// constituent class, mapped through `g_n`, then mixed with fresh ratios.
pub fn build_synthetic_set<R: Rng + ?Sized>(
    model: &Mlp,
    patterns: &[Pattern],
    vocab: &MotionVocabulary,
    config: &SynthesisConfig,
    rng: &mut R,
) -> Result<Vec<MixedSample>> {
    config.validate("synthesis")?;
    let total = config.resolved_count(patterns.len());
    let allocation = per_class_allocation(total, vocab.n_combined());
    if total == 0 || allocation.is_empty() {
        return Ok(Vec::new());
    }

    let n_basic = vocab.n_basic();
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); n_basic];
    for (i, p) in patterns.iter().enumerate() {
        if !vocab.is_basic(p.motion) {
            return Err(Error::Mixer(format!(
                "pattern {i} has non-basic motion `{}`",
                vocab.name(p.motion)
            )));
        }
        pools[p.motion].push(i);
    }
    for (label, &count) in vocab.combineds().iter().zip(&allocation) {
        if count == 0 {
            continue;
        }
        if let Some(&empty) = label.constituents.iter().find(|&&b| pools[b].is_empty()) {
            return Err(Error::Mixer(format!(
                "no training patterns for `{}`, a constituent of `{}`",
                vocab.name(empty),
                label.name
            )));
        }
    }

    let representations = representations_at(model, config.layer, patterns)?;
    let eye: Vec<Vec<f64>> = (0..n_basic)
        .map(|b| (0..n_basic).map(|j| f64::from(u8::from(j == b))).collect())
        .collect();

    let mut out = Vec::with_capacity(total);
    for (label, &count) in vocab.combineds().iter().zip(&allocation) {
        let k = label.constituents.len();
        for _ in 0..count {
            let sources: Vec<usize> = label
                .constituents
                .iter()
                .map(|&b| pools[b][rng.random_range(0..pools[b].len())])
                .collect();
            let lambda = sample_mixing_ratios(config.alpha, k, rng)?;
            let reps: Vec<&[f64]> = sources
                .iter()
                .map(|&s| representations.row(s).to_slice().expect("standard layout"))
                .collect();
            let hots: Vec<&[f64]> = label
                .constituents
                .iter()
                .map(|&b| eye[b].as_slice())
                .collect();
            out.push(MixedSample {
                z: mix_at_layer(&reps, &lambda)?,
                y_soft: mix_labels(&hots, &lambda)?,
                lambda,
                sources,
                combined_class: label.id,
            });
        }
    }
    Ok(out)
}

fn representations_at(model: &Mlp, layer: usize, patterns: &[Pattern]) -> Result<Array2<f64>> {
    let d = patterns.first().map_or(0, |p| p.x.len());
    let mut x = Array2::zeros((patterns.len(), d));
    for (mut row, p) in x.rows_mut().into_iter().zip(patterns) {
        if p.x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: p.x.len(),
            });
        }
        row.assign(&ArrayView1::from(&p.x[..]));
    }
    if layer == 0 {
        return Ok(x);
    }
    model.forward_to_batch(layer, x.view())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_model, ModelConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_component_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_mixing_ratios(0.3, 1, &mut rng).unwrap(), vec![1.0]);
        assert!(sample_mixing_ratios(0.0, 2, &mut rng).is_err());
        assert!(sample_mixing_ratios(-1.0, 2, &mut rng).is_err());
    }

    #[test]
    fn high_concentration_stays_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let l = sample_mixing_ratios(1e6, 2, &mut rng).unwrap();
            assert!((l[0] - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn ratios_lie_on_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &alpha in &[0.01, 0.5, 1.0, 50.0] {
            for k in 2..5 {
                let l = sample_mixing_ratios(alpha, k, &mut rng).unwrap();
                assert!(l.iter().all(|v| (0.0..=1.0).contains(v)));
                assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mixing_examples() {
        let (a, b) = ([1.0, 0.0], [0.0, 1.0]);
        assert_eq!(
            mix_at_layer(&[&a, &b], &[0.5, 0.5]).unwrap(),
            vec![0.5, 0.5]
        );
        assert_eq!(
            mix_at_layer(&[&[3.0, -2.0], &b], &[1.0, 0.0]).unwrap(),
            vec![3.0, -2.0]
        );
        assert!(mix_at_layer(&[&a, &[1.0, 2.0, 3.0]], &[0.5, 0.5]).is_err());
        assert!(mix_at_layer(&[&a, &b], &[0.5, 0.5, 0.0]).is_err());

        let mut e1 = [0.0; 6];
        e1[1] = 1.0;
        let mut e5 = [0.0; 6];
        e5[5] = 1.0;
        let y = mix_labels(&[&e1, &e5], &[0.5, 0.5]).unwrap();
        assert_eq!(y, vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.5]);
        assert!(mix_labels(&[&e1, &e1], &[0.5, 0.5]).is_err());
        assert!(mix_labels(&[&e1, &[0.5, 0.5, 0.0, 0.0, 0.0, 0.0]], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn allocation_is_even() {
        assert_eq!(per_class_allocation(12_000, 12), vec![1000; 12]);
        assert_eq!(per_class_allocation(14, 4), vec![4, 4, 3, 3]);
        assert!(per_class_allocation(5, 0).is_empty());
    }

    fn patterns() -> Vec<Pattern> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        (0..60)
            .map(|i| {
                let mut x: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
                let s: f64 = x.iter().sum();
                x.iter_mut().for_each(|v| *v /= s);
                Pattern {
                    x,
                    motion: i % 6,
                    trial: 0,
                    frame_index: i,
                }
            })
            .collect()
    }

    #[test]
    fn synthetic_set_at_input_layer() {
        let vocab = MotionVocabulary::upper_limb();
        let model = init_model(&ModelConfig::new(8, vec![16, 16, 16], 6).unwrap(), 0).unwrap();
        let pats = patterns();
        let cfg = SynthesisConfig {
            total_count: Some(30),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = build_synthetic_set(&model, &pats, &vocab, &cfg, &mut rng).unwrap();
        assert_eq!(set.len(), 30);
        let mut per_class = [0; 18];
        for s in &set {
            per_class[s.combined_class] += 1;
            let label = vocab.label(s.combined_class).unwrap();
            assert_eq!(s.sources.len(), 2);
            for (src, &b) in s.sources.iter().zip(&label.constituents) {
                assert_eq!(pats[*src].motion, b);
            }
            for d in 0..8 {
                let (u, v) = (pats[s.sources[0]].x[d], pats[s.sources[1]].x[d]);
                assert!(s.z[d] >= u.min(v) - 1e-15 && s.z[d] <= u.max(v) + 1e-15);
            }
            assert!((s.z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (b, &y) in s.y_soft.iter().enumerate() {
                match label.constituents.iter().position(|&c| c == b) {
                    Some(k) => assert_eq!(y, s.lambda[k]),
                    None => assert_eq!(y, 0.0),
                }
            }
        }
        assert_eq!(&per_class[6..], &[3, 3, 3, 3, 3, 3, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn hidden_layer_and_defaults() {
        let vocab = MotionVocabulary::upper_limb();
        let model = init_model(&ModelConfig::new(8, vec![16, 12, 10], 6).unwrap(), 0).unwrap();
        let pats = patterns();
        let cfg = SynthesisConfig {
            layer: 2,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let set = build_synthetic_set(&model, &pats, &vocab, &cfg, &mut rng).unwrap();
        assert_eq!(set.len(), pats.len());
        assert!(set.iter().all(|s| s.z.len() == 12));
        let s = &set[0];
        let reps: Vec<Vec<f64>> = s
            .sources
            .iter()
            .map(|&i| model.forward_to(2, &pats[i].x).unwrap())
            .collect();
        let want = mix_at_layer(&[&reps[0], &reps[1]], &s.lambda).unwrap();
        for (a, b) in s.z.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_cases_and_errors() {
        let model = init_model(&ModelConfig::new(8, vec![4], 6).unwrap(), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let basics_only =
            MotionVocabulary::build::<&str>(&["S1", "S2", "S3", "S4", "S5", "S6"], &[]).unwrap();
        let cfg = SynthesisConfig::default();
        assert!(
            build_synthetic_set(&model, &patterns(), &basics_only, &cfg, &mut rng)
                .unwrap()
                .is_empty()
        );

        let vocab = MotionVocabulary::upper_limb();
        let mut pats = patterns();
        pats.retain(|p| p.motion != 4);
        let err = build_synthetic_set(&model, &pats, &vocab, &cfg, &mut rng).unwrap_err();
        assert!(err.to_string().contains("S5"), "{err}");
    }
}
