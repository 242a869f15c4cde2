use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::scalar::Scalar;
use crate::vector::{random_unit_vector, FeatureVector};

/// One synthetic object class with its canonical feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectClass<S> {
    pub class_id: u32,
    pub prototype: FeatureVector<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment<S> {
    pub features: FeatureVector<S>,
    /// class_id of the generating object class.
    pub truth_label: u32,
    pub size_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task<S> {
    pub task_id: u64,
    pub user_id: u32,
    pub segments: Vec<Segment<S>>,
    pub release_time: f64,
    /// Sum of segment sizes; the request payload on the wire.
    pub input_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorkloadConfig {
    pub num_tasks: usize,
    pub num_users: u32,
    pub catalog_size: usize,
    pub zipf_exponent: f64,
    /// Inclusive [min, max] segment count per task.
    pub segments_per_task: (usize, usize),
    /// Per-coordinate Gaussian noise added to a class prototype before
    /// renormalization. Zero reproduces the prototype exactly.
    pub perturbation_sigma: f64,
    /// Chance that a segment is an exact copy of a segment from an earlier
    /// task instead of a fresh draw.
    pub duplicate_probability: f64,
    pub segment_size_bytes: u64,
    pub inter_arrival_seconds: f64,
    /// Derived per trial by the engine; set it directly for library use.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            num_tasks: 100,
            num_users: 10,
            catalog_size: 100,
            zipf_exponent: 1.2,
            segments_per_task: (1, 3),
            perturbation_sigma: 0.05,
            duplicate_probability: 0.75,
            segment_size_bytes: 2000,
            inter_arrival_seconds: 0.014,
            seed: 0,
        }
    }
}

impl WorkloadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_tasks < 1 {
            return Err(Error::Config("workload_config.num_tasks must be >= 1".into()));
        }
        if self.num_users < 1 {
            return Err(Error::Config("workload_config.num_users must be >= 1".into()));
        }
        if self.catalog_size < 1 {
            return Err(Error::Config(
                "workload_config.catalog_size must be >= 1".into(),
            ));
        }
        if !self.zipf_exponent.is_finite() || self.zipf_exponent <= 0.0 {
            return Err(Error::Config(format!(
                "workload_config.zipf_exponent must be > 0 (got {})",
                self.zipf_exponent
            )));
        }
        let (min_seg, max_seg) = self.segments_per_task;
        if min_seg < 1 || min_seg > max_seg {
            return Err(Error::Config(format!(
                "workload_config.segments_per_task must satisfy 1 <= min <= max (got [{min_seg}, {max_seg}])"
            )));
        }
        if !self.perturbation_sigma.is_finite() || self.perturbation_sigma < 0.0 {
            return Err(Error::Config(format!(
                "workload_config.perturbation_sigma must be >= 0 (got {})",
                self.perturbation_sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.duplicate_probability) {
            return Err(Error::Config(format!(
                "workload_config.duplicate_probability must lie in [0, 1] (got {})",
                self.duplicate_probability
            )));
        }
        if self.segment_size_bytes < 1 {
            return Err(Error::Config(
                "workload_config.segment_size_bytes must be >= 1".into(),
            ));
        }
        if !self.inter_arrival_seconds.is_finite() || self.inter_arrival_seconds < 0.0 {
            return Err(Error::Config(format!(
                "workload_config.inter_arrival_seconds must be >= 0 (got {})",
                self.inter_arrival_seconds
            )));
        }
        Ok(())
    }
}

/// Inverse-CDF sampler over the exact normalized power-law pmf
/// P(rank r) = r^(-s) / sum over the catalog.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    exponent: f64,
    total_weight: f64,
    cumulative: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(exponent: f64, catalog_size: usize) -> Result<Self> {
        if !exponent.is_finite() || exponent <= 0.0 {
            return Err(Error::Config(format!(
                "zipf_exponent must be > 0 (got {exponent})"
            )));
        }
        if catalog_size < 1 {
            return Err(Error::Config("catalog_size must be >= 1".into()));
        }
        let weights: Vec<f64> = (1..=catalog_size)
            .map(|r| (r as f64).powf(-exponent))
            .collect();
        let total_weight: f64 = weights.iter().sum();
        let mut cumulative = Vec::with_capacity(catalog_size);
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc / total_weight);
        }
        // Pin the top so a draw of u -> 1.0 - ulp can never fall off the end.
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(ZipfSampler {
            exponent,
            total_weight,
            cumulative,
        })
    }

    pub fn catalog_size(&self) -> usize {
        self.cumulative.len()
    }

    /// Rank in [1, catalog_size].
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|c| *c < u) + 1
    }

    /// Exact pmf of a rank, computed from the unnormalized weight.
    pub fn pmf(&self, rank: usize) -> Result<f64> {
        if rank < 1 || rank > self.cumulative.len() {
            return Err(Error::Usage(format!(
                "rank {rank} outside [1, {}]",
                self.cumulative.len()
            )));
        }
        Ok((rank as f64).powf(-self.exponent) / self.total_weight)
    }
}

/// Single draw from the Zipf pmf. Builds the sampler each call; use
/// ZipfSampler directly for bulk draws.
pub fn zipf_sample(exponent: f64, catalog_size: usize, rng: &mut impl Rng) -> Result<usize> {
    Ok(ZipfSampler::new(exponent, catalog_size)?.sample(rng))
}

const MAX_PAIRWISE_COSINE: f64 = 0.9;

/// Draws `catalog_size` unit prototypes with pairwise cosine similarity
/// below 0.9, regenerating colliding candidates up to a bounded budget.
pub fn build_catalog<S: Scalar>(
    catalog_size: usize,
    dimension: usize,
    seed: u64,
) -> Result<Vec<ObjectClass<S>>> {
    if catalog_size < 1 {
        return Err(Error::Config("catalog_size must be >= 1".into()));
    }
    if dimension < 2 {
        return Err(Error::Config("dimension must be >= 2".into()));
    }
    let mut rng = seeded_rng(seed);
    let budget = 100 * catalog_size + 100;
    let mut draws = 0usize;
    let mut prototypes: Vec<FeatureVector<S>> = Vec::with_capacity(catalog_size);
    while prototypes.len() < catalog_size {
        draws += 1;
        if draws > budget {
            return Err(Error::Config(format!(
                "could not draw {catalog_size} prototypes with pairwise cosine \
                 similarity < {MAX_PAIRWISE_COSINE} at dimension {dimension} \
                 within {budget} attempts; increase the dimension"
            )));
        }
        let candidate = random_unit_vector(dimension, &mut rng);
        let separated = prototypes
            .iter()
            .all(|p| p.dot(&candidate).to_f64().unwrap() < MAX_PAIRWISE_COSINE);
        if separated {
            prototypes.push(candidate);
        }
    }
    Ok(prototypes
        .into_iter()
        .enumerate()
        .map(|(i, prototype)| ObjectClass {
            class_id: i as u32,
            prototype,
        })
        .collect())
}

fn perturb<S: Scalar>(
    prototype: &FeatureVector<S>,
    sigma: f64,
    rng: &mut impl Rng,
) -> Result<FeatureVector<S>> {
    let values: Vec<S> = prototype
        .values()
        .iter()
        .map(|x| {
            let n: f64 = StandardNormal.sample(rng);
            *x + S::from_f64(n * sigma).unwrap()
        })
        .collect();
    Ok(FeatureVector::new(values)?.normalized())
}

/// Generates `num_tasks` tasks released at a fixed inter-arrival interval.
///
/// Each segment is either an exact copy of a segment from an earlier task
/// (with `duplicate_probability`, once any exist) or a fresh draw: a
/// Zipf-ranked class prototype plus Gaussian noise, renormalized.
pub fn generate_workload<S: Scalar>(
    config: &WorkloadConfig,
    catalog: &[ObjectClass<S>],
) -> Result<Vec<Task<S>>> {
    config.validate()?;
    if catalog.is_empty() {
        return Err(Error::Usage("catalog must be nonempty".into()));
    }
    if catalog.len() != config.catalog_size {
        return Err(Error::Usage(format!(
            "catalog holds {} classes but workload_config.catalog_size is {}",
            catalog.len(),
            config.catalog_size
        )));
    }
    let mut rng = seeded_rng(config.seed);
    let sampler = ZipfSampler::new(config.zipf_exponent, catalog.len())?;
    let (min_seg, max_seg) = config.segments_per_task;

    let mut pool: Vec<Segment<S>> = Vec::new();
    let mut tasks: Vec<Task<S>> = Vec::with_capacity(config.num_tasks);
    for t in 0..config.num_tasks {
        let user_id = rng.random_range(0..config.num_users);
        let segment_count = rng.random_range(min_seg..=max_seg);
        let mut segments = Vec::with_capacity(segment_count);
        for _ in 0..segment_count {
            let duplicate =
                !pool.is_empty() && rng.random::<f64>() < config.duplicate_probability;
            let segment = if duplicate {
                pool[rng.random_range(0..pool.len())].clone()
            } else {
                let rank = sampler.sample(&mut rng);
                let class = &catalog[rank - 1];
                let features = if config.perturbation_sigma == 0.0 {
                    class.prototype.clone()
                } else {
                    perturb(&class.prototype, config.perturbation_sigma, &mut rng)?
                };
                Segment {
                    features,
                    truth_label: class.class_id,
                    size_bytes: config.segment_size_bytes,
                }
            };
            segments.push(segment);
        }
        let input_size = segments.iter().map(|s| s.size_bytes).sum();
        pool.extend(segments.iter().cloned());
        tasks.push(Task {
            task_id: t as u64,
            user_id,
            segments,
            release_time: t as f64 * config.inter_arrival_seconds,
            input_size,
        });
    }
    Ok(tasks)
}

/// 1 - distinct truth labels / total segments.
pub fn measure_redundancy_rate<S>(tasks: &[Task<S>]) -> Result<f64> {
    if tasks.is_empty() {
        return Err(Error::Usage(
            "redundancy rate needs at least one task".into(),
        ));
    }
    let mut labels = HashSet::new();
    let mut total = 0usize;
    for task in tasks {
        for segment in &task.segments {
            labels.insert(segment.truth_label);
            total += 1;
        }
    }
    Ok(1.0 - labels.len() as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::cosine_distance;

    fn config(n: usize, dup: f64, sigma: f64, seed: u64) -> WorkloadConfig {
        WorkloadConfig {
            num_tasks: n,
            catalog_size: 20,
            duplicate_probability: dup,
            perturbation_sigma: sigma,
            seed,
            ..WorkloadConfig::default()
        }
    }

    #[test]
    fn zipf_single_element_support() {
        let mut rng = seeded_rng(1);
        for _ in 0..20 {
            assert_eq!(zipf_sample(1.0, 1, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn zipf_two_element_pmf() {
        let sampler = ZipfSampler::new(1.0, 2).unwrap();
        assert!((sampler.pmf(1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((sampler.pmf(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let mut rng = seeded_rng(2);
        let draws = 100_000;
        let ones = (0..draws)
            .filter(|_| sampler.sample(&mut rng) == 1)
            .count();
        let observed = ones as f64 / draws as f64;
        assert!(
            (observed - 2.0 / 3.0).abs() < 0.01,
            "observed P(1) = {observed}"
        );
    }

    #[test]
    fn zipf_rejects_bad_parameters() {
        let mut rng = seeded_rng(3);
        assert!(zipf_sample(-1.0, 10, &mut rng).is_err());
        assert!(zipf_sample(0.0, 10, &mut rng).is_err());
        assert!(zipf_sample(1.0, 0, &mut rng).is_err());
    }

    #[test]
    fn zipf_pmf_sums_to_one() {
        let sampler = ZipfSampler::new(1.2, 100).unwrap();
        let total: f64 = (1..=100).map(|r| sampler.pmf(r).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(sampler.pmf(0).is_err());
        assert!(sampler.pmf(101).is_err());
    }

    #[test]
    fn catalog_of_one_has_positive_norm() {
        let catalog = build_catalog::<f64>(1, 8, 7).unwrap();
        assert_eq!(catalog.len(), 1);
        assert!(catalog[0].prototype.norm() > 0.0);
    }

    #[test]
    fn catalog_generation_is_deterministic() {
        let a = build_catalog::<f64>(10, 16, 99).unwrap();
        let b = build_catalog::<f64>(10, 16, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn catalog_prototypes_are_separated() {
        let catalog = build_catalog::<f64>(50, 64, 42).unwrap();
        for i in 0..catalog.len() {
            for j in (i + 1)..catalog.len() {
                let cos = catalog[i].prototype.dot(&catalog[j].prototype);
                assert!(cos < 0.9, "classes {i} and {j} have cosine {cos}");
            }
        }
    }

    #[test]
    fn catalog_rejects_degenerate_dimensions() {
        assert!(build_catalog::<f64>(10, 1, 0).is_err());
        assert!(build_catalog::<f64>(0, 8, 0).is_err());
    }

    #[test]
    fn workload_has_exactly_num_tasks() {
        let catalog = build_catalog::<f64>(20, 16, 1).unwrap();
        let tasks = generate_workload(&config(1, 0.5, 0.05, 4), &catalog).unwrap();
        assert_eq!(tasks.len(), 1);
    }

    #[test]
    fn forced_duplicates_after_first_task() {
        let catalog = build_catalog::<f64>(20, 16, 1).unwrap();
        let tasks = generate_workload(&config(10, 1.0, 0.05, 5), &catalog).unwrap();
        let first: Vec<_> = tasks[0].segments.iter().map(|s| &s.features).collect();
        let mut seen: Vec<&FeatureVector<f64>> = first.clone();
        for task in &tasks[1..] {
            for segment in &task.segments {
                assert!(
                    seen.iter().any(|f| *f == &segment.features),
                    "segment in task {} is not a copy of an earlier segment",
                    task.task_id
                );
            }
            seen.extend(task.segments.iter().map(|s| &s.features));
        }
    }

    #[test]
    fn zero_noise_reproduces_prototypes_exactly() {
        let catalog = build_catalog::<f64>(20, 16, 1).unwrap();
        let tasks = generate_workload(&config(20, 0.0, 0.0, 6), &catalog).unwrap();
        for task in &tasks {
            for segment in &task.segments {
                let class = &catalog[segment.truth_label as usize];
                assert_eq!(segment.features, class.prototype);
            }
        }
    }

    #[test]
    fn noisy_segments_stay_near_their_prototype() {
        let catalog = build_catalog::<f64>(20, 64, 1).unwrap();
        let tasks = generate_workload(&config(50, 0.0, 0.05, 7), &catalog).unwrap();
        for task in &tasks {
            for segment in &task.segments {
                let class = &catalog[segment.truth_label as usize];
                let d = cosine_distance(&segment.features, &class.prototype).unwrap();
                assert!(d < 0.5, "noisy segment drifted to distance {d}");
            }
        }
    }

    #[test]
    fn workload_is_deterministic() {
        let catalog = build_catalog::<f64>(20, 16, 1).unwrap();
        let a = generate_workload(&config(30, 0.5, 0.05, 8), &catalog).unwrap();
        let b = generate_workload(&config(30, 0.5, 0.05, 8), &catalog).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn release_times_are_nondecreasing_and_sizes_add_up() {
        let catalog = build_catalog::<f64>(20, 16, 1).unwrap();
        let tasks = generate_workload(&config(30, 0.5, 0.05, 9), &catalog).unwrap();
        for pair in tasks.windows(2) {
            assert!(pair[0].release_time <= pair[1].release_time);
        }
        for task in &tasks {
            assert!(!task.segments.is_empty());
            let total: u64 = task.segments.iter().map(|s| s.size_bytes).sum();
            assert_eq!(task.input_size, total);
        }
    }

    #[test]
    fn redundancy_of_all_distinct_labels_is_zero() {
        let catalog = build_catalog::<f64>(10, 16, 2).unwrap();
        let tasks: Vec<Task<f64>> = (0..10)
            .map(|i| Task {
                task_id: i,
                user_id: 0,
                segments: vec![Segment {
                    features: catalog[i as usize].prototype.clone(),
                    truth_label: i as u32,
                    size_bytes: 100,
                }],
                release_time: 0.0,
                input_size: 100,
            })
            .collect();
        assert_eq!(measure_redundancy_rate(&tasks).unwrap(), 0.0);
    }

    #[test]
    fn redundancy_of_a_single_repeated_label() {
        let catalog = build_catalog::<f64>(1, 16, 2).unwrap();
        let tasks: Vec<Task<f64>> = (0..10)
            .map(|i| Task {
                task_id: i,
                user_id: 0,
                segments: vec![Segment {
                    features: catalog[0].prototype.clone(),
                    truth_label: 0,
                    size_bytes: 100,
                }],
                release_time: 0.0,
                input_size: 100,
            })
            .collect();
        assert_eq!(measure_redundancy_rate(&tasks).unwrap(), 0.9);
    }

    #[test]
    fn redundancy_of_empty_list_is_a_usage_error() {
        assert!(measure_redundancy_rate::<f64>(&[]).is_err());
    }

    #[test]
    fn redundancy_matches_direct_count_on_a_zipf_stream() {
        let cfg = WorkloadConfig {
            num_tasks: 100,
            catalog_size: 100,
            segments_per_task: (1, 1),
            duplicate_probability: 0.0,
            seed: 10,
            ..WorkloadConfig::default()
        };
        cfg.validate().unwrap();
        let catalog = build_catalog::<f64>(100, 64, 3).unwrap();
        let tasks = generate_workload(&cfg, &catalog).unwrap();
        let mut labels = HashSet::new();
        for t in &tasks {
            labels.insert(t.segments[0].truth_label);
        }
        let expected = 1.0 - labels.len() as f64 / 100.0;
        let measured = measure_redundancy_rate(&tasks).unwrap();
        assert_eq!(measured, expected);
        assert!(measured > 0.0 && measured < 1.0);
    }

    #[test]
    fn truth_labels_always_index_the_catalog() {
        let catalog = build_catalog::<f64>(20, 16, 1).unwrap();
        let tasks = generate_workload(&config(50, 0.6, 0.05, 11), &catalog).unwrap();
        for task in &tasks {
            for segment in &task.segments {
                assert!((segment.truth_label as usize) < catalog.len());
            }
        }
    }

    #[test]
    fn config_validation_names_the_field() {
        let mut cfg = WorkloadConfig::default();
        cfg.zipf_exponent = -1.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("zipf_exponent"));

        let mut cfg = WorkloadConfig::default();
        cfg.duplicate_probability = 1.5;
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("duplicate_probability"));

        let mut cfg = WorkloadConfig::default();
        cfg.segments_per_task = (3, 2);
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("segments_per_task"));
    }

    #[test]
    fn catalog_size_mismatch_is_rejected() {
        let catalog = build_catalog::<f64>(10, 16, 1).unwrap();
        let cfg = config(5, 0.0, 0.05, 12);
        assert!(generate_workload(&cfg, &catalog).is_err());
    }
}
