use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::logic::{Fact, Vocabulary};

/// Independent random streams derived from one seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    World = 1,
    Samples = 2,
    Mask = 3,
    Init = 4,
    Shuffle = 5,
    Selection = 6,
}

/// Generator for one purpose under `seed`.
pub fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Generator used for random constraint selection under `seed`.
pub fn selection_rng(seed: u64) -> ChaCha8Rng {
    rng_for(seed, Stream::Selection)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(Error::Validation(format!("unknown split {s:?}"))),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

/// One datum: a feature vector and, per relation slot, its ground-truth fact
/// (absent when unlabelled).
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSample {
    pub id: usize,
    pub split: Split,
    pub features: Vec<f64>,
    pub slots: Vec<Option<Fact>>,
}

impl SceneSample {
    pub fn is_labelled(&self) -> bool {
        self.slots.iter().any(Option::is_some)
    }

    pub fn ground_truth(&self) -> Vec<(usize, Fact)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.map(|f| (i, f)))
            .collect()
    }
}

/// Parameters of the synthetic world.
///
/// Every predicate `p` admits a random subject set `A_p` and object set
/// `B_p`; the permitted facts are `⋃_p A_p × {p} × B_p`. Each relation slot
/// owns a feature block `E_s[s] + signal·E_p[p] + E_o[o] + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub n_subjects: usize,
    pub n_predicates: usize,
    pub n_objects: usize,
    pub subjects_per_predicate: usize,
    pub objects_per_predicate: usize,
    pub n_slots: usize,
    pub block_dim: usize,
    pub noise: f64,
    pub predicate_signal: f64,
    /// Predicate `p` is drawn with weight `(p + 1)^-skew`.
    pub predicate_skew: f64,
    pub zero_shot_fraction: f64,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub retention: f64,
    pub seed: u64,
}

impl Default for WorldSpec {
    fn default() -> Self {
        WorldSpec {
            n_subjects: 10,
            n_predicates: 10,
            n_objects: 10,
            subjects_per_predicate: 3,
            objects_per_predicate: 3,
            n_slots: 2,
            block_dim: 12,
            noise: 3.0,
            predicate_signal: 0.5,
            predicate_skew: 1.0,
            zero_shot_fraction: 0.2,
            n_train: 2000,
            n_val: 300,
            n_test: 500,
            retention: 1.0,
            seed: 0,
        }
    }
}

impl WorldSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.n_subjects == 0 || self.n_predicates == 0 || self.n_objects == 0 {
            return bad("vocabulary sizes must be positive".into());
        }
        if self.subjects_per_predicate == 0
            || self.subjects_per_predicate > self.n_subjects
            || self.objects_per_predicate == 0
            || self.objects_per_predicate > self.n_objects
        {
            return bad(format!(
                "per-predicate subject/object counts must lie in 1..={} and 1..={}",
                self.n_subjects, self.n_objects
            ));
        }
        if self.n_slots == 0 || self.block_dim == 0 {
            return bad("n_slots and block_dim must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.retention) {
            return bad(format!("retention {} outside [0, 1]", self.retention));
        }
        if !(0.0..1.0).contains(&self.zero_shot_fraction) {
            return bad(format!("zero_shot_fraction {} outside [0, 1)", self.zero_shot_fraction));
        }
        for (name, v) in [
            ("noise", self.noise),
            ("predicate_signal", self.predicate_signal),
            ("predicate_skew", self.predicate_skew),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        if self.n_train == 0 || self.n_test == 0 {
            return bad("n_train and n_test must be positive".into());
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.n_slots * self.block_dim
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.n_subjects, self.n_predicates, self.n_objects]
    }

    /// Number of training samples that keep their labels.
    pub fn labelled_count(&self) -> usize {
        (self.retention * self.n_train as f64).round() as usize
    }
}

/// A generated dataset and the hidden world it came from.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub spec: WorldSpec,
    pub vocab: Arc<Vocabulary>,
    /// Permitted facts, sorted.
    pub permitted: Vec<Fact>,
    /// Permitted facts never drawn for training or validation, sorted.
    pub zero_shot: Vec<Fact>,
    /// Facts of every training sample before label removal.
    pub train_facts: HashSet<Fact>,
    pub samples: Vec<SceneSample>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &SceneSample> {
        self.samples.iter().filter(move |s| s.split == split)
    }
}

struct Embeddings {
    tables: [Vec<Vec<f64>>; 3],
}

/// Samples a world and its train/val/test splits. Deterministic in
/// `spec.seed`; the label mask is a fixed permutation prefix, so lowering
/// the retention only removes more labels.
pub fn generate_dataset(spec: &WorldSpec) -> Result<Dataset> {
    spec.validate()?;
    let vocab = Arc::new(Vocabulary::with_sizes(
        spec.n_subjects,
        spec.n_predicates,
        spec.n_objects,
    )?);

    let mut world = rng_for(spec.seed, Stream::World);
    let mut permitted: Vec<Fact> = Vec::new();
    let mut by_predicate: Vec<Vec<Fact>> = Vec::with_capacity(spec.n_predicates);
    for p in 0..spec.n_predicates as u32 {
        let mut subjects: Vec<u32> = (0..spec.n_subjects as u32).collect();
        let mut objects: Vec<u32> = (0..spec.n_objects as u32).collect();
        subjects.shuffle(&mut world);
        objects.shuffle(&mut world);
        let mut facts = Vec::new();
        for &s in &subjects[..spec.subjects_per_predicate] {
            for &o in &objects[..spec.objects_per_predicate] {
                facts.push(Fact::new(s, p, o));
            }
        }
        facts.sort();
        permitted.extend(&facts);
        by_predicate.push(facts);
    }
    permitted.sort();

    // zero-shot facts, never the last remaining fact of a predicate
    let n_zero = (spec.zero_shot_fraction * permitted.len() as f64).round() as usize;
    let mut order = permitted.clone();
    order.shuffle(&mut world);
    let mut left: Vec<usize> = by_predicate.iter().map(Vec::len).collect();
    let mut zero_shot = Vec::new();
    for f in order {
        if zero_shot.len() == n_zero {
            break;
        }
        if left[f.p as usize] > 1 {
            left[f.p as usize] -= 1;
            zero_shot.push(f);
        }
    }
    zero_shot.sort();
    let zero_set: HashSet<Fact> = zero_shot.iter().copied().collect();

    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let emb = Embeddings {
        tables: spec.sizes().map(|n| {
            (0..n)
                .map(|_| (0..spec.block_dim).map(|_| normal.sample(&mut world)).collect())
                .collect()
        }),
    };

    let pred_weights: Vec<f64> = (0..spec.n_predicates)
        .map(|p| ((p + 1) as f64).powf(-spec.predicate_skew))
        .collect();
    let pred_dist = WeightedIndex::new(&pred_weights).map_err(|e| Error::Validation(e.to_string()))?;
    let train_pool: Vec<Vec<Fact>> = by_predicate
        .iter()
        .map(|fs| fs.iter().copied().filter(|f| !zero_set.contains(f)).collect())
        .collect();

    let mut rng = rng_for(spec.seed, Stream::Samples);
    let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::Validation(e.to_string()))?;
    let draw = |pool: &[Vec<Fact>], rng: &mut ChaCha8Rng| -> Fact {
        let p = pred_dist.sample(rng);
        pool[p][rng.random_range(0..pool[p].len())]
    };
    let features = |slots: &[Fact], rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut x = Vec::with_capacity(spec.feature_dim());
        for f in slots {
            let [es, ep, eo] = [
                &emb.tables[0][f.s as usize],
                &emb.tables[1][f.p as usize],
                &emb.tables[2][f.o as usize],
            ];
            for j in 0..spec.block_dim {
                x.push(es[j] + spec.predicate_signal * ep[j] + eo[j] + noise.sample(rng));
            }
        }
        x
    };

    let mut samples = Vec::with_capacity(spec.n_train + spec.n_val + spec.n_test);
    let mut train_facts = HashSet::new();
    let mut zero_cursor = 0;
    for (split, count) in [
        (Split::Train, spec.n_train),
        (Split::Val, spec.n_val),
        (Split::Test, spec.n_test),
    ] {
        for _ in 0..count {
            let facts: Vec<Fact> = (0..spec.n_slots)
                .map(|slot| match split {
                    Split::Train => draw(&train_pool, &mut rng),
                    Split::Val => draw(&by_predicate, &mut rng),
                    Split::Test => {
                        if slot == 0 && zero_cursor < zero_shot.len() {
                            zero_cursor += 1;
                            // consume the draw anyway so later samples do not shift
                            draw(&by_predicate, &mut rng);
                            zero_shot[zero_cursor - 1]
                        } else {
                            draw(&by_predicate, &mut rng)
                        }
                    }
                })
                .collect();
            if split == Split::Train {
                train_facts.extend(&facts);
            }
            let x = features(&facts, &mut rng);
            samples.push(SceneSample {
                id: samples.len(),
                split,
                features: x,
                slots: facts.into_iter().map(Some).collect(),
            });
        }
    }

    let mut mask_order: Vec<usize> = (0..spec.n_train).collect();
    mask_order.shuffle(&mut rng_for(spec.seed, Stream::Mask));
    for &i in &mask_order[..spec.n_train - spec.labelled_count()] {
        samples[i].slots.iter_mut().for_each(|s| *s = None);
    }

    Ok(Dataset {
        spec: spec.clone(),
        vocab,
        permitted,
        zero_shot,
        train_facts,
        samples,
    })
}

/// One line per sample: `id<TAB>split<TAB>features<TAB>slot…` with features
/// comma-joined and each slot `s,p,o` (ids) or `-`.
pub fn write_samples_tsv(samples: &[SceneSample]) -> String {
    let mut out = String::from("# id\tsplit\tfeatures\tslots\n");
    for s in samples {
        write!(out, "{}\t{}\t", s.id, s.split).unwrap();
        for (i, x) in s.features.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{x:?}").unwrap();
        }
        for slot in &s.slots {
            match slot {
                Some(f) => write!(out, "\t{},{},{}", f.s, f.p, f.o).unwrap(),
                None => out.push_str("\t-"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn parse_samples_tsv(text: &str) -> Result<Vec<SceneSample>> {
    let mut out: Vec<SceneSample> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            return Err(Error::parse(n, "expected id, split, features and at least one slot"));
        }
        let id = fields[0]
            .parse()
            .map_err(|_| Error::parse(n, format!("bad sample id {:?}", fields[0])))?;
        let split = fields[1].parse().map_err(|e: Error| Error::parse(n, e.to_string()))?;
        let features = fields[2]
            .split(',')
            .map(|v| {
                let x: f64 = v.parse().map_err(|_| Error::parse(n, format!("bad feature {v:?}")))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(Error::parse(n, format!("non-finite feature {v:?}")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let slots = fields[3..]
            .iter()
            .map(|f| {
                if *f == "-" {
                    return Ok(None);
                }
                let ids: Vec<u32> = f
                    .split(',')
                    .map(|v| v.parse().map_err(|_| Error::parse(n, format!("bad slot {f:?}"))))
                    .collect::<Result<_>>()?;
                match ids.as_slice() {
                    [s, p, o] => Ok(Some(Fact::new(*s, *p, *o))),
                    _ => Err(Error::parse(n, format!("slot {f:?} needs three ids"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = out.first() {
            if first.features.len() != features.len() {
                return Err(Error::parse(
                    n,
                    format!(
                        "feature dimension {} differs from {}",
                        features.len(),
                        first.features.len()
                    ),
                ));
            }
        }
        out.push(SceneSample {
            id,
            split,
            features,
            slots,
        });
    }
    Ok(out)
}

pub fn load_samples(path: &Path) -> Result<Vec<SceneSample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples_tsv(&text).map_err(|e| e.with_path(path))
}
