use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::harness::SceneSample;
use crate::logic::{PredictionVector, SlotActivations, TermRef};
use crate::losses::LOG_EPSILON;

/// Softmax relation classifier: for every slot and domain an affine map from
/// the feature vector to logits, followed by a softmax.
///
/// Parameters are stored flat, slot-major, then domain, then the weight
/// matrix (row-major, one row per term) followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessModel {
    dim: usize,
    n_slots: usize,
    sizes: [usize; 3],
    params: Vec<f64>,
}

/// `∂loss/∂w` for every activation of a prediction vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationGrad {
    pub slots: Vec<[Vec<f64>; 3]>,
}

impl ActivationGrad {
    pub fn zeros(n_slots: usize, sizes: [usize; 3]) -> Self {
        ActivationGrad {
            slots: vec![sizes.map(|n| vec![0.0; n]); n_slots],
        }
    }

    pub fn add(&mut self, slot: usize, term: TermRef, value: f64) {
        self.slots[slot][term.domain as usize][term.id as usize] += value;
    }

    pub fn add_map(&mut self, slot: usize, grad: &BTreeMap<TermRef, f64>, scale: f64) {
        for (t, g) in grad {
            self.add(slot, *t, scale * g);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for s in &mut self.slots {
            for d in s.iter_mut() {
                d.iter_mut().for_each(|v| *v *= factor);
            }
        }
    }

    pub fn axpy(&mut self, factor: f64, other: &ActivationGrad) {
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            for (x, y) in a.iter_mut().zip(b) {
                x.iter_mut().zip(y).for_each(|(u, v)| *u += factor * v);
            }
        }
    }
}

fn softmax(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    logits.iter_mut().for_each(|v| *v /= sum);
}

impl HarnessModel {
    pub fn zeros(dim: usize, n_slots: usize, sizes: [usize; 3]) -> Self {
        let per_slot: usize = sizes.iter().map(|n| n * (dim + 1)).sum();
        HarnessModel {
            dim,
            n_slots,
            sizes,
            params: vec![0.0; per_slot * n_slots],
        }
    }

    /// Weights drawn from `N(0, scale²)`, biases zero.
    pub fn random<R: Rng + ?Sized>(dim: usize, n_slots: usize, sizes: [usize; 3], scale: f64, rng: &mut R) -> Self {
        let mut m = Self::zeros(dim, n_slots, sizes);
        let normal = Normal::new(0.0, scale).expect("valid scale");
        for slot in 0..n_slots {
            for d in 0..3 {
                let (w, _) = m.block_range(slot, d);
                for i in w {
                    m.params[i] = normal.sample(rng);
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn block_offset(&self, slot: usize, domain: usize) -> usize {
        let per_slot: usize = self.sizes.iter().map(|n| n * (self.dim + 1)).sum();
        slot * per_slot + self.sizes[..domain].iter().map(|n| n * (self.dim + 1)).sum::<usize>()
    }

    /// Index ranges of the weight matrix and bias of one block.
    fn block_range(&self, slot: usize, domain: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let start = self.block_offset(slot, domain);
        let n = self.sizes[domain];
        let w_end = start + n * self.dim;
        (start..w_end, w_end..w_end + n)
    }

    fn check_features(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: features.len(),
            });
        }
        Ok(())
    }

    pub fn logits(&self, features: &[f64], slot: usize, domain: usize) -> Vec<f64> {
        let (w, b) = self.block_range(slot, domain);
        let weights = &self.params[w];
        let bias = &self.params[b];
        (0..self.sizes[domain])
            .map(|r| {
                let row = &weights[r * self.dim..(r + 1) * self.dim];
                bias[r] + row.iter().zip(features).map(|(a, x)| a * x).sum::<f64>()
            })
            .collect()
    }

    pub fn forward_features(&self, features: &[f64]) -> Result<PredictionVector> {
        self.check_features(features)?;
        let slots = (0..self.n_slots)
            .map(|slot| {
                let domains = [0, 1, 2].map(|d| {
                    let mut z = self.logits(features, slot, d);
                    softmax(&mut z);
                    z
                });
                SlotActivations { domains }
            })
            .collect();
        PredictionVector::new(slots)
    }

    pub fn forward(&self, sample: &SceneSample) -> Result<PredictionVector> {
        self.forward_features(&sample.features)
    }

    /// Chain rule from activation gradients to parameter gradients, through
    /// the softmax Jacobian `diag(w) − w·wᵀ` and the affine maps.
    pub fn param_gradient(&self, features: &[f64], w: &PredictionVector, grad: &ActivationGrad) -> Result<Vec<f64>> {
        self.check_features(features)?;
        if grad.slots.len() != self.n_slots {
            return Err(Error::DimensionMismatch {
                expected: self.n_slots,
                got: grad.slots.len(),
            });
        }
        let mut out = vec![0.0; self.params.len()];
        for slot in 0..self.n_slots {
            let acts = w.slot(slot)?;
            for d in 0..3 {
                let wd = &acts.domains[d];
                let gd = &grad.slots[slot][d];
                if gd.len() != wd.len() {
                    return Err(Error::DimensionMismatch {
                        expected: wd.len(),
                        got: gd.len(),
                    });
                }
                let dot: f64 = wd.iter().zip(gd).map(|(a, b)| a * b).sum();
                let (wr, br) = self.block_range(slot, d);
                for r in 0..wd.len() {
                    let dz = wd[r] * (gd[r] - dot);
                    if dz == 0.0 {
                        continue;
                    }
                    out[br.start + r] = dz;
                    let row = &mut out[wr.start + r * self.dim..wr.start + (r + 1) * self.dim];
                    row.iter_mut().zip(features).for_each(|(g, x)| *g = dz * x);
                }
            }
        }
        Ok(out)
    }

    /// One SGD step along `param_grad`. Rejects non-finite gradients without
    /// touching the model. Returns the gradient's Euclidean norm.
    pub fn apply_gradient(&mut self, param_grad: &[f64], lr: f64) -> Result<f64> {
        if param_grad.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                got: param_grad.len(),
            });
        }
        if let Some(i) = param_grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("parameter gradient at index {i}")));
        }
        let norm = param_grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if lr != 0.0 {
            self.params.iter_mut().zip(param_grad).for_each(|(p, g)| *p -= lr * g);
        }
        Ok(norm)
    }

    /// Text form: a header line `dim n_slots |S| |P| |O|` then one parameter
    /// per line in shortest round-trip notation.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let [a, b, c] = self.sizes;
        writeln!(s, "{} {} {a} {b} {c}", self.dim, self.n_slots).unwrap();
        for p in &self.params {
            writeln!(s, "{p:?}").unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty model file"))?
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::parse(1, format!("bad header field {t:?}")))
            })
            .collect::<Result<_>>()?;
        let [dim, n_slots, s, p, o] = header.as_slice() else {
            return Err(Error::parse(1, "header needs dim, slots and three domain sizes"));
        };
        let mut m = HarnessModel::zeros(*dim, *n_slots, [*s, *p, *o]);
        let mut count = 0;
        for (i, line) in lines.enumerate() {
            if count == m.params.len() {
                return Err(Error::parse(i + 2, "too many parameters"));
            }
            m.params[count] = line
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 2, format!("bad parameter {line:?}")))?;
            count += 1;
        }
        if count != m.params.len() {
            return Err(Error::parse(
                count + 2,
                format!("expected {} parameters, found {count}", m.params.len()),
            ));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.with_path(path))
    }
}

/// `Σ_slots −ln w(s*) − ln w(p*) − ln w(o*)` over slots with ground truth,
/// with every activation floored at [`LOG_EPSILON`]; plus its gradient.
pub fn supervised_loss_and_grad(sample: &SceneSample, w: &PredictionVector) -> Result<(f64, ActivationGrad)> {
    let mut grad = ActivationGrad::zeros(w.n_slots(), w.sizes());
    let mut loss = 0.0;
    for (slot, truth) in sample.slots.iter().enumerate() {
        let Some(fact) = truth else { continue };
        let acts = w.slot(slot)?;
        for t in fact.terms() {
            let v = acts.get(t).ok_or(Error::MissingAssignment(t))?.max(LOG_EPSILON);
            loss -= v.ln();
            grad.add(slot, t, -1.0 / v);
        }
    }
    Ok((loss, grad))
}

pub fn supervised_loss(sample: &SceneSample, w: &PredictionVector) -> Result<f64> {
    Ok(supervised_loss_and_grad(sample, w)?.0)
}

/// Applies `grad` (w.r.t. the activations `w` produced from `sample`) to
/// `model` with one SGD step; returns the parameter-gradient norm.
pub fn backward_and_update(
    model: &mut HarnessModel,
    sample: &SceneSample,
    w: &PredictionVector,
    grad: &ActivationGrad,
    lr: f64,
) -> Result<f64> {
    let g = model.param_gradient(&sample.features, w, grad)?;
    model.apply_gradient(&g, lr)
}
