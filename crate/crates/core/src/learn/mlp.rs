use std::fmt::Write as _;

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::Action;
use crate::cone::FeatureVector;

pub const MODEL_VERSION: u32 = 1;
const MODEL_TAG: &str = "reconv-mlp";
const DIMS: [usize; 4] = [7, 128, 32, 3];
const CSV_HEADER: &str = "is_critical,input_size,node_size,fanout_size,positive_edges,negative_edges,max_depth,label";

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("dataset has {0} class(es); at least two are needed")]
    DegenerateDataset(usize),
    #[error("model or dataset format: {0}")]
    Format(String),
}

/// Feature vectors labelled with the action to take.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub rows: Vec<(FeatureVector, Action)>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for (_, a) in &self.rows {
            c[a.code()] += 1;
        }
        c
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        for (fv, a) in &self.rows {
            writeln!(s, "{fv},{}", a.code()).unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Dataset, MlpError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(MlpError::Format("dataset header".into()));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: String| MlpError::Format(format!("dataset row {}: {m}", i + 1));
            let (feat, label) = line.rsplit_once(',').ok_or_else(|| bad("no label".into()))?;
            let fv: FeatureVector = feat.parse().map_err(bad)?;
            let a: Action = label.trim().parse().map_err(bad)?;
            rows.push((fv, a));
        }
        Ok(Dataset { rows })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams<F: Float = f64> {
    pub epochs: usize,
    pub lr: F,
    pub dropout: F,
    pub split_ratio: F,
    pub batch_size: usize,
    pub seed: u64,
}

impl<F: Float> Default for MlpParams<F> {
    fn default() -> Self {
        MlpParams {
            epochs: 10_000,
            lr: F::from(1e-3).unwrap(),
            dropout: F::from(0.2).unwrap(),
            split_ratio: F::from(0.8).unwrap(),
            batch_size: 32,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Dense<F> {
    n_in: usize,
    n_out: usize,
    /// Row-major, `n_out` rows of `n_in`.
    w: Vec<F>,
    b: Vec<F>,
}

impl<F: Float> Dense<F> {
    fn apply(&self, x: &[F], out: &mut Vec<F>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.w[o * self.n_in..(o + 1) * self.n_in];
            let mut s = self.b[o];
            for (w, v) in row.iter().zip(x) {
                s = s + *w * *v;
            }
            out.push(s);
        }
    }
}

/// 7-128-32-3 classifier: ReLU hidden layers with dropout, softmax output.
/// Inputs are standardized with the stored training statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel<F: Float = f64> {
    layers: Vec<Dense<F>>,
    mean: [F; 7],
    scale: [F; 7],
}

/// Activations kept for backpropagation.
struct Trace<F> {
    acts: Vec<Vec<F>>,
    pre: Vec<Vec<F>>,
    masks: Vec<Vec<F>>,
    probs: Vec<F>,
}

fn softmax<F: Float>(z: &[F]) -> Vec<F> {
    let m = z.iter().fold(F::neg_infinity(), |a, &b| a.max(b));
    let e: Vec<F> = z.iter().map(|&v| (v - m).exp()).collect();
    let s = e.iter().fold(F::zero(), |a, &b| a + b);
    e.into_iter().map(|v| v / s).collect()
}

impl<F: Float> MlpModel<F> {
    pub fn layer_dims() -> [usize; 4] {
        DIMS
    }

    /// He-uniform weights, zero biases, identity standardization.
    pub fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let layers = DIMS
            .windows(2)
            .map(|d| {
                let limit = (6.0 / d[0] as f64).sqrt();
                Dense {
                    n_in: d[0],
                    n_out: d[1],
                    w: (0..d[0] * d[1]).map(|_| F::from(rng.gen_range(-limit..limit)).unwrap()).collect(),
                    b: vec![F::zero(); d[1]],
                }
            })
            .collect();
        MlpModel { layers, mean: [F::zero(); 7], scale: [F::one(); 7] }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn params(&self) -> Vec<F> {
        let mut p = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            p.extend_from_slice(&l.w);
            p.extend_from_slice(&l.b);
        }
        p
    }

    pub fn set_params(&mut self, p: &[F]) {
        assert_eq!(p.len(), self.num_params());
        let mut i = 0;
        for l in &mut self.layers {
            let (nw, nb) = (l.w.len(), l.b.len());
            l.w.copy_from_slice(&p[i..i + nw]);
            l.b.copy_from_slice(&p[i + nw..i + nw + nb]);
            i += nw + nb;
        }
    }

    pub fn standardize(&self, fv: &FeatureVector) -> [F; 7] {
        let a = fv.to_array();
        std::array::from_fn(|i| (F::from(a[i]).unwrap() - self.mean[i]) / self.scale[i])
    }

    /// Mean and standard deviation of `rows`; constant features get scale 1.
    fn fit_standardization(&mut self, rows: &[&(FeatureVector, Action)]) {
        let n = F::from(rows.len().max(1)).unwrap();
        for i in 0..7 {
            let vals: Vec<F> = rows.iter().map(|r| F::from(r.0.to_array()[i]).unwrap()).collect();
            let m = vals.iter().fold(F::zero(), |a, &b| a + b) / n;
            let var = vals.iter().fold(F::zero(), |a, &b| a + (b - m) * (b - m)) / n;
            self.mean[i] = m;
            self.scale[i] = if var > F::zero() { var.sqrt() } else { F::one() };
        }
    }

    fn trace<R: Rng + ?Sized>(&self, x: &[F], dropout: Option<(F, &mut R)>) -> Trace<F> {
        let mut acts = vec![x.to_vec()];
        let mut pre = Vec::new();
        let mut masks = Vec::new();
        let mut drop = dropout;
        for (k, l) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(l.n_out);
            l.apply(acts.last().unwrap(), &mut z);
            if k + 1 == self.layers.len() {
                pre.push(z);
                break;
            }
            let mask: Vec<F> = match drop.as_mut() {
                Some((p, rng)) => {
                    let keep = F::one() / (F::one() - *p);
                    let pf = p.to_f64().unwrap();
                    (0..l.n_out).map(|_| if rng.gen::<f64>() < pf { F::zero() } else { keep }).collect()
                }
                None => vec![F::one(); l.n_out],
            };
            let h: Vec<F> = z.iter().zip(&mask).map(|(&v, &m)| v.max(F::zero()) * m).collect();
            pre.push(z);
            masks.push(mask);
            acts.push(h);
        }
        let probs = softmax(pre.last().unwrap());
        Trace { acts, pre, masks, probs }
    }

    /// Class probabilities of a standardized input, without dropout.
    pub fn forward(&self, x: &[F; 7]) -> [F; 3] {
        let t = self.trace::<ChaCha8Rng>(x, None);
        [t.probs[0], t.probs[1], t.probs[2]]
    }

    pub fn predict(&self, fv: &FeatureVector) -> [F; 3] {
        self.forward(&self.standardize(fv))
    }

    pub fn classify(&self, fv: &FeatureVector) -> Action {
        let p = self.predict(fv);
        let mut best = 0;
        for i in 1..3 {
            if p[i] > p[best] {
                best = i;
            }
        }
        Action::from_code(best).unwrap()
    }

    /// Mean cross-entropy over the batch and its gradient in [`Self::params`]
    /// order. Dropout masks are drawn when `dropout` is given.
    pub fn loss_and_grad<R: Rng + ?Sized>(
        &self,
        xs: &[[F; 7]],
        ys: &[usize],
        mut dropout: Option<(F, &mut R)>,
    ) -> (F, Vec<F>) {
        assert_eq!(xs.len(), ys.len());
        let bsz = F::from(xs.len()).unwrap();
        let mut grads: Vec<(Vec<F>, Vec<F>)> =
            self.layers.iter().map(|l| (vec![F::zero(); l.w.len()], vec![F::zero(); l.b.len()])).collect();
        let mut loss = F::zero();
        for (x, &y) in xs.iter().zip(ys) {
            let t = match dropout.as_mut() {
                Some((p, rng)) => self.trace(x, Some((*p, &mut **rng))),
                None => self.trace::<R>(x, None),
            };
            loss = loss - t.probs[y].max(F::min_positive_value()).ln();
            let mut delta: Vec<F> =
                t.probs.iter().enumerate().map(|(i, &p)| (if i == y { p - F::one() } else { p }) / bsz).collect();
            for k in (0..self.layers.len()).rev() {
                let l = &self.layers[k];
                let input = &t.acts[k];
                let (gw, gb) = &mut grads[k];
                for o in 0..l.n_out {
                    gb[o] = gb[o] + delta[o];
                    for i in 0..l.n_in {
                        gw[o * l.n_in + i] = gw[o * l.n_in + i] + delta[o] * input[i];
                    }
                }
                if k == 0 {
                    break;
                }
                let mut back = vec![F::zero(); l.n_in];
                for o in 0..l.n_out {
                    for (i, b) in back.iter_mut().enumerate() {
                        *b = *b + l.w[o * l.n_in + i] * delta[o];
                    }
                }
                let z = &t.pre[k - 1];
                let m = &t.masks[k - 1];
                delta = (0..l.n_in).map(|i| if z[i] > F::zero() { back[i] * m[i] } else { F::zero() }).collect();
            }
        }
        let mut flat = Vec::with_capacity(self.num_params());
        for (gw, gb) in grads {
            flat.extend(gw);
            flat.extend(gb);
        }
        (loss / bsz, flat)
    }

    pub fn accuracy(&self, rows: &[(FeatureVector, Action)]) -> F {
        if rows.is_empty() {
            return F::zero();
        }
        let hits = rows.iter().filter(|(fv, a)| self.classify(fv) == *a).count();
        F::from(hits).unwrap() / F::from(rows.len()).unwrap()
    }

    pub fn to_text(&self) -> String {
        let num = |v: &F| v.to_f64().unwrap().to_string();
        let line = |v: &[F]| v.iter().map(num).collect::<Vec<_>>().join(" ");
        let mut s = format!("{MODEL_TAG} {MODEL_VERSION}\n");
        writeln!(s, "dims {}", DIMS.map(|d| d.to_string()).join(" ")).unwrap();
        writeln!(s, "mean {}", line(&self.mean)).unwrap();
        writeln!(s, "scale {}", line(&self.scale)).unwrap();
        for l in &self.layers {
            writeln!(s, "w {}", line(&l.w)).unwrap();
            writeln!(s, "b {}", line(&l.b)).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, MlpError> {
        let bad = |m: &str| MlpError::Format(m.to_string());
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header.trim() != format!("{MODEL_TAG} {MODEL_VERSION}") {
            return Err(bad(&format!("header {header:?}, expected {MODEL_TAG} {MODEL_VERSION}")));
        }
        let mut field = |tag: &str, len: usize| -> Result<Vec<F>, MlpError> {
            let line = lines.next().ok_or_else(|| bad(&format!("missing {tag}")))?;
            let rest = line.strip_prefix(tag).ok_or_else(|| bad(&format!("expected {tag}")))?;
            let v: Vec<F> = rest
                .split_whitespace()
                .map(|t| t.parse::<f64>().ok().and_then(F::from).ok_or_else(|| bad(&format!("number {t:?}"))))
                .collect::<Result<_, _>>()?;
            if v.len() != len {
                return Err(bad(&format!("{tag} has {} values, expected {len}", v.len())));
            }
            Ok(v)
        };
        let dims = field("dims", 4)?;
        if dims.iter().zip(DIMS).any(|(&a, b)| a != F::from(b).unwrap()) {
            return Err(bad("layer dimensions differ from 7 128 32 3"));
        }
        let field_mean = field("mean", 7)?;
        let field_scale = field("scale", 7)?;
        let mean: [F; 7] = std::array::from_fn(|i| field_mean[i]);
        let scale: [F; 7] = std::array::from_fn(|i| field_scale[i]);
        let mut layers = Vec::new();
        for d in DIMS.windows(2) {
            let w = field("w", d[0] * d[1])?;
            let b = field("b", d[1])?;
            layers.push(Dense { n_in: d[0], n_out: d[1], w, b });
        }
        Ok(MlpModel { layers, mean, scale })
    }
}

/// Shuffled split, minibatch Adam on cross-entropy with dropout. Returns
/// the model and its accuracy on the held-out part.
pub fn mlp_train<F: Float>(data: &Dataset, params: &MlpParams<F>) -> Result<(MlpModel<F>, F), MlpError> {
    let classes = data.class_counts().iter().filter(|&&c| c > 0).count();
    if classes < 2 {
        return Err(MlpError::DegenerateDataset(classes));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut rng);
    let n_train = (params.split_ratio * F::from(data.len()).unwrap()).round().to_usize().unwrap();
    let n_train = n_train.clamp(1, data.len().saturating_sub(1).max(1));
    let train: Vec<&(FeatureVector, Action)> = idx[..n_train].iter().map(|&i| &data.rows[i]).collect();
    let test: Vec<(FeatureVector, Action)> = idx[n_train..].iter().map(|&i| data.rows[i]).collect();

    let mut model = MlpModel::new(&mut rng);
    model.fit_standardization(&train);
    let xs: Vec<[F; 7]> = train.iter().map(|r| model.standardize(&r.0)).collect();
    let ys: Vec<usize> = train.iter().map(|r| r.1.code()).collect();

    let (b1, b2, eps) = (F::from(0.9).unwrap(), F::from(0.999).unwrap(), F::from(1e-8).unwrap());
    let np = model.num_params();
    let (mut m, mut v) = (vec![F::zero(); np], vec![F::zero(); np]);
    let mut p = model.params();
    let mut step = 0i32;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let bs = params.batch_size.max(1);
    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = F::zero();
        for chunk in order.chunks(bs) {
            let bx: Vec<[F; 7]> = chunk.iter().map(|&i| xs[i]).collect();
            let by: Vec<usize> = chunk.iter().map(|&i| ys[i]).collect();
            let (loss, g) = model.loss_and_grad(&bx, &by, Some((params.dropout, &mut rng)));
            epoch_loss = epoch_loss + loss;
            step += 1;
            let c1 = F::one() - b1.powi(step);
            let c2 = F::one() - b2.powi(step);
            for i in 0..np {
                m[i] = b1 * m[i] + (F::one() - b1) * g[i];
                v[i] = b2 * v[i] + (F::one() - b2) * g[i] * g[i];
                p[i] = p[i] - params.lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
            }
            model.set_params(&p);
        }
        if epoch % 1000 == 0 {
            log::debug!("epoch {epoch} loss {:.5}", epoch_loss.to_f64().unwrap());
        }
    }
    let acc = if test.is_empty() { model.accuracy(&data.rows) } else { model.accuracy(&test) };
    Ok((model, acc))
}
