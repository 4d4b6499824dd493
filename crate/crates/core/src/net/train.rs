use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::network::{Dense, Gradients, Network};
use crate::data::{FeatureTable, LabelTable};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub augment_noise_sd: f64,
    /// Start each head offset at the mean known training label of its column.
    pub center_outputs: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 200,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            augment_noise_sd: 0.0,
            center_outputs: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0,1), got {b}")));
            }
        }
        if !(self.epsilon > 0.0) || self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::Config("epsilon, batch_size and max_epochs must be positive".into()));
        }
        if !(self.augment_noise_sd >= 0.0 && self.augment_noise_sd.is_finite()) {
            return Err(Error::Config("augment_noise_sd must be >= 0".into()));
        }
        Ok(())
    }
}

/// Inputs with an `n × m` label matrix and its known-entry mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedBatch {
    pub x: Array2<f64>,
    pub d: Array2<f64>,
    pub phi: Array2<f64>,
}

impl MaskedBatch {
    pub fn new(x: Array2<f64>, d: Array2<f64>, phi: Array2<f64>) -> Result<Self> {
        if d.dim() != phi.dim() || d.nrows() != x.nrows() {
            return Err(Error::Dimension(format!(
                "inputs {:?}, labels {:?}, mask {:?}",
                x.dim(),
                d.dim(),
                phi.dim()
            )));
        }
        for (&m, &v) in phi.iter().zip(d.iter()) {
            if m != 0.0 && m != 1.0 {
                return Err(Error::Invalid(format!("mask entry {m} is not 0 or 1")));
            }
            if m == 1.0 && !(0.0..=100.0).contains(&v) {
                return Err(Error::Invalid(format!("known label {v} outside [0,100]")));
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite input feature".into()));
        }
        Ok(MaskedBatch { x, d, phi })
    }

    /// Single output column of averaged labels, mask all ones. Rows without
    /// any label are dropped.
    pub fn averaged(features: &FeatureTable, labels: &LabelTable, rows: &[usize]) -> Result<Self> {
        let (keep, means): (Vec<usize>, Vec<f64>) = rows
            .iter()
            .filter_map(|&i| labels.mean_score(&features.records()[i].image_id).map(|s| (i, s)))
            .unzip();
        let n = keep.len();
        MaskedBatch::new(
            input_rows(features, &keep),
            Array2::from_shape_vec((n, 1), means).expect("shape"),
            Array2::ones((n, 1)),
        )
    }

    /// One column per reader, in the label table's reader order. Unknown
    /// entries hold zero. Rows without any label are dropped.
    pub fn per_reader(features: &FeatureTable, labels: &LabelTable, rows: &[usize]) -> Result<Self> {
        let m = labels.reader_count();
        let keep: Vec<usize> = rows
            .iter()
            .copied()
            .filter(|&i| !labels.labels_for(&features.records()[i].image_id).is_empty())
            .collect();
        let mut d = Array2::zeros((keep.len(), m));
        let mut phi = Array2::zeros((keep.len(), m));
        for (r, &i) in keep.iter().enumerate() {
            for e in labels.labels_for(&features.records()[i].image_id) {
                let j = labels.reader_index(&e.reader_id).expect("reader in manifest");
                d[[r, j]] = e.score;
                phi[[r, j]] = 1.0;
            }
        }
        MaskedBatch::new(input_rows(features, &keep), d, phi)
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn known(&self) -> usize {
        self.phi.iter().filter(|&&m| m != 0.0).count()
    }

    fn rows(&self, idx: &[usize]) -> MaskedBatch {
        MaskedBatch {
            x: self.x.select(Axis(0), idx),
            d: self.d.select(Axis(0), idx),
            phi: self.phi.select(Axis(0), idx),
        }
    }
}

fn input_rows(features: &FeatureTable, rows: &[usize]) -> Array2<f64> {
    let f = features.features();
    let cols = if features.has_bias() { f.ncols() - 1 } else { f.ncols() };
    f.select(Axis(0), rows).slice(ndarray::s![.., ..cols]).to_owned()
}

impl Network {
    /// Gradient of the masked loss on a batch.
    pub fn batch_gradient(&self, batch: &MaskedBatch) -> Result<(f64, Gradients)> {
        self.loss_gradient(batch.x.view(), batch.d.view(), batch.phi.view())
    }

    /// RMSE over the known entries of `batch`.
    pub fn masked_rmse(&self, batch: &MaskedBatch) -> Result<f64> {
        let known = batch.known();
        if known == 0 {
            return Err(Error::Invalid("no known labels to evaluate".into()));
        }
        let out = self.forward(batch.x.view())?.outputs;
        let sse = super::network::masked_loss(out.view(), batch.d.view(), batch.phi.view())?;
        Ok((sse / known as f64).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Masked loss per known label, averaged over the epoch.
    pub train_loss: f64,
    pub val_rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedNetwork {
    /// Parameters at the epoch with the lowest validation RMSE.
    pub network: Network,
    pub best_epoch: usize,
    pub best_val_rmse: f64,
    /// Validation RMSE of the starting parameters.
    pub initial_val_rmse: f64,
    pub log: Vec<EpochLog>,
}

struct Adam {
    m: Vec<Dense>,
    v: Vec<Dense>,
    t: i32,
}

impl Adam {
    fn new(net: &Network) -> Self {
        let zeros: Vec<Dense> = net
            .layers
            .iter()
            .map(|l| Dense {
                weights: Array2::zeros(l.weights.raw_dim()),
                bias: ndarray::Array1::zeros(l.bias.raw_dim()),
            })
            .collect();
        Adam {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Network, g: &Gradients, cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            *p -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.epsilon);
        };
        for (((layer, m), v), gl) in net.layers.iter_mut().zip(&mut self.m).zip(&mut self.v).zip(&g.layers) {
            ndarray::Zip::from(&mut layer.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .and(&gl.weights)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            ndarray::Zip::from(&mut layer.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .and(&gl.bias)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
    }
}

fn center_head(net: &mut Network, data: &MaskedBatch) {
    let known = data.known();
    let overall = if known > 0 {
        data.d.iter().zip(&data.phi).filter(|(_, &m)| m != 0.0).map(|(v, _)| v).sum::<f64>() / known as f64
    } else {
        0.0
    };
    for j in 0..data.d.ncols() {
        let (sum, count) = data
            .d
            .column(j)
            .iter()
            .zip(data.phi.column(j))
            .filter(|(_, &m)| m != 0.0)
            .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
        net.head_mut().bias[j] = if count > 0 { sum / count as f64 } else { overall };
    }
}

/// Adam over shuffled mini-batches, keeping the epoch-end snapshot with the
/// lowest validation RMSE.
pub fn train(mut net: Network, train: &MaskedBatch, val: &MaskedBatch, cfg: &TrainConfig) -> Result<TrainedNetwork> {
    cfg.validate()?;
    let m = net.arch.output_count;
    for (name, b) in [("training", train), ("validation", val)] {
        if b.d.ncols() != m || b.x.ncols() != net.arch.input_dim {
            return Err(Error::Dimension(format!(
                "{name} data is {}x{} inputs with {} label columns, network is {}x{}",
                b.x.nrows(),
                b.x.ncols(),
                b.d.ncols(),
                net.arch.input_dim,
                m
            )));
        }
    }
    if val.known() == 0 {
        return Err(Error::Invalid("validation set has no labels".into()));
    }
    if train.is_empty() {
        return Err(Error::Invalid("training set is empty".into()));
    }
    if let Some(r) = train.phi.rows().into_iter().position(|row| row.iter().all(|&v| v == 0.0)) {
        return Err(Error::Invalid(format!("training row {r} has no known label")));
    }
    if cfg.center_outputs {
        center_head(&mut net, train);
    }

    let mut rng = seed::rng_from(cfg.seed);
    let noise = Normal::new(0.0, cfg.augment_noise_sd.max(f64::MIN_POSITIVE)).expect("valid sd");
    let mut adam = Adam::new(&net);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let known = train.known() as f64;

    let initial_val_rmse = net.masked_rmse(val)?;
    let mut best = (net.clone(), 0usize, initial_val_rmse);
    let mut log = Vec::with_capacity(cfg.max_epochs);
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let mut batch = train.rows(chunk);
            if cfg.augment_noise_sd > 0.0 {
                batch.x.mapv_inplace(|v| v + noise.sample(&mut rng));
            }
            let (loss, grad) = net.batch_gradient(&batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            epoch_loss += loss;
            adam.step(&mut net, &grad, cfg);
        }
        if !net.is_finite() {
            return Err(Error::Diverged { epoch, loss: f64::NAN });
        }
        let val_rmse = net.masked_rmse(val)?;
        if !val_rmse.is_finite() {
            return Err(Error::Diverged { epoch, loss: val_rmse });
        }
        log.push(EpochLog {
            epoch,
            train_loss: epoch_loss / known,
            val_rmse,
        });
        if val_rmse < best.2 {
            best = (net.clone(), epoch, val_rmse);
        }
    }
    Ok(TrainedNetwork {
        network: best.0,
        best_epoch: best.1,
        best_val_rmse: best.2,
        initial_val_rmse,
        log,
    })
}

/// Encoder output for every row as an unbiased feature table.
pub fn extract_representations(net: &Network, features: &FeatureTable) -> Result<FeatureTable> {
    let all: Vec<usize> = (0..features.len()).collect();
    let x = input_rows(features, &all);
    let rep = representations(net, x.view())?;
    FeatureTable::new(features.records().to_vec(), rep, false)
}

fn representations(net: &Network, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    Ok(net.forward(x)?.representation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::network::{init_network, masked_loss, NetworkArch};
    use rand::Rng as _;

    fn linear_data(n: usize, seed: u64) -> MaskedBatch {
        let mut rng = seed::rng_from(seed);
        let x = Array2::from_shape_fn((n, 4), |_| rng.random_range(-1.0..1.0));
        let d = Array2::from_shape_fn((n, 1), |(i, _)| 50.0 + 10.0 * x[[i, 0]] - 8.0 * x[[i, 1]] + 5.0 * x[[i, 2]]);
        MaskedBatch::new(x, d, Array2::ones((n, 1))).unwrap()
    }

    #[test]
    fn training_reduces_validation_error() {
        let tr = linear_data(400, 1);
        let va = linear_data(100, 2);
        let arch = NetworkArch::new(4, vec![16, 8], 1);
        let cfg = TrainConfig {
            learning_rate: 1e-2,
            max_epochs: 60,
            center_outputs: false,
            ..Default::default()
        };
        let t = train(init_network(&arch, 0).unwrap(), &tr, &va, &cfg).unwrap();
        assert!(t.best_val_rmse <= 0.5 * t.initial_val_rmse, "{} vs {}", t.best_val_rmse, t.initial_val_rmse);
        assert_eq!(t.log.len(), 60);
        let again = train(init_network(&arch, 0).unwrap(), &tr, &va, &cfg).unwrap();
        assert_eq!(t.network, again.network);
    }

    #[test]
    fn single_output_is_plain_squared_error() {
        let b = linear_data(20, 3);
        let out = Array2::from_elem((20, 1), 40.0);
        let plain: f64 = b.d.iter().map(|v| (40.0 - v) * (40.0 - v)).sum();
        assert_eq!(masked_loss(out.view(), b.d.view(), b.phi.view()).unwrap(), plain);
    }

    #[test]
    fn batch_validation() {
        let x = Array2::zeros((1, 2));
        assert!(MaskedBatch::new(x.clone(), Array2::zeros((1, 2)), Array2::from_elem((1, 2), 0.5)).is_err());
        assert!(MaskedBatch::new(x.clone(), Array2::from_elem((1, 2), 120.0), Array2::ones((1, 2))).is_err());
        assert!(MaskedBatch::new(x, Array2::from_elem((1, 2), 120.0), Array2::zeros((1, 2))).is_ok());
    }

    #[test]
    fn rejects_unlabelled_training_row() {
        let x = Array2::zeros((2, 2));
        let mut phi = Array2::ones((2, 2));
        phi.row_mut(1).fill(0.0);
        let b = MaskedBatch::new(x, Array2::zeros((2, 2)), phi).unwrap();
        let net = init_network(&NetworkArch::new(2, vec![3], 2), 0).unwrap();
        assert!(train(net, &b, &b, &TrainConfig::default()).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let tr = linear_data(64, 1);
        let net = init_network(&NetworkArch::new(4, vec![4], 1), 0).unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e300,
            max_epochs: 5,
            ..Default::default()
        };
        match train(net, &tr, &tr, &cfg) {
            Err(Error::Diverged { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
