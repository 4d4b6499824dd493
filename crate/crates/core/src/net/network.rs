use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkArch {
    pub input_dim: usize,
    /// Encoder layer widths; the last is the representation dimension.
    pub hidden_widths: Vec<usize>,
    pub output_count: usize,
}

impl NetworkArch {
    pub fn new(input_dim: usize, hidden_widths: Vec<usize>, output_count: usize) -> Self {
        NetworkArch {
            input_dim,
            hidden_widths,
            output_count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_widths.is_empty() || self.hidden_widths.contains(&0) || self.output_count == 0 {
            return Err(Error::Invalid(format!("invalid architecture {self:?}")));
        }
        Ok(())
    }

    pub fn representation_dim(&self) -> usize {
        *self.hidden_widths.last().expect("validated")
    }
}

/// Affine layer `y = x W + b` with `W` of shape `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    fn zeros_like(&self) -> Dense {
        Dense {
            weights: Array2::zeros(self.weights.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }
}

/// Tanh encoder followed by a linear head. `layers` holds the encoder
/// layers in order and the head last.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub arch: NetworkArch,
    pub layers: Vec<Dense>,
}

/// Gradients laid out like [`Network::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn head(&self) -> &Dense {
        self.layers.last().expect("head")
    }

    /// Flattened in the same order as [`Network::param`].
    pub fn to_flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub representation: Array2<f64>,
    pub outputs: Array2<f64>,
}

/// Seeded initialization: weights `N(0, 1/fan_in)`, offsets zero.
pub fn init_network(arch: &NetworkArch, seed: u64) -> Result<Network> {
    arch.validate()?;
    let mut rng = seed::rng_from(seed);
    let mut dims = vec![arch.input_dim];
    dims.extend(&arch.hidden_widths);
    dims.push(arch.output_count);
    let layers = dims
        .windows(2)
        .map(|w| {
            let sd = 1.0 / (w[0] as f64).sqrt();
            Dense {
                weights: Array2::from_shape_fn((w[0], w[1]), |_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    sd * z
                }),
                bias: Array1::zeros(w[1]),
            }
        })
        .collect();
    Ok(Network {
        arch: arch.clone(),
        layers,
    })
}

impl Network {
    pub fn head(&self) -> &Dense {
        self.layers.last().expect("head")
    }

    pub fn head_mut(&mut self) -> &mut Dense {
        self.layers.last_mut().expect("head")
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn locate(&self, mut index: usize) -> (usize, bool, usize) {
        for (li, l) in self.layers.iter().enumerate() {
            if index < l.weights.len() {
                return (li, true, index);
            }
            index -= l.weights.len();
            if index < l.bias.len() {
                return (li, false, index);
            }
            index -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    /// Parameter by flat index: per layer, weights row-major then offsets.
    pub fn param(&self, index: usize) -> f64 {
        let (li, is_w, i) = self.locate(index);
        let l = &self.layers[li];
        if is_w {
            l.weights.as_slice().expect("standard layout")[i]
        } else {
            l.bias[i]
        }
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        let (li, is_w, i) = self.locate(index);
        let l = &mut self.layers[li];
        if is_w {
            l.weights.as_slice_mut().expect("standard layout")[i] = value;
        } else {
            l.bias[i] = value;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.arch.input_dim {
            return Err(Error::Dimension(format!(
                "network expects {} inputs, got {}",
                self.arch.input_dim,
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Activations of every encoder layer, input first.
    fn activations(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let enc = &self.layers[..self.layers.len() - 1];
        let mut acts = Vec::with_capacity(enc.len() + 1);
        acts.push(x.to_owned());
        for l in enc {
            let z = acts.last().unwrap().dot(&l.weights) + &l.bias;
            acts.push(z.mapv(f64::tanh));
        }
        acts
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Forward> {
        self.check_input(&x)?;
        let mut acts = self.activations(x);
        let representation = acts.pop().unwrap();
        let head = self.head();
        let outputs = representation.dot(&head.weights) + &head.bias;
        Ok(Forward {
            representation,
            outputs,
        })
    }

    /// Masked loss and its gradient with respect to every parameter.
    pub fn loss_gradient(&self, x: ArrayView2<f64>, d: ArrayView2<f64>, phi: ArrayView2<f64>) -> Result<(f64, Gradients)> {
        self.check_input(&x)?;
        let shape = (x.nrows(), self.arch.output_count);
        if d.dim() != shape || phi.dim() != shape {
            return Err(Error::Dimension(format!(
                "labels {:?} and mask {:?} must be {shape:?}",
                d.dim(),
                phi.dim()
            )));
        }
        let acts = self.activations(x);
        let rep = acts.last().unwrap();
        let head = self.head();
        let outputs = rep.dot(&head.weights) + &head.bias;
        let loss = masked_loss(outputs.view(), d, phi)?;

        let mut d_out = Array2::<f64>::zeros(shape);
        Zip::from(&mut d_out)
            .and(&outputs)
            .and(&d)
            .and(&phi)
            .for_each(|g, &o, &t, &m| {
                if m != 0.0 {
                    *g = 2.0 * (o - t);
                }
            });

        let mut grads: Vec<Dense> = self.layers.iter().map(Dense::zeros_like).collect();
        let hi = grads.len() - 1;
        // Head gradient accumulated row by row, so rows whose mask entry is
        // zero contribute exact zeros to that column.
        {
            let gh = &mut grads[hi];
            for (r_row, g_row) in rep.rows().into_iter().zip(d_out.rows()) {
                for (j, &g) in g_row.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    gh.bias[j] += g;
                    for (h, &r) in r_row.iter().enumerate() {
                        gh.weights[[h, j]] += r * g;
                    }
                }
            }
        }
        let mut d_act = d_out.dot(&head.weights.t());
        for li in (0..hi).rev() {
            let a = &acts[li + 1];
            let d_z = &d_act * &a.mapv(|v| 1.0 - v * v);
            grads[li].weights = acts[li].t().dot(&d_z);
            grads[li].bias = d_z.sum_axis(Axis(0));
            if li > 0 {
                d_act = d_z.dot(&self.layers[li].weights.t());
            }
        }
        Ok((loss, Gradients { layers: grads }))
    }
}

/// `Σ φ (ρ − d)²` over every row and output. Entries with `φ = 0` are
/// skipped outright, so placeholder labels never matter.
pub fn masked_loss(outputs: ArrayView2<f64>, d: ArrayView2<f64>, phi: ArrayView2<f64>) -> Result<f64> {
    if outputs.dim() != d.dim() || outputs.dim() != phi.dim() {
        return Err(Error::Dimension(format!(
            "outputs {:?}, labels {:?}, mask {:?}",
            outputs.dim(),
            d.dim(),
            phi.dim()
        )));
    }
    let mut total = 0.0;
    Zip::from(&outputs).and(&d).and(&phi).for_each(|&o, &t, &m| {
        if m != 0.0 {
            total += m * (o - t) * (o - t);
        }
    });
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn init_shapes_and_determinism() {
        let arch = NetworkArch::new(8, vec![32, 16], 13);
        let a = init_network(&arch, 3).unwrap();
        assert_eq!(a, init_network(&arch, 3).unwrap());
        assert_ne!(a, init_network(&arch, 4).unwrap());
        assert_eq!(a.head().weights.dim(), (16, 13));
        let single = init_network(&NetworkArch::new(8, vec![4], 1), 0).unwrap();
        assert_eq!(single.head().weights.dim(), (4, 1));
        assert!(init_network(&NetworkArch::new(8, vec![], 1), 0).is_err());
    }

    #[test]
    fn zero_input_zero_output() {
        let net = init_network(&NetworkArch::new(3, vec![5, 4], 2), 1).unwrap();
        let f = net.forward(Array2::zeros((2, 3)).view()).unwrap();
        assert!(f.outputs.iter().all(|&v| v == 0.0));
        assert!(f.representation.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_forward() {
        // one tanh layer with identity weights and a known head
        let net = Network {
            arch: NetworkArch::new(2, vec![2], 1),
            layers: vec![
                Dense {
                    weights: array![[1.0, 0.0], [0.0, 1.0]],
                    bias: array![0.0, 0.0],
                },
                Dense {
                    weights: array![[2.0], [-1.0]],
                    bias: array![0.5],
                },
            ],
        };
        let f = net.forward(array![[0.3, -0.7]].view()).unwrap();
        let (h0, h1) = (0.3f64.tanh(), (-0.7f64).tanh());
        assert_eq!(f.representation, array![[h0, h1]]);
        assert!((f.outputs[[0, 0]] - (2.0 * h0 - h1 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn zero_head_zeroes_outputs_only() {
        let mut net = init_network(&NetworkArch::new(3, vec![4], 2), 1).unwrap();
        let x = array![[0.1, 0.2, 0.3]];
        let before = net.forward(x.view()).unwrap();
        *net.head_mut() = Dense {
            weights: Array2::zeros((4, 2)),
            bias: Array1::zeros(2),
        };
        let after = net.forward(x.view()).unwrap();
        assert!(after.outputs.iter().all(|&v| v == 0.0));
        assert_eq!(after.representation, before.representation);
    }

    #[test]
    fn masked_loss_cases() {
        let o = array![[10.0, 20.0, 99.0]];
        let d = array![[12.0, 18.0, 0.0]];
        assert_eq!(masked_loss(o.view(), d.view(), array![[1.0, 1.0, 0.0]].view()).unwrap(), 8.0);
        assert_eq!(masked_loss(o.view(), d.view(), Array2::zeros((1, 3)).view()).unwrap(), 0.0);
        let nan = array![[10.0, 20.0, f64::NAN]];
        assert_eq!(masked_loss(o.view(), nan.view(), array![[1.0, 1.0, 0.0]].view()).unwrap(), 0.0);
    }

    #[test]
    fn fully_masked_gradient_is_zero() {
        let net = init_network(&NetworkArch::new(3, vec![4, 3], 2), 2).unwrap();
        let x = array![[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]];
        let (loss, g) = net
            .loss_gradient(x.view(), Array2::from_elem((2, 2), 50.0).view(), Array2::zeros((2, 2)).view())
            .unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.to_flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn param_indexing_round_trips() {
        let mut net = init_network(&NetworkArch::new(2, vec![3], 2), 0).unwrap();
        let n = net.num_params();
        assert_eq!(n, 2 * 3 + 3 + 3 * 2 + 2);
        net.set_param(n - 1, 7.5);
        assert_eq!(net.head().bias[1], 7.5);
        assert_eq!(net.param(n - 1), 7.5);
        net.set_param(0, -1.0);
        assert_eq!(net.layers[0].weights[[0, 0]], -1.0);
    }
}
