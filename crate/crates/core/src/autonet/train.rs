use ndarray::{Array2, ArrayView2, Axis};

use super::{backward, mse_loss, Adam, AdamConfig, DenseNetwork, NetError};
use crate::rng::XorShift64Star;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<T> {
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds the per-epoch shuffle; unused when one batch covers the data.
    pub seed: u64,
    pub adam: AdamConfig<T>,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            epochs: 1000,
            batch_size: 1024,
            seed: 7,
            adam: AdamConfig::default(),
        }
    }
}

/// Full-dataset MSE recorded at the end of every epoch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory<T> {
    pub losses: Vec<T>,
}

impl<T: Scalar> TrainHistory<T> {
    pub fn final_loss(&self) -> Option<T> {
        self.losses.last().copied()
    }

    /// `epoch,loss` CSV with 1-based epochs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (i, loss) in self.losses.iter().enumerate() {
            out.push_str(&format!("{},{loss:.16e}\n", i + 1));
        }
        out
    }
}

/// Minibatch Adam on mean squared error.
///
/// When `batch_size >= n` every epoch is a single full batch in data order;
/// otherwise the rows are reshuffled each epoch from a generator seeded once
/// with `config.seed`.
pub fn train<T: Scalar>(
    net: &mut DenseNetwork<T>,
    inputs: ArrayView2<T>,
    targets: ArrayView2<T>,
    config: &TrainConfig<T>,
) -> Result<TrainHistory<T>, NetError> {
    let n = inputs.nrows();
    if n == 0 {
        return Err(NetError::EmptyDataset);
    }
    if targets.nrows() != n {
        return Err(NetError::ShapeMismatch {
            what: "target rows",
            expected: n,
            found: targets.nrows(),
        });
    }
    if targets.ncols() != net.output_width() {
        return Err(NetError::ShapeMismatch {
            what: "target width",
            expected: net.output_width(),
            found: targets.ncols(),
        });
    }
    if config.epochs == 0 {
        return Err(NetError::BadConfig("epochs must be at least 1"));
    }
    if config.batch_size == 0 {
        return Err(NetError::BadConfig("batch size must be at least 1"));
    }

    let mut adam = Adam::new(net, config.adam);
    let mut rng = XorShift64Star::new(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = TrainHistory {
        losses: Vec::with_capacity(config.epochs),
    };

    for _ in 0..config.epochs {
        if config.batch_size >= n {
            let (_, cache) = net.forward(inputs)?;
            let grads = backward(net, &cache, targets)?;
            adam.step(net, &grads)?;
        } else {
            rng.shuffle(&mut order);
            for chunk in order.chunks(config.batch_size) {
                let x: Array2<T> = inputs.select(Axis(0), chunk);
                let y: Array2<T> = targets.select(Axis(0), chunk);
                let (_, cache) = net.forward(x.view())?;
                let grads = backward(net, &cache, y.view())?;
                adam.step(net, &grads)?;
            }
        }
        let (pred, _) = net.forward(inputs)?;
        history.losses.push(mse_loss(pred.view(), targets)?);
    }
    Ok(history)
}
