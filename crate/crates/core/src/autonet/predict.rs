use ndarray::ArrayView2;

use super::{DenseNetwork, NetError};
use crate::Scalar;

/// Rounds to the nearest integer, halves to the even neighbour.
pub fn round_half_even<T: Scalar>(x: T) -> T {
    let floor = x.floor();
    let diff = x - floor;
    let half = T::lit(0.5);
    if diff < half {
        floor
    } else if diff > half {
        floor + T::one()
    } else if (floor / T::lit(2.0)).fract() == T::zero() {
        floor
    } else {
        floor + T::one()
    }
}

/// Maps one raw network output to a cluster label: round half to even,
/// take the absolute value, clamp into `0..num_clusters`.
pub fn label_from_output<T: Scalar>(raw: T, num_clusters: usize) -> Result<usize, NetError> {
    if num_clusters < 2 {
        return Err(NetError::BadClusterCount(num_clusters));
    }
    if !raw.is_finite() {
        return Err(NetError::NonFiniteOutput { row: 0 });
    }
    let top = T::from_usize_lossy(num_clusters - 1);
    let label = round_half_even(raw).abs().min(top);
    Ok(label.to_usize().expect("clamped into 0..num_clusters"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions<T> {
    pub raw: Vec<T>,
    pub labels: Vec<usize>,
}

pub fn predict_labels<T: Scalar>(
    net: &DenseNetwork<T>,
    inputs: ArrayView2<T>,
    num_clusters: usize,
) -> Result<Predictions<T>, NetError> {
    if net.output_width() != 1 {
        return Err(NetError::ShapeMismatch {
            what: "output width",
            expected: 1,
            found: net.output_width(),
        });
    }
    if num_clusters < 2 {
        return Err(NetError::BadClusterCount(num_clusters));
    }
    let (out, _) = net.forward(inputs)?;
    let raw: Vec<T> = out.column(0).to_vec();
    let labels = raw
        .iter()
        .enumerate()
        .map(|(row, &r)| {
            label_from_output(r, num_clusters).map_err(|e| match e {
                NetError::NonFiniteOutput { .. } => NetError::NonFiniteOutput { row },
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(Predictions { raw, labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_even() {
        let cases = [
            (0.5, 0.0),
            (1.5, 2.0),
            (2.5, 2.0),
            (-0.5, 0.0),
            (-1.5, -2.0),
            (-2.5, -2.0),
            (0.49, 0.0),
            (0.51, 1.0),
            (-0.51, -1.0),
            (3.0, 3.0),
        ];
        for (x, want) in cases {
            assert_eq!(round_half_even(x), want, "{x}");
            assert_eq!(f64::round_ties_even(x), want, "{x}");
        }
    }

    #[test]
    fn absolute_and_clamp() {
        assert_eq!(label_from_output(-1.2, 4).unwrap(), 1);
        assert_eq!(label_from_output(-3.4, 4).unwrap(), 3);
        assert_eq!(label_from_output(7.9, 4).unwrap(), 3);
        assert_eq!(label_from_output(-9.0, 4).unwrap(), 3);
        assert_eq!(label_from_output(0.5, 4).unwrap(), 0);
        assert_eq!(label_from_output(1.5f32, 4).unwrap(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(label_from_output(1.0, 1), Err(NetError::BadClusterCount(1))));
        assert!(matches!(
            label_from_output(f64::NAN, 4),
            Err(NetError::NonFiniteOutput { .. })
        ));
    }
}
