//! Translation sequences `{λ_i}`: built-in generators and explicit point lists.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LambdaSource {
    /// `λ_i = i e_1`.
    Linear { dim: usize },
    /// `λ_i = (−1)^i i e_1`.
    Alternating { dim: usize },
    /// `λ_i = λ_{i−1} + drift e_1 + N(0, step²)` in every coordinate, `λ_0 = 0`.
    SeededRandomWalk {
        dim: usize,
        seed: u64,
        drift: f64,
        step: f64,
    },
    Points { points: Vec<Vec<f64>> },
}

impl LambdaSource {
    /// Parses a built-in name; anything else is treated as a list of points.
    pub fn builtin(name: &str, dim: usize, seed: u64) -> Option<Self> {
        match name {
            "linear" => Some(LambdaSource::Linear { dim }),
            "alternating" => Some(LambdaSource::Alternating { dim }),
            "seeded-random-walk" => Some(LambdaSource::SeededRandomWalk {
                dim,
                seed,
                drift: 1.0,
                step: 0.5,
            }),
            _ => None,
        }
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::Parameter("λ points must share one positive dimension".into()));
        }
        Ok(LambdaSource::Points { points })
    }

    pub fn dim(&self) -> usize {
        match self {
            LambdaSource::Linear { dim }
            | LambdaSource::Alternating { dim }
            | LambdaSource::SeededRandomWalk { dim, .. } => *dim,
            LambdaSource::Points { points } => points.first().map_or(1, Vec::len),
        }
    }

    /// `λ_1, λ_2, …`; finite only for explicit point lists.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Vec<f64>> + '_> {
        let axis = |dim: usize, x: f64| {
            let mut v = vec![0.0; dim];
            v[0] = x;
            v
        };
        match self {
            LambdaSource::Linear { dim } => Box::new((1u64..).map(move |i| axis(*dim, i as f64))),
            LambdaSource::Alternating { dim } => Box::new((1u64..).map(move |i| {
                let x = i as f64;
                axis(*dim, if i % 2 == 0 { x } else { -x })
            })),
            LambdaSource::SeededRandomWalk { dim, seed, drift, step } => {
                let mut r = sweep::rng(*seed, 0x1a);
                let normal = Normal::new(0.0, step.abs()).expect("finite step");
                let mut x = vec![0.0; *dim];
                Box::new(std::iter::from_fn(move || {
                    for (k, xk) in x.iter_mut().enumerate() {
                        *xk += normal.sample(&mut r) + if k == 0 { *drift } else { 0.0 };
                    }
                    Some(x.clone())
                }))
            }
            LambdaSource::Points { points } => Box::new(points.iter().cloned()),
        }
    }

    pub fn take(&self, n: usize) -> Vec<Vec<f64>> {
        self.iter().take(n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_start_at_one() {
        let l = LambdaSource::builtin("linear", 2, 0).unwrap();
        assert_eq!(l.take(2), vec![vec![1.0, 0.0], vec![2.0, 0.0]]);
        let a = LambdaSource::builtin("alternating", 1, 0).unwrap();
        assert_eq!(a.take(3), vec![vec![-1.0], vec![2.0], vec![-3.0]]);
        assert!(LambdaSource::builtin("pts.json", 1, 0).is_none());
    }

    #[test]
    fn random_walk_is_seeded() {
        let w = LambdaSource::builtin("seeded-random-walk", 1, 4).unwrap();
        assert_eq!(w.take(50), w.take(50));
        let other = LambdaSource::builtin("seeded-random-walk", 1, 5).unwrap();
        assert_ne!(w.take(5), other.take(5));
        assert!(w.take(2000).last().unwrap()[0] > 1000.0);
    }

    #[test]
    fn point_lists_are_finite() {
        let p = LambdaSource::from_points(vec![vec![0.0], vec![3.0]]).unwrap();
        assert_eq!(p.iter().count(), 2);
        assert!(LambdaSource::from_points(vec![vec![0.0], vec![1.0, 2.0]]).is_err());
    }
}
