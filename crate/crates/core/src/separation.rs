//! Uniform separation of indexed point families and greedy partitioning into
//! uniformly separated classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Indexed points in `R^d`; duplicates are allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct PointFamily {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointFamily {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        if dim == 0 {
            return Err(Error::Parameter("points need at least one coordinate".into()));
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("point coordinates must be finite".into()));
        }
        Ok(PointFamily { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(&self.points[i], &self.points[j])
    }
}

impl TryFrom<Vec<Vec<f64>>> for PointFamily {
    type Error = Error;

    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        PointFamily::new(points)
    }
}

impl From<PointFamily> for Vec<Vec<f64>> {
    fn from(f: PointFamily) -> Self {
        f.points
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Classes of 0-based indices; each class is uniformly separated at `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationPartition {
    pub threshold: f64,
    pub classes: Vec<Vec<usize>>,
}

/// Smallest distance between two distinct indices; `+∞` below two points.
pub fn min_pairwise_distance(family: &PointFamily) -> f64 {
    min_distance_of(family, &(0..family.len()).collect::<Vec<_>>())
}

/// Smallest pairwise distance within the index subset `class`.
pub fn min_distance_of(family: &PointFamily, class: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for (a, &i) in class.iter().enumerate() {
        for &j in &class[a + 1..] {
            best = best.min(family.distance(i, j));
        }
    }
    best
}

/// Greedy first fit in index order: each index joins the first class whose
/// members all lie at distance `>= t`, otherwise it opens a new class.
pub fn partition_uniformly_separated(family: &PointFamily, t: f64) -> Result<SeparationPartition> {
    let all: Vec<usize> = (0..family.len()).collect();
    partition_indices(family, &all, t)
}

/// Greedy first fit restricted to `indices`, visited in the given order.
pub fn partition_indices(family: &PointFamily, indices: &[usize], t: f64) -> Result<SeparationPartition> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("threshold t = {t} must be positive")));
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &i in indices {
        if i >= family.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: family.len(),
            });
        }
        match classes
            .iter_mut()
            .find(|class| class.iter().all(|&j| family.distance(i, j) >= t))
        {
            Some(class) => class.push(i),
            None => classes.push(vec![i]),
        }
    }
    Ok(SeparationPartition {
        threshold: t,
        classes,
    })
}

/// Partitions every class again at `t_fine`; the result stays valid at the old threshold.
pub fn refine(family: &PointFamily, partition: &SeparationPartition, t_fine: f64) -> Result<SeparationPartition> {
    let mut classes = Vec::new();
    for class in &partition.classes {
        classes.extend(partition_indices(family, class, t_fine)?.classes);
    }
    Ok(SeparationPartition {
        threshold: t_fine.max(partition.threshold),
        classes,
    })
}

impl SeparationPartition {
    /// Checks disjointness, coverage of `0..n` and separation of every class.
    pub fn is_valid_for(&self, family: &PointFamily) -> bool {
        let mut seen = vec![false; family.len()];
        for class in &self.classes {
            for &i in class {
                if i >= seen.len() || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
            if min_distance_of(family, class) < self.threshold {
                return false;
            }
        }
        seen.into_iter().all(|s| s)
    }
}
