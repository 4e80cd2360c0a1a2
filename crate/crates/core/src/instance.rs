use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Points in `R^d` with one group label per point.
///
/// Group ids are assigned in order of first appearance of each label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    labels: Vec<String>,
    group_names: Vec<String>,
    group_of: Vec<usize>,
    groups: Vec<Vec<usize>>,
}

pub fn build_dataset(points: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Dataset> {
    if points.is_empty() || labels.is_empty() {
        return Err(invalid("dataset needs at least one point and one label"));
    }
    if points.len() != labels.len() {
        return Err(invalid(format!(
            "{} points but {} labels",
            points.len(),
            labels.len()
        )));
    }
    let dim = points[0].len();
    if dim == 0 {
        return Err(invalid("point 0 has dimension 0"));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(invalid(format!("point {i} has dimension {}, expected {dim}", p.len())));
        }
        if let Some(c) = p.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("point {i} has non-finite coordinate {c}")));
        }
    }
    let mut group_names: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of = Vec::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        let g = match group_names.iter().position(|n| n == label) {
            Some(g) => g,
            None => {
                group_names.push(label.clone());
                groups.push(Vec::new());
                group_names.len() - 1
            }
        };
        groups[g].push(i);
        group_of.push(g);
    }
    Ok(Dataset {
        points,
        labels,
        group_names,
        group_of,
        groups,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    /// Member indices of group `g`, ascending.
    pub fn group(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    pub fn group_ids(&self) -> &[usize] {
        &self.group_of
    }

    pub fn group_id(&self, name: &str) -> Option<usize> {
        self.group_names.iter().position(|n| n == name)
    }

    /// New dataset made of the listed points, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(invalid(format!("subset index {bad} out of range for {} points", self.len())));
        }
        build_dataset(
            indices.iter().map(|&i| self.points[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i].clone()).collect(),
        )
    }
}
