//! Uninspected points sensor: spherical k-means over the normals of the
//! points not yet inspected, warm-started from the previous activation.

use nalgebra::Vector3;

use crate::geometry::{ChiefModel, PointStatus};

pub const MAX_LLOYD_ITERS: usize = 50;
pub const CONVERGENCE_SHIFT: f64 = 1e-6;
/// A cluster wider than this (angular radius, rad) is split when k may grow.
pub const SPLIT_SPREAD: f64 = std::f64::consts::FRAC_PI_2;
/// At most one cluster per this many uninspected points.
pub const POINTS_PER_CLUSTER: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    centroids: Vec<Vector3<f64>>,
    last_uninspected_count: usize,
    output: Vector3<f64>,
}

impl Default for ClusterState {
    fn default() -> Self {
        Self {
            centroids: Vec::new(),
            last_uninspected_count: 0,
            output: Vector3::x(),
        }
    }
}

/// Upper bound on k for a given number of uninspected points.
pub fn cluster_cap(uninspected: usize) -> usize {
    (uninspected / POINTS_PER_CLUSTER).max(1)
}

impl ClusterState {
    pub fn centroids(&self) -> &[Vector3<f64>] {
        &self.centroids
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn last_uninspected_count(&self) -> usize {
        self.last_uninspected_count
    }

    /// Most recent sensor output (chief frame).
    pub fn output(&self) -> Vector3<f64> {
        self.output
    }

    /// Reads the sensor. When `trigger` is false, or nothing is left to
    /// inspect, the cached direction is returned untouched.
    pub fn sense(
        &mut self,
        status: &PointStatus,
        chief: &ChiefModel,
        deputy_pos: &Vector3<f64>,
        trigger: bool,
    ) -> Vector3<f64> {
        if !trigger {
            return self.output;
        }
        let members: Vec<Vector3<f64>> = status
            .flags()
            .iter()
            .zip(chief.normals())
            .filter(|(inspected, _)| !**inspected)
            .map(|(_, n)| *n)
            .collect();
        if members.is_empty() {
            return self.output;
        }
        self.last_uninspected_count = members.len();
        self.recluster(&members);
        self.output = self.select(&members, deputy_pos);
        self.output
    }

    fn recluster(&mut self, members: &[Vector3<f64>]) {
        let cap = cluster_cap(members.len());
        if self.centroids.is_empty() {
            self.centroids.push(seed_direction(members));
        }
        if self.centroids.len() > cap {
            let sizes = cluster_sizes(members, &self.centroids);
            let mut order: Vec<usize> = (0..self.centroids.len()).collect();
            order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
            order.truncate(cap);
            order.sort_unstable();
            self.centroids = order.into_iter().map(|i| self.centroids[i]).collect();
        }
        lloyd(members, &mut self.centroids);

        while self.centroids.len() < cap {
            let assignment = assign(members, &self.centroids);
            let largest = largest_cluster(&assignment, self.centroids.len());
            let centroid = self.centroids[largest];
            let farthest = members
                .iter()
                .zip(&assignment)
                .filter(|(_, &c)| c == largest)
                .map(|(m, _)| *m)
                .min_by(|a, b| a.dot(&centroid).total_cmp(&b.dot(&centroid)));
            let Some(farthest) = farthest else { break };
            if angle_between(&farthest, &centroid) <= SPLIT_SPREAD {
                break;
            }
            self.centroids.push(farthest);
            lloyd(members, &mut self.centroids);
        }
    }

    /// Largest cluster; ties go to the centroid closest to the deputy direction.
    fn select(&self, members: &[Vector3<f64>], deputy_pos: &Vector3<f64>) -> Vector3<f64> {
        let sizes = cluster_sizes(members, &self.centroids);
        let toward = deputy_pos.try_normalize(0.0).unwrap_or_else(Vector3::zeros);
        let mut best = 0;
        for i in 1..self.centroids.len() {
            let closer = self.centroids[i].dot(&toward) > self.centroids[best].dot(&toward);
            if sizes[i] > sizes[best] || (sizes[i] == sizes[best] && closer) {
                best = i;
            }
        }
        self.centroids[best]
    }
}

fn seed_direction(members: &[Vector3<f64>]) -> Vector3<f64> {
    let sum: Vector3<f64> = members.iter().sum();
    sum.try_normalize(1e-9).unwrap_or(members[0])
}

fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// Nearest centroid by cosine similarity; ties go to the lower index.
fn assign(members: &[Vector3<f64>], centroids: &[Vector3<f64>]) -> Vec<usize> {
    members
        .iter()
        .map(|m| {
            let mut best = 0;
            let mut best_dot = m.dot(&centroids[0]);
            for (j, c) in centroids.iter().enumerate().skip(1) {
                let d = m.dot(c);
                if d > best_dot {
                    best = j;
                    best_dot = d;
                }
            }
            best
        })
        .collect()
}

fn cluster_sizes(members: &[Vector3<f64>], centroids: &[Vector3<f64>]) -> Vec<usize> {
    let mut sizes = vec![0; centroids.len()];
    for c in assign(members, centroids) {
        sizes[c] += 1;
    }
    sizes
}

fn largest_cluster(assignment: &[usize], k: usize) -> usize {
    let mut sizes = vec![0usize; k];
    for &c in assignment {
        sizes[c] += 1;
    }
    let mut best = 0;
    for (i, &s) in sizes.iter().enumerate() {
        if s > sizes[best] {
            best = i;
        }
    }
    best
}

/// Spherical Lloyd iterations: centroids are renormalized member sums.
/// Empty clusters keep their previous centroid.
pub fn lloyd(members: &[Vector3<f64>], centroids: &mut [Vector3<f64>]) {
    for _ in 0..MAX_LLOYD_ITERS {
        let assignment = assign(members, centroids);
        let mut sums = vec![Vector3::zeros(); centroids.len()];
        for (m, &c) in members.iter().zip(&assignment) {
            sums[c] += m;
        }
        let mut max_shift: f64 = 0.0;
        for (centroid, sum) in centroids.iter_mut().zip(&sums) {
            if let Some(next) = sum.try_normalize(1e-12) {
                max_shift = max_shift.max((next - *centroid).norm());
                *centroid = next;
            }
        }
        if max_shift < CONVERGENCE_SHIFT {
            break;
        }
    }
}
