//! Reserve zones from k-means over shift-factor signatures.
//!
//! Each bus is represented by its PTDF column: buses whose injections load
//! the monitored network in similar ways end up in the same zone. Zonal
//! requirements follow a largest-contingency rule for spinning (100%) and
//! non-spinning (50%) reserve and a load fraction for regulation.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::case::{MarketCase, ReserveRequirements, ZoneRequirement};
use crate::network::PtdfMatrix;

pub const MAX_ITERATIONS: usize = 300;
pub const CONVERGENCE_TOL: f64 = 1e-9;
pub const DEFAULT_REG_FRACTION: f64 = 0.03;

#[derive(Debug, Error)]
pub enum ZoningError {
    #[error("invalid zone count {k} for {buses} buses")]
    InvalidK { k: usize, buses: usize },
    #[error("zone `{0}` contains no generator")]
    EmptyZone(String),
    #[error("regulation fraction must be non-negative, got {0}")]
    InvalidFraction(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZonePartition {
    pub k: usize,
    /// bus id → zone id
    pub assignment: BTreeMap<String, String>,
    /// zone id → bus ids
    pub members: BTreeMap<String, BTreeSet<String>>,
    /// zone id → generator ids located in the zone
    pub generator_sets: BTreeMap<String, BTreeSet<String>>,
}

impl ZonePartition {
    /// Builds the partition view of an existing bus → zone map.
    pub fn from_assignment(case: &MarketCase, assignment: BTreeMap<String, String>) -> Self {
        let mut members: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (bus, zone) in &assignment {
            members.entry(zone.clone()).or_default().insert(bus.clone());
        }
        let mut generator_sets: BTreeMap<String, BTreeSet<String>> = members
            .keys()
            .map(|z| (z.clone(), BTreeSet::new()))
            .collect();
        for g in &case.generators {
            if let Some(zone) = assignment.get(&g.bus) {
                generator_sets
                    .entry(zone.clone())
                    .or_default()
                    .insert(g.id.clone());
            }
        }
        ZonePartition {
            k: members.len(),
            assignment,
            members,
            generator_sets,
        }
    }

    pub fn of_case(case: &MarketCase) -> Self {
        Self::from_assignment(case, case.zones.clone())
    }
}

/// Result of a clustering run, with the objective recorded after every
/// assignment step.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub partition: ZonePartition,
    pub iterations: usize,
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut chosen = vec![false; points.len()];
    while centroids.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| {
                centroids
                    .iter()
                    .map(|c| sq_dist(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut idx = d2.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && target < *d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        } else {
            // Every point coincides with a centroid; take the first unused one.
            chosen.iter().position(|c| !c).unwrap_or(0)
        };
        chosen[pick] = true;
        centroids.push(points[pick].clone());
    }
    centroids
}

/// Nearest centroid; ties keep the current cluster, then the lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>], current: Option<usize>) -> usize {
    let mut best = current.unwrap_or(0);
    let mut best_d = sq_dist(point, &centroids[best]);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Lloyd's k-means seeded by k-means++.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> (Vec<usize>, usize, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(points, k, &mut rng);
    let mut labels: Vec<usize> = points
        .iter()
        .map(|p| nearest(p, &centroids, None))
        .collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        repair_empty(points, &mut labels, &mut centroids);
        history.push(inertia(points, &labels, &centroids));

        let dim = points.first().map_or(0, Vec::len);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&labels) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut movement: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let updated: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            movement = movement.max(sq_dist(&updated, &centroids[c]).sqrt());
            centroids[c] = updated;
        }
        for (p, label) in points.iter().zip(labels.iter_mut()) {
            *label = nearest(p, &centroids, Some(*label));
        }
        if movement < CONVERGENCE_TOL || iterations >= MAX_ITERATIONS {
            repair_empty(points, &mut labels, &mut centroids);
            history.push(inertia(points, &labels, &centroids));
            break;
        }
    }
    (labels, iterations, history)
}

fn inertia(points: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &c)| sq_dist(p, &centroids[c]))
        .sum()
}

/// Gives every empty cluster the point farthest from its own centroid,
/// taken from a cluster that has more than one member.
fn repair_empty(points: &[Vec<f64>], labels: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &c in labels.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&n| n == 0) else {
            return;
        };
        let donor = (0..points.len())
            .filter(|&i| counts[labels[i]] > 1)
            .max_by(|&a, &b| {
                let da = sq_dist(&points[a], &centroids[labels[a]]);
                let db = sq_dist(&points[b], &centroids[labels[b]]);
                da.total_cmp(&db).then(b.cmp(&a))
            });
        let Some(i) = donor else { return };
        labels[i] = empty;
        centroids[empty] = points[i].clone();
    }
}

/// Partitions buses into `k` zones. Zone ids are `Z1..Zk`, numbered in order
/// of each zone's first bus in the case.
pub fn cluster_buses(
    case: &MarketCase,
    ptdf: &PtdfMatrix,
    k: usize,
    seed: u64,
) -> Result<Clustering, ZoningError> {
    let n = ptdf.bus_ids.len();
    if k == 0 || k > n {
        return Err(ZoningError::InvalidK { k, buses: n });
    }
    let points: Vec<Vec<f64>> = (0..n).map(|i| ptdf.bus_column(i)).collect();
    let (labels, iterations, inertia_history) = kmeans(&points, k, seed);

    let mut relabel: Vec<Option<usize>> = vec![None; k];
    let mut next = 0;
    for &c in &labels {
        if relabel[c].is_none() {
            next += 1;
            relabel[c] = Some(next);
        }
    }
    let assignment = ptdf
        .bus_ids
        .iter()
        .zip(&labels)
        .map(|(bus, &c)| (bus.clone(), format!("Z{}", relabel[c].unwrap())))
        .collect();
    Ok(Clustering {
        partition: ZonePartition::from_assignment(case, assignment),
        iterations,
        inertia_history,
    })
}

/// Zonal requirements: spinning = largest unit in the zone, non-spinning =
/// half of it, regulation = `reg_fraction` × zonal demand each hour.
pub fn size_requirements(
    case: &MarketCase,
    partition: &ZonePartition,
    reg_fraction: f64,
) -> Result<ReserveRequirements, ZoningError> {
    if !(reg_fraction >= 0.0) {
        return Err(ZoningError::InvalidFraction(reg_fraction));
    }
    let mut zones = BTreeMap::new();
    for (zone, buses) in &partition.members {
        let largest = case
            .generators
            .iter()
            .filter(|g| buses.contains(&g.bus))
            .map(|g| g.p_max)
            .fold(None, |acc: Option<f64>, p| {
                Some(acc.map_or(p, |a| a.max(p)))
            })
            .ok_or_else(|| ZoningError::EmptyZone(zone.clone()))?;
        let reg = (0..case.horizon)
            .map(|t| {
                let demand: f64 = case
                    .buses
                    .iter()
                    .filter(|b| buses.contains(&b.id))
                    .map(|b| b.demand[t])
                    .sum();
                reg_fraction * demand
            })
            .collect();
        zones.insert(
            zone.clone(),
            ZoneRequirement {
                reg,
                spin: vec![largest; case.horizon],
                nsp: vec![0.5 * largest; case.horizon],
            },
        );
    }
    Ok(ReserveRequirements { zones })
}

/// `bus,zone` rows in bus order of the assignment map.
pub fn write_zones_csv<W: Write>(partition: &ZonePartition, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bus", "zone"])?;
    for (bus, zone) in &partition.assignment {
        w.write_record([bus, zone])?;
    }
    w.flush()?;
    Ok(())
}

/// `zone,t,reg,spin,nsp` rows, `t` counted from 1.
pub fn write_requirements_csv<W: Write>(
    requirements: &ReserveRequirements,
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["zone", "t", "reg", "spin", "nsp"])?;
    for (zone, r) in &requirements.zones {
        for t in 0..r.reg.len() {
            w.write_record([
                zone.clone(),
                (t + 1).to_string(),
                crate::num(r.reg[t]),
                crate::num(r.spin[t]),
                crate::num(r.nsp[t]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Returns a copy of the case with the partition and requirements installed.
pub fn apply_zoning(
    case: &MarketCase,
    partition: &ZonePartition,
    requirements: ReserveRequirements,
) -> MarketCase {
    let mut out = case.clone();
    out.zones = partition.assignment.clone();
    out.requirements = requirements;
    out
}
