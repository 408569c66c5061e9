//! Norm and seminorm toolbox: L2, Linf, H^s, Hölder lower bounds,
//! sharp Littlewood-Paley blocks and Besov sequence norms.
//!
//! L2 uses the normalized measure (2pi)^{-d} dx, so Parseval reads
//! ||f||_{L2}^2 = sum_k |f_hat(k)|^2 under the grid's 1/N^d transform.

use crate::field::{periodic_distance, Field};
use num_complex::Complex64;
use rayon::prelude::*;

pub fn linf(field: &Field) -> f64 {
    field.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn l2(field: &Field) -> f64 {
    field
        .spectral()
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Nonhomogeneous Sobolev norm (sum_k (1+|k|^2)^s |f_hat|^2)^{1/2}.
pub fn norm_hs(field: &Field, s: f64) -> f64 {
    assert!(s >= 0.0, "H^s diagnostic expects s >= 0");
    let g = field.grid();
    field
        .spectral()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let k = g.mode_norm(idx);
            (1.0 + k * k).powf(s) * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Result of a pairwise supremum scan.
#[derive(Debug, Clone, Copy)]
pub struct PairSup {
    pub value: f64,
    /// Flat indices of the achieving pair.
    pub pair: (usize, usize),
    /// Periodic distance of the achieving pair.
    pub distance: f64,
}

/// Certified lower bound of the Hölder seminorm ||f||_{C^beta}: supremum of
/// |f(x)-f(y)| / d(x,y)^beta over all pairs of points of the stride-thinned
/// sublattice. Subsampling only ever lowers the value.
pub fn holder_seminorm(field: &Field, beta: f64, stride: usize) -> PairSup {
    assert!(beta > 0.0 && beta < 1.0, "beta must lie in (0,1)");
    assert!(stride >= 1);
    pair_scan(field, stride, |diff, dist| diff / dist.powf(beta))
}

/// Supremum of `score(|f(x)-f(y)|, d(x,y))` over sublattice pairs.
pub(crate) fn pair_scan(
    field: &Field,
    stride: usize,
    score: impl Fn(f64, f64) -> f64 + Sync,
) -> PairSup {
    let g = field.grid();
    let n = g.points_per_dim();
    let points: Vec<usize> = match g.dim() {
        1 => (0..n).step_by(stride).collect(),
        _ => {
            let mut p = Vec::new();
            for i in (0..n).step_by(stride) {
                for j in (0..n).step_by(stride) {
                    p.push(i * n + j);
                }
            }
            p
        }
    };
    let best = points
        .par_iter()
        .enumerate()
        .map(|(a, &ia)| {
            let mut local = PairSup {
                value: 0.0,
                pair: (ia, ia),
                distance: 0.0,
            };
            for &ib in points.iter().skip(a + 1) {
                let dist = periodic_distance(g, ia, ib);
                if dist == 0.0 {
                    continue;
                }
                let diff = (field.at(ia) - field.at(ib)).abs();
                let v = score(diff, dist);
                if v > local.value {
                    local = PairSup {
                        value: v,
                        pair: (ia, ib),
                        distance: dist,
                    };
                }
            }
            local
        })
        .reduce(
            || PairSup {
                value: 0.0,
                pair: (0, 0),
                distance: 0.0,
            },
            |a, b| if b.value > a.value { b } else { a },
        );
    best
}

/// Sharp dyadic projection. q = -1 keeps |k| <= 1, q >= 0 keeps
/// 2^{q-1} < |k| <= 2^q, so the blocks partition the modes exactly.
pub fn lp_block(field: &Field, q: i32) -> Field {
    assert!(q >= -1);
    let g = field.grid();
    let spec: Vec<Complex64> = field
        .spectral()
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            if block_of(g.mode_norm(idx)) == q {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Field::from_spectral(g.clone(), spec)
}

fn block_of(knorm: f64) -> i32 {
    if knorm <= 1.0 {
        -1
    } else {
        knorm.log2().ceil() as i32
    }
}

/// Largest block index holding any mode of the grid.
pub fn max_block(field: &Field) -> i32 {
    let g = field.grid();
    let kmax = match g.dim() {
        1 => g.points_per_dim() as f64 / 2.0,
        _ => (g.points_per_dim() as f64 / 2.0) * std::f64::consts::SQRT_2,
    };
    block_of(kmax)
}

/// Besov sequence norm || {2^{qs} ||Delta_q f||_{L^p}} ||_{l^r}, p,r in {2,inf}.
pub fn besov_norm(field: &Field, s: f64, p: u32, r: u32) -> f64 {
    assert!(p == 2 || p == u32::MAX, "p must be 2 or MAX (infinity)");
    assert!(r == 2 || r == u32::MAX, "r must be 2 or MAX (infinity)");
    let mut seq = Vec::new();
    for q in -1..=max_block(field) {
        let block = lp_block(field, q);
        let lp = if p == 2 { l2(&block) } else { linf(&block) };
        seq.push((q as f64 * s).exp2() * lp);
    }
    if r == 2 {
        seq.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        seq.iter().fold(0.0, |m, &v| m.max(v))
    }
}
