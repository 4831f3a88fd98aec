#![allow(dead_code)]

pub mod oracles;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use wlsubspace::channel::{
    draw_block_split, draw_channel, true_covariance, true_real_covariance, CMatrix, ChannelRealization, RMatrix,
    ReceivedBlock,
};
use wlsubspace::rng::{Purpose, SeedTree};

pub fn seeded_channel(seed: u64, antennas: usize) -> ChannelRealization {
    let tree = SeedTree::new(seed);
    draw_channel(antennas, 1.0, &mut tree.stream(0, 0, Purpose::Channel)).unwrap()
}

/// Same direction as `ch`, rescaled to `‖g‖² = g_norm2`.
pub fn with_energy(ch: &ChannelRealization, g_norm2: f64) -> ChannelRealization {
    ChannelRealization::new(ch.h() * Complex64::from(g_norm2.sqrt()), ch.gamma2()).unwrap()
}

/// Block `index` of an independent sequence keyed by `seed`.
pub fn block(ch: &ChannelRealization, samples: usize, sigma2: f64, seed: u64, index: u64) -> ReceivedBlock {
    let tree = SeedTree::new(seed);
    draw_block_split(
        ch,
        samples,
        sigma2,
        &mut tree.stream(0, index, Purpose::Symbols),
        &mut tree.stream(0, index, Purpose::Noise),
    )
    .unwrap()
}

/// Running first and second moments.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub count: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn std_error(&self) -> f64 {
        let n = self.count as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

/// Columns of the exact noise subspace `V` of the complex covariance,
/// taken from a dense reference eigensolver.
pub fn complex_noise_subspace(ch: &ChannelRealization, sigma2: f64) -> CMatrix {
    let eig = SymmetricEigen::new(true_covariance(ch, sigma2));
    let split = 0.5 * (eig.eigenvalues.max() + eig.eigenvalues.min());
    let cols: Vec<_> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] < split)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    CMatrix::from_columns(&cols)
}

/// Columns of the exact noise subspace `V_r` of the real covariance.
pub fn real_noise_subspace(ch: &ChannelRealization, sigma2: f64) -> RMatrix {
    let eig = SymmetricEigen::new(true_real_covariance(ch, sigma2));
    let split = 0.5 * (eig.eigenvalues.max() + eig.eigenvalues.min());
    let cols: Vec<_> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] < split)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    RMatrix::from_columns(&cols)
}
