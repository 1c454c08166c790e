use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::matcore::{CMat, HermitianMatrix, C64};
use crate::rng::Rng;

/// Sub-ensembles mixed by [`Ensemble`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Gaussian,
    NearCommuting,
    RankOne,
    SpectrumGapped,
}

/// Mixture of Hermitian test ensembles with weights in percent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub gaussian: u32,
    pub near_commuting: u32,
    pub rank_one: u32,
    pub spectrum_gapped: u32,
}

impl Default for Ensemble {
    fn default() -> Self {
        Self { gaussian: 70, near_commuting: 10, rank_one: 10, spectrum_gapped: 10 }
    }
}

fn complex_gaussian(r: &mut Rng) -> C64 {
    C64::new(StandardNormal.sample(r), StandardNormal.sample(r))
}

/// `(G + G*)/2` for a complex Gaussian `G`, scaled by `1/√d`.
pub fn gaussian_hermitian(d: usize, r: &mut Rng) -> HermitianMatrix {
    let g = CMat::from_fn(d, d, |_, _| complex_gaussian(r));
    HermitianMatrix::project(g).scaled(1.0 / (d as f64).sqrt())
}

/// Haar-distributed unitary via QR of a complex Gaussian with phase fix.
pub fn haar_unitary(d: usize, r: &mut Rng) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| complex_gaussian(r));
    let qr = g.qr();
    let (mut q, rm) = (qr.q(), qr.r());
    for j in 0..d {
        let x = rm[(j, j)];
        let phase = if x.norm() > 0.0 { x / x.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn conjugate(u: &CMat, diag: &[f64]) -> HermitianMatrix {
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(diag.len(), diag.iter().map(|x| C64::new(*x, 0.0))));
    HermitianMatrix::project(u * d * u.adjoint())
}

fn log_uniform_scale(r: &mut Rng) -> f64 {
    (r.random_range(-1.5f64..1.0)).exp()
}

fn random_unit_vector(d: usize, r: &mut Rng) -> CMat {
    let v = CMat::from_fn(d, 1, |_, _| complex_gaussian(r));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

impl Ensemble {
    pub fn pick(&self, r: &mut Rng) -> EnsembleKind {
        let total = self.gaussian + self.near_commuting + self.rank_one + self.spectrum_gapped;
        let u = r.random_range(0..total.max(1));
        if u < self.gaussian {
            EnsembleKind::Gaussian
        } else if u < self.gaussian + self.near_commuting {
            EnsembleKind::NearCommuting
        } else if u < self.gaussian + self.near_commuting + self.rank_one {
            EnsembleKind::RankOne
        } else {
            EnsembleKind::SpectrumGapped
        }
    }

    /// `k` Hermitian matrices of dimension `d` drawn jointly from one sub-ensemble.
    pub fn sample(&self, d: usize, k: usize, r: &mut Rng) -> (EnsembleKind, Vec<HermitianMatrix>) {
        let kind = self.pick(r);
        (kind, sample_kind(kind, d, k, r))
    }
}

pub fn sample_kind(kind: EnsembleKind, d: usize, k: usize, r: &mut Rng) -> Vec<HermitianMatrix> {
    match kind {
        EnsembleKind::Gaussian => (0..k).map(|_| gaussian_hermitian(d, r).scaled(log_uniform_scale(r))).collect(),
        EnsembleKind::NearCommuting => {
            // Shared eigenbasis plus a small perturbation.
            let u = haar_unitary(d, r);
            let eps = 10f64.powf(r.random_range(-8.0..-2.0));
            (0..k)
                .map(|_| {
                    let spec: Vec<f64> = (0..d).map(|_| StandardNormal.sample(r)).collect();
                    &conjugate(&u, &spec) + &gaussian_hermitian(d, r).scaled(eps)
                })
                .collect()
        }
        EnsembleKind::RankOne => (0..k)
            .map(|_| {
                let v = random_unit_vector(d, r);
                let a: f64 = StandardNormal.sample(r);
                HermitianMatrix::project(&v * v.adjoint() * C64::new(2.0 * a, 0.0))
            })
            .collect(),
        EnsembleKind::SpectrumGapped => (0..k)
            .map(|_| {
                let u = haar_unitary(d, r);
                let gap = r.random_range(1.0..4.0);
                let spec: Vec<f64> = (0..d)
                    .map(|i| {
                        let side = if i % 2 == 0 { gap } else { -gap };
                        side + 1e-3 * Distribution::<f64>::sample(&StandardNormal, r)
                    })
                    .collect();
                conjugate(&u, &spec)
            })
            .collect(),
    }
}

/// Random positive semidefinite matrix `G G*/d` with random rank.
pub fn random_psd(d: usize, r: &mut Rng) -> HermitianMatrix {
    let rank = r.random_range(1..=d);
    let g = CMat::from_fn(d, rank, |_, _| complex_gaussian(r));
    HermitianMatrix::project(&g * g.adjoint() / C64::new(d as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn unitary_is_unitary() {
        let mut r = rng::stream(1, 0);
        let u = haar_unitary(4, &mut r);
        assert!((&u * u.adjoint() - CMat::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn mixture_proportions() {
        let e = Ensemble::default();
        let mut r = rng::stream(2, 0);
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            counts[e.pick(&mut r) as usize] += 1;
        }
        assert!((counts[0] as f64 / 10_000.0 - 0.7).abs() < 0.03);
        assert!((counts[3] as f64 / 10_000.0 - 0.1).abs() < 0.02);
    }

    #[test]
    fn psd_and_rank_one_shapes() {
        let mut r = rng::stream(3, 0);
        for d in 1..5 {
            assert!(random_psd(d, &mut r).lambda_min() >= -1e-12);
            let m = sample_kind(EnsembleKind::RankOne, d, 1, &mut r).pop().unwrap();
            let ev = m.eigenvalues();
            assert!(ev.iter().filter(|x| x.abs() > 1e-10).count() <= 1);
        }
    }
}
