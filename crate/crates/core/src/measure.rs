//! Visibility, Stokes parameters, degree of polarization, fidelity, synthetic
//! photon counting and single-qubit tomographic reconstruction.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::qmat::{c, hermitian_eigen, psd_sqrt, CMat, DensityMatrix, Mat2, Rho2, C64};

/// Name of the generator behind [`sample_counts`]; seeded with `seed_from_u64`.
pub const RNG_NAME: &str = "ChaCha8";

const UNIT_NORM_TOL: f64 = 1e-12;
const PURE_THRESHOLD: f64 = 1.0 - 1e-9;

/// Orthonormal analyzer basis `{|λ⟩, |λ̄⟩}`, stored as `|λ⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementBasis {
    ket: [C64; 2],
}

impl MeasurementBasis {
    pub fn new(ket: [C64; 2]) -> Result<Self> {
        let norm2 = ket[0].norm_sqr() + ket[1].norm_sqr();
        if !((norm2 - 1.0).abs() <= UNIT_NORM_TOL) {
            return Err(Error::domain("lambda_ket", format!("norm² is {norm2}, expected 1")));
        }
        Ok(MeasurementBasis { ket })
    }

    /// `{|H⟩, |V⟩}`
    pub fn horizontal() -> Self {
        MeasurementBasis { ket: [c(1.0, 0.0), c(0.0, 0.0)] }
    }

    /// `{|45°⟩, |−45°⟩}`
    pub fn diagonal() -> Self {
        MeasurementBasis { ket: [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)] }
    }

    /// `{|R⟩, |L⟩}` with `|R⟩ = (|H⟩ + i|V⟩)/√2`.
    pub fn right_circular() -> Self {
        MeasurementBasis { ket: [c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)] }
    }

    /// Linear polarization at `angle` radians from horizontal.
    pub fn linear(angle: f64) -> Self {
        let (s, co) = angle.sin_cos();
        MeasurementBasis { ket: [c(co, 0.0), c(s, 0.0)] }
    }

    pub fn ket(&self) -> [C64; 2] {
        self.ket
    }

    /// `|λ̄⟩ = (−λ₂*, λ₁*)`
    pub fn orthogonal_ket(&self) -> [C64; 2] {
        [-self.ket[1].conj(), self.ket[0].conj()]
    }

    /// Label for the three tomography bases; `custom` otherwise.
    pub fn label(&self) -> &'static str {
        let same = |other: &MeasurementBasis| {
            let overlap: C64 = other.ket.iter().zip(&self.ket).map(|(a, b)| a.conj() * b).sum();
            (overlap.norm() - 1.0).abs() < 1e-12
        };
        if same(&Self::horizontal()) {
            "HV"
        } else if same(&Self::diagonal()) {
            "DA"
        } else if same(&Self::right_circular()) {
            "RL"
        } else {
            "custom"
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "HV" => Some(Self::horizontal()),
            "DA" => Some(Self::diagonal()),
            "RL" => Some(Self::right_circular()),
            _ => None,
        }
    }

    /// `⟨λ|ρ|λ⟩`
    pub fn probability(&self, rho: &Rho2) -> f64 {
        rho.matrix().expectation(&self.ket).re.clamp(0.0, 1.0)
    }
}

/// `|⟨λ|ρ|λ⟩ − ⟨λ̄|ρ|λ̄⟩|`
pub fn visibility(rho: &Rho2, basis: &MeasurementBasis) -> f64 {
    let m = rho.matrix();
    let p = m.expectation(&basis.ket).re;
    let q = m.expectation(&basis.orthogonal_ket()).re;
    (p - q).abs().min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn norm(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }

    /// `½(I + s₁σ_z + s₂σ_x + s₃σ_y)`, not checked for positivity.
    pub fn to_matrix(&self) -> Mat2 {
        CMat([
            [c(0.5 * (1.0 + self.s1), 0.0), c(0.5 * self.s2, -0.5 * self.s3)],
            [c(0.5 * self.s2, 0.5 * self.s3), c(0.5 * (1.0 - self.s1), 0.0)],
        ])
    }
}

pub fn stokes(rho: &Rho2) -> StokesVector {
    let hv = rho.get(0, 1);
    let vh = rho.get(1, 0);
    StokesVector {
        s1: 2.0 * rho.get(0, 0).re - 1.0,
        s2: (hv + vh).re,
        s3: (C64::i() * (hv - vh)).re,
    }
}

/// Length of the Stokes vector.
pub fn degree_of_polarization(rho: &Rho2) -> f64 {
    stokes(rho).norm().min(1.0)
}

/// Transmission fidelity. Uses `Tr(ρ_out ρ_in)` when `ρ_in` is pure and the
/// Uhlmann form `[Tr √(√ρ_in ρ_out √ρ_in)]²` otherwise.
pub fn fidelity<const N: usize>(rho_in: &DensityMatrix<N>, rho_out: &DensityMatrix<N>) -> Result<f64> {
    let f = if rho_in.purity() > PURE_THRESHOLD {
        (*rho_out.matrix() * *rho_in.matrix()).trace().re
    } else {
        uhlmann_fidelity(rho_in, rho_out)?
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Mixed-state fidelity, valid for any pair of density matrices.
pub fn uhlmann_fidelity<const N: usize>(a: &DensityMatrix<N>, b: &DensityMatrix<N>) -> Result<f64> {
    let sa = psd_sqrt(a.matrix())?;
    let inner = (sa * *b.matrix() * sa).hermitian_part();
    let root = psd_sqrt(&inner)?;
    Ok(root.trace().re.powi(2))
}

/// Photon counts for one analyzer setting.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRecord {
    pub label: String,
    pub basis: MeasurementBasis,
    /// Counts in `|λ⟩` and `|λ̄⟩`.
    pub counts: [u64; 2],
    pub seed: u64,
}

impl CountRecord {
    pub fn shots(&self) -> u64 {
        self.counts[0] + self.counts[1]
    }

    /// `(N_max − N_min)/(N_max + N_min)`
    pub fn visibility(&self) -> f64 {
        let (a, b) = (self.counts[0] as f64, self.counts[1] as f64);
        if a + b == 0.0 {
            return 0.0;
        }
        (a.max(b) - a.min(b)) / (a + b)
    }

    /// Parses the lines written by `Display` (one record = two lines).
    pub fn parse_all(text: &str) -> Result<Vec<CountRecord>> {
        let mut out: Vec<CountRecord> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "basis,outcome,count,seed" {
                continue;
            }
            let bad = |why: &str| Error::Table(format!("count record line {}: {why}", lineno + 1));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(bad("expected basis,outcome,count,seed"));
            }
            let basis = MeasurementBasis::from_label(cols[0]).ok_or_else(|| bad("unknown basis label"))?;
            let slot = match cols[1] {
                "lambda" => 0,
                "lambda_bar" => 1,
                _ => return Err(bad("outcome must be lambda or lambda_bar")),
            };
            let count: u64 = cols[2].parse().map_err(|_| bad("count is not a nonnegative integer"))?;
            let seed: u64 = cols[3].parse().map_err(|_| bad("seed is not an integer"))?;
            match out.iter_mut().find(|r| r.label == cols[0] && r.seed == seed) {
                Some(r) => r.counts[slot] = count,
                None => {
                    let mut counts = [0, 0];
                    counts[slot] = count;
                    out.push(CountRecord { label: cols[0].to_string(), basis, counts, seed });
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for CountRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{},lambda,{},{}", self.label, self.counts[0], self.seed)?;
        writeln!(f, "{},lambda_bar,{},{}", self.label, self.counts[1], self.seed)
    }
}

/// Binomial photon counting in `basis`, reproducible for a given seed.
pub fn sample_counts(rho: &Rho2, basis: &MeasurementBasis, shots: u64, seed: u64) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::domain("shots", "must be at least 1"));
    }
    let p = basis.probability(rho);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = Binomial::new(shots, p).map_err(|e| Error::domain("probability", e.to_string()))?.sample(&mut rng);
    Ok(CountRecord { label: basis.label().to_string(), basis: *basis, counts: [hits, shots - hits], seed })
}

/// Linear inversion from the probabilities of `|H⟩`, `|45°⟩` and `|R⟩`,
/// projected onto the physical states if needed.
pub fn reconstruct_from_probabilities(p_h: f64, p_d: f64, p_r: f64) -> Result<Rho2> {
    let s = StokesVector { s1: 2.0 * p_h - 1.0, s2: 2.0 * p_d - 1.0, s3: 2.0 * p_r - 1.0 };
    clip_to_physical(s.to_matrix())
}

/// Reconstructs a qubit state from counts in the HV, DA and RL bases.
pub fn reconstruct(records: &[CountRecord]) -> Result<Rho2> {
    let fraction = |label: &str| -> Result<f64> {
        let r = records
            .iter()
            .find(|r| r.label == label)
            .ok_or_else(|| Error::MissingBasis(label.to_string()))?;
        if r.shots() == 0 {
            return Err(Error::domain("shots", format!("basis {label} has no counts")));
        }
        Ok(r.counts[0] as f64 / r.shots() as f64)
    };
    reconstruct_from_probabilities(fraction("HV")?, fraction("DA")?, fraction("RL")?)
}

/// Clips negative eigenvalues to zero and renormalizes the trace.
pub fn clip_to_physical(m: Mat2) -> Result<Rho2> {
    let m = m.hermitian_part();
    let eig = hermitian_eigen(&m);
    if eig.min_value() >= 0.0 {
        return DensityMatrix::validate_symmetrized(m);
    }
    let clipped = eig.reconstruct(|x| x.max(0.0));
    let tr = clipped.trace().re;
    DensityMatrix::validate_symmetrized(clipped.scale_re(1.0 / tr))
}
