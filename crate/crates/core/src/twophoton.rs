//! Two-photon engine for frequency-anticorrelated photon pairs.
//!
//! Photon L carries `ω₀/2 + ε` and photon R carries `ω₀/2 − ε`, where `ω₀` is
//! the (monochromatic) pump frequency. Each path holds one birefringent
//! crystal; the output is `∫ f(ε) K(ε) ρ₀ K†(ε) dε` with
//! `K = R(θ_L, θ_R) · [U_L(ω₀/2+ε) ⊗ U_R(ω₀/2−ε)] · R†(θ_L, θ_R)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::onephoton::CONVERGENCE_TOL;
use crate::qmat::{c, tensor, DensityMatrix, Mat2, Mat4, Rho4, C64};
use crate::quadrature::{CompositeRule, DEFAULT_NODES};
use crate::spectra::{normalize_weights, SpectralSamples, Spectrum, GAUSSIAN_WINDOW, SPEED_OF_LIGHT};

const ALIGN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];

    pub fn name(&self) -> &'static str {
        match self {
            BellKind::PhiPlus => "phi_plus",
            BellKind::PhiMinus => "phi_minus",
            BellKind::PsiPlus => "psi_plus",
            BellKind::PsiMinus => "psi_minus",
        }
    }

    /// State vector in the `(11, 21, 12, 22)` ordering.
    pub fn ket(&self) -> [C64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        match self {
            BellKind::PhiPlus => [c(h, 0.0), z, z, c(h, 0.0)],
            BellKind::PhiMinus => [c(h, 0.0), z, z, c(-h, 0.0)],
            BellKind::PsiPlus => [z, c(h, 0.0), c(h, 0.0), z],
            // (|HV⟩ − |VH⟩)/√2 with H = 1, V = 2, L label first: χ₁₂ − χ₂₁
            BellKind::PsiMinus => [z, c(-h, 0.0), c(h, 0.0), z],
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BellKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain("bell_kind", format!("unknown Bell state `{s}`")))
    }
}

pub fn bell(kind: BellKind) -> Rho4 {
    let k = kind.ket();
    DensityMatrix::validate(Mat4::outer(&k, &k)).expect("Bell projectors are valid states")
}

/// Independent rotations by `theta_l` in path L and `theta_r` in path R.
pub fn rotation4(theta_l: f64, theta_r: f64) -> Mat4 {
    let (sl, cl) = theta_l.sin_cos();
    let (sr, cr) = theta_r.sin_cos();
    Mat4::from_real([
        [cl * cr, -sl * cr, -cl * sr, sl * sr],
        [sl * cr, cl * cr, -sl * sr, -cl * sr],
        [cl * sr, -sl * sr, cl * cr, -sl * cr],
        [sl * sr, cl * sr, sl * cr, cl * cr],
    ])
}

/// Joint frequency density of the pair, `f(ε) ∝ |A(ω₀/2+ε)|² |A(ω₀/2−ε)|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSpectrum {
    pump_omega0: f64,
    daughter: Spectrum,
    /// `∫ |A(ω₀/2+ε)|² |A(ω₀/2−ε)|² dε` over the continuous parts.
    product_norm: f64,
}

impl JointSpectrum {
    /// Pump at twice the daughter carrier.
    pub fn new(daughter: Spectrum) -> Result<Self> {
        Self::with_pump(2.0 * daughter.center(), daughter)
    }

    pub fn with_pump(pump_omega0: f64, daughter: Spectrum) -> Result<Self> {
        if !(pump_omega0.is_finite() && pump_omega0 > 0.0) {
            return Err(Error::domain("pump_omega0", "must be positive"));
        }
        let mut joint = JointSpectrum { pump_omega0, daughter, product_norm: 1.0 };
        let (lo, hi) = joint.window()?;
        joint.product_norm = CompositeRule::new(lo, hi, DEFAULT_NODES).integrate(|e| joint.raw_product(e));
        if !(joint.product_norm > 0.0) && joint.daughter.atom_weight() < 1.0 {
            return Err(Error::domain("daughter", "joint density vanishes"));
        }
        Ok(joint)
    }

    pub fn pump_omega0(&self) -> f64 {
        self.pump_omega0
    }

    pub fn daughter(&self) -> &Spectrum {
        &self.daughter
    }

    fn raw_product(&self, eps: f64) -> f64 {
        let half = 0.5 * self.pump_omega0;
        self.daughter.density_at(half + eps) * self.daughter.density_at(half - eps)
    }

    fn window(&self) -> Result<(f64, f64)> {
        match &self.daughter {
            Spectrum::Gaussian(g) => {
                let half = GAUSSIAN_WINDOW * g.delta_omega();
                Ok((-half, half))
            }
            Spectrum::Tabulated(t) => {
                let (lo, hi) = t.support();
                let mid = 0.5 * self.pump_omega0;
                let reach = (hi - mid).min(mid - lo);
                if !(reach > 0.0) {
                    return Err(Error::domain("pump_omega0", "half the pump frequency lies outside the daughter spectrum"));
                }
                Ok((-reach, reach))
            }
        }
    }

    /// Normalized continuous density at `ε`; the monochromatic part (if any)
    /// is a point mass at `ε = 0` and is excluded.
    pub fn density_at(&self, eps: f64) -> f64 {
        if self.product_norm > 0.0 {
            (1.0 - self.daughter.atom_weight()) * self.raw_product(eps) / self.product_norm
        } else {
            0.0
        }
    }

    /// Weighted `ε` nodes summing to one.
    pub fn samples(&self, nodes: usize) -> SpectralSamples {
        let atom = self.daughter.atom_weight();
        let (lo, hi) = self.window().expect("window validated at construction");
        let mut points: Vec<(f64, f64)> = CompositeRule::new(lo, hi, nodes)
            .points
            .into_iter()
            .map(|(e, w)| (e, w * self.raw_product(e)))
            .collect();
        normalize_weights(&mut points, 1.0 - atom);
        if atom > 0.0 {
            points.push((0.0, atom));
        }
        SpectralSamples { center: 0.0, points }
    }

    /// `J(T) = ∫ f(ε) e^{iεT} dε`. Closed form for Gaussian daughters,
    /// `(1−p) exp(−T²δω²/32) + p`.
    pub fn coherence(&self, lag: f64) -> C64 {
        match &self.daughter {
            Spectrum::Gaussian(g) => {
                let x = lag * g.delta_omega();
                let p = g.mono_fraction();
                c((1.0 - p) * (-x * x / 32.0).exp() + p, 0.0)
            }
            Spectrum::Tabulated(_) => self.coherence_quadrature(lag, DEFAULT_NODES),
        }
    }

    pub fn coherence_quadrature(&self, lag: f64, nodes: usize) -> C64 {
        self.samples(nodes).coherence(lag)
    }
}

/// Crystal settings for both paths.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhotonConfig {
    pub opd_l: f64,
    pub opd_r: f64,
    pub theta_l: f64,
    pub theta_r: f64,
    pub joint: JointSpectrum,
}

impl TwoPhotonConfig {
    pub fn new(opd_l: f64, opd_r: f64, theta_l: f64, theta_r: f64, joint: JointSpectrum) -> Result<Self> {
        for (name, v) in [("opd_l", opd_l), ("opd_r", opd_r), ("theta_l", theta_l), ("theta_r", theta_r)] {
            if !v.is_finite() {
                return Err(Error::domain(name, "must be finite"));
            }
        }
        Ok(TwoPhotonConfig { opd_l, opd_r, theta_l, theta_r, joint })
    }

    /// Identical crystals, the one in path L turned by −90° relative to R.
    pub fn path_anticorrelated(opd: f64, theta_r: f64, joint: JointSpectrum) -> Result<Self> {
        Self::new(opd, opd, theta_r - FRAC_PI_2, theta_r, joint)
    }

    /// Identical crystals at a common orientation.
    pub fn collective(opd: f64, theta: f64, joint: JointSpectrum) -> Result<Self> {
        Self::new(opd, opd, theta, theta, joint)
    }

    fn delays(&self) -> (f64, f64) {
        (self.opd_l / SPEED_OF_LIGHT, self.opd_r / SPEED_OF_LIGHT)
    }

    /// Pump phase `ω₀(τ_L + τ_R)/2` picked up by the singlet coherence.
    pub fn singlet_phase(&self) -> f64 {
        let (tl, tr) = self.delays();
        0.5 * self.joint.pump_omega0 * (tl + tr)
    }

    /// Shifts both path differences by the same small amount so that the
    /// singlet phase becomes a multiple of 2π.
    pub fn with_tuned_singlet_phase(&self) -> Self {
        let phase = self.singlet_phase();
        let excess = phase - (phase / (2.0 * PI)).round() * 2.0 * PI;
        let shift = excess * SPEED_OF_LIGHT / self.joint.pump_omega0;
        TwoPhotonConfig { opd_l: self.opd_l - shift, opd_r: self.opd_r - shift, ..self.clone() }
    }

    /// `K(ε)` for the given energy offset.
    pub fn operator(&self, eps: f64) -> Mat4 {
        let (tl, tr) = self.delays();
        let half = 0.5 * self.joint.pump_omega0;
        // carrier and offset phases are formed separately, then combined
        let ul = Mat2::diag([c(1.0, 0.0), C64::from_polar(1.0, half * tl + eps * tl)]);
        let ur = Mat2::diag([c(1.0, 0.0), C64::from_polar(1.0, half * tr - eps * tr)]);
        tensor(&ul, &ur).conjugate_by(&rotation4(self.theta_l, self.theta_r))
    }
}

pub fn evolve_two(rho0: &Rho4, cfg: &TwoPhotonConfig) -> Result<Rho4> {
    evolve_two_with(rho0, cfg, DEFAULT_NODES)
}

/// Quadrature over `ε` with a node-doubling convergence check.
pub fn evolve_two_with(rho0: &Rho4, cfg: &TwoPhotonConfig, nodes: usize) -> Result<Rho4> {
    let coarse = integrate(rho0, cfg, nodes);
    let fine = integrate(rho0, cfg, 2 * nodes);
    let change = coarse.max_abs_diff(&fine);
    if change > CONVERGENCE_TOL {
        return Err(Error::NonConvergence { change });
    }
    DensityMatrix::validate_symmetrized(coarse)
}

fn integrate(rho0: &Rho4, cfg: &TwoPhotonConfig, nodes: usize) -> Mat4 {
    let rho = *rho0.matrix();
    cfg.joint
        .samples(nodes)
        .points
        .iter()
        .fold(Mat4::zeros(), |acc, &(eps, w)| acc + rho.conjugate_by(&cfg.operator(eps)).scale_re(w))
}

/// Which crystal eigenstate is delayed, per label, for an axis-aligned angle.
fn delayed_labels(theta: f64, field: &'static str) -> Result<[f64; 2]> {
    let quarter_turns = theta / FRAC_PI_2;
    let k = quarter_turns.round();
    if (quarter_turns - k).abs() > ALIGN_TOL {
        return Err(Error::domain(field, format!("closed form needs a multiple of 90°, got {theta} rad")));
    }
    Ok(if (k as i64).rem_euclid(2) == 0 { [0.0, 1.0] } else { [1.0, 0.0] })
}

/// Closed-form output for axis-aligned crystals.
///
/// Entry `(ij, kl)` becomes `ρ₀ · e^{i(ω₀/2)(Δ_L τ_L + Δ_R τ_R)} · J(Δ_L τ_L − Δ_R τ_R)`
/// where `Δ_L = a_L(i) − a_L(k)`, `Δ_R = a_R(j) − a_R(l)` and `a(·) ∈ {0, 1}`
/// marks the delayed eigenstate of each crystal.
pub fn evolve_two_closed(rho0: &Rho4, cfg: &TwoPhotonConfig) -> Result<Rho4> {
    let a_l = delayed_labels(cfg.theta_l, "theta_l")?;
    let a_r = delayed_labels(cfg.theta_r, "theta_r")?;
    let (tl, tr) = cfg.delays();
    let half = 0.5 * cfg.joint.pump_omega0;
    let out = Mat4::from_fn(|row, col| {
        let (i, j) = (row % 2, row / 2);
        let (k, l) = (col % 2, col / 2);
        let d_l = (a_l[i] - a_l[k]) * tl;
        let d_r = (a_r[j] - a_r[l]) * tr;
        let lag = d_l - d_r;
        let j_factor = if lag == 0.0 { c(1.0, 0.0) } else { cfg.joint.coherence(lag) };
        rho0.get(row, col) * C64::from_polar(1.0, half * (d_l + d_r)) * j_factor
    });
    DensityMatrix::validate_symmetrized(out)
}

pub fn evolve_bell_closed(kind: BellKind, cfg: &TwoPhotonConfig) -> Result<Rho4> {
    evolve_two_closed(&bell(kind), cfg)
}
