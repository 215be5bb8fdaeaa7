//! Frequency spectra and their coherence functions.
//!
//! The coherence function is `F(τ) = ∫ f(ω) e^{iωτ} dω`. With this sign, an
//! element `diag(1, e^{iωτ})` sends `ρ₂₁ → ρ₂₁ F(τ)` and `ρ₁₂ → ρ₁₂ F*(τ)`.
//! Frequencies are angular (rad/s), lengths in meters, times in seconds.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::qmat::C64;
use crate::quadrature::{CompositeRule, DEFAULT_NODES, PANEL_ORDER};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Half-width of the Gaussian integration window, in units of `δω`.
pub const GAUSSIAN_WINDOW: f64 = 8.0;

/// Gaussian spectrum `|A(ω)|² ∝ exp[−4(ω−ω₀)²/δω²]`, optionally mixed with a
/// monochromatic line at `ω₀` carrying weight `mono_fraction`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian {
    omega0: f64,
    delta_omega: f64,
    mono_fraction: f64,
}

impl Gaussian {
    pub fn new(omega0: f64, delta_omega: f64, mono_fraction: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::domain("omega0", format!("must be positive, got {omega0}")));
        }
        if !(delta_omega.is_finite() && delta_omega > 0.0) {
            return Err(Error::domain("delta_omega", format!("must be positive, got {delta_omega}")));
        }
        check_fraction(mono_fraction)?;
        Ok(Gaussian { omega0, delta_omega, mono_fraction })
    }

    /// Converts a central wavelength and bandwidth (meters) to angular units.
    pub fn from_bandwidth(lambda0: f64, delta_lambda: f64, mono_fraction: f64) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(Error::domain("lambda0", format!("must be positive, got {lambda0}")));
        }
        if !(delta_lambda.is_finite() && delta_lambda > 0.0 && delta_lambda < lambda0) {
            return Err(Error::domain(
                "delta_lambda",
                format!("must lie in (0, lambda0), got {delta_lambda}"),
            ));
        }
        check_fraction(mono_fraction)?;
        let omega0 = 2.0 * PI * SPEED_OF_LIGHT / lambda0;
        let delta_omega = 2.0 * PI * SPEED_OF_LIGHT * delta_lambda / (lambda0 * lambda0);
        Self::new(omega0, delta_omega, mono_fraction)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn mono_fraction(&self) -> f64 {
        self.mono_fraction
    }

    /// Normalization of `exp[−4x²/δω²]`: `2 / (δω √π)`.
    pub fn peak_density(&self) -> f64 {
        2.0 / (self.delta_omega * PI.sqrt())
    }

    pub fn density_at(&self, omega: f64) -> f64 {
        let x = (omega - self.omega0) / self.delta_omega;
        (1.0 - self.mono_fraction) * self.peak_density() * (-4.0 * x * x).exp()
    }

    /// Closed form `e^{iω₀τ} [(1−p) exp(−δω²τ²/16) + p]`.
    pub fn coherence(&self, tau: f64) -> C64 {
        let dw_tau = self.delta_omega * tau;
        let envelope = (1.0 - self.mono_fraction) * (-dw_tau * dw_tau / 16.0).exp() + self.mono_fraction;
        C64::from_polar(envelope, self.omega0 * tau)
    }
}

fn check_fraction(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("mono_fraction", format!("must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Piecewise-linear density through tabulated `(ω, f)` nodes, zero outside.
/// Normalized to unit integral on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    omega: Vec<f64>,
    density: Vec<f64>,
    centroid: f64,
}

impl Tabulated {
    pub fn new(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Table("needs at least two nodes".into()));
        }
        for (i, &(w, f)) in nodes.iter().enumerate() {
            if !w.is_finite() || !f.is_finite() {
                return Err(Error::Table(format!("node {i} is not finite")));
            }
            if f < 0.0 {
                return Err(Error::Table(format!("node {i} has negative density {f}")));
            }
        }
        if nodes.windows(2).any(|p| p[1].0 <= p[0].0) {
            return Err(Error::Table("frequencies must be strictly increasing".into()));
        }
        let (omega, mut density): (Vec<f64>, Vec<f64>) = nodes.into_iter().unzip();
        let area = trapezoid(&omega, &density);
        if !(area > 0.0) {
            return Err(Error::Table("density integrates to zero".into()));
        }
        density.iter_mut().for_each(|f| *f /= area);
        let mut table = Tabulated { omega, density, centroid: 0.0 };
        // GL panels are exact for the linear × linear integrand on each segment.
        table.centroid = table
            .segment_points(1)
            .iter()
            .map(|&(w, wt)| w * wt * table.density_at(w))
            .sum();
        Ok(table)
    }

    /// Parses the two-column `omega_rad_per_s density` text format.
    /// Lines starting with `#` and blank lines are ignored; columns may be
    /// separated by whitespace or a comma.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> =
                line.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::Table(format!("line {}: expected 2 columns, found {}", lineno + 1, cols.len())));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Table(format!("line {}: `{s}`: {e}", lineno + 1)))
            };
            nodes.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::new(nodes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().copied().zip(self.density.iter().copied())
    }

    pub fn support(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().unwrap())
    }

    pub fn centroid(&self) -> f64 {
        self.centroid
    }

    /// Exact integral of the interpolated density.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.omega, &self.density)
    }

    pub fn density_at(&self, w: f64) -> f64 {
        let (lo, hi) = self.support();
        if w < lo || w > hi {
            return 0.0;
        }
        let k = self.omega.partition_point(|&x| x <= w).clamp(1, self.omega.len() - 1);
        let (x0, x1) = (self.omega[k - 1], self.omega[k]);
        let (f0, f1) = (self.density[k - 1], self.density[k]);
        f0 + (f1 - f0) * (w - x0) / (x1 - x0)
    }

    /// Quadrature points `(ω, weight)` with panels never straddling a node.
    /// `panels_total` sets the target panel count over the whole support.
    fn segment_points(&self, panels_total: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.support();
        let h = (hi - lo) / panels_total.max(1) as f64;
        let mut points = Vec::new();
        for seg in self.omega.windows(2) {
            let panels = ((seg[1] - seg[0]) / h).ceil().max(1.0) as usize;
            points.extend(CompositeRule::with_panels(seg[0], seg[1], panels).points);
        }
        points
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

/// Frequency density `f(ω) = |A(ω)|²`, normalized to unit integral.
#[derive(Clone, Debug, PartialEq)]
pub enum Spectrum {
    Gaussian(Gaussian),
    Tabulated(Tabulated),
}

impl From<Gaussian> for Spectrum {
    fn from(g: Gaussian) -> Self {
        Spectrum::Gaussian(g)
    }
}

impl From<Tabulated> for Spectrum {
    fn from(t: Tabulated) -> Self {
        Spectrum::Tabulated(t)
    }
}

impl Spectrum {
    pub fn gaussian_from_bandwidth(lambda0: f64, delta_lambda: f64, mono_fraction: f64) -> Result<Self> {
        Gaussian::from_bandwidth(lambda0, delta_lambda, mono_fraction).map(Spectrum::Gaussian)
    }

    /// Carrier frequency: `ω₀` for a Gaussian, the centroid for a table.
    pub fn center(&self) -> f64 {
        match self {
            Spectrum::Gaussian(g) => g.omega0,
            Spectrum::Tabulated(t) => t.centroid,
        }
    }

    /// Continuous part of the density. The monochromatic line of a Gaussian
    /// spectrum is a point mass and does not appear here.
    pub fn density_at(&self, omega: f64) -> f64 {
        match self {
            Spectrum::Gaussian(g) => g.density_at(omega),
            Spectrum::Tabulated(t) => t.density_at(omega),
        }
    }

    /// Weight of the point mass at the carrier, if any.
    pub fn atom_weight(&self) -> f64 {
        match self {
            Spectrum::Gaussian(g) => g.mono_fraction,
            Spectrum::Tabulated(_) => 0.0,
        }
    }

    /// `F(τ)`: closed form for Gaussians, quadrature for tables.
    pub fn coherence(&self, tau: f64) -> C64 {
        match self {
            Spectrum::Gaussian(g) => g.coherence(tau),
            Spectrum::Tabulated(_) => self.coherence_quadrature(tau, DEFAULT_NODES),
        }
    }

    pub fn coherence_quadrature(&self, tau: f64, nodes: usize) -> C64 {
        self.samples(nodes).coherence(tau)
    }

    /// Discretizes the spectrum into weighted frequency offsets from the
    /// carrier. Weights sum to one.
    pub fn samples(&self, nodes: usize) -> SpectralSamples {
        let center = self.center();
        let mut points: Vec<(f64, f64)> = match self {
            Spectrum::Gaussian(g) => {
                let half = GAUSSIAN_WINDOW * g.delta_omega;
                CompositeRule::new(-half, half, nodes)
                    .points
                    .into_iter()
                    .map(|(x, w)| (x, w * g.density_at(center + x)))
                    .collect()
            }
            Spectrum::Tabulated(t) => t
                .segment_points(nodes.div_ceil(PANEL_ORDER))
                .into_iter()
                .map(|(x, w)| (x - center, w * t.density_at(x)))
                .collect(),
        };
        let atom = self.atom_weight();
        normalize_weights(&mut points, 1.0 - atom);
        if atom > 0.0 {
            points.push((0.0, atom));
        }
        SpectralSamples { center, points }
    }

    /// Tabulates the continuous density on `n` uniform nodes over `[lo, hi]`.
    pub fn tabulate(&self, lo: f64, hi: f64, n: usize) -> Result<Tabulated> {
        if n < 2 || !(hi > lo) {
            return Err(Error::Table("tabulation needs n ≥ 2 and hi > lo".into()));
        }
        let step = (hi - lo) / (n - 1) as f64;
        Tabulated::new((0..n).map(|i| lo + step * i as f64).map(|w| (w, self.density_at(w))).collect())
    }
}

pub(crate) fn normalize_weights(points: &mut [(f64, f64)], total: f64) {
    let sum: f64 = points.iter().map(|p| p.1).sum();
    if sum > 0.0 {
        let k = total / sum;
        points.iter_mut().for_each(|p| p.1 *= k);
    }
}

/// A spectrum discretized as weighted offsets from a carrier frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSamples {
    pub center: f64,
    /// `(ω − center, weight)`
    pub points: Vec<(f64, f64)>,
}

impl SpectralSamples {
    /// `Σ w e^{iωτ}` with the carrier phase applied once outside the sum.
    pub fn coherence(&self, tau: f64) -> C64 {
        let slow: C64 = self.points.iter().map(|&(x, w)| C64::from_polar(w, x * tau)).sum();
        slow * C64::from_polar(1.0, self.center * tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn paper_laser(p: f64) -> Gaussian {
        Gaussian::from_bandwidth(670e-9, 10e-9, p).unwrap()
    }

    #[test]
    fn bandwidth_conversion() {
        let g = paper_laser(0.0);
        assert_abs_diff_eq!(g.omega0(), 2.8114e15, epsilon = 1e11);
        assert_abs_diff_eq!(g.delta_omega(), 4.196e13, epsilon = 1e10);
    }

    #[test]
    fn rejects_bad_bandwidths() {
        let err = Gaussian::from_bandwidth(670e-9, -1e-9, 0.0).unwrap_err();
        assert!(matches!(err, Error::Domain { field: "delta_lambda", .. }));
        assert!(Gaussian::from_bandwidth(670e-9, 700e-9, 0.0).is_err());
        assert!(Gaussian::from_bandwidth(0.0, 1e-9, 0.0).is_err());
        assert!(matches!(
            Gaussian::from_bandwidth(670e-9, 10e-9, 1.2),
            Err(Error::Domain { field: "mono_fraction", .. })
        ));
    }

    #[test]
    fn monochromatic_limit_never_decays() {
        let s = Spectrum::from(paper_laser(1.0));
        for tau in [0.0, 1e-13, 1e-12, 5e-11] {
            assert_abs_diff_eq!(s.coherence(tau).norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn peak_and_tail_density() {
        let g = paper_laser(0.3);
        let peak = g.density_at(g.omega0());
        assert_abs_diff_eq!(peak, 0.7 * 2.0 / (g.delta_omega() * PI.sqrt()), epsilon = 1e-30);
        let tail = g.density_at(g.omega0() + 10.0 * g.delta_omega());
        assert!(tail < 1e-17 * peak);
    }

    #[test]
    fn coherence_at_zero_is_one() {
        assert_abs_diff_eq!(Spectrum::from(paper_laser(0.2)).coherence(0.0).re, 1.0, epsilon = 1e-15);
        let t = Tabulated::new(vec![(1.0e15, 1.0), (1.2e15, 3.0), (1.3e15, 0.0)]).unwrap();
        let f0 = Spectrum::from(t).coherence(0.0);
        assert_abs_diff_eq!(f0.re, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(f0.im, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn uniform_table_density() {
        let w = 2.0e13;
        let t = Tabulated::new(vec![(1.0e15, 5.0), (1.0e15 + w, 5.0)]).unwrap();
        assert_abs_diff_eq!(t.density_at(1.0e15 + 0.3 * w) * w, 1.0, epsilon = 1e-12);
        assert_eq!(t.density_at(0.9e15), 0.0);
        assert_abs_diff_eq!(t.centroid(), 1.0e15 + 0.5 * w, epsilon = 1.0);
    }

    #[test]
    fn table_parsing_errors_carry_line_numbers() {
        let err = Tabulated::parse("# header\n1.0 2.0\n3.0\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(Tabulated::parse("1 1\n0.5 1\n").is_err());
        assert!(Tabulated::parse("1 -1\n2 1\n").is_err());
        let ok = Tabulated::parse("# omega density\n1e15, 0\n\n1.1e15 2\n1.2e15 0\n").unwrap();
        assert_abs_diff_eq!(ok.integral(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn samples_weights_sum_to_one() {
        let s = Spectrum::from(paper_laser(0.15));
        let total: f64 = s.samples(DEFAULT_NODES).points.iter().map(|p| p.1).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
    }
}
