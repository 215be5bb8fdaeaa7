//! Single-photon channel engine.
//!
//! A [`PassSequence`] lists optical elements in the order the photon meets
//! them; one pass applies `K = E_n ⋯ E_1` and `N` passes apply `K^N`. The
//! output state is `∫ f(ω) K(ω) ρ₀ K†(ω) dω`, renormalized, with the trace
//! before renormalization reported as the survival probability.
//!
//! When every element maps the eigenbasis of the crystals onto itself (up to
//! a permutation), the frequency integral reduces to coherence-function
//! lookups and is evaluated exactly. Otherwise it is done by quadrature.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::measure::{visibility, MeasurementBasis};
use crate::qmat::{c, rot2, DensityMatrix, Mat2, Rho2, C64};
use crate::quadrature::DEFAULT_NODES;
use crate::spectra::{Spectrum, SPEED_OF_LIGHT};

/// Allowed change of the quadrature result when the node count doubles.
pub const CONVERGENCE_TOL: f64 = 1e-7;

const ALIGN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExchangeKind {
    /// `R|χ₂⟩ = +|χ₁⟩`
    Reflection,
    /// `R|χ₂⟩ = −|χ₁⟩`
    Rotation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arm {
    H,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Element {
    /// Phase retarder with optical path difference `opd` (m) between its
    /// axes; the slow axis sits at `axis_angle + π/2`. A negative `opd`
    /// swaps the roles of the axes.
    Birefringent { opd: f64, axis_angle: f64 },
    /// Ideal achromatic exchange of `|H⟩` and `|V⟩`.
    Exchange(ExchangeKind),
    /// Optical rotation by `angle` radians.
    Rotator { angle: f64 },
    /// Neutral-density filter in one arm; `transmission` is the intensity
    /// transmission per traversal.
    Attenuator { transmission: f64, arm: Arm },
}

impl Element {
    pub fn birefringent(opd: f64, axis_angle: f64) -> Self {
        Element::Birefringent { opd, axis_angle }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Element::Birefringent { opd, axis_angle } => {
                if !opd.is_finite() {
                    return Err(Error::domain("opd", "must be finite"));
                }
                if !axis_angle.is_finite() {
                    return Err(Error::domain("axis_angle", "must be finite"));
                }
            }
            Element::Rotator { angle } if !angle.is_finite() => {
                return Err(Error::domain("angle", "must be finite"));
            }
            Element::Attenuator { transmission, .. } if !(transmission > 0.0 && transmission <= 1.0) => {
                return Err(Error::domain("transmission", format!("must lie in (0, 1], got {transmission}")));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_lossy(&self) -> bool {
        matches!(self, Element::Attenuator { transmission, .. } if *transmission < 1.0)
    }

    /// The 2×2 operator at angular frequency `omega`.
    pub fn operator(&self, omega: f64) -> Mat2 {
        match *self {
            Element::Birefringent { opd, axis_angle } => {
                let d = Mat2::diag([c(1.0, 0.0), C64::from_polar(1.0, omega * opd / SPEED_OF_LIGHT)]);
                d.conjugate_by(&rot2(axis_angle))
            }
            Element::Exchange(kind) => exchange_operator(kind),
            Element::Rotator { angle } => rot2(angle),
            Element::Attenuator { transmission, arm } => {
                let t = c(transmission.sqrt(), 0.0);
                match arm {
                    Arm::H => Mat2::diag([t, c(1.0, 0.0)]),
                    Arm::V => Mat2::diag([c(1.0, 0.0), t]),
                }
            }
        }
    }
}

pub fn exchange_operator(kind: ExchangeKind) -> Mat2 {
    let sign = match kind {
        ExchangeKind::Reflection => 1.0,
        ExchangeKind::Rotation => -1.0,
    };
    Mat2::from_real([[0.0, sign], [1.0, 0.0]])
}

pub fn element_operator(e: &Element, omega: f64) -> Mat2 {
    e.operator(omega)
}

/// Phase-error sum for crystals without exchange, difference with it.
pub fn effective_opd(first_opd: f64, second_opd: f64, qc: bool) -> f64 {
    if qc {
        first_opd - second_opd
    } else {
        first_opd + second_opd
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PassSequence {
    elements: Vec<Element>,
    passes: usize,
}

impl PassSequence {
    pub fn new(elements: Vec<Element>, passes: usize) -> Result<Self> {
        if passes > 0 && elements.is_empty() {
            return Err(Error::domain("elements", "a pass needs at least one element"));
        }
        for e in &elements {
            e.validate()?;
        }
        Ok(PassSequence { elements, passes })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    pub fn with_passes(&self, passes: usize) -> Self {
        PassSequence { elements: self.elements.clone(), passes }
    }

    /// Single-pass operator `E_n ⋯ E_1` at `omega`.
    pub fn pass_operator(&self, omega: f64) -> Mat2 {
        self.elements.iter().fold(Mat2::identity(), |k, e| e.operator(omega) * k)
    }

    /// Lossless part of `K(ω)^N`: the same product with attenuators left out.
    pub fn retardance(&self, omega: f64) -> Mat2 {
        let k = self
            .elements
            .iter()
            .filter(|e| !e.is_lossy())
            .fold(Mat2::identity(), |k, e| e.operator(omega) * k);
        (0..self.passes).fold(Mat2::identity(), |acc, _| k * acc)
    }

    /// Full operator `K(ω)^N`.
    pub fn operator(&self, omega: f64) -> Mat2 {
        let k = self.pass_operator(omega);
        (0..self.passes).fold(Mat2::identity(), |acc, _| k * acc)
    }

    fn has_attenuator(&self) -> bool {
        self.elements.iter().any(|e| matches!(e, Element::Attenuator { .. }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionResult {
    pub rho: Rho2,
    /// Detection probability; 1 without attenuators.
    pub survival: f64,
    pub method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub nodes: usize,
    pub force_quadrature: bool,
    pub check_convergence: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { nodes: DEFAULT_NODES, force_quadrature: false, check_convergence: true }
    }
}

impl EvolveOptions {
    pub fn quadrature() -> Self {
        EvolveOptions { force_quadrature: true, ..Self::default() }
    }

    pub fn with_nodes(nodes: usize) -> Self {
        EvolveOptions { nodes, ..Self::default() }
    }
}

pub fn evolve(rho0: &Rho2, seq: &PassSequence, spectrum: &Spectrum) -> Result<EvolutionResult> {
    evolve_with(rho0, seq, spectrum, EvolveOptions::default())
}

pub fn evolve_with(rho0: &Rho2, seq: &PassSequence, spectrum: &Spectrum, opts: EvolveOptions) -> Result<EvolutionResult> {
    if !opts.force_quadrature {
        if let Some(monomial) = MonomialChannel::build(seq) {
            let unnormalized = monomial.apply(rho0, spectrum);
            return finish(unnormalized, seq, Method::ClosedForm);
        }
    }
    let coarse = integrate(rho0, seq, spectrum, opts.nodes);
    if opts.check_convergence {
        let fine = integrate(rho0, seq, spectrum, 2 * opts.nodes);
        let change = coarse.max_abs_diff(&fine);
        if change > CONVERGENCE_TOL {
            return Err(Error::NonConvergence { change });
        }
    }
    finish(coarse, seq, Method::Quadrature)
}

fn finish(unnormalized: Mat2, seq: &PassSequence, method: Method) -> Result<EvolutionResult> {
    let mut survival = unnormalized.trace().re;
    if !seq.has_attenuator() {
        // unitary channel: the trace is one up to rounding
        survival = 1.0;
    }
    if !(survival > 0.0) {
        return Err(Error::domain("survival", "no photons survive"));
    }
    let rho = DensityMatrix::validate_symmetrized(unnormalized.scale_re(1.0 / unnormalized.trace().re))?;
    Ok(EvolutionResult { rho, survival, method })
}

fn integrate(rho0: &Rho2, seq: &PassSequence, spectrum: &Spectrum, nodes: usize) -> Mat2 {
    let samples = spectrum.samples(nodes);
    let rho = *rho0.matrix();
    samples.points.iter().fold(Mat2::zeros(), |acc, &(offset, w)| {
        let k = seq.operator(samples.center + offset);
        acc + rho.conjugate_by(&k).scale_re(w)
    })
}

/// A 2×2 operator with one nonzero entry per column, each of the form
/// `coef · e^{iω lag}`: column `j` is sent to row `perm[j]`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Monomial {
    perm: [usize; 2],
    coef: [C64; 2],
    lag: [f64; 2],
}

impl Monomial {
    fn identity() -> Self {
        Monomial { perm: [0, 1], coef: [c(1.0, 0.0); 2], lag: [0.0; 2] }
    }

    /// `next · self`
    fn then(&self, next: &Monomial) -> Monomial {
        let mut out = Monomial::identity();
        for j in 0..2 {
            let k = self.perm[j];
            out.perm[j] = next.perm[k];
            out.coef[j] = next.coef[k] * self.coef[j];
            out.lag[j] = next.lag[k] + self.lag[j];
        }
        out
    }

    fn from_constant(m: &Mat2) -> Option<Monomial> {
        let small = |z: C64| z.norm() < ALIGN_TOL;
        if small(m.get(0, 1)) && small(m.get(1, 0)) {
            Some(Monomial { perm: [0, 1], coef: [m.get(0, 0), m.get(1, 1)], lag: [0.0; 2] })
        } else if small(m.get(0, 0)) && small(m.get(1, 1)) {
            Some(Monomial { perm: [1, 0], coef: [m.get(1, 0), m.get(0, 1)], lag: [0.0; 2] })
        } else {
            None
        }
    }
}

/// Exact evaluation for sequences whose crystals share one eigenbasis.
struct MonomialChannel {
    basis_angle: f64,
    total: Monomial,
}

impl MonomialChannel {
    fn build(seq: &PassSequence) -> Option<Self> {
        let basis_angle = seq
            .elements
            .iter()
            .find_map(|e| match e {
                Element::Birefringent { axis_angle, .. } => Some(*axis_angle),
                _ => None,
            })
            .unwrap_or(0.0);
        let to_basis = rot2(-basis_angle);
        let from_basis = rot2(basis_angle);

        let mut pass = Monomial::identity();
        for e in &seq.elements {
            let m = match *e {
                Element::Birefringent { opd, axis_angle } => {
                    let quarter_turns = (axis_angle - basis_angle) / FRAC_PI_2;
                    let k = quarter_turns.round();
                    if (quarter_turns - k).abs() > ALIGN_TOL {
                        return None;
                    }
                    let tau = opd / SPEED_OF_LIGHT;
                    let lag = if (k as i64).rem_euclid(2) == 0 { [0.0, tau] } else { [tau, 0.0] };
                    Monomial { perm: [0, 1], coef: [c(1.0, 0.0); 2], lag }
                }
                _ => Monomial::from_constant(&(to_basis * e.operator(0.0) * from_basis))?,
            };
            pass = pass.then(&m);
        }
        let total = (0..seq.passes).fold(Monomial::identity(), |acc, _| acc.then(&pass));
        Some(MonomialChannel { basis_angle, total })
    }

    /// `∫ f K ρ K†` with `K_{p(j), j} = c_j e^{iω t_j}`, giving
    /// `out[p(j)][p(k)] = c_j c_k* ρ[j][k] F(t_j − t_k)`.
    fn apply(&self, rho0: &Rho2, spectrum: &Spectrum) -> Mat2 {
        let rho = rho0.matrix().conjugate_by(&rot2(-self.basis_angle));
        let m = &self.total;
        let mut out = Mat2::zeros();
        for j in 0..2 {
            for k in 0..2 {
                let dt = m.lag[j] - m.lag[k];
                let f = if dt == 0.0 { c(1.0, 0.0) } else { spectrum.coherence(dt) };
                out.0[m.perm[j]][m.perm[k]] = m.coef[j] * m.coef[k].conj() * rho.get(j, k) * f;
            }
        }
        out.conjugate_by(&rot2(self.basis_angle))
    }
}

/// One element slot in a pass, optionally present only under control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slot {
    pub element: Element,
    pub control_only: bool,
}

/// The per-pass element list of an experiment, with the exchange elements
/// that are inserted when bang-bang control is switched on.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PassTemplate {
    pub slots: Vec<Slot>,
}

impl PassTemplate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn always(mut self, element: Element) -> Self {
        self.slots.push(Slot { element, control_only: false });
        self
    }

    pub fn control(mut self, element: Element) -> Self {
        self.slots.push(Slot { element, control_only: true });
        self
    }

    /// Base elements, then one exchange of `kind` at the end of each pass.
    pub fn with_exchange(base: &[Element], kind: ExchangeKind) -> Self {
        base.iter().fold(Self::new(), |t, e| t.always(*e)).control(Element::Exchange(kind))
    }

    pub fn sequence(&self, qc: bool, passes: usize) -> Result<PassSequence> {
        let elements = self.slots.iter().filter(|s| qc || !s.control_only).map(|s| s.element).collect();
        PassSequence::new(elements, passes)
    }
}

/// Analyzer `|λ⟩` carried through the sequence's retardance at `omega0`.
///
/// Measuring in this basis compensates the deterministic phase the photon
/// picks up at the center frequency, so only the frequency spread reduces
/// the visibility. For crystals in the H/V basis and a 45° analyzer the
/// result is `2|ρ₁₂| = |F(Nτ₀)|`.
pub fn tracking_basis(seq: &PassSequence, omega0: f64, basis: &MeasurementBasis) -> MeasurementBasis {
    let ket = seq.retardance(omega0).apply(&basis.ket());
    let norm = (ket[0].norm_sqr() + ket[1].norm_sqr()).sqrt();
    MeasurementBasis::new([ket[0] / norm, ket[1] / norm]).unwrap_or(*basis)
}

/// Visibility after `N = 1..=n_max` passes, analyzed in the 45° basis
/// carried along by the center-frequency retardance (see [`tracking_basis`]).
pub fn visibility_curve(
    rho0: &Rho2,
    template: &PassTemplate,
    spectrum: &Spectrum,
    n_max: usize,
    qc: bool,
    opts: EvolveOptions,
) -> Result<Vec<(usize, f64)>> {
    if n_max < 1 {
        return Err(Error::domain("n_max", "must be at least 1"));
    }
    let basis = MeasurementBasis::diagonal();
    (1..=n_max)
        .map(|n| {
            let seq = template.sequence(qc, n)?;
            let out = evolve_with(rho0, &seq, spectrum, opts)?;
            Ok((n, visibility(&out.rho, &tracking_basis(&seq, spectrum.center(), &basis))))
        })
        .collect()
}
