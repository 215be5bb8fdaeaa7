//! Executes a [`Scenario`] with the one- or two-photon engine.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::path::Path;

use decohere::measure::{self, MeasurementBasis};
use decohere::onephoton::{self, Arm, Element, EvolveOptions, ExchangeKind, Method, PassTemplate};
use decohere::qmat::{c, CMat, DensityMatrix, Rho2, Rho4, C64};
use decohere::spectra::{Gaussian, Spectrum, Tabulated, SPEED_OF_LIGHT};
use decohere::twophoton::{self, BellKind, JointSpectrum, TwoPhotonConfig};

use crate::output::{dump_matrix, Cell, CurveOutput};
use crate::scenario::{
    ArmSpec, ElementSpec, ExchangeSpec, MethodSpec, OutputKind, Scenario, ScenarioKind, SpectrumSpec,
};
use crate::RunError;

const UM: f64 = 1e-6;
const NM: f64 = 1e-9;

/// Command-line values that take precedence over the scenario file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub quadrature_nodes: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub name: String,
    pub curve: CurveOutput,
    /// `(label, dump)` per evaluated point, when requested.
    pub matrices: Vec<(String, String)>,
}

impl RunOutput {
    pub fn matrices_text(&self) -> String {
        self.matrices.iter().map(|(label, dump)| format!("# {label}\n{dump}")).collect::<Vec<_>>().join("\n")
    }

    /// Writes `<name>.csv` and, if present, `<name>_matrices.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), RunError> {
        let io = |e: std::io::Error| RunError::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join(format!("{}.csv", self.name)), self.curve.to_csv()).map_err(io)?;
        if !self.matrices.is_empty() {
            std::fs::write(dir.join(format!("{}_matrices.txt", self.name)), self.matrices_text()).map_err(io)?;
        }
        Ok(())
    }
}

pub fn run_scenario(s: &Scenario, overrides: Overrides) -> Result<RunOutput, RunError> {
    let seed = overrides.seed.unwrap_or(s.run.seed);
    let nodes = overrides.quadrature_nodes.unwrap_or(s.run.quadrature_nodes);
    if nodes < 2 {
        return Err(RunError::validation("run.quadrature_nodes", format!("must be at least 2, got {nodes}")));
    }
    match s.kind {
        ScenarioKind::OnePhotonCavity | ScenarioKind::OnePhotonDissipative => run_one(s, seed, nodes),
        ScenarioKind::TwoPhoton => run_two(s, seed, nodes),
    }
}

fn build_spectrum(spec: &SpectrumSpec, base: &Path) -> Result<Spectrum, RunError> {
    match (&spec.tabulated_file, spec.lambda0_nm, spec.delta_lambda_nm) {
        (Some(file), None, None) => {
            if spec.mono_fraction != 0.0 {
                return Err(RunError::validation("spectrum.mono_fraction", "not supported with tabulated_file"));
            }
            let t = Tabulated::load(base.join(file)).map_err(|e| RunError::engine("spectrum.tabulated_file", e))?;
            Ok(t.into())
        }
        (None, Some(l0), Some(dl)) => {
            let g = Gaussian::from_bandwidth(l0 * NM, dl * NM, spec.mono_fraction).map_err(|e| {
                let key = match &e {
                    decohere::Error::Domain { field: "lambda0", .. } => "spectrum.lambda0_nm",
                    decohere::Error::Domain { field: "mono_fraction", .. } => "spectrum.mono_fraction",
                    _ => "spectrum.delta_lambda_nm",
                };
                RunError::engine(key, e)
            })?;
            Ok(g.into())
        }
        _ => Err(RunError::validation(
            "spectrum",
            "give either lambda0_nm and delta_lambda_nm, or tabulated_file alone",
        )),
    }
}

fn element(spec: &ElementSpec) -> (Element, bool) {
    match *spec {
        ElementSpec::Birefringent { opd_um, axis_angle_deg, control_only } => {
            (Element::birefringent(opd_um * UM, axis_angle_deg.to_radians()), control_only)
        }
        ElementSpec::Exchange { exchange, control_only } => {
            let kind = match exchange {
                ExchangeSpec::Reflection => ExchangeKind::Reflection,
                ExchangeSpec::Rotation => ExchangeKind::Rotation,
            };
            (Element::Exchange(kind), control_only)
        }
        ElementSpec::Rotator { angle_deg, control_only } => (Element::Rotator { angle: angle_deg.to_radians() }, control_only),
        ElementSpec::Attenuator { transmission_fraction, arm, control_only } => {
            let arm = match arm {
                ArmSpec::H => Arm::H,
                ArmSpec::V => Arm::V,
            };
            (Element::Attenuator { transmission: transmission_fraction, arm }, control_only)
        }
    }
}

fn template(s: &Scenario) -> Result<PassTemplate, RunError> {
    let mut t = PassTemplate::new();
    for (i, spec) in s.elements.iter().enumerate() {
        let (e, control_only) = element(spec);
        e.validate().map_err(|err| RunError::engine(&format!("elements[{i}]"), err))?;
        t = if control_only { t.control(e) } else { t.always(e) };
    }
    Ok(t)
}

struct QubitInput {
    label: String,
    rho: Rho2,
    /// Analyzer used for the visibility column.
    basis: MeasurementBasis,
}

fn qubit_inputs(s: &Scenario) -> Result<Vec<QubitInput>, RunError> {
    let h = FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for name in &s.input.states {
        let (ket, basis) = match name.as_str() {
            "H" => ([c(1.0, 0.0), c(0.0, 0.0)], MeasurementBasis::horizontal()),
            "V" => ([c(0.0, 0.0), c(1.0, 0.0)], MeasurementBasis::horizontal()),
            "45" => ([c(h, 0.0), c(h, 0.0)], MeasurementBasis::diagonal()),
            "-45" => ([c(h, 0.0), c(-h, 0.0)], MeasurementBasis::diagonal()),
            "R" => ([c(h, 0.0), c(0.0, h)], MeasurementBasis::right_circular()),
            "L" => ([c(h, 0.0), c(0.0, -h)], MeasurementBasis::right_circular()),
            other => {
                return Err(RunError::validation(
                    "input.states",
                    format!("unknown one-photon state `{other}` (expected H, V, 45, -45, R or L)"),
                ))
            }
        };
        let rho = DensityMatrix::pure(ket).map_err(|e| RunError::engine("input.states", e))?;
        out.push(QubitInput { label: name.clone(), rho, basis });
    }
    for &deg in &s.input.linear_angles_deg {
        if !deg.is_finite() {
            return Err(RunError::validation("input.linear_angles_deg", "must be finite"));
        }
        let basis = MeasurementBasis::linear(deg.to_radians());
        let rho = DensityMatrix::pure(basis.ket()).map_err(|e| RunError::engine("input.linear_angles_deg", e))?;
        out.push(QubitInput { label: format!("linear_{deg}deg"), rho, basis });
    }
    if let Some(m) = explicit_matrix::<2>(s)? {
        out.push(QubitInput { label: "matrix".into(), rho: m, basis: MeasurementBasis::diagonal() });
    }
    if out.is_empty() {
        return Err(RunError::validation("input", "no input state given"));
    }
    Ok(out)
}

fn explicit_matrix<const N: usize>(s: &Scenario) -> Result<Option<DensityMatrix<N>>, RunError> {
    let (re, im) = match (&s.input.matrix_re, &s.input.matrix_im) {
        (None, None) => return Ok(None),
        (Some(re), im) => (re, im.clone().unwrap_or_else(|| vec![vec![0.0; N]; N])),
        (None, Some(_)) => return Err(RunError::validation("input.matrix_re", "required with matrix_im")),
    };
    let shape_ok = |p: &Vec<Vec<f64>>| p.len() == N && p.iter().all(|r| r.len() == N);
    if !shape_ok(re) || !shape_ok(&im) {
        return Err(RunError::validation("input.matrix_re", format!("expected a {N}x{N} matrix")));
    }
    let m = CMat::<N>::from_fn(|i, j| C64::new(re[i][j], im[i][j]));
    DensityMatrix::validate(m).map(Some).map_err(|e| RunError::engine("input.matrix_re", e))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn run_one(s: &Scenario, seed: u64, nodes: usize) -> Result<RunOutput, RunError> {
    if s.two_photon.is_some() {
        return Err(RunError::validation("two_photon", "only allowed for kind = \"two_photon\""));
    }
    if s.elements.is_empty() {
        return Err(RunError::validation("elements", "at least one element is required"));
    }
    let template = template(s)?;
    let lossy = template.slots.iter().any(|slot| slot.element.is_lossy());
    if s.kind == ScenarioKind::OnePhotonDissipative && !lossy {
        return Err(RunError::validation("elements", "a dissipative scenario needs an attenuator"));
    }
    let spectrum = build_spectrum(&s.spectrum, &s.base_dir)?;
    let inputs = qubit_inputs(s)?;
    let run = &s.run;
    if run.n_min_passes > run.n_max_passes {
        return Err(RunError::validation("run.n_min_passes", "must not exceed n_max_passes"));
    }
    let sampled = run.outputs.contains(&OutputKind::SampledDegreeOfPolarization);
    if sampled && run.shots_per_basis == 0 {
        return Err(RunError::validation("run.shots_per_basis", "sampled outputs need at least one shot"));
    }

    let mut header: Vec<String> = vec!["state".into(), "control".into(), "n".into()];
    for o in &run.outputs {
        match o {
            OutputKind::Visibility => header.push("visibility".into()),
            OutputKind::VisibilityFixedAnalyzer => header.push("visibility_fixed_analyzer".into()),
            OutputKind::DegreeOfPolarization => header.push("degree_of_polarization".into()),
            OutputKind::Survival => header.push("survival".into()),
            OutputKind::Purity => header.push("purity".into()),
            OutputKind::Stokes => header.extend(["s1", "s2", "s3"].map(String::from)),
            OutputKind::Fidelity => header.push("fidelity".into()),
            OutputKind::SampledDegreeOfPolarization => {
                header.extend(["sampled_degree_of_polarization", "sample_seed"].map(String::from))
            }
            OutputKind::FidelityUntuned | OutputKind::SingletPhase => {
                return Err(RunError::validation("run.outputs", format!("{o:?} is a two-photon output")))
            }
        }
    }

    let opts = EvolveOptions { nodes, force_quadrature: run.method == MethodSpec::Quadrature, ..Default::default() };
    let mut curve = CurveOutput::new(header);
    let mut matrices = Vec::new();
    for input in &inputs {
        for &qc in run.control.flags() {
            for n in run.n_min_passes..=run.n_max_passes {
                let seq = template.sequence(qc, n).map_err(|e| RunError::engine("elements", e))?;
                let out = onephoton::evolve_with(&input.rho, &seq, &spectrum, opts)
                    .map_err(|e| RunError::engine("elements", e))?;
                if run.method == MethodSpec::ClosedForm && out.method != Method::ClosedForm {
                    return Err(RunError::validation(
                        "run.method",
                        "closed_form needs axis-aligned crystals and monomial elements",
                    ));
                }
                let mut row = vec![Cell::Text(input.label.clone()), Cell::Text(on_off(qc).into()), Cell::Int(n as u64)];
                for o in &run.outputs {
                    match o {
                        OutputKind::Visibility => {
                            let basis = onephoton::tracking_basis(&seq, spectrum.center(), &input.basis);
                            row.push(Cell::Real(measure::visibility(&out.rho, &basis)));
                        }
                        OutputKind::VisibilityFixedAnalyzer => {
                            row.push(Cell::Real(measure::visibility(&out.rho, &input.basis)))
                        }
                        OutputKind::DegreeOfPolarization => {
                            row.push(Cell::Real(measure::degree_of_polarization(&out.rho)))
                        }
                        OutputKind::Survival => row.push(Cell::Real(out.survival)),
                        OutputKind::Purity => row.push(Cell::Real(out.rho.purity())),
                        OutputKind::Stokes => {
                            let sv = measure::stokes(&out.rho);
                            row.extend([sv.s1, sv.s2, sv.s3].map(Cell::Real));
                        }
                        OutputKind::Fidelity => {
                            let f = measure::fidelity(&input.rho, &out.rho).map_err(|e| RunError::engine("fidelity", e))?;
                            row.push(Cell::Real(f));
                        }
                        OutputKind::SampledDegreeOfPolarization => {
                            let row_seed = splitmix64(seed.wrapping_add(curve.rows.len() as u64));
                            let bases =
                                [MeasurementBasis::horizontal(), MeasurementBasis::diagonal(), MeasurementBasis::right_circular()];
                            let records = bases
                                .iter()
                                .enumerate()
                                .map(|(b, basis)| {
                                    measure::sample_counts(&out.rho, basis, run.shots_per_basis, row_seed.wrapping_add(b as u64))
                                })
                                .collect::<Result<Vec<_>, _>>()
                                .map_err(|e| RunError::engine("run.shots_per_basis", e))?;
                            let rho = measure::reconstruct(&records).map_err(|e| RunError::engine("sampling", e))?;
                            row.push(Cell::Real(measure::degree_of_polarization(&rho)));
                            row.push(Cell::Int(row_seed));
                        }
                        OutputKind::FidelityUntuned | OutputKind::SingletPhase => unreachable!(),
                    }
                }
                curve.push(row);
                if let Some(format) = run.matrix_dump {
                    let label = format!("state={} control={} n={n}", input.label, on_off(qc));
                    matrices.push((label, dump_matrix(out.rho.matrix(), format)));
                }
            }
        }
    }
    Ok(RunOutput { name: s.name.clone(), curve, matrices })
}

fn on_off(qc: bool) -> &'static str {
    if qc {
        "on"
    } else {
        "off"
    }
}

fn run_two(s: &Scenario, _seed: u64, nodes: usize) -> Result<RunOutput, RunError> {
    let tp = s
        .two_photon
        .as_ref()
        .ok_or_else(|| RunError::validation("two_photon", "section is required for kind = \"two_photon\""))?;
    if !s.elements.is_empty() {
        return Err(RunError::validation("elements", "not used by two-photon scenarios"));
    }
    if s.run.shots_per_basis != 0 {
        return Err(RunError::validation("run.shots_per_basis", "sampling is one-photon only"));
    }
    let daughter = build_spectrum(&s.spectrum, &s.base_dir)?;
    let joint = match s.spectrum.pump_wavelength_nm {
        Some(nm) if nm > 0.0 && nm.is_finite() => JointSpectrum::with_pump(2.0 * PI * SPEED_OF_LIGHT / (nm * NM), daughter),
        Some(nm) => return Err(RunError::validation("spectrum.pump_wavelength_nm", format!("must be positive, got {nm}"))),
        None => JointSpectrum::new(daughter),
    }
    .map_err(|e| RunError::engine("spectrum", e))?;

    let (opd_l, opd_r) = match (tp.opd_waves, tp.opd_l_um, tp.opd_r_um) {
        (Some(waves), None, None) => {
            let lambda = 2.0 * PI * SPEED_OF_LIGHT / joint.daughter().center();
            (waves * lambda, waves * lambda)
        }
        (None, Some(l), Some(r)) => (l * UM, r * UM),
        _ => {
            return Err(RunError::validation(
                "two_photon",
                "give either opd_waves or both opd_l_um and opd_r_um",
            ))
        }
    };
    if tp.anticorrelated && tp.theta_l_deg != 0.0 {
        return Err(RunError::validation("two_photon.theta_l_deg", "is derived from theta_r_deg when anticorrelated"));
    }
    let thetas_r = if tp.theta_r_sweep_deg.is_empty() { vec![tp.theta_r_deg] } else { tp.theta_r_sweep_deg.clone() };

    let mut inputs: Vec<(String, Rho4)> = Vec::new();
    for name in &s.input.states {
        let kind: BellKind = name.parse().map_err(|_| {
            RunError::validation(
                "input.states",
                format!("unknown two-photon state `{name}` (expected phi_plus, phi_minus, psi_plus or psi_minus)"),
            )
        })?;
        inputs.push((name.clone(), twophoton::bell(kind)));
    }
    if !s.input.linear_angles_deg.is_empty() {
        return Err(RunError::validation("input.linear_angles_deg", "one-photon only"));
    }
    if let Some(m) = explicit_matrix::<4>(s)? {
        inputs.push(("matrix".into(), m));
    }
    if inputs.is_empty() {
        return Err(RunError::validation("input", "no input state given"));
    }

    let mut header: Vec<String> = ["state", "theta_l_deg", "theta_r_deg", "opd_l_um", "opd_r_um"].map(String::from).to_vec();
    for o in &s.run.outputs {
        match o {
            OutputKind::Purity => header.push("purity".into()),
            OutputKind::Fidelity => header.push("fidelity".into()),
            OutputKind::FidelityUntuned => header.push("fidelity_untuned".into()),
            OutputKind::SingletPhase => header.push("singlet_phase_rad".into()),
            other => {
                return Err(RunError::validation("run.outputs", format!("{other:?} is a one-photon output")));
            }
        }
    }

    let evolve = |rho: &Rho4, cfg: &TwoPhotonConfig| -> Result<Rho4, RunError> {
        let aligned = is_axis_aligned(cfg.theta_l) && is_axis_aligned(cfg.theta_r);
        let result = match s.run.method {
            MethodSpec::Quadrature => twophoton::evolve_two_with(rho, cfg, nodes),
            MethodSpec::ClosedForm => twophoton::evolve_two_closed(rho, cfg),
            MethodSpec::Auto if aligned => twophoton::evolve_two_closed(rho, cfg),
            MethodSpec::Auto => twophoton::evolve_two_with(rho, cfg, nodes),
        };
        result.map_err(|e| RunError::engine("two_photon", e))
    };

    let mut curve = CurveOutput::new(header);
    let mut matrices = Vec::new();
    for (label, rho0) in &inputs {
        for &theta_r_deg in &thetas_r {
            let theta_l_deg = if tp.anticorrelated { theta_r_deg - 90.0 } else { tp.theta_l_deg };
            let raw = TwoPhotonConfig::new(opd_l, opd_r, theta_l_deg.to_radians(), theta_r_deg.to_radians(), joint.clone())
                .map_err(|e| RunError::engine("two_photon", e))?;
            let cfg = if tp.tune_singlet_phase { raw.with_tuned_singlet_phase() } else { raw.clone() };
            let out = evolve(rho0, &cfg)?;
            let mut row = vec![
                Cell::Text(label.clone()),
                Cell::Real(theta_l_deg),
                Cell::Real(theta_r_deg),
                Cell::Real(cfg.opd_l / UM),
                Cell::Real(cfg.opd_r / UM),
            ];
            for o in &s.run.outputs {
                match o {
                    OutputKind::Purity => row.push(Cell::Real(out.purity())),
                    OutputKind::Fidelity => {
                        row.push(Cell::Real(measure::fidelity(rho0, &out).map_err(|e| RunError::engine("fidelity", e))?))
                    }
                    OutputKind::FidelityUntuned => {
                        let untuned = evolve(rho0, &raw)?;
                        let f = measure::fidelity(rho0, &untuned).map_err(|e| RunError::engine("fidelity", e))?;
                        row.push(Cell::Real(f));
                    }
                    OutputKind::SingletPhase => row.push(Cell::Real(cfg.singlet_phase())),
                    _ => unreachable!(),
                }
            }
            curve.push(row);
            if let Some(format) = s.run.matrix_dump {
                let label = format!("state={label} theta_l_deg={theta_l_deg} theta_r_deg={theta_r_deg}");
                matrices.push((label, dump_matrix(out.matrix(), format)));
            }
        }
    }
    Ok(RunOutput { name: s.name.clone(), curve, matrices })
}

fn is_axis_aligned(theta: f64) -> bool {
    let q = theta / FRAC_PI_2;
    (q - q.round()).abs() < 1e-12
}

/// Convenience for tests and presets: parse and run in one step.
pub fn run_text(text: &str, overrides: Overrides) -> Result<RunOutput, RunError> {
    run_scenario(&Scenario::parse(text, ".")?, overrides)
}
