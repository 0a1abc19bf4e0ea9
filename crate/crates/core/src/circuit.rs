//! A small line-oriented description language for feed-forward linear-optics
//! circuits, its compiler, and the three-beam GHZ network preset.
//!
//! Grammar, one statement per line (`#` starts a comment line):
//!
//! ```text
//! mode <ident>
//! squeeze <mode> r=<float> rp=<float> axis=<amp|phase>
//! bs <m1> <m2> rt=<int>:<int> phase=<float>
//! phase <mode> <float>
//! loss <mode> eta=<float>
//! beam <ident> h=<mode> alpha_c=<float> alpha_a=<float> theta=<float>
//! ```
//!
//! `rt=R:T` is the reflectivity to transmissivity ratio; the pair is
//! normalized internally so that `R + T = 1` (`rt=1:2` means `R = 1/3`).
//! Beam splitter outputs reuse the input mode names, so the circuit stays a
//! flat sequence of statements instead of a dataflow graph.

use std::collections::HashMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::gaussian::{GaussianState, ModeId, SqueezeAxis, SqueezerSpec, SymplecticTransform};
use crate::polarization::BrightBeam;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("{msg} at line {line}{}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse { line: usize, column: Option<usize>, msg: String },
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error(transparent)]
    State(#[from] crate::gaussian::StateError),
    #[error(transparent)]
    Polarization(#[from] crate::polarization::PolarizationError),
}

/// One statement of a circuit program. Mode and beam references are by name;
/// indices are resolved during validation.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitElement {
    ModeDecl { name: String },
    Squeeze { mode: String, r: f64, r_prime: f64, axis: SqueezeAxis },
    BeamSplit { m1: String, m2: String, rt: (u32, u32), phase: f64 },
    PhaseShift { mode: String, radians: f64 },
    Loss { mode: String, eta: f64 },
    BeamDecl { name: String, h_mode: String, alpha_c: f64, alpha_a: f64, theta: f64 },
}

impl CircuitElement {
    fn print(&self, out: &mut String) {
        match self {
            CircuitElement::ModeDecl { name } => {
                out.push_str(&format!("mode {name}"));
            }
            CircuitElement::Squeeze { mode, r, r_prime, axis } => {
                let axis = match axis {
                    SqueezeAxis::Amplitude => "amp",
                    SqueezeAxis::Phase => "phase",
                };
                out.push_str(&format!("squeeze {mode} r={r} rp={r_prime} axis={axis}"));
            }
            CircuitElement::BeamSplit { m1, m2, rt, phase } => {
                out.push_str(&format!("bs {m1} {m2} rt={}:{} phase={phase}", rt.0, rt.1));
            }
            CircuitElement::PhaseShift { mode, radians } => {
                out.push_str(&format!("phase {mode} {radians}"));
            }
            CircuitElement::Loss { mode, eta } => {
                out.push_str(&format!("loss {mode} eta={eta}"));
            }
            CircuitElement::BeamDecl { name, h_mode, alpha_c, alpha_a, theta } => {
                out.push_str(&format!(
                    "beam {name} h={h_mode} alpha_c={alpha_c} alpha_a={alpha_a} theta={theta}"
                ));
            }
        }
    }
}

/// A validated circuit program: declarations precede use, parameters are in
/// range, and each mode is squeezed at most once and only before any beam
/// splitter touches it.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    elements: Vec<CircuitElement>,
    mode_names: Vec<String>,
    beam_names: Vec<String>,
}

impl CircuitSpec {
    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        let mut elements = Vec::new();
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            elements.push(parse_statement(line, raw, line_no)?);
            lines.push(line_no);
        }
        match validate(&elements) {
            Ok((mode_names, beam_names)) => Ok(Self { elements, mode_names, beam_names }),
            Err((index, msg)) => {
                Err(CircuitError::Parse { line: lines[index], column: None, msg })
            }
        }
    }

    pub fn from_elements(elements: Vec<CircuitElement>) -> Result<Self, CircuitError> {
        match validate(&elements) {
            Ok((mode_names, beam_names)) => Ok(Self { elements, mode_names, beam_names }),
            Err((index, msg)) => {
                Err(CircuitError::Invalid(format!("{msg} (element {})", index + 1)))
            }
        }
    }

    pub fn elements(&self) -> &[CircuitElement] {
        &self.elements
    }

    pub fn n_modes(&self) -> usize {
        self.mode_names.len()
    }

    pub fn mode_names(&self) -> &[String] {
        &self.mode_names
    }

    pub fn beam_names(&self) -> &[String] {
        &self.beam_names
    }

    pub fn mode_index(&self, name: &str) -> Option<usize> {
        self.mode_names.iter().position(|m| m == name)
    }

    /// Canonical text form; parsing it back yields an equal spec.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for el in &self.elements {
            el.print(&mut out);
            out.push('\n');
        }
        out
    }

    /// Runs the program: a vacuum over the declared modes, squeezers applied
    /// as source blocks, then splitters, phase shifts and losses in program
    /// order. Declared beams get one fresh vacuum mode each, appended after
    /// the network modes, to stand in for their coherent field's noise.
    pub fn compile(&self) -> Result<CompiledCircuit, CircuitError> {
        if self.mode_names.is_empty() {
            return Err(CircuitError::Invalid("circuit declares no modes".to_string()));
        }
        let n = self.n_modes();
        let mut state = GaussianState::vacuum(n)?;
        let mut mean_map = DMatrix::<f64>::identity(2 * n, 2 * n);
        let mut beams = Vec::new();
        for el in &self.elements {
            match el {
                CircuitElement::ModeDecl { .. } => {}
                CircuitElement::Squeeze { mode, r, r_prime, axis } => {
                    let m = ModeId(self.mode_index(mode).expect("validated"));
                    let spec = SqueezerSpec::new(*r, *r_prime, *axis)?;
                    state = state.with_dopa_output(m, &spec)?;
                }
                CircuitElement::BeamSplit { m1, m2, rt, phase } => {
                    let a = ModeId(self.mode_index(m1).expect("validated"));
                    let b = ModeId(self.mode_index(m2).expect("validated"));
                    let reflectivity = f64::from(rt.0) / f64::from(rt.0 + rt.1);
                    let s = SymplecticTransform::beamsplitter(n, a, b, reflectivity, *phase)?;
                    state = state.transformed(&s)?;
                    mean_map = s.matrix() * mean_map;
                }
                CircuitElement::PhaseShift { mode, radians } => {
                    let m = ModeId(self.mode_index(mode).expect("validated"));
                    let s = SymplecticTransform::phase_shift(n, m, *radians)?;
                    state = state.transformed(&s)?;
                    mean_map = s.matrix() * mean_map;
                }
                CircuitElement::Loss { mode, eta } => {
                    let m = ModeId(self.mode_index(mode).expect("validated"));
                    state = state.with_loss(m, *eta)?;
                    let i = 2 * m.index();
                    let root = eta.sqrt();
                    for col in 0..2 * n {
                        mean_map[(i, col)] *= root;
                        mean_map[(i + 1, col)] *= root;
                    }
                }
                CircuitElement::BeamDecl { name, h_mode, alpha_c, alpha_a, theta } => {
                    beams.push((name.clone(), h_mode.clone(), *alpha_c, *alpha_a, *theta));
                }
            }
        }
        let state = state.with_appended_vacuum(beams.len());
        let beams = beams
            .into_iter()
            .enumerate()
            .map(|(k, (name, h_mode, alpha_c, alpha_a, theta))| {
                let h = ModeId(self.mode_index(&h_mode).expect("validated"));
                BrightBeam::new(name, h, ModeId(n + k), alpha_c, alpha_a, theta)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CompiledCircuit { state, beams, mean_map })
    }
}

/// Compiled form of a circuit: the output Gaussian state (network modes first,
/// then one vacuum mode per declared beam), the declared beams, and the
/// accumulated linear action on the network quadrature means.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub state: GaussianState,
    pub beams: Vec<BrightBeam>,
    pub mean_map: DMatrix<f64>,
}

impl CompiledCircuit {
    /// Mode-level coupling magnitude between output mode `i` and input mode
    /// `j`, read off the 2x2 quadrature block of the mean map.
    pub fn coupling_magnitude(&self, i: usize, j: usize) -> f64 {
        let b = (
            self.mean_map[(2 * i, 2 * j)],
            self.mean_map[(2 * i, 2 * j + 1)],
            self.mean_map[(2 * i + 1, 2 * j)],
            self.mean_map[(2 * i + 1, 2 * j + 1)],
        );
        ((b.0 * b.0 + b.1 * b.1 + b.2 * b.2 + b.3 * b.3) / 2.0).sqrt()
    }
}

/// Validation shared by the parser and the programmatic constructor.
/// Returns `(mode names, beam names)` or the index of the offending element.
#[allow(clippy::type_complexity)]
fn validate(elements: &[CircuitElement]) -> Result<(Vec<String>, Vec<String>), (usize, String)> {
    let mut modes: Vec<String> = Vec::new();
    let mut beams: Vec<String> = Vec::new();
    let mut squeezed: HashMap<String, ()> = HashMap::new();
    let mut bs_touched: HashMap<String, ()> = HashMap::new();
    let known = |modes: &Vec<String>, name: &str| modes.iter().any(|m| m == name);
    for (idx, el) in elements.iter().enumerate() {
        let err = |msg: String| Err((idx, msg));
        match el {
            CircuitElement::ModeDecl { name } => {
                if known(&modes, name) {
                    return err(format!("duplicate mode '{name}'"));
                }
                modes.push(name.clone());
            }
            CircuitElement::Squeeze { mode, r, r_prime, .. } => {
                if !known(&modes, mode) {
                    return err(format!("unknown mode '{mode}'"));
                }
                if !r.is_finite() || *r < 0.0 {
                    return err(format!("negative r ({r}) on mode '{mode}'"));
                }
                if !r_prime.is_finite() || *r_prime < 0.0 {
                    return err(format!("negative rp ({r_prime}) on mode '{mode}'"));
                }
                if bs_touched.contains_key(mode) {
                    return err(format!("squeeze on mode '{mode}' after a beam splitter touched it"));
                }
                if squeezed.insert(mode.clone(), ()).is_some() {
                    return err(format!("mode '{mode}' squeezed more than once"));
                }
            }
            CircuitElement::BeamSplit { m1, m2, rt, phase } => {
                for m in [m1, m2] {
                    if !known(&modes, m) {
                        return err(format!("unknown mode '{m}'"));
                    }
                }
                if m1 == m2 {
                    return err(format!("beam splitter needs two distinct modes, got '{m1}' twice"));
                }
                if rt.0 + rt.1 == 0 {
                    return err(format!("invalid rt ratio '{}:{}'", rt.0, rt.1));
                }
                if !phase.is_finite() {
                    return err("beam splitter phase must be finite".to_string());
                }
                bs_touched.insert(m1.clone(), ());
                bs_touched.insert(m2.clone(), ());
            }
            CircuitElement::PhaseShift { mode, radians } => {
                if !known(&modes, mode) {
                    return err(format!("unknown mode '{mode}'"));
                }
                if !radians.is_finite() {
                    return err("phase must be finite".to_string());
                }
            }
            CircuitElement::Loss { mode, eta } => {
                if !known(&modes, mode) {
                    return err(format!("unknown mode '{mode}'"));
                }
                if !(0.0..=1.0).contains(eta) {
                    return err(format!("eta must lie in [0, 1], got {eta}"));
                }
            }
            CircuitElement::BeamDecl { name, h_mode, alpha_c, alpha_a, .. } => {
                if beams.iter().any(|b| b == name) {
                    return err(format!("duplicate beam name '{name}'"));
                }
                if !known(&modes, h_mode) {
                    return err(format!("unknown mode '{h_mode}'"));
                }
                if !alpha_c.is_finite() || *alpha_c <= 0.0 {
                    return err(format!("alpha_c must be positive, got {alpha_c}"));
                }
                if !alpha_a.is_finite() || *alpha_a < 0.0 {
                    return err(format!("alpha_a must be nonnegative, got {alpha_a}"));
                }
                beams.push(name.clone());
            }
        }
    }
    Ok((modes, beams))
}

fn parse_statement(line: &str, raw: &str, line_no: usize) -> Result<CircuitElement, CircuitError> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let col = |token: &str| raw.find(token).map(|p| p + 1);
    let parse_err = |token: &str, msg: String| CircuitError::Parse {
        line: line_no,
        column: col(token),
        msg,
    };
    let plain_err = |msg: String| CircuitError::Parse { line: line_no, column: None, msg };

    let expect_args = |n: usize| -> Result<(), CircuitError> {
        if tokens.len() != n + 1 {
            Err(plain_err(format!(
                "'{}' takes {} argument(s), got {}",
                tokens[0],
                n,
                tokens.len() - 1
            )))
        } else {
            Ok(())
        }
    };
    let parse_float = |token: &str| -> Result<f64, CircuitError> {
        token
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err(token, format!("malformed number '{token}'")))
    };
    let ident = |token: &str| -> Result<String, CircuitError> {
        let ok = !token.is_empty()
            && token.chars().next().map(|c| c.is_ascii_alphabetic() || c == '_').unwrap_or(false)
            && token.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if ok {
            Ok(token.to_string())
        } else {
            Err(parse_err(token, format!("invalid identifier '{token}'")))
        }
    };
    fn keyed<'a>(
        token: &'a str,
        key: &str,
        err: &dyn Fn(&str, String) -> CircuitError,
    ) -> Result<&'a str, CircuitError> {
        token
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| err(token, format!("expected '{key}=<value>', got '{token}'")))
    }
    let keyed = |token, key| keyed(token, key, &parse_err);

    match tokens[0] {
        "mode" => {
            expect_args(1)?;
            Ok(CircuitElement::ModeDecl { name: ident(tokens[1])? })
        }
        "squeeze" => {
            expect_args(4)?;
            let mode = ident(tokens[1])?;
            let r = parse_float(keyed(tokens[2], "r")?)?;
            let r_prime = parse_float(keyed(tokens[3], "rp")?)?;
            let axis = match keyed(tokens[4], "axis")? {
                "amp" => SqueezeAxis::Amplitude,
                "phase" => SqueezeAxis::Phase,
                other => {
                    return Err(parse_err(tokens[4], format!("axis must be 'amp' or 'phase', got '{other}'")))
                }
            };
            Ok(CircuitElement::Squeeze { mode, r, r_prime, axis })
        }
        "bs" => {
            expect_args(4)?;
            let m1 = ident(tokens[1])?;
            let m2 = ident(tokens[2])?;
            let ratio = keyed(tokens[3], "rt")?;
            let rt = parse_ratio(ratio).ok_or_else(|| {
                parse_err(tokens[3], format!("malformed rt ratio '{ratio}', expected '<int>:<int>'"))
            })?;
            let phase = parse_float(keyed(tokens[4], "phase")?)?;
            Ok(CircuitElement::BeamSplit { m1, m2, rt, phase })
        }
        "phase" => {
            expect_args(2)?;
            Ok(CircuitElement::PhaseShift { mode: ident(tokens[1])?, radians: parse_float(tokens[2])? })
        }
        "loss" => {
            expect_args(2)?;
            Ok(CircuitElement::Loss { mode: ident(tokens[1])?, eta: parse_float(keyed(tokens[2], "eta")?)? })
        }
        "beam" => {
            expect_args(5)?;
            Ok(CircuitElement::BeamDecl {
                name: ident(tokens[1])?,
                h_mode: ident(keyed(tokens[2], "h")?)?,
                alpha_c: parse_float(keyed(tokens[3], "alpha_c")?)?,
                alpha_a: parse_float(keyed(tokens[4], "alpha_a")?)?,
                theta: parse_float(keyed(tokens[5], "theta")?)?,
            })
        }
        other => Err(parse_err(other, format!("unknown statement '{other}'"))),
    }
}

fn parse_ratio(text: &str) -> Option<(u32, u32)> {
    let (a, b) = text.split_once(':')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

/// Parameters of the GHZ network preset: one phase-squeezed source, two
/// amplitude-squeezed sources, a 1:2 splitter followed by a 1:1 splitter,
/// and three bright output beams sharing the same coherent powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzParams {
    pub squeezers: [SqueezerSpec; 3],
    pub alpha_c: f64,
    pub alpha_a: f64,
    pub theta: f64,
}

impl GhzParams {
    /// Symmetric squeezing on all three sources, with the axis pattern the
    /// network expects (phase, amplitude, amplitude).
    pub fn symmetric(r: f64, r_prime: f64, alpha_c: f64, alpha_a: f64, theta: f64) -> Self {
        Self {
            squeezers: [
                SqueezerSpec { r, r_prime, axis: SqueezeAxis::Phase },
                SqueezerSpec { r, r_prime, axis: SqueezeAxis::Amplitude },
                SqueezerSpec { r, r_prime, axis: SqueezeAxis::Amplitude },
            ],
            alpha_c,
            alpha_a,
            theta,
        }
    }

    /// The operating powers of the tabletop experiment this models: the weak
    /// beam carries 1/30 of the coherent beam's power.
    pub fn paper_powers(r: f64, r_prime: f64) -> Self {
        Self::symmetric(r, r_prime, 30.0f64.sqrt(), 1.0, 0.0)
    }
}

impl Default for GhzParams {
    fn default() -> Self {
        Self::paper_powers(0.0, 0.0)
    }
}

/// Warnings for preset parameters that deviate from the intended
/// configuration (wrong squeezing axes, weak beam not weak).
pub fn ghz_axis_warnings(params: &GhzParams) -> Vec<String> {
    let mut warnings = Vec::new();
    if params.squeezers[0].axis != SqueezeAxis::Phase {
        warnings.push("source 1 is expected to be phase squeezed".to_string());
    }
    for (k, sq) in params.squeezers.iter().enumerate().skip(1) {
        if sq.axis != SqueezeAxis::Amplitude {
            warnings.push(format!("source {} is expected to be amplitude squeezed", k + 1));
        }
    }
    if params.alpha_a * params.alpha_a > 0.1 * params.alpha_c * params.alpha_c {
        warnings.push(format!(
            "weak-beam power ratio {:.3} exceeds 0.1; the linearized Stokes forms degrade",
            (params.alpha_a / params.alpha_c).powi(2)
        ));
    }
    warnings
}

/// The GHZ network as a circuit program. The first splitter mixes sources 1
/// and 2 at R=1/3; its first output meets source 3 on a balanced splitter.
/// The three bright beams bind the network outputs so that beam `d1` carries
/// the unbalanced splitter's second output.
pub fn ghz_preset(params: &GhzParams) -> CircuitSpec {
    let sq = &params.squeezers;
    let elements = vec![
        CircuitElement::ModeDecl { name: "a1".to_string() },
        CircuitElement::ModeDecl { name: "a2".to_string() },
        CircuitElement::ModeDecl { name: "a3".to_string() },
        CircuitElement::Squeeze {
            mode: "a1".to_string(),
            r: sq[0].r,
            r_prime: sq[0].r_prime,
            axis: sq[0].axis,
        },
        CircuitElement::Squeeze {
            mode: "a2".to_string(),
            r: sq[1].r,
            r_prime: sq[1].r_prime,
            axis: sq[1].axis,
        },
        CircuitElement::Squeeze {
            mode: "a3".to_string(),
            r: sq[2].r,
            r_prime: sq[2].r_prime,
            axis: sq[2].axis,
        },
        CircuitElement::BeamSplit {
            m1: "a1".to_string(),
            m2: "a2".to_string(),
            rt: (1, 2),
            phase: 0.0,
        },
        CircuitElement::BeamSplit {
            m1: "a1".to_string(),
            m2: "a3".to_string(),
            rt: (1, 1),
            phase: 0.0,
        },
        CircuitElement::BeamDecl {
            name: "d1".to_string(),
            h_mode: "a2".to_string(),
            alpha_c: params.alpha_c,
            alpha_a: params.alpha_a,
            theta: params.theta,
        },
        CircuitElement::BeamDecl {
            name: "d2".to_string(),
            h_mode: "a1".to_string(),
            alpha_c: params.alpha_c,
            alpha_a: params.alpha_a,
            theta: params.theta,
        },
        CircuitElement::BeamDecl {
            name: "d3".to_string(),
            h_mode: "a3".to_string(),
            alpha_c: params.alpha_c,
            alpha_a: params.alpha_a,
            theta: params.theta,
        },
    ];
    CircuitSpec::from_elements(elements).expect("preset is always a valid circuit")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_smallest_program() {
        let spec = CircuitSpec::parse("mode a1\nsqueeze a1 r=0.6 rp=0 axis=phase").unwrap();
        assert_eq!(spec.n_modes(), 1);
        assert_eq!(spec.elements().len(), 2);
        assert_eq!(
            spec.elements()[1],
            CircuitElement::Squeeze {
                mode: "a1".to_string(),
                r: 0.6,
                r_prime: 0.0,
                axis: SqueezeAxis::Phase
            }
        );
    }

    #[test]
    fn unknown_mode_reports_line() {
        let err = CircuitSpec::parse("bs a1 a2 rt=1:2 phase=0").unwrap_err();
        assert_eq!(err.to_string(), "unknown mode 'a1' at line 1");
    }

    #[test]
    fn malformed_number_reports_location() {
        let err = CircuitSpec::parse("mode a1\nsqueeze a1 r=zz rp=0 axis=amp").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("malformed number 'zz'"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn rejects_zero_ratio_and_duplicates() {
        let err =
            CircuitSpec::parse("mode a\nmode b\nbs a b rt=0:0 phase=0").unwrap_err();
        assert!(err.to_string().contains("invalid rt ratio '0:0'"), "{err}");

        let err = CircuitSpec::parse("mode a\nmode a").unwrap_err();
        assert!(err.to_string().contains("duplicate mode 'a'"), "{err}");

        let err = CircuitSpec::parse(
            "mode a\nbeam d h=a alpha_c=1 alpha_a=0 theta=0\nbeam d h=a alpha_c=1 alpha_a=0 theta=0",
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate beam name 'd'"), "{err}");

        let err = CircuitSpec::parse("mode a\nsqueeze a r=-0.2 rp=0 axis=amp").unwrap_err();
        assert!(err.to_string().contains("negative r"), "{err}");
    }

    #[test]
    fn rejects_squeeze_after_beamsplitter() {
        let err = CircuitSpec::parse(
            "mode a\nmode b\nbs a b rt=1:1 phase=0\nsqueeze a r=0.1 rp=0 axis=amp",
        )
        .unwrap_err();
        assert!(err.to_string().contains("after a beam splitter"), "{err}");
    }

    #[test]
    fn print_parse_round_trip() {
        let spec = ghz_preset(&GhzParams::symmetric(0.6, 0.05, 1.0, 0.125, 0.25));
        let text = spec.to_text();
        let reparsed = CircuitSpec::parse(&text).unwrap();
        assert_eq!(spec, reparsed);

        let other = CircuitSpec::parse(
            "# a lossy one-mode circuit\nmode a\nsqueeze a r=0.31 rp=0.07 axis=amp\nphase a 0.5\nloss a eta=0.75\nbeam d h=a alpha_c=2.5 alpha_a=0.1 theta=0.1",
        )
        .unwrap();
        assert_eq!(other, CircuitSpec::parse(&other.to_text()).unwrap());
    }

    #[test]
    fn preset_text_matches_preset_spec() {
        let params = GhzParams::paper_powers(0.6, 0.0);
        let preset = ghz_preset(&params);
        let text = "\
mode a1
mode a2
mode a3
squeeze a1 r=0.6 rp=0 axis=phase
squeeze a2 r=0.6 rp=0 axis=amp
squeeze a3 r=0.6 rp=0 axis=amp
bs a1 a2 rt=1:2 phase=0
bs a1 a3 rt=1:1 phase=0
beam d1 h=a2 alpha_c=5.477225575051661 alpha_a=1 theta=0
beam d2 h=a1 alpha_c=5.477225575051661 alpha_a=1 theta=0
beam d3 h=a3 alpha_c=5.477225575051661 alpha_a=1 theta=0
";
        assert_eq!(CircuitSpec::parse(text).unwrap(), preset);
    }

    #[test]
    fn compile_trivial_circuits() {
        assert!(CircuitSpec::parse("# nothing\n").unwrap().compile().is_err());

        let compiled = CircuitSpec::parse("mode a").unwrap().compile().unwrap();
        assert_eq!(compiled.state.n_modes(), 1);
        assert_relative_eq!(compiled.state.cov()[(0, 0)], 0.25);
        assert!(compiled.beams.is_empty());
    }

    #[test]
    fn ghz_mixing_coefficients() {
        let compiled = ghz_preset(&GhzParams::symmetric(0.0, 0.0, 1.0, 0.0, 0.0))
            .compile()
            .unwrap();
        let third = (1.0f64 / 3.0).sqrt();
        // d2 slot: the doubly split path.
        assert_relative_eq!(compiled.coupling_magnitude(0, 0), third, epsilon = 1e-12);
        assert_relative_eq!(compiled.coupling_magnitude(0, 1), (1.0f64 / 6.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(compiled.coupling_magnitude(0, 2), (1.0f64 / 2.0).sqrt(), epsilon = 1e-12);
        // d1 slot: the unbalanced splitter's second output.
        assert_relative_eq!(compiled.coupling_magnitude(1, 0), third, epsilon = 1e-12);
        assert_relative_eq!(compiled.coupling_magnitude(1, 1), (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(compiled.coupling_magnitude(1, 2), 0.0, epsilon = 1e-12);
        // d3 slot mirrors d2.
        assert_relative_eq!(compiled.coupling_magnitude(2, 0), third, epsilon = 1e-12);
        assert_relative_eq!(compiled.coupling_magnitude(2, 1), (1.0f64 / 6.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(compiled.coupling_magnitude(2, 2), (1.0f64 / 2.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn ghz_preset_compiles_to_vacuum_at_zero_squeezing() {
        let compiled = ghz_preset(&GhzParams::symmetric(0.0, 0.0, 1.0, 0.0, 0.0))
            .compile()
            .unwrap();
        assert_eq!(compiled.state.n_modes(), 6);
        assert_eq!(compiled.beams.len(), 3);
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == j { 0.25 } else { 0.0 };
                assert_relative_eq!(compiled.state.cov()[(i, j)], expect, epsilon = 1e-13);
            }
        }
        assert_eq!(compiled.beams[0].name, "d1");
        assert_eq!(compiled.beams[0].h_mode.index(), 1);
        assert_eq!(compiled.beams[1].h_mode.index(), 0);
        assert_eq!(compiled.beams[2].h_mode.index(), 2);
    }

    #[test]
    fn commuting_elements_can_be_permuted() {
        let a = CircuitSpec::parse(
            "mode a\nmode b\nsqueeze a r=0.4 rp=0.1 axis=amp\nsqueeze b r=0.2 rp=0 axis=phase\nloss a eta=0.8\nphase b 0.3",
        )
        .unwrap()
        .compile()
        .unwrap();
        let b = CircuitSpec::parse(
            "mode a\nmode b\nsqueeze b r=0.2 rp=0 axis=phase\nsqueeze a r=0.4 rp=0.1 axis=amp\nphase b 0.3\nloss a eta=0.8",
        )
        .unwrap()
        .compile()
        .unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(a.state.cov()[(i, j)], b.state.cov()[(i, j)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn axis_warnings_fire_on_misconfigured_preset() {
        let mut params = GhzParams::symmetric(0.5, 0.0, 1.0, 0.0, 0.0);
        assert!(ghz_axis_warnings(&params).is_empty());
        params.squeezers[0].axis = SqueezeAxis::Amplitude;
        params.squeezers[2].axis = SqueezeAxis::Phase;
        let warnings = ghz_axis_warnings(&params);
        assert_eq!(warnings.len(), 2);

        let strong = GhzParams::symmetric(0.0, 0.0, 1.0, 0.9, 0.0);
        assert_eq!(ghz_axis_warnings(&strong).len(), 1);
    }
}
