//! Figure and threshold presets, stored as configuration documents.

/// One curve of a figure preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub style: &'static str,
    /// Caption parameters that distinguish this curve, e.g. `theta1=0.5_eta2=1`.
    pub tag: String,
    pub config: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureSpec {
    pub name: &'static str,
    pub base: &'static str,
    /// (style, varying keys and values)
    pub curves: &'static [(&'static str, &'static [(&'static str, f64)])],
}

pub const FIGURE_T_MAX: f64 = 20.0;
pub const FIGURE_SAMPLES: usize = 2001;

const UNIT_INIT: &str = "mu0 = 1\nkappa0 = 1\nnu0 = 1\n";
const B0_INIT: &str = "b0 = 0.6\nkappa0 = 1\n";

pub const FIGURES: [FigureSpec; 6] = [
    FigureSpec {
        name: "fig1-left",
        base: "class = HPZ\ngamma = 1\ntheta0 = 2\nb = 1\n",
        curves: &[
            ("dotted", &[("theta1", 0.5), ("eta2", 1.0)]),
            ("solid", &[("theta1", 0.5), ("eta2", 0.0)]),
            ("long-dashed", &[("theta1", 0.5), ("eta2", -1.0)]),
            ("dot-dashed", &[("theta1", 0.5), ("eta2", -1.5)]),
            ("short-dashed", &[("theta1", -0.5), ("eta2", -1.5)]),
        ],
    },
    FigureSpec {
        name: "fig1-right",
        base: "class = ConjugateHPZ\ngamma = 1\ntheta0 = 2\nb = 1\n",
        curves: &[
            ("dotted", &[("theta1", 0.5), ("eta2", -3.0)]),
            ("dot-dashed", &[("theta1", 0.5), ("eta2", -2.0)]),
            ("solid", &[("theta1", 0.5), ("eta2", 3.0)]),
            ("long-dashed", &[("theta1", 0.5), ("eta2", 7.0)]),
            ("short-dashed", &[("theta1", -0.5), ("eta2", 7.0)]),
        ],
    },
    FigureSpec {
        name: "fig2-left",
        base: "gamma = 1\ntheta0 = 2\n",
        curves: &[
            ("solid", &[("CL", 0.0), ("theta1", 0.2), ("b", 2.0)]),
            ("dotted", &[("CL", 0.0), ("theta1", 0.2), ("b", 0.6)]),
            ("dot-dashed", &[("CL", 0.0), ("theta1", -0.2), ("b", 0.6)]),
            ("long-dashed", &[("ConjugateCL", 0.0), ("theta1", 0.2), ("b", 0.6)]),
            ("short-dashed", &[("ConjugateCL", 0.0), ("theta1", -0.2), ("b", 0.6)]),
        ],
    },
    FigureSpec {
        name: "fig2-right",
        base: "class = GeneralizedCL\ngamma = 1\ntheta0 = 2\nb = 0.6\n",
        curves: &[
            ("dotted", &[("theta2", -1.0)]),
            ("dot-dashed", &[("theta2", -0.86)]),
            ("long-dashed", &[("theta2", -0.553)]),
            ("solid", &[("theta2", 0.0)]),
            ("short-dashed", &[("theta2", 1.0)]),
        ],
    },
    FigureSpec {
        name: "fig3-left",
        base: "class = GeneralizedKL1\ngamma = 1\ntheta0 = 2\nb = 0.6\n",
        curves: &[
            ("dotted", &[("theta1", -1.106)]),
            ("dot-dashed", &[("theta1", -0.5)]),
            ("solid", &[("theta1", 0.0)]),
            ("long-dashed", &[("theta1", 0.5)]),
            ("short-dashed", &[("theta1", 1.106)]),
        ],
    },
    FigureSpec {
        name: "fig3-right",
        base: "class = GeneralizedKL2\ngamma = 1\ntheta0 = 2\nb = 0.6\n",
        curves: &[
            ("dotted", &[("theta1", -1.8)]),
            ("dot-dashed", &[("theta1", -1.0)]),
            ("solid", &[("theta1", 0.0)]),
            ("long-dashed", &[("theta1", 1.0)]),
            ("short-dashed", &[("theta1", 1.8)]),
        ],
    },
];

fn initial_state(figure: &str) -> &'static str {
    if figure.starts_with("fig1") { UNIT_INIT } else { B0_INIT }
}

/// Curves of a figure preset, or None for an unknown name.
pub fn figure_curves(name: &str) -> Option<Vec<Curve>> {
    let spec = FIGURES.iter().find(|f| f.name == name)?;
    let curves = spec
        .curves
        .iter()
        .map(|(style, params)| {
            let mut config = String::from(spec.base);
            let mut tag = Vec::new();
            for (key, value) in params.iter() {
                if key.chars().next().is_some_and(char::is_uppercase) {
                    config.push_str(&format!("class = {key}\n"));
                    tag.push(key.to_string());
                } else {
                    config.push_str(&format!("{key} = {value}\n"));
                    tag.push(format!("{key}={value}"));
                }
            }
            config.push_str(initial_state(spec.name));
            config.push_str(&format!("t_max = {FIGURE_T_MAX}\nsamples = {FIGURE_SAMPLES}\n"));
            Curve { style, tag: tag.join("_"), config }
        })
        .collect();
    Some(curves)
}

/// Threshold searches reproducing the caption thresholds.
pub const THRESHOLDS: [(&str, &str, &str); 6] = [
    (
        "fig1-left-threshold",
        "fig1-left-solid",
        "scan = eta2\nlo = 0\nhi = 2\ncriterion = stationary_nu_zero\n",
    ),
    (
        "fig1-right-threshold",
        "fig1-right-solid",
        "scan = eta2\nlo = -4\nhi = 0\ncriterion = stationary_nu_zero\n",
    ),
    (
        "fig2-right-threshold",
        "fig2-right-solid",
        "scan = theta2\nlo = -1\nhi = 0\ncriterion = cp_boundary\n",
    ),
    (
        "fig2-right-threshold-upper",
        "fig2-right-solid",
        "scan = theta2\nlo = 0\nhi = 1\ncriterion = cp_boundary\n",
    ),
    (
        "fig3-left-threshold",
        "fig3-left-solid",
        "scan = theta1\nlo = 1\nhi = 1.5\ncriterion = stationary_nu_zero\n",
    ),
    (
        "fig3-right-threshold",
        "fig3-right-solid",
        "scan = theta1\nlo = 1\nhi = 2\ncriterion = overdamped_boundary\n",
    ),
];

/// Configuration document of a scenario or threshold preset.
///
/// Scenario presets are named `<figure>-<style>`, e.g. `fig1-left-solid`.
pub fn preset_config(name: &str) -> Option<String> {
    if let Some((_, base, extra)) = THRESHOLDS.iter().find(|(n, _, _)| *n == name) {
        return preset_config(base).map(|mut text| {
            text.push_str(extra);
            text
        });
    }
    FIGURES.iter().find_map(|f| {
        let style = name.strip_prefix(f.name)?.strip_prefix('-')?;
        figure_curves(f.name)?.into_iter().find(|c| c.style == style).map(|c| c.config)
    })
}

/// Every preset name accepted by `--preset`.
pub fn preset_names() -> Vec<String> {
    let mut names: Vec<String> = FIGURES
        .iter()
        .flat_map(|f| f.curves.iter().map(move |(style, _)| format!("{}-{style}", f.name)))
        .collect();
    names.extend(THRESHOLDS.iter().map(|(n, _, _)| n.to_string()));
    names
}
