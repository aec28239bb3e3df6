//! Flat key=value run configuration.
//!
//! One `key=value` per line, `#` starts a comment, lists are
//! comma-separated, mesh sizes are written as exact fractions like `1/32`.

use kvfem::stepper::StepRule;
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Convergence,
    Decay,
    Cavity,
    Single,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::Decay => "decay",
            Experiment::Cavity => "cavity",
            Experiment::Single => "single",
        }
    }

    pub fn from_name(s: &str) -> Option<Experiment> {
        match s {
            "convergence" => Some(Experiment::Convergence),
            "decay" => Some(Experiment::Decay),
            "cavity" => Some(Experiment::Cavity),
            "single" => Some(Experiment::Single),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Manufactured,
    Decay,
    Cavity,
}

/// Parsed and validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub kappa_list: Vec<f64>,
    pub nu: f64,
    /// Mesh sizes as cells per side (h = 1/n).
    pub h_list: Vec<usize>,
    pub k_rule: StepRule,
    pub t_final: f64,
    pub picard_tol: f64,
    pub max_iters: usize,
    pub output_dir: Option<PathBuf>,
    /// Which problem a `single` run solves.
    pub problem: ProblemKind,
}

/// Parse failure with the offending line (1-based; 0 for file-level
/// problems such as missing keys).
#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "config line {}: {}", self.line, self.message)
        } else {
            write!(f, "config: {}", self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

fn parse_mesh_size(tok: &str, line: usize) -> Result<usize, ConfigError> {
    let tok = tok.trim();
    let n = match tok.strip_prefix("1/") {
        Some(den) => den
            .parse::<usize>()
            .map_err(|_| err(line, format!("h_list: cannot parse mesh size '{tok}'")))?,
        None => {
            return Err(err(
                line,
                format!("h_list: expected a fraction like 1/8, got '{tok}'"),
            ))
        }
    };
    if n == 0 {
        return Err(err(line, "h_list: mesh size 1/0 is not valid"));
    }
    Ok(n)
}

fn parse_float(key: &str, tok: &str, line: usize) -> Result<f64, ConfigError> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| err(line, format!("{key}: cannot parse number '{}'", tok.trim())))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut experiment = None;
    let mut kappa_list: Option<Vec<f64>> = None;
    let mut nu = 1.0;
    let mut h_list: Option<Vec<usize>> = None;
    let mut k_rule = None;
    let mut t_final = 1.0;
    let mut picard_tol = 1e-10;
    let mut max_iters = 50usize;
    let mut output_dir = None;
    let mut problem = ProblemKind::Manufactured;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(line, format!("expected key=value, got '{content}'")));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "experiment" => {
                experiment = Some(Experiment::from_name(value).ok_or_else(|| {
                    err(line, format!("experiment: unknown experiment '{value}'"))
                })?);
            }
            "kappa_list" => {
                let mut list = Vec::new();
                for tok in value.split(',') {
                    let k = parse_float("kappa_list", tok, line)?;
                    if !(k >= 0.0) {
                        return Err(err(
                            line,
                            format!("kappa_list: kappa must be >= 0, got {k}"),
                        ));
                    }
                    list.push(k);
                }
                if list.is_empty() {
                    return Err(err(line, "kappa_list: empty list"));
                }
                kappa_list = Some(list);
            }
            "nu" => {
                nu = parse_float("nu", value, line)?;
                if !(nu > 0.0) {
                    return Err(err(line, format!("nu: must be positive, got {nu}")));
                }
            }
            "h_list" => {
                let mut list = Vec::new();
                for tok in value.split(',') {
                    list.push(parse_mesh_size(tok, line)?);
                }
                if list.is_empty() {
                    return Err(err(line, "h_list: empty list"));
                }
                h_list = Some(list);
            }
            "k_rule" => {
                k_rule = Some(match value {
                    "h" => StepRule::H,
                    "h2" => StepRule::H2,
                    other => match other.strip_prefix("fixed:") {
                        Some(v) => {
                            let k = parse_float("k_rule", v, line)?;
                            if !(k > 0.0) {
                                return Err(err(
                                    line,
                                    format!("k_rule: fixed step must be positive, got {k}"),
                                ));
                            }
                            StepRule::Fixed(k)
                        }
                        None => {
                            return Err(err(
                                line,
                                format!("k_rule: expected h, h2 or fixed:<step>, got '{other}'"),
                            ))
                        }
                    },
                });
            }
            "T" => {
                t_final = parse_float("T", value, line)?;
                if !(t_final > 0.0) {
                    return Err(err(line, format!("T: must be positive, got {t_final}")));
                }
            }
            "picard_tol" => {
                picard_tol = parse_float("picard_tol", value, line)?;
                if !(picard_tol > 0.0) {
                    return Err(err(line, "picard_tol: must be positive"));
                }
            }
            "max_iters" => {
                max_iters = value
                    .parse::<usize>()
                    .map_err(|_| err(line, format!("max_iters: cannot parse '{value}'")))?;
                if max_iters == 0 {
                    return Err(err(line, "max_iters: must be at least 1"));
                }
            }
            "output_dir" => {
                output_dir = Some(PathBuf::from(value));
            }
            "problem" => {
                problem = match value {
                    "manufactured" => ProblemKind::Manufactured,
                    "decay" => ProblemKind::Decay,
                    "cavity" => ProblemKind::Cavity,
                    other => return Err(err(line, format!("problem: unknown problem '{other}'"))),
                };
            }
            other => return Err(err(line, format!("unknown key '{other}'"))),
        }
    }

    let experiment = experiment.ok_or_else(|| err(0, "missing required key 'experiment'"))?;
    let kappa_list = kappa_list.ok_or_else(|| err(0, "missing required key 'kappa_list'"))?;
    let h_list = h_list.ok_or_else(|| err(0, "missing required key 'h_list'"))?;
    let k_rule = k_rule.ok_or_else(|| err(0, "missing required key 'k_rule'"))?;

    Ok(RunConfig {
        experiment,
        kappa_list,
        nu,
        h_list,
        k_rule,
        t_final,
        picard_tol,
        max_iters,
        output_dir,
        problem,
    })
}

/// Deterministic κ label for file names and CSV headers.
pub fn kappa_label(kappa: f64) -> String {
    if kappa == 0.0 {
        "0".to_string()
    } else if kappa == kappa.trunc() && kappa.abs() < 1e6 {
        format!("{}", kappa as i64)
    } else {
        format!("{kappa:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_config_with_defaults() {
        let cfg = parse_config("experiment=convergence\nh_list=1/4,1/8\nkappa_list=1\nk_rule=h2\n")
            .unwrap();
        assert_eq!(cfg.experiment, Experiment::Convergence);
        assert_eq!(cfg.h_list, vec![4, 8]);
        assert_eq!(cfg.kappa_list, vec![1.0]);
        assert_eq!(cfg.nu, 1.0);
        assert_eq!(cfg.t_final, 1.0);
        assert_eq!(cfg.picard_tol, 1e-10);
        assert_eq!(cfg.max_iters, 50);
        assert!(matches!(cfg.k_rule, StepRule::H2));
    }

    #[test]
    fn bad_k_rule_names_key_and_line() {
        let e = parse_config("experiment=convergence\nh_list=1/4\nkappa_list=1\nk_rule=h3\n")
            .unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("k_rule"), "{}", e.message);
    }

    #[test]
    fn four_element_kappa_list() {
        let cfg = parse_config(
            "experiment=convergence\nh_list=1/4\nkappa_list=1,1e-3,1e-6,1e-9\nk_rule=h2\n",
        )
        .unwrap();
        assert_eq!(cfg.kappa_list, vec![1.0, 1e-3, 1e-6, 1e-9]);
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let e = parse_config("experiment=decay\nwibble=3\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("wibble"));
    }

    #[test]
    fn missing_required_key_reported() {
        let e = parse_config("experiment=convergence\nh_list=1/4\nk_rule=h\n").unwrap_err();
        assert!(e.message.contains("kappa_list"));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = parse_config(
            "# full line comment\nexperiment=decay\n\nh_list=1/8 # trailing\nkappa_list=1,0\nk_rule=fixed:0.01\nT=4\n",
        )
        .unwrap();
        assert_eq!(cfg.h_list, vec![8]);
        assert!(matches!(cfg.k_rule, StepRule::Fixed(k) if k == 0.01));
        assert_eq!(cfg.t_final, 4.0);
    }

    #[test]
    fn mesh_sizes_must_be_fractions() {
        let e =
            parse_config("experiment=decay\nh_list=0.25\nkappa_list=1\nk_rule=h\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("h_list"));
    }

    #[test]
    fn kappa_labels() {
        assert_eq!(kappa_label(0.0), "0");
        assert_eq!(kappa_label(1.0), "1");
        assert_eq!(kappa_label(1e-3), "1e-3");
        assert_eq!(kappa_label(1e-9), "1e-9");
        assert_eq!(kappa_label(0.01), "1e-2");
    }
}
