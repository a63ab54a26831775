//! Flat key-value study configs.
//!
//! The format is a plain sectioned text file chosen for reproducible
//! archival: the manifest hashes the raw bytes, so everything that
//! defines an experiment lives here rather than in positional flags.
//!
//! ```text
//! # weak-convergence study against the exact oracle
//! [coefficient]
//! kind = power_law
//! alpha = 0.25
//!
//! [problem]
//! x0 = 1.0
//! horizon = 1.0
//!
//! [study]
//! kind = weak_ks
//! levels = 6,8,10,12
//! n_paths = 100000
//! seed = 42
//! ```
//!
//! `#` starts a comment, sections cannot repeat, keys cannot repeat
//! within a section, and unknown sections or keys are errors.

use nonsticky::estimators::EstimatorKind;
use nonsticky::studies::{StudyConfig, StudyKind};
use nonsticky::{CoefficientSpec, SdeProblem};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("section [{section}]: {msg}")]
    Schema { section: String, msg: String },
    #[error("missing required section [{0}]")]
    MissingSection(String),
}

fn schema_err(section: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        section: section.to_string(),
        msg: msg.into(),
    }
}

/// One `[name]` block with its entries in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<(String, String)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Parsed but untyped config document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Parse the raw sectioned key-value structure.
pub fn parse_document(text: &str) -> Result<Document, ConfigError> {
    let mut doc = Document::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                msg: "unterminated section header".into(),
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    msg: "empty section name".into(),
                });
            }
            if doc.section(name).is_some() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    msg: format!("duplicate section [{name}]"),
                });
            }
            doc.sections.push(Section {
                name: name.to_string(),
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            msg: "expected `key = value` or `[section]`".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                msg: "empty key".into(),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                msg: format!("key `{key}` has no value"),
            });
        }
        let section = doc.sections.last_mut().ok_or_else(|| ConfigError::Parse {
            line: line_no,
            msg: "entry before any [section] header".into(),
        })?;
        if section.entries.iter().any(|(k, _)| k == key) {
            return Err(ConfigError::Parse {
                line: line_no,
                msg: format!("duplicate key `{key}`"),
            });
        }
        section.entries.push((key.to_string(), value.to_string()));
    }
    Ok(doc)
}

fn parse_f64(section: &str, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| schema_err(section, format!("`{key}` is not a number: `{value}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(schema_err(section, format!("`{key}` must be finite")))
    }
}

fn parse_u64(section: &str, key: &str, value: &str) -> Result<u64, ConfigError> {
    value.parse().map_err(|_| {
        schema_err(
            section,
            format!("`{key}` is not a nonnegative integer: `{value}`"),
        )
    })
}

fn parse_list_f64(section: &str, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|item| parse_f64(section, key, item.trim()))
        .collect()
}

fn parse_list_u32(section: &str, key: &str, value: &str) -> Result<Vec<u32>, ConfigError> {
    value
        .split(',')
        .map(|item| {
            item.trim().parse().map_err(|_| {
                schema_err(
                    section,
                    format!("`{key}` entries must be integers: `{item}`"),
                )
            })
        })
        .collect()
}

fn parse_bool(section: &str, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(schema_err(
            section,
            format!("`{key}` must be true or false, got `{value}`"),
        )),
    }
}

fn check_known_keys(section: &Section, known: &[&str]) -> Result<(), ConfigError> {
    for (key, _) in &section.entries {
        if !known.contains(&key.as_str()) {
            return Err(schema_err(
                &section.name,
                format!("unknown key `{key}` (known: {})", known.join(", ")),
            ));
        }
    }
    Ok(())
}

/// Build the coefficient described by the `[coefficient]` section.
pub fn coefficient_from_section(section: &Section) -> Result<CoefficientSpec, ConfigError> {
    const S: &str = "coefficient";
    check_known_keys(
        section,
        &[
            "kind",
            "alpha",
            "value",
            "zero_set",
            "growth_constant",
            "attested_regular",
        ],
    )?;
    let kind = section
        .get("kind")
        .ok_or_else(|| schema_err(S, "missing `kind`"))?;
    let spec = match kind {
        "power_law" | "odd_power_law" => {
            let alpha = parse_f64(
                S,
                "alpha",
                section
                    .get("alpha")
                    .ok_or_else(|| schema_err(S, "power-law kinds need `alpha`"))?,
            )?;
            let spec = if kind == "power_law" {
                CoefficientSpec::power_law(alpha)
            } else {
                CoefficientSpec::odd_power_law(alpha)
            }
            .map_err(|e| schema_err(S, e.to_string()))?;
            if section.get("value").is_some() {
                return Err(schema_err(S, "`value` only applies to kind = constant"));
            }
            spec
        }
        "constant" => {
            let value = parse_f64(
                S,
                "value",
                section
                    .get("value")
                    .ok_or_else(|| schema_err(S, "constant kind needs `value`"))?,
            )?;
            if section.get("alpha").is_some() {
                return Err(schema_err(S, "`alpha` only applies to power-law kinds"));
            }
            CoefficientSpec::constant(value).map_err(|e| schema_err(S, e.to_string()))?
        }
        other => {
            return Err(schema_err(
                S,
                format!("unknown kind `{other}` (power_law, odd_power_law, constant)"),
            ))
        }
    };
    // Declared zero set and growth constant must agree with the kind.
    if let Some(zs) = section.get("zero_set") {
        let declared = parse_list_f64(S, "zero_set", zs)?;
        if declared != spec.zero_set() {
            return Err(schema_err(
                S,
                format!(
                    "declared zero_set {declared:?} does not match the kind's zero set {:?}",
                    spec.zero_set()
                ),
            ));
        }
    }
    if let Some(gc) = section.get("growth_constant") {
        let k = parse_f64(S, "growth_constant", gc)?;
        if k < spec.growth_constant() {
            return Err(schema_err(
                S,
                format!(
                    "growth_constant {k} is below the kind's bound {}",
                    spec.growth_constant()
                ),
            ));
        }
    }
    if let Some(flag) = section.get("attested_regular") {
        // The flag records the user's attestation of a.e. continuity for
        // custom kinds; built-ins are continuous, so refusing it is the
        // only state worth rejecting.
        if !parse_bool(S, "attested_regular", flag)? {
            return Err(schema_err(
                S,
                "attested_regular = false: refusing to run with an unattested coefficient",
            ));
        }
    }
    Ok(spec)
}

fn problem_from_sections(doc: &Document) -> Result<SdeProblem, ConfigError> {
    let coeff_section = doc
        .section("coefficient")
        .ok_or_else(|| ConfigError::MissingSection("coefficient".into()))?;
    let coefficient = coefficient_from_section(coeff_section)?;
    let section = doc
        .section("problem")
        .ok_or_else(|| ConfigError::MissingSection("problem".into()))?;
    check_known_keys(section, &["x0", "horizon"])?;
    let x0 = parse_f64(
        "problem",
        "x0",
        section
            .get("x0")
            .ok_or_else(|| schema_err("problem", "missing `x0`"))?,
    )?;
    let horizon = match section.get("horizon") {
        Some(v) => parse_f64("problem", "horizon", v)?,
        None => 1.0,
    };
    SdeProblem::new(coefficient, x0, horizon).map_err(|e| schema_err("problem", e.to_string()))
}

/// Coefficient plus problem, the inputs `dump-path` needs.
pub fn parse_problem_spec(text: &str) -> Result<SdeProblem, ConfigError> {
    problem_from_sections(&parse_document(text)?)
}

/// Coefficient alone, the input `classify` needs.
pub fn parse_coefficient_spec(text: &str) -> Result<CoefficientSpec, ConfigError> {
    let doc = parse_document(text)?;
    let section = doc
        .section("coefficient")
        .ok_or_else(|| ConfigError::MissingSection("coefficient".into()))?;
    coefficient_from_section(section)
}

/// Full study definition: coefficient, problem and study sections.
pub fn parse_run_spec(text: &str) -> Result<StudyConfig, ConfigError> {
    const S: &str = "study";
    let doc = parse_document(text)?;
    let problem = problem_from_sections(&doc)?;
    let section = doc
        .section(S)
        .ok_or_else(|| ConfigError::MissingSection(S.into()))?;
    check_known_keys(
        section,
        &[
            "kind",
            "levels",
            "n_paths",
            "seed",
            "p",
            "finest_level",
            "z",
            "eps_ladder",
            "estimator",
            "dominance_factor",
            "slope_tolerance",
            "ks_final_p_min",
            "monotonicity_slack",
        ],
    )?;
    let kind = match section
        .get("kind")
        .ok_or_else(|| schema_err(S, "missing `kind`"))?
    {
        "weak_ks" => StudyKind::WeakKs,
        "strong_cauchy" => StudyKind::StrongCauchy,
        "abs_strong_cauchy" => StudyKind::AbsStrongCauchy,
        "occupation_scaling" => StudyKind::OccupationScaling,
        "trap_control" => StudyKind::TrapControl,
        other => {
            return Err(schema_err(
                S,
                format!(
                    "unknown study kind `{other}` (weak_ks, strong_cauchy, abs_strong_cauchy, \
                     occupation_scaling, trap_control)"
                ),
            ))
        }
    };
    let levels = parse_list_u32(
        S,
        "levels",
        section
            .get("levels")
            .ok_or_else(|| schema_err(S, "missing `levels`"))?,
    )?;
    let n_paths = parse_u64(
        S,
        "n_paths",
        section
            .get("n_paths")
            .ok_or_else(|| schema_err(S, "missing `n_paths`"))?,
    )? as usize;
    let seed = match section.get("seed") {
        Some(v) => parse_u64(S, "seed", v)?,
        None => 0,
    };

    let mut config = StudyConfig::new(problem, kind, levels, n_paths, seed);
    if let Some(v) = section.get("p") {
        config.p = parse_f64(S, "p", v)?;
    }
    if let Some(v) = section.get("finest_level") {
        config.finest_level = Some(parse_u64(S, "finest_level", v)? as u32);
    }
    if let Some(v) = section.get("z") {
        config.z = parse_f64(S, "z", v)?;
    }
    if let Some(v) = section.get("eps_ladder") {
        config.eps_ladder = parse_list_f64(S, "eps_ladder", v)?;
    }
    if let Some(v) = section.get("estimator") {
        config.estimator = match v {
            "tent" => EstimatorKind::Tent,
            "indicator" => EstimatorKind::Indicator,
            other => {
                return Err(schema_err(
                    S,
                    format!("unknown estimator `{other}` (tent, indicator)"),
                ))
            }
        };
    }
    if let Some(v) = section.get("dominance_factor") {
        config.dominance_factor = parse_f64(S, "dominance_factor", v)?;
    }
    if let Some(v) = section.get("slope_tolerance") {
        config.slope_tolerance = parse_f64(S, "slope_tolerance", v)?;
    }
    if let Some(v) = section.get("ks_final_p_min") {
        config.ks_final_p_min = parse_f64(S, "ks_final_p_min", v)?;
    }
    if let Some(v) = section.get("monotonicity_slack") {
        config.monotonicity_slack = parse_f64(S, "monotonicity_slack", v)?;
    }
    Ok(config)
}

/// Render a coefficient back into its config section.
pub fn coefficient_to_config(spec: &CoefficientSpec) -> String {
    use nonsticky::CoefficientKind;
    let mut out = String::from("[coefficient]\n");
    match spec.kind() {
        CoefficientKind::PowerLaw { alpha } => {
            out.push_str("kind = power_law\n");
            out.push_str(&format!("alpha = {alpha}\n"));
        }
        CoefficientKind::OddPowerLaw { alpha } => {
            out.push_str("kind = odd_power_law\n");
            out.push_str(&format!("alpha = {alpha}\n"));
        }
        CoefficientKind::Custom { label, .. } => {
            // Only the constant custom kind has a config spelling.
            out.push_str("kind = constant\n");
            if let Some(v) = label
                .strip_prefix("const(")
                .and_then(|s| s.strip_suffix(')'))
            {
                out.push_str(&format!("value = {v}\n"));
            }
        }
    }
    if !spec.zero_set().is_empty() {
        let zs: Vec<String> = spec.zero_set().iter().map(|z| z.to_string()).collect();
        out.push_str(&format!("zero_set = {}\n", zs.join(",")));
    }
    out.push_str(&format!("growth_constant = {}\n", spec.growth_constant()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEAK: &str = "\
# demo
[coefficient]
kind = power_law
alpha = 0.25

[problem]
x0 = 1.0
horizon = 1.0

[study]
kind = weak_ks
levels = 6,8,10,12
n_paths = 1000
seed = 42
";

    #[test]
    fn parses_a_full_study() {
        let cfg = parse_run_spec(WEAK).unwrap();
        assert_eq!(cfg.kind, StudyKind::WeakKs);
        assert_eq!(cfg.levels, vec![6, 8, 10, 12]);
        assert_eq!(cfg.n_paths, 1000);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.problem.x0, 1.0);
        assert_eq!(cfg.problem.coefficient.alpha(), Some(0.25));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let doc = parse_document("# top\n\n[a]\nx = 1 # trailing\n").unwrap();
        assert_eq!(doc.sections.len(), 1);
        assert_eq!(doc.section("a").unwrap().get("x"), Some("1"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(
            parse_document("[a]\nnonsense\n").unwrap_err(),
            ConfigError::Parse {
                line: 2,
                msg: "expected `key = value` or `[section]`".into()
            }
        );
        assert!(matches!(
            parse_document("x = 1\n").unwrap_err(),
            ConfigError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_document("[a]\nx = 1\nx = 2\n").unwrap_err(),
            ConfigError::Parse { line: 3, .. }
        ));
        assert!(matches!(
            parse_document("[a]\n[a]\n").unwrap_err(),
            ConfigError::Parse { line: 2, .. }
        ));
        assert!(matches!(
            parse_document("[oops\n").unwrap_err(),
            ConfigError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_document("[a]\nx =\n").unwrap_err(),
            ConfigError::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn missing_alpha_is_a_schema_error() {
        let text = "[coefficient]\nkind = power_law\n";
        assert!(matches!(
            parse_coefficient_spec(text).unwrap_err(),
            ConfigError::Schema { .. }
        ));
    }

    #[test]
    fn unknown_keys_and_kinds_are_rejected() {
        let text = "[coefficient]\nkind = power_law\nalpha = 0.25\nbogus = 1\n";
        assert!(parse_coefficient_spec(text).is_err());
        let text = "[coefficient]\nkind = parabola\n";
        assert!(parse_coefficient_spec(text).is_err());
    }

    #[test]
    fn zero_set_declaration_is_validated() {
        let ok = "[coefficient]\nkind = power_law\nalpha = 0.25\nzero_set = 0\n";
        assert!(parse_coefficient_spec(ok).is_ok());
        let bad = "[coefficient]\nkind = power_law\nalpha = 0.25\nzero_set = 1\n";
        assert!(parse_coefficient_spec(bad).is_err());
        let constant = "[coefficient]\nkind = constant\nvalue = 1.0\n";
        let spec = parse_coefficient_spec(constant).unwrap();
        assert!(spec.zero_set().is_empty());
    }

    #[test]
    fn study_defaults_apply() {
        let text = WEAK.replace("seed = 42\n", "");
        let cfg = parse_run_spec(&text).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.ks_final_p_min, 0.01);
        assert_eq!(cfg.eps_ladder, vec![0.2, 0.1, 0.05, 0.025]);
    }

    #[test]
    fn occupation_fields_round_trip() {
        let text = "\
[coefficient]
kind = power_law
alpha = 0.25

[problem]
x0 = 0.0

[study]
kind = occupation_scaling
levels = 16
n_paths = 1000
z = 0.0
eps_ladder = 0.2, 0.1, 0.05
estimator = tent
dominance_factor = 8
slope_tolerance = 0.2
";
        let cfg = parse_run_spec(text).unwrap();
        assert_eq!(cfg.kind, StudyKind::OccupationScaling);
        assert_eq!(cfg.eps_ladder, vec![0.2, 0.1, 0.05]);
        assert_eq!(cfg.dominance_factor, 8.0);
        assert_eq!(cfg.problem.horizon, 1.0);
    }

    #[test]
    fn coefficient_round_trips_through_config_text() {
        for text in [
            "[coefficient]\nkind = power_law\nalpha = 0.3\n",
            "[coefficient]\nkind = odd_power_law\nalpha = 0.45\n",
            "[coefficient]\nkind = constant\nvalue = 2.5\n",
        ] {
            let spec = parse_coefficient_spec(text).unwrap();
            let rendered = coefficient_to_config(&spec);
            let back = parse_coefficient_spec(&rendered).unwrap();
            assert_eq!(back.describe(), spec.describe(), "round trip of {text}");
        }
    }

    #[test]
    fn refusing_attestation_is_an_error() {
        let text = "[coefficient]\nkind = constant\nvalue = 1.0\nattested_regular = false\n";
        assert!(parse_coefficient_spec(text).is_err());
        let text = "[coefficient]\nkind = constant\nvalue = 1.0\nattested_regular = true\n";
        assert!(parse_coefficient_spec(text).is_ok());
    }
}
