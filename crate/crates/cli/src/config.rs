//! Experiment files: `key = value` lines under `[section]` headers, `#`
//! comments, optional double quotes around values.
//!
//! ```text
//! [uncertainty]
//! dim = 1
//! jump = 1.0@1.0          # one line per measure: mark@mass; mark@mass ...
//! vol = 0.5               # one line per matrix, row-major
//! vol = 1.0
//!
//! [coefficients]
//! preset = pure-driver
//! ```

use crate::expr::{Expr, ExprError};
use glevy_core::paths::packed_len;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    PureDriver,
    Ou,
    Manufactured1d,
    SpecialCase1d,
}

impl Preset {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "pure-driver" => Preset::PureDriver,
            "ou" => Preset::Ou,
            "manufactured-1d" => Preset::Manufactured1d,
            "special-case-1d" => Preset::SpecialCase1d,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::PureDriver => "pure-driver",
            Preset::Ou => "ou",
            Preset::Manufactured1d => "manufactured-1d",
            Preset::SpecialCase1d => "special-case-1d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyBlock {
    pub dim: usize,
    /// Atoms `(mark, mass)` per measure; an empty list is the zero measure.
    pub jumps: Vec<Vec<(Vec<f64>, f64)>>,
    /// Row-major `d × d` matrices.
    pub vols: Vec<Vec<f64>>,
    pub ellipticity: Option<f64>,
    /// Exponent of the small-jump moment condition.
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBlock {
    pub preset: Option<Preset>,
    /// Mean reversion of the `ou` preset.
    pub theta: f64,
    pub b: Option<Vec<Expr>>,
    pub h: Option<Vec<Expr>>,
    pub sigma: Option<Vec<Expr>>,
    pub f: Option<Vec<Expr>>,
    pub y0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Single,
    Product,
    Feedback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBlock {
    pub family: FamilyKind,
    pub intervals: usize,
    pub bins: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub bin_component: usize,
    pub cap: usize,
    pub truncate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericsBlock {
    pub horizon: f64,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalBlock {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub g1: Option<Vec<Expr>>,
    pub g2: Option<Vec<Expr>>,
    pub g3: Option<Expr>,
    pub start: f64,
    pub end: Option<f64>,
}

impl FunctionalBlock {
    pub fn is_empty(&self) -> bool {
        self.alpha.is_none()
            && self.beta.is_none()
            && self.gamma.is_none()
            && self.g1.is_none()
            && self.g2.is_none()
            && self.g3.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub nodes: usize,
    pub steps: Option<usize>,
    pub save_every: usize,
    /// Also estimate the value at `y0` by Monte Carlo and compare.
    pub compare: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionBlock {
    pub gamma: Option<Expr>,
    pub phi: Option<Vec<Expr>>,
    pub psi: Option<Vec<Expr>>,
    pub kernel: Option<Expr>,
    /// `zero` or `nonzero`; the verdict must match when set.
    pub expect: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChecksBlock {
    pub residual: f64,
    pub classical: f64,
    pub pide_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub uncertainty: UncertaintyBlock,
    pub coefficients: CoefficientBlock,
    pub scenarios: ScenarioBlock,
    pub numerics: NumericsBlock,
    pub functional: FunctionalBlock,
    pub witness: Option<Expr>,
    pub payoff: Option<Expr>,
    pub grid: GridBlock,
    pub decomposition: DecompositionBlock,
    pub checks: ChecksBlock,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            uncertainty: UncertaintyBlock {
                dim: 1,
                jumps: Vec::new(),
                vols: Vec::new(),
                ellipticity: None,
                q: 0.5,
            },
            coefficients: CoefficientBlock {
                preset: None,
                theta: 1.0,
                b: None,
                h: None,
                sigma: None,
                f: None,
                y0: None,
            },
            scenarios: ScenarioBlock {
                family: FamilyKind::Single,
                intervals: 1,
                bins: 2,
                bin_lo: -1.0,
                bin_hi: 1.0,
                bin_component: 1,
                cap: 4096,
                truncate: false,
            },
            numerics: NumericsBlock {
                horizon: 1.0,
                dt: 1.0 / 256.0,
                paths: 1024,
                seed: 0,
            },
            functional: FunctionalBlock {
                alpha: None,
                beta: None,
                gamma: None,
                g1: None,
                g2: None,
                g3: None,
                start: 0.0,
                end: None,
            },
            witness: None,
            payoff: None,
            grid: GridBlock {
                x_min: -6.0,
                x_max: 6.0,
                nodes: 241,
                steps: None,
                save_every: 0,
                compare: false,
            },
            decomposition: DecompositionBlock {
                gamma: None,
                phi: None,
                psi: None,
                kernel: None,
                expect: None,
            },
            checks: ChecksBlock {
                residual: 0.02,
                classical: 1e-12,
                pide_gap: 0.05,
            },
            output_dir: PathBuf::from("glevy-out"),
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("uncertainty", &["dim", "jump", "vol", "ellipticity", "q"]),
    ("coefficients", &["preset", "theta", "b", "h", "sigma", "f", "y0"]),
    (
        "scenarios",
        &["family", "intervals", "bins", "bin_lo", "bin_hi", "bin_component", "cap", "truncate"],
    ),
    ("numerics", &["horizon", "dt", "paths", "seed"]),
    ("functional", &["alpha", "beta", "gamma", "g1", "g2", "g3", "start", "end"]),
    ("witness", &["v"]),
    ("payoff", &["phi"]),
    ("grid", &["x_min", "x_max", "nodes", "steps", "save_every", "compare"]),
    ("decomposition", &["gamma", "phi", "psi", "kernel", "expect"]),
    ("checks", &["residual", "classical", "pide_gap"]),
    ("output", &["dir"]),
];

const REPEATABLE: &[(&str, &str)] = &[("uncertainty", "jump"), ("uncertainty", "vol")];

/// One `key = value` line.
#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    /// Column of the first value character.
    column: usize,
}

impl Entry {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError {
            line: self.line,
            column: self.column,
            message: message.into(),
        })
    }

    fn float(&self) -> Result<f64, ConfigError> {
        match parse_float(&self.value) {
            Some(v) => Ok(v),
            None => self.err(format!("expected a decimal number, got '{}'", self.value)),
        }
    }

    fn positive(&self) -> Result<f64, ConfigError> {
        let v = self.float()?;
        if v > 0.0 {
            Ok(v)
        } else {
            self.err(format!("expected a positive number, got {v}"))
        }
    }

    fn uint(&self) -> Result<u64, ConfigError> {
        self.value
            .parse::<u64>()
            .or_else(|_| self.err(format!("expected a non-negative integer, got '{}'", self.value)))
    }

    fn count(&self) -> Result<usize, ConfigError> {
        let v = self.uint()?;
        if v == 0 {
            return self.err("expected a positive integer");
        }
        usize::try_from(v).or_else(|_| self.err("integer too large"))
    }

    fn boolean(&self) -> Result<bool, ConfigError> {
        match self.value.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => self.err(format!("expected true or false, got '{other}'")),
        }
    }

    fn floats(&self) -> Result<Vec<f64>, ConfigError> {
        self.value
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| parse_float(s).map_or_else(|| self.err(format!("expected a decimal number, got '{s}'")), Ok))
            .collect()
    }

    fn expr_at(&self, text: &str, offset: usize) -> Result<Expr, ConfigError> {
        Expr::parse(text).map_err(|e: ExprError| ConfigError {
            line: self.line,
            column: self.column + offset + e.column - 1,
            message: format!("invalid expression: {}", e.message),
        })
    }

    fn expr(&self) -> Result<Expr, ConfigError> {
        self.expr_at(&self.value, 0)
    }

    /// Components separated by `;`.
    fn exprs(&self) -> Result<Vec<Expr>, ConfigError> {
        let mut out = Vec::new();
        let mut offset = 0;
        for part in self.value.split(';') {
            out.push(self.expr_at(part, offset)?);
            offset += part.chars().count() + 1;
        }
        Ok(out)
    }
}

/// Decimal with optional exponent; no `inf`, `nan` or hex.
fn parse_float(s: &str) -> Option<f64> {
    let ok = !s.is_empty()
        && s.chars().all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
        && s.chars().any(|c| c.is_ascii_digit());
    if !ok {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

type Table = BTreeMap<(String, String), Vec<Entry>>;

fn lex(text: &str) -> Result<Table, ConfigError> {
    let mut table = Table::new();
    let mut section: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.chars().take_while(|c| c.is_whitespace()).count() + 1;
        let err = |column: usize, message: String| ConfigError { line, column, message };
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(indent + trimmed.chars().count(), "expected ']'".into()))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(err(indent + 1, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some(eq) = trimmed.find('=') else {
            return Err(err(indent, "expected 'key = value' or '[section]'".into()));
        };
        let key = trimmed[..eq].trim();
        let Some(sec) = &section else {
            return Err(err(indent, format!("key '{key}' appears before any [section]")));
        };
        let keys = SECTIONS.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !keys.contains(&key) {
            return Err(err(indent, format!("unknown key '{key}' in [{sec}]")));
        }
        let after = &trimmed[eq + 1..];
        let lead = after.chars().take_while(|c| c.is_whitespace()).count();
        let mut value = after.trim().to_string();
        let mut column = indent + trimmed[..eq + 1].chars().count() + lead;
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = value[1..value.len() - 1].to_string();
            column += 1;
        }
        if value.is_empty() {
            return Err(err(column, format!("missing value for '{key}'")));
        }
        let slot = table.entry((sec.clone(), key.to_string())).or_default();
        if !slot.is_empty() && !REPEATABLE.contains(&(sec.as_str(), key)) {
            return Err(err(indent, format!("duplicate key '{key}' in [{sec}] (first on line {})", slot[0].line)));
        }
        slot.push(Entry { value, line, column });
    }
    Ok(table)
}

struct Reader {
    table: Table,
}

impl Reader {
    fn all(&self, sec: &str, key: &str) -> &[Entry] {
        self.table
            .get(&(sec.to_string(), key.to_string()))
            .map_or(&[], |v| v.as_slice())
    }

    fn one(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.all(sec, key).first()
    }
}

fn parse_jump(e: &Entry, dim: usize) -> Result<Vec<(Vec<f64>, f64)>, ConfigError> {
    if e.value == "none" {
        return Ok(Vec::new());
    }
    let mut atoms = Vec::new();
    for part in e.value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((mark, mass)) = part.split_once('@') else {
            return e.err(format!("expected mark@mass, got '{part}'"));
        };
        let mark: Vec<f64> = mark
            .split(',')
            .map(|s| parse_float(s.trim()).map_or_else(|| e.err(format!("bad mark component '{}'", s.trim())), Ok))
            .collect::<Result<_, _>>()?;
        let mass = parse_float(mass.trim()).map_or_else(|| e.err(format!("bad mass '{}'", mass.trim())), Ok)?;
        if mark.len() != dim {
            return e.err(format!("mark has {} components, expected {dim}", mark.len()));
        }
        if !(mass >= 0.0) {
            return e.err(format!("mass must be non-negative, got {mass}"));
        }
        atoms.push((mark, mass));
    }
    if atoms.is_empty() {
        return e.err("empty jump measure; write 'none' for the zero measure");
    }
    Ok(atoms)
}

/// Checks component count and the variables an expression may use.
fn check_exprs(e: &Entry, exprs: &[Expr], len: usize, dim: usize, allow_x: bool, allow_u: bool) -> Result<(), ConfigError> {
    if exprs.len() != len {
        return e.err(format!("expected {len} ';'-separated components, got {}", exprs.len()));
    }
    for ex in exprs {
        if ex.max_x() > if allow_x { dim } else { 0 } {
            return e.err(format!("'{ex}' uses x{} which is not available here", ex.max_x()));
        }
        if ex.max_u() > if allow_u { dim } else { 0 } {
            return e.err(format!("'{ex}' uses u{} which is not available here", ex.max_u()));
        }
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let r = Reader { table: lex(text)? };
    let mut cfg = ExperimentConfig::default();

    // [uncertainty]
    let u = &mut cfg.uncertainty;
    if let Some(e) = r.one("uncertainty", "dim") {
        u.dim = e.count()?;
    }
    let d = u.dim;
    for e in r.all("uncertainty", "jump") {
        u.jumps.push(parse_jump(e, d)?);
    }
    if u.jumps.is_empty() {
        u.jumps.push(Vec::new());
    }
    for e in r.all("uncertainty", "vol") {
        let v = e.floats()?;
        if v.len() != d * d {
            return e.err(format!("volatility needs {} entries, got {}", d * d, v.len()));
        }
        u.vols.push(v);
    }
    if u.vols.is_empty() {
        u.vols.push((0..d * d).map(|k| if k % (d + 1) == 0 { 1.0 } else { 0.0 }).collect());
    }
    if let Some(e) = r.one("uncertainty", "ellipticity") {
        u.ellipticity = Some(e.positive()?);
    }
    if let Some(e) = r.one("uncertainty", "q") {
        let q = e.float()?;
        if !(q > 0.0 && q < 1.0) {
            return e.err("q must lie in (0, 1)");
        }
        u.q = q;
    }

    // [coefficients]
    let c = &mut cfg.coefficients;
    if let Some(e) = r.one("coefficients", "preset") {
        let p = Preset::parse(&e.value).map_or_else(|| e.err(format!("unknown preset '{}'", e.value)), Ok)?;
        if p != Preset::PureDriver && d != 1 {
            return e.err(format!("preset {} is one-dimensional", p.name()));
        }
        c.preset = Some(p);
    }
    if let Some(e) = r.one("coefficients", "theta") {
        if c.preset != Some(Preset::Ou) {
            return e.err("theta applies to the ou preset only");
        }
        c.theta = e.float()?;
    }
    let np = packed_len(d);
    for (key, len, allow_u) in [("b", d, false), ("h", np * d, false), ("sigma", d * d, false), ("f", d, true)] {
        if let Some(e) = r.one("coefficients", key) {
            if c.preset.is_some() {
                return e.err(format!("'{key}' cannot be combined with a preset"));
            }
            let ex = e.exprs()?;
            check_exprs(e, &ex, len, d, true, allow_u)?;
            let slot = match key {
                "b" => &mut c.b,
                "h" => &mut c.h,
                "sigma" => &mut c.sigma,
                _ => &mut c.f,
            };
            *slot = Some(ex);
        }
    }
    if let Some(e) = r.one("coefficients", "y0") {
        let v = e.floats()?;
        if v.len() != d {
            return e.err(format!("y0 needs {d} entries, got {}", v.len()));
        }
        c.y0 = Some(v);
    }

    // [scenarios]
    let s = &mut cfg.scenarios;
    if let Some(e) = r.one("scenarios", "family") {
        s.family = match e.value.as_str() {
            "single" => FamilyKind::Single,
            "product" => FamilyKind::Product,
            "feedback" => FamilyKind::Feedback,
            other => return e.err(format!("unknown family '{other}' (single, product, feedback)")),
        };
    }
    if let Some(e) = r.one("scenarios", "intervals") {
        s.intervals = e.count()?;
    }
    if let Some(e) = r.one("scenarios", "bins") {
        s.bins = e.count()?;
    }
    if let Some(e) = r.one("scenarios", "bin_lo") {
        s.bin_lo = e.float()?;
    }
    if let Some(e) = r.one("scenarios", "bin_hi") {
        s.bin_hi = e.float()?;
    }
    if !(s.bin_lo < s.bin_hi) {
        let e = r.one("scenarios", "bin_hi").or(r.one("scenarios", "bin_lo")).cloned();
        if let Some(e) = e {
            return e.err("bin_lo must be below bin_hi");
        }
    }
    if let Some(e) = r.one("scenarios", "bin_component") {
        s.bin_component = e.count()?;
        if s.bin_component > d {
            return e.err(format!("bin_component must be at most {d}"));
        }
    }
    if let Some(e) = r.one("scenarios", "cap") {
        s.cap = e.count()?;
    }
    if let Some(e) = r.one("scenarios", "truncate") {
        s.truncate = e.boolean()?;
    }

    // [numerics]
    let n = &mut cfg.numerics;
    if let Some(e) = r.one("numerics", "horizon") {
        n.horizon = e.positive()?;
    }
    if let Some(e) = r.one("numerics", "dt") {
        n.dt = e.positive()?;
    }
    if let Some(e) = r.one("numerics", "paths") {
        n.paths = e.count()?;
    }
    if let Some(e) = r.one("numerics", "seed") {
        n.seed = e.uint()?;
    }

    // [functional]
    let f = &mut cfg.functional;
    for key in ["alpha", "beta", "gamma"] {
        if let Some(e) = r.one("functional", key) {
            let v = Some(e.float()?);
            match key {
                "alpha" => f.alpha = v,
                "beta" => f.beta = v,
                _ => f.gamma = v,
            }
        }
    }
    if let Some(e) = r.one("functional", "g1") {
        let ex = e.exprs()?;
        check_exprs(e, &ex, np, d, true, false)?;
        f.g1 = Some(ex);
    }
    if let Some(e) = r.one("functional", "g2") {
        let ex = e.exprs()?;
        check_exprs(e, &ex, d, d, true, false)?;
        f.g2 = Some(ex);
    }
    if let Some(e) = r.one("functional", "g3") {
        let ex = e.expr()?;
        check_exprs(e, std::slice::from_ref(&ex), 1, d, true, true)?;
        f.g3 = Some(ex);
    }
    if let Some(e) = r.one("functional", "start") {
        f.start = e.float()?;
    }
    if let Some(e) = r.one("functional", "end") {
        f.end = Some(e.float()?);
    }

    // [witness], [payoff]
    if let Some(e) = r.one("witness", "v") {
        let ex = e.expr()?;
        check_exprs(e, std::slice::from_ref(&ex), 1, d, true, false)?;
        cfg.witness = Some(ex);
    }
    if let Some(e) = r.one("payoff", "phi") {
        let ex = e.expr()?;
        check_exprs(e, std::slice::from_ref(&ex), 1, d, true, false)?;
        cfg.payoff = Some(ex);
    }

    // [grid]
    let g = &mut cfg.grid;
    if let Some(e) = r.one("grid", "x_min") {
        g.x_min = e.float()?;
    }
    if let Some(e) = r.one("grid", "x_max") {
        g.x_max = e.float()?;
        if !(g.x_min < g.x_max) {
            return e.err("x_max must exceed x_min");
        }
    }
    if let Some(e) = r.one("grid", "nodes") {
        g.nodes = e.count()?;
        if g.nodes < 3 {
            return e.err("at least three nodes are needed");
        }
    }
    if let Some(e) = r.one("grid", "steps") {
        g.steps = Some(e.count()?);
    }
    if let Some(e) = r.one("grid", "save_every") {
        g.save_every = e.uint()? as usize;
    }
    if let Some(e) = r.one("grid", "compare") {
        g.compare = e.boolean()?;
    }

    // [decomposition]
    let k = &mut cfg.decomposition;
    if let Some(e) = r.one("decomposition", "gamma") {
        let ex = e.expr()?;
        check_exprs(e, std::slice::from_ref(&ex), 1, d, true, false)?;
        k.gamma = Some(ex);
    }
    if let Some(e) = r.one("decomposition", "phi") {
        let ex = e.exprs()?;
        check_exprs(e, &ex, np, d, false, false)?;
        k.phi = Some(ex);
    }
    if let Some(e) = r.one("decomposition", "psi") {
        let ex = e.exprs()?;
        check_exprs(e, &ex, d, d, false, false)?;
        k.psi = Some(ex);
    }
    if let Some(e) = r.one("decomposition", "kernel") {
        let ex = e.expr()?;
        check_exprs(e, std::slice::from_ref(&ex), 1, d, false, true)?;
        k.kernel = Some(ex);
    }
    if let Some(e) = r.one("decomposition", "expect") {
        if e.value != "zero" && e.value != "nonzero" {
            return e.err("expect must be 'zero' or 'nonzero'");
        }
        k.expect = Some(e.value.clone());
    }

    // [checks]
    let ch = &mut cfg.checks;
    if let Some(e) = r.one("checks", "residual") {
        ch.residual = e.positive()?;
    }
    if let Some(e) = r.one("checks", "classical") {
        ch.classical = e.positive()?;
    }
    if let Some(e) = r.one("checks", "pide_gap") {
        ch.pide_gap = e.positive()?;
    }

    if let Some(e) = r.one("output", "dir") {
        cfg.output_dir = PathBuf::from(&e.value);
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[uncertainty]\njump = none\nvol = 1.0\n\n[coefficients]\npreset = pure-driver\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.numerics.dt, 1.0 / 256.0);
        assert_eq!(c.numerics.paths, 1024);
        assert_eq!(c.scenarios.family, FamilyKind::Single);
        assert_eq!(c.coefficients.preset, Some(Preset::PureDriver));
        assert_eq!(c.uncertainty.jumps, vec![Vec::<(Vec<f64>, f64)>::new()]);
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let text = "[uncertainty]\nvol = 1.0\n[coefficients]\n  sigmaa = 1\n";
        let e = parse_config(text).unwrap_err();
        assert_eq!((e.line, e.column), (4, 3));
        assert!(e.message.contains("sigmaa"), "{}", e.message);
    }

    #[test]
    fn expression_errors_point_inside_the_value() {
        let text = "[coefficients]\nb = x1 + ; 2\n";
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.line, 2);
        // "b = " is four characters; the missing operand sits after "x1 + ".
        assert_eq!(e.column, 10);
    }

    #[test]
    fn jumps_vols_and_quotes() {
        let text = "[uncertainty]\ndim = 2\njump = 1,0@0.5; 0,-1@2  # two atoms\njump = none\nvol = 1 0 0 1\nvol = 0.5, 0, 0, 0.5\n[payoff]\nphi = \"max(x1, x2) # not a comment\"\n";
        let c = parse_config(text);
        // The quoted '#' survives, and then fails as an expression character.
        let e = c.unwrap_err();
        assert_eq!(e.line, 8);
        let text = text.replace(" # not a comment", "");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.uncertainty.jumps.len(), 2);
        assert_eq!(c.uncertainty.jumps[0][1], (vec![0.0, -1.0], 2.0));
        assert_eq!(c.uncertainty.vols[1], vec![0.5, 0.0, 0.0, 0.5]);
        assert_eq!(c.payoff.unwrap().eval(0.0, &[1.0, 3.0], &[]), 3.0);
    }

    #[test]
    fn structural_errors() {
        assert!(parse_config("dim = 1\n").is_err());
        assert!(parse_config("[nope]\n").is_err());
        assert!(parse_config("[numerics]\ndt = 1\ndt = 2\n").is_err());
        assert!(parse_config("[numerics]\ndt = inf\n").is_err());
        assert!(parse_config("[numerics]\ndt = -1\n").is_err());
        assert!(parse_config("[numerics]\npaths = 0\n").is_err());
        assert!(parse_config("[uncertainty]\nvol = 1 2\n").is_err());
        assert!(parse_config("[uncertainty]\njump = 1@-1\n").is_err());
        assert!(parse_config("[coefficients]\npreset = heston\n").is_err());
        assert!(parse_config("[coefficients]\npreset = ou\nb = 1\n").is_err());
        assert!(parse_config("[coefficients]\nb = u1\n").is_err());
        assert!(parse_config("[uncertainty]\ndim = 2\n[coefficients]\npreset = ou\n").is_err());
        assert!(parse_config("[numerics]\ndt 0.1\n").is_err());
    }

    #[test]
    fn scientific_notation_is_accepted() {
        let c = parse_config("[numerics]\ndt = 9.765625e-4\nseed = 42\n").unwrap();
        assert_eq!(c.numerics.dt, 1.0 / 1024.0);
        assert_eq!(c.numerics.seed, 42);
    }
}
