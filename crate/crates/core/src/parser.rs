//! Line-based pulse-program format (`.pseq`).
//!
//! ```text
//! # comment
//! init pseudo-pure 1            # or: pseudo-boltzmann | boltzmann <T_K> <B_mT> | pure <level>
//! pulse I 1 2 90
//! pulse S 1 3 -180 phase=30
//! measure S 1 3
//! ```
//!
//! One statement per line; `init` (at most once) precedes all pulses and
//! `measure` (at most once) follows them. Angles are degrees. Transitions are
//! checked against the channel selection rules while parsing.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::config::{BOHR_MAGNETON, BOLTZMANN};
use crate::numfmt::fmt_sig;
use crate::prep::{boltzmann_density, pseudo_boltzmann, pseudo_pure};
use crate::pulse::{Channel, PulseProgram, PulseStep, Transition};
use crate::spin::{check_level, fictitious_z, DensityMatrix, Operator};
use crate::Result;

/// Significant digits used by [`format`].
pub const FORMAT_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitDirective {
    PseudoPure(usize),
    PseudoBoltzmann,
    /// High-temperature Boltzmann state at `temperature` K and `field_mt` mT.
    Boltzmann {
        temperature: f64,
        field_mt: f64,
    },
    Pure(usize),
}

impl InitDirective {
    /// Density matrix of the directive. Boltzmann uses the linear
    /// polarization `μ_B B / (k_B T)`.
    pub fn density(&self) -> Result<DensityMatrix> {
        match *self {
            InitDirective::PseudoPure(l) | InitDirective::Pure(l) => pseudo_pure(l),
            InitDirective::PseudoBoltzmann => Ok(pseudo_boltzmann()),
            InitDirective::Boltzmann {
                temperature,
                field_mt,
            } => {
                let k = BOHR_MAGNETON * field_mt * 1e-3 / (BOLTZMANN * temperature);
                boltzmann_density(k)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocStep {
    pub channel: Channel,
    pub j: usize,
    pub k: usize,
    pub angle_deg: f64,
    /// Normalized to (−180, 180].
    pub phase_deg: f64,
}

impl DocStep {
    pub fn to_step(&self) -> Result<PulseStep> {
        PulseStep::new(
            self.channel,
            self.j,
            self.k,
            deg_to_rad(self.angle_deg),
            deg_to_rad(self.phase_deg),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measure {
    pub channel: Channel,
    pub j: usize,
    pub k: usize,
}

impl Measure {
    /// `2·Sz^{jk}`.
    pub fn observable(&self) -> Operator {
        fictitious_z(self.j, self.k)
            .expect("validated at parse time")
            .scale(2.0)
    }
}

/// Parsed `.pseq` document. Equality ignores source line numbers.
#[derive(Debug, Clone, Default)]
pub struct ProgramDocument {
    pub init: Option<InitDirective>,
    pub steps: Vec<DocStep>,
    pub measure: Option<Measure>,
    /// 1-based source line of each statement, in statement order.
    pub lines: Vec<usize>,
}

impl PartialEq for ProgramDocument {
    fn eq(&self, other: &Self) -> bool {
        self.init == other.init && self.steps == other.steps && self.measure == other.measure
    }
}

impl ProgramDocument {
    pub fn program(&self) -> Result<PulseProgram> {
        let steps = self
            .steps
            .iter()
            .map(DocStep::to_step)
            .collect::<Result<Vec<_>>>()?;
        Ok(PulseProgram::new(steps))
    }
}

/// Degrees to radians; multiples of 15° map to reduced rational multiples
/// of π.
pub fn deg_to_rad(deg: f64) -> f64 {
    let units = deg / 15.0;
    if units.fract() == 0.0 && units.abs() < 1e9 {
        let (p, q) = reduce(units as i64, 12);
        PI * p as f64 / q as f64
    } else {
        deg.to_radians()
    }
}

fn reduce(p: i64, q: i64) -> (i64, i64) {
    let (mut a, mut b) = (p.abs(), q);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    let g = a.max(1);
    (p / g, q / g)
}

pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

fn normalize_deg(d: f64) -> f64 {
    if d > -180.0 && d <= 180.0 {
        return d;
    }
    let r = d.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (bi, ch) in code.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &code[s..bi],
                    column: 0,
                });
            }
        } else if start.is_none() {
            start = Some(bi);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &code[s..],
            column: 0,
        });
    }
    // Columns count characters, not bytes.
    for t in &mut out {
        let byte = t.text.as_ptr() as usize - code.as_ptr() as usize;
        t.column = code[..byte].chars().count() + 1;
    }
    out
}

struct LineCtx<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    end_column: usize,
}

impl<'a> LineCtx<'a> {
    fn err_at(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn token(&self, i: usize, what: &str) -> std::result::Result<&Token<'a>, ParseError> {
        self.tokens
            .get(i)
            .ok_or_else(|| self.err_at(self.end_column, format!("expected {what}")))
    }

    fn expect_len(&self, n: usize) -> std::result::Result<(), ParseError> {
        match self.tokens.get(n) {
            Some(t) => Err(self.err_at(t.column, format!("unexpected token '{}'", t.text))),
            None => Ok(()),
        }
    }

    fn number(&self, i: usize, what: &str) -> std::result::Result<f64, ParseError> {
        let t = self.token(i, what)?;
        parse_number(t.text)
            .ok_or_else(|| self.err_at(t.column, format!("invalid {what} '{}'", t.text)))
    }

    fn level(&self, i: usize) -> std::result::Result<usize, ParseError> {
        let t = self.token(i, "level")?;
        t.text
            .parse::<usize>()
            .ok()
            .filter(|l| check_level(*l).is_ok())
            .ok_or_else(|| self.err_at(t.column, format!("level must be 1..4, got '{}'", t.text)))
    }

    fn channel(&self, i: usize) -> std::result::Result<Channel, ParseError> {
        let t = self.token(i, "channel S or I")?;
        t.text.parse::<Channel>().map_err(|_| {
            self.err_at(
                t.column,
                format!("channel must be S or I, got '{}'", t.text),
            )
        })
    }

    fn transition(&self, first: usize) -> std::result::Result<(Channel, usize, usize), ParseError> {
        let channel = self.channel(first)?;
        let j = self.level(first + 1)?;
        let k = self.level(first + 2)?;
        Transition::for_channel(channel, j, k)
            .map_err(|e| self.err_at(self.tokens[first + 1].column, e.to_string()))?;
        Ok((channel, j, k))
    }
}

/// Decimal with optional sign ('-', '+' or U+2212); no exponents.
fn parse_number(s: &str) -> Option<f64> {
    let (neg, body) = if let Some(r) = s.strip_prefix('-').or_else(|| s.strip_prefix('\u{2212}')) {
        (true, r)
    } else {
        (false, s.strip_prefix('+').unwrap_or(s))
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if int.is_empty() && frac.is_empty() || !digits(int) || !digits(frac) {
        return None;
    }
    if body.ends_with('.') && frac.is_empty() && int.is_empty() {
        return None;
    }
    let v: f64 = format!("{}{int}.{frac}0", if neg { "-" } else { "" })
        .parse()
        .ok()?;
    v.is_finite().then_some(v)
}

pub fn parse(text: &str) -> std::result::Result<ProgramDocument, ParseError> {
    let mut doc = ProgramDocument::default();
    for (idx, raw) in text.lines().enumerate() {
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let ctx = LineCtx {
            line: idx + 1,
            end_column: raw.split('#').next().unwrap_or("").chars().count() + 1,
            tokens,
        };
        let head = &ctx.tokens[0];
        match head.text {
            "init" => {
                if doc.init.is_some() {
                    return Err(ctx.err_at(head.column, "duplicate init directive"));
                }
                if !doc.steps.is_empty() || doc.measure.is_some() {
                    return Err(ctx.err_at(head.column, "init must precede all pulses"));
                }
                let kind = ctx.token(1, "init kind")?;
                let init = match kind.text {
                    "pseudo-pure" | "pure" => {
                        let l = ctx.level(2)?;
                        ctx.expect_len(3)?;
                        if kind.text == "pure" {
                            InitDirective::Pure(l)
                        } else {
                            InitDirective::PseudoPure(l)
                        }
                    }
                    "pseudo-boltzmann" => {
                        ctx.expect_len(2)?;
                        InitDirective::PseudoBoltzmann
                    }
                    "boltzmann" => {
                        let temperature = ctx.number(2, "temperature")?;
                        let field_mt = ctx.number(3, "field")?;
                        ctx.expect_len(4)?;
                        if temperature <= 0.0 {
                            return Err(
                                ctx.err_at(ctx.tokens[2].column, "temperature must be positive")
                            );
                        }
                        if field_mt <= 0.0 {
                            return Err(ctx.err_at(ctx.tokens[3].column, "field must be positive"));
                        }
                        let init = InitDirective::Boltzmann {
                            temperature,
                            field_mt,
                        };
                        if let Err(e) = init.density() {
                            return Err(ctx.err_at(ctx.tokens[2].column, e.to_string()));
                        }
                        init
                    }
                    other => {
                        return Err(ctx.err_at(kind.column, format!("unknown init kind '{other}'")));
                    }
                };
                doc.init = Some(init);
            }
            "pulse" => {
                if doc.measure.is_some() {
                    return Err(ctx.err_at(head.column, "pulse after measure directive"));
                }
                let (channel, j, k) = ctx.transition(1)?;
                let angle_deg = ctx.number(4, "angle")?;
                if angle_deg.abs() > 360.0 {
                    return Err(
                        ctx.err_at(ctx.tokens[4].column, "flip angle must lie within ±360°")
                    );
                }
                let mut phase_deg = 0.0;
                if let Some(t) = ctx.tokens.get(5) {
                    let value = t.text.strip_prefix("phase=").ok_or_else(|| {
                        ctx.err_at(t.column, format!("expected phase=<deg>, got '{}'", t.text))
                    })?;
                    phase_deg = parse_number(value).ok_or_else(|| {
                        ctx.err_at(t.column + 6, format!("invalid phase '{value}'"))
                    })?;
                    ctx.expect_len(6)?;
                }
                doc.steps.push(DocStep {
                    channel,
                    j,
                    k,
                    angle_deg,
                    phase_deg: normalize_deg(phase_deg),
                });
            }
            "measure" => {
                if doc.measure.is_some() {
                    return Err(ctx.err_at(head.column, "duplicate measure directive"));
                }
                let (channel, j, k) = ctx.transition(1)?;
                ctx.expect_len(4)?;
                doc.measure = Some(Measure { channel, j, k });
            }
            other => {
                return Err(ctx.err_at(head.column, format!("unknown statement '{other}'")));
            }
        }
        doc.lines.push(idx + 1);
    }
    Ok(doc)
}

/// Canonical text: one statement per line, 6 significant digits, phase
/// omitted when zero.
pub fn format(doc: &ProgramDocument) -> String {
    let n = |x: f64| fmt_sig(x, FORMAT_DIGITS);
    let mut out = String::new();
    if let Some(init) = doc.init {
        match init {
            InitDirective::PseudoPure(l) => writeln!(out, "init pseudo-pure {l}"),
            InitDirective::Pure(l) => writeln!(out, "init pure {l}"),
            InitDirective::PseudoBoltzmann => writeln!(out, "init pseudo-boltzmann"),
            InitDirective::Boltzmann {
                temperature,
                field_mt,
            } => {
                writeln!(out, "init boltzmann {} {}", n(temperature), n(field_mt))
            }
        }
        .expect("write to String");
    }
    for s in &doc.steps {
        write!(
            out,
            "pulse {} {} {} {}",
            s.channel,
            s.j,
            s.k,
            n(s.angle_deg)
        )
        .expect("write to String");
        if s.phase_deg != 0.0 {
            write!(out, " phase={}", n(s.phase_deg)).expect("write to String");
        }
        out.push('\n');
    }
    if let Some(m) = doc.measure {
        writeln!(out, "measure {} {} {}", m.channel, m.j, m.k).expect("write to String");
    }
    out
}
