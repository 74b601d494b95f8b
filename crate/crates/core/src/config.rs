//! Experiment configuration: a flat `key = value` file format, box-side
//! lists, and the recipe that turns a configuration into a Gabor system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::GaborSystem;
use crate::pointset::{PointSet, RefLattice, TorusParams};
use crate::signal::WindowKind;

/// Parse `key = value` lines. `#` starts a comment; blank lines are skipped;
/// keys are case-sensitive and may appear once.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::Parse(format!(
                "line {}: bad key {key:?}",
                lineno + 1
            )));
        }
        if out.iter().any(|(k, _)| k == key) {
            return Err(Error::Parse(format!(
                "line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

/// Parse a comma-separated list of box sides. Each item is `N`, or a range
/// `A..B` (every even side from `A` to `B` inclusive) or `A..B:S` (step `S`).
/// The result is sorted and deduplicated; every side must be even and >= 2.
pub fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    const MAX_SIDES: usize = 1 << 16;
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(Error::Parse("empty item in N list".into()));
        }
        if let Some((start, rest)) = item.split_once("..") {
            let (end, step) = match rest.split_once(':') {
                Some((end, step)) => (end, parse_side_number(step)?),
                None => (rest, 2),
            };
            let (start, end) = (parse_side_number(start)?, parse_side_number(end)?);
            if step == 0 || start > end {
                return Err(Error::Parse(format!("bad range {item:?}")));
            }
            if (end - start) / step >= MAX_SIDES || out.len() + (end - start) / step >= MAX_SIDES {
                return Err(Error::Parse(format!("range {item:?} is too long")));
            }
            out.extend((start..=end).step_by(step));
        } else {
            out.push(parse_side_number(item)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if let Some(&bad) = out.iter().find(|&&n| n < 2 || n % 2 == 1) {
        return Err(Error::Parse(format!(
            "box side {bad} must be even and at least 2"
        )));
    }
    Ok(out)
}

fn parse_side_number(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad box side {s:?}")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Parse(format!("bad boolean {s:?}"))),
    }
}

fn parse_number<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("{key}: bad value {s:?}")))
}

/// Every parameter an experiment can take. Each report embeds the
/// configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(rename = "L")]
    pub l: usize,
    pub window: String,
    pub lattice: String,
    /// Second lattice whose points are added to the first (union of lattices).
    pub union: Option<String>,
    /// Reference lattice for localization and the rounding map.
    pub reflattice: String,
    pub ref_window: String,
    pub jitter: f64,
    pub seed: u64,
    #[serde(with = "exponent")]
    pub p: f64,
    /// Box sides; empty means [`ExperimentConfig::default_sides`].
    pub sides: Vec<usize>,
    pub iterative: bool,
    /// Point set file (CSV `x,omega` or JSON) replacing the lattice.
    pub points: Option<String>,
    /// Excess removal: fraction per cell and the cell lattice.
    pub fraction: f64,
    pub cell: String,
    /// Counterexample truncation size.
    pub size: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            l: 144,
            window: "gaussian".into(),
            lattice: "4x6".into(),
            union: None,
            reflattice: "4x4".into(),
            ref_window: "gaussian".into(),
            jitter: 0.0,
            seed: 1,
            p: 2.0,
            sides: Vec::new(),
            iterative: false,
            points: None,
            fraction: 1.0 / 6.0,
            cell: "12x12".into(),
            size: None,
        }
    }
}

impl ExperimentConfig {
    pub const KEYS: [&'static str; 15] = [
        "L",
        "window",
        "lattice",
        "union",
        "reflattice",
        "ref_window",
        "jitter",
        "seed",
        "p",
        "N",
        "iterative",
        "points",
        "fraction",
        "cell",
        "size",
    ];

    /// Set one parameter from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let opt = |v: &str| {
            if v.is_empty() || v == "none" {
                None
            } else {
                Some(v.to_string())
            }
        };
        match key {
            "L" | "l" => self.l = parse_number(key, value)?,
            "window" => self.window = value.into(),
            "lattice" => self.lattice = value.into(),
            "union" => self.union = opt(value),
            "reflattice" => self.reflattice = value.into(),
            "ref_window" | "ref" => self.ref_window = value.into(),
            "jitter" | "delta" => {
                let v: f64 = parse_number(key, value)?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Parse(format!("{key}: must be finite and >= 0")));
                }
                self.jitter = v;
            }
            "seed" => self.seed = parse_number(key, value)?,
            "p" => {
                let v: f64 = if value == "inf" {
                    f64::INFINITY
                } else {
                    parse_number(key, value)?
                };
                if !(v >= 1.0) {
                    return Err(Error::InvalidExponent(v));
                }
                self.p = v;
            }
            "N" | "sides" => self.sides = parse_n_list(value)?,
            "iterative" => self.iterative = parse_bool(value)?,
            "points" => self.points = opt(value),
            "fraction" => self.fraction = parse_number(key, value)?,
            "cell" => self.cell = value.into(),
            "size" => self.size = Some(parse_number(key, value)?),
            _ => {
                return Err(Error::Parse(format!(
                    "unknown key {key:?} (known: {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Apply every `key = value` line of a configuration file.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_key_values(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn torus(&self) -> Result<TorusParams> {
        TorusParams::new(self.l)
    }

    pub fn window_kind(&self) -> Result<WindowKind> {
        WindowKind::parse(&self.window)
    }

    pub fn lattice(&self) -> Result<RefLattice> {
        RefLattice::parse(&self.lattice, self.torus()?)
    }

    pub fn reference_lattice(&self) -> Result<RefLattice> {
        RefLattice::parse(&self.reflattice, self.torus()?)
    }

    /// Even sides `L/8, L/4, L/2, L` (rounded down to even, at least 2).
    pub fn default_sides(l: usize) -> Vec<usize> {
        let mut v: Vec<usize> = [8, 4, 2, 1]
            .iter()
            .map(|k| ((l / k) & !1).max(2))
            .filter(|&n| n <= l)
            .collect();
        v.dedup();
        v
    }

    /// The configured sides, validated against L.
    pub fn sides(&self) -> Result<Vec<usize>> {
        let torus = self.torus()?;
        let sides = if self.sides.is_empty() {
            Self::default_sides(self.l)
        } else {
            self.sides.clone()
        };
        for &n in &sides {
            torus.check_box(n)?;
        }
        Ok(sides)
    }

    /// The point set: loaded from `points_text` when given, else the lattice
    /// (plus the union lattice), jittered by `jitter` with `seed`.
    pub fn point_set(&self, points_text: Option<&str>) -> Result<PointSet> {
        let torus = self.torus()?;
        let base = match points_text {
            Some(text) if text.trim_start().starts_with('{') => {
                let ps = PointSet::from_json(text)?;
                if ps.torus() != torus {
                    return Err(Error::LengthMismatch {
                        expected: self.l,
                        got: ps.torus().len(),
                    });
                }
                ps
            }
            Some(text) => PointSet::from_csv(text, torus)?,
            None => {
                let mut ps = PointSet::lattice_points(self.lattice()?, torus);
                if let Some(u) = &self.union {
                    ps = ps.union(&PointSet::lattice_points(
                        RefLattice::parse(u, torus)?,
                        torus,
                    ))?;
                }
                ps
            }
        };
        Ok(if self.jitter > 0.0 {
            base.jitter(self.jitter, self.seed)
        } else {
            base
        })
    }

    pub fn system(&self, points_text: Option<&str>) -> Result<GaborSystem> {
        let torus = self.torus()?;
        GaborSystem::new(
            self.window_kind()?.build(torus)?,
            self.point_set(points_text)?,
        )
    }

    /// Canonical `key = value` rendering, readable by [`ExperimentConfig::apply_file`].
    pub fn to_key_values(&self) -> String {
        let opt = |v: &Option<String>| v.clone().unwrap_or_else(|| "none".into());
        let sides = self
            .sides
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut out = format!(
            "L = {}\nwindow = {}\nlattice = {}\nunion = {}\nreflattice = {}\nref_window = {}\njitter = {}\nseed = {}\np = {}\n",
            self.l,
            self.window,
            self.lattice,
            opt(&self.union),
            self.reflattice,
            self.ref_window,
            self.jitter,
            self.seed,
            if self.p.is_infinite() { "inf".into() } else { self.p.to_string() },
        );
        if !sides.is_empty() {
            out.push_str(&format!("N = {sides}\n"));
        }
        out.push_str(&format!(
            "iterative = {}\npoints = {}\nfraction = {}\ncell = {}\n",
            self.iterative,
            opt(&self.points),
            self.fraction,
            self.cell
        ));
        if let Some(s) = self.size {
            out.push_str(&format!("size = {s}\n"));
        }
        out
    }
}

/// `p` as a JSON number, or the string `"inf"`.
mod exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(p) => Ok(p),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad exponent {t:?}"))),
        }
    }
}
