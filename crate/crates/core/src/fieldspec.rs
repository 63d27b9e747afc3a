//! Textual field specifications: `constant:<v>`, `csv:<path>` or
//! `preset:<name>(<args>)`.

use crate::error::{Error, Result};
use crate::grid::{read_field_csv, BoundaryField, Grid, SpatialField};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldPreset {
    One,
    /// The first coordinate.
    LinearX,
    /// `base + amp * exp(-|x - c|^2 / (2 sigma^2))` over the first two axes.
    GaussBump { cx: f64, cy: f64, sigma: f64, amp: f64, base: f64 },
    /// `v0` on cells with even index sum, `v1` on odd.
    Checker { v0: f64, v1: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldSpec {
    Constant(f64),
    Csv(PathBuf),
    Preset(FieldPreset),
}

fn spec_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::FieldSpec { spec: spec.to_string(), reason: reason.into() }
}

fn parse_args(spec: &str, body: &str, name: &str, n: usize) -> Result<Vec<f64>> {
    let inner = body
        .strip_prefix(name)
        .and_then(|r| r.trim().strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| spec_err(spec, format!("expected {name}(...) with {n} arguments")))?;
    let args: Vec<f64> = inner
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| spec_err(spec, format!("bad number `{}`", a.trim()))))
        .collect::<Result<_>>()?;
    if args.len() != n {
        return Err(spec_err(spec, format!("{name} takes {n} arguments, got {}", args.len())));
    }
    if args.iter().any(|a| !a.is_finite()) {
        return Err(spec_err(spec, "arguments must be finite"));
    }
    Ok(args)
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (kind, body) = t.split_once(':').ok_or_else(|| spec_err(s, "missing `kind:` prefix"))?;
        let body = body.trim();
        match kind.trim() {
            "constant" => {
                let v: f64 = body.parse().map_err(|_| spec_err(s, "constant needs a number"))?;
                if !v.is_finite() {
                    return Err(spec_err(s, "constant must be finite"));
                }
                Ok(FieldSpec::Constant(v))
            }
            "csv" if !body.is_empty() => Ok(FieldSpec::Csv(PathBuf::from(body))),
            "csv" => Err(spec_err(s, "csv needs a path")),
            "preset" => {
                let name = body.split('(').next().unwrap_or("").trim();
                let p = match name {
                    "one" if body == "one" => FieldPreset::One,
                    "linear_x" if body == "linear_x" => FieldPreset::LinearX,
                    "gauss_bump" => {
                        let a = parse_args(s, body, name, 5)?;
                        if a[2] <= 0.0 {
                            return Err(spec_err(s, "gauss_bump sigma must be positive"));
                        }
                        FieldPreset::GaussBump { cx: a[0], cy: a[1], sigma: a[2], amp: a[3], base: a[4] }
                    }
                    "checker" => {
                        let a = parse_args(s, body, name, 2)?;
                        FieldPreset::Checker { v0: a[0], v1: a[1] }
                    }
                    _ => return Err(spec_err(s, format!("unknown preset `{body}`"))),
                };
                Ok(FieldSpec::Preset(p))
            }
            other => Err(spec_err(s, format!("unknown field kind `{other}`"))),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Constant(v) => write!(f, "constant:{v:?}"),
            FieldSpec::Csv(p) => write!(f, "csv:{}", p.display()),
            FieldSpec::Preset(FieldPreset::One) => write!(f, "preset:one"),
            FieldSpec::Preset(FieldPreset::LinearX) => write!(f, "preset:linear_x"),
            FieldSpec::Preset(FieldPreset::GaussBump { cx, cy, sigma, amp, base }) => {
                write!(f, "preset:gauss_bump({cx:?},{cy:?},{sigma:?},{amp:?},{base:?})")
            }
            FieldSpec::Preset(FieldPreset::Checker { v0, v1 }) => write!(f, "preset:checker({v0:?},{v1:?})"),
        }
    }
}

impl FieldPreset {
    fn eval(&self, x: [f64; 3], parity: usize) -> f64 {
        match *self {
            FieldPreset::One => 1.0,
            FieldPreset::LinearX => x[0],
            FieldPreset::GaussBump { cx, cy, sigma, amp, base } => {
                let r2 = (x[0] - cx).powi(2) + (x[1] - cy).powi(2);
                base + amp * (-r2 / (2.0 * sigma * sigma)).exp()
            }
            FieldPreset::Checker { v0, v1 } => {
                if parity % 2 == 0 {
                    v0
                } else {
                    v1
                }
            }
        }
    }
}

impl FieldSpec {
    /// Samples the spec at cell centres. Relative csv paths resolve against `base_dir`.
    pub fn to_field(&self, grid: &Grid, label: &str, base_dir: Option<&std::path::Path>) -> Result<SpatialField> {
        match self {
            FieldSpec::Constant(v) => Ok(SpatialField::constant(*grid, *v, label)),
            FieldSpec::Csv(p) => {
                let path = match base_dir {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                let file = std::fs::File::open(&path)
                    .map_err(|e| spec_err(&self.to_string(), format!("{}: {e}", path.display())))?;
                let f = read_field_csv(std::io::BufReader::new(file), Some(grid))?;
                SpatialField::new(*grid, f.into_values(), label)
            }
            FieldSpec::Preset(p) => {
                let values = (0..grid.cell_count())
                    .map(|c| {
                        let m = grid.cell_multi(c);
                        p.eval(grid.cell_center(c), m[0] + m[1] + m[2])
                    })
                    .collect();
                SpatialField::new(*grid, values, label)
            }
        }
    }

    /// Samples the spec at boundary face centres (csv is not supported there).
    pub fn to_boundary_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            FieldSpec::Constant(v) => Ok(vec![*v; grid.boundary_face_count()]),
            FieldSpec::Csv(_) => Err(spec_err(&self.to_string(), "csv specs cannot describe boundary data")),
            FieldSpec::Preset(p) => Ok(grid
                .boundary_faces()
                .iter()
                .map(|b| {
                    let m = grid.cell_multi(b.cell);
                    p.eval(b.center, m[0] + m[1] + m[2])
                })
                .collect()),
        }
    }

    /// A boundary field scaled in time by the piecewise-linear `(t, scale)` table.
    pub fn to_boundary_field(&self, grid: &Grid, time_scale: &[(f64, f64)]) -> Result<BoundaryField> {
        let base = self.to_boundary_values(grid)?;
        if time_scale.is_empty() {
            return BoundaryField::steady(*grid, base);
        }
        let times = time_scale.iter().map(|p| p.0).collect();
        let samples = time_scale.iter().map(|&(_, s)| base.iter().map(|v| v * s).collect()).collect();
        BoundaryField::sampled(*grid, times, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_round_trip() {
        for s in [
            "constant:1.5",
            "constant:-0.1",
            "csv:data/phi.csv",
            "preset:one",
            "preset:linear_x",
            "preset:gauss_bump(0.5,0.25,0.1,2.0,0.5)",
            "preset:checker(1.0,3.0)",
        ] {
            let spec: FieldSpec = s.parse().unwrap();
            let again: FieldSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again, "{s}");
        }
    }

    #[test]
    fn rejects_malformed_specs() {
        for s in ["", "constant", "constant:x", "preset:wave", "preset:checker(1)", "preset:gauss_bump(0,0,-1,1,1)", "csv:", "blob:1"] {
            assert!(s.parse::<FieldSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn presets_sample_as_documented() {
        let g = Grid::unit(2, 2).unwrap();
        let c: FieldSpec = "preset:checker(1,2)".parse().unwrap();
        assert_eq!(c.to_field(&g, "c", None).unwrap().values(), &[1.0, 2.0, 2.0, 1.0]);
        let b: FieldSpec = "preset:gauss_bump(0.25,0.25,1,2,1)".parse().unwrap();
        assert!((b.to_field(&g, "b", None).unwrap().get(0) - 3.0).abs() < 1e-15);
        let lin: FieldSpec = "preset:linear_x".parse().unwrap();
        assert_eq!(lin.to_boundary_values(&g).unwrap()[0], 0.0);
    }
}
