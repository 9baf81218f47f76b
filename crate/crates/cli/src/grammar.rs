//! Mini-grammar for metric, shape, and domain flags: `kind:param1:param2`,
//! mirroring the JSON configuration objects.

use hausmet_core::cloud::ShapeSpec;
use hausmet_core::metric::MetricSpec;

pub fn parse_metric(s: &str) -> Result<MetricSpec, String> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    match kind {
        "euclidean" | "eucl" => {
            if rest.is_empty() {
                Ok(MetricSpec::Euclidean)
            } else {
                Err("euclidean takes no parameters".into())
            }
        }
        "scaled" => {
            let c = one_param(&rest, "scaled", "c")?;
            if c <= 0.0 {
                return Err(format!("scale factor must be positive, got {c}"));
            }
            Ok(MetricSpec::Scaled { c })
        }
        "snowflake" => {
            let alpha = one_param(&rest, "snowflake", "alpha")?;
            if alpha <= 0.0 {
                return Err(format!("snowflake exponent must be positive, got {alpha}"));
            }
            Ok(MetricSpec::Snowflake { alpha })
        }
        "cantor_pullback" | "pullback" => {
            let level = one_level(&rest, "cantor_pullback")?;
            Ok(MetricSpec::CantorPullback { level })
        }
        "table" => Err("table metrics are only expressible in a JSON config file".into()),
        other => Err(format!(
            "unknown metric kind '{other}' (expected euclidean, scaled:<c>, snowflake:<alpha>, cantor_pullback:<level>)"
        )),
    }
}

pub fn parse_shape(s: &str) -> Result<ShapeSpec, String> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    match kind {
        "cantor" => {
            let level = one_level(&rest, "cantor")?;
            Ok(ShapeSpec::Cantor { level })
        }
        "grid" | "box" => {
            // grid:<lo>,<hi>[:<lo>,<hi>...]:<ppa>
            if rest.len() < 2 {
                return Err("grid needs at least one lo,hi pair and a points-per-axis count".into());
            }
            let (axes, ppa_part) = rest.split_at(rest.len() - 1);
            let bounds = axes
                .iter()
                .map(|a| {
                    let pair = parse_floats(a)?;
                    if pair.len() != 2 {
                        return Err(format!("axis bound '{a}' must be lo,hi"));
                    }
                    Ok([pair[0], pair[1]])
                })
                .collect::<Result<Vec<_>, String>>()?;
            let points_per_axis = ppa_part[0]
                .parse::<usize>()
                .map_err(|_| format!("points-per-axis '{}' must be a nonnegative integer", ppa_part[0]))?;
            if points_per_axis < 2 {
                return Err(format!("points-per-axis must be >= 2, got {points_per_axis}"));
            }
            Ok(ShapeSpec::Grid { bounds, points_per_axis })
        }
        "ball" | "ball_grid" => {
            // ball:<radius>:<ppa>[:<dim>]
            if rest.len() < 2 || rest.len() > 3 {
                return Err("ball needs radius:points-per-axis[:dim]".into());
            }
            let radius = rest[0].parse::<f64>().map_err(|_| format!("bad radius '{}'", rest[0]))?;
            let points_per_axis = rest[1]
                .parse::<usize>()
                .map_err(|_| format!("bad points-per-axis '{}'", rest[1]))?;
            let dim = if rest.len() == 3 {
                rest[2].parse::<usize>().map_err(|_| format!("bad dimension '{}'", rest[2]))?
            } else {
                2
            };
            Ok(ShapeSpec::BallGrid { radius, points_per_axis, dim })
        }
        "explicit" => Err("explicit point lists are only expressible in a JSON config file".into()),
        other => Err(format!(
            "unknown shape kind '{other}' (expected cantor:<level>, grid:<lo>,<hi>:<ppa>, ball:<radius>:<ppa>[:<dim>])"
        )),
    }
}

/// `a..b` inclusive level range.
pub fn parse_levels(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("level range '{s}' must look like 4..12"))?;
    let lo = a.trim().parse::<u32>().map_err(|_| format!("bad level '{a}'"))?;
    let hi = b.trim().parse::<u32>().map_err(|_| format!("bad level '{b}'"))?;
    if hi < lo {
        return Err(format!("level range '{s}' is reversed"));
    }
    Ok((lo, hi))
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}'")))
        .collect()
}

fn one_param(rest: &[&str], kind: &str, name: &str) -> Result<f64, String> {
    if rest.len() != 1 {
        return Err(format!("{kind} needs exactly one parameter {name}"));
    }
    rest[0].parse::<f64>().map_err(|_| format!("bad {name} '{}'", rest[0]))
}

fn one_level(rest: &[&str], kind: &str) -> Result<u32, String> {
    if rest.len() != 1 {
        return Err(format!("{kind} needs exactly one level parameter"));
    }
    let raw = rest[0]
        .parse::<i64>()
        .map_err(|_| format!("bad level '{}'", rest[0]))?;
    if raw < 0 {
        return Err("level must be >= 0".into());
    }
    u32::try_from(raw).map_err(|_| format!("level {raw} out of range"))
}

/// Named 2D test maps for the degree command.
pub enum Map2d {
    Id,
    Square,
    Antipodal,
    Translate([f64; 2]),
}

impl Map2d {
    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            Map2d::Id => x,
            Map2d::Square => [x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]],
            Map2d::Antipodal => [-x[0], -x[1]],
            Map2d::Translate(d) => [x[0] + d[0], x[1] + d[1]],
        }
    }
}

/// Named 1D test maps for interval domains.
pub enum Map1d {
    Id,
    Cubic,
    Parabola,
    Translate(f64),
}

impl Map1d {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Map1d::Id => x,
            Map1d::Cubic => x * x * x - x,
            Map1d::Parabola => x * x,
            Map1d::Translate(c) => x + c,
        }
    }
}

pub enum MapSpec {
    TwoD(Map2d),
    OneD(Map1d),
}

pub fn parse_map(s: &str, dim: usize) -> Result<MapSpec, String> {
    let (kind, rest) = match s.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (s, None),
    };
    if dim == 1 {
        let map = match (kind, rest) {
            ("id", None) => Map1d::Id,
            ("cubic", None) => Map1d::Cubic,
            ("parabola", None) => Map1d::Parabola,
            ("translate", Some(r)) => {
                Map1d::Translate(r.parse::<f64>().map_err(|_| format!("bad offset '{r}'"))?)
            }
            _ => return Err(format!("unknown 1D map '{s}' (id, cubic, parabola, translate:<c>)")),
        };
        Ok(MapSpec::OneD(map))
    } else {
        let map = match (kind, rest) {
            ("id", None) => Map2d::Id,
            ("square", None) => Map2d::Square,
            ("antipodal", None) => Map2d::Antipodal,
            ("translate", Some(r)) => {
                let d = parse_floats(r)?;
                if d.len() != 2 {
                    return Err("translate needs dx,dy".into());
                }
                Map2d::Translate([d[0], d[1]])
            }
            _ => {
                return Err(format!(
                    "unknown 2D map '{s}' (id, square, antipodal, translate:<dx>,<dy>)"
                ))
            }
        };
        Ok(MapSpec::TwoD(map))
    }
}

/// Domain descriptors for the degree command.
pub enum DomainSpec {
    Disk { radius: f64 },
    Box { lo: [f64; 2], hi: [f64; 2] },
    Interval { a: f64, b: f64 },
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            _ => 2,
        }
    }
}

pub fn parse_domain(s: &str) -> Result<DomainSpec, String> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    match kind {
        "disk" => {
            let radius = match rest.len() {
                0 => 1.0,
                1 => rest[0].parse::<f64>().map_err(|_| format!("bad radius '{}'", rest[0]))?,
                _ => return Err("disk takes at most one radius parameter".into()),
            };
            if radius <= 0.0 {
                return Err(format!("disk radius must be positive, got {radius}"));
            }
            Ok(DomainSpec::Disk { radius })
        }
        "box" => {
            if rest.len() != 2 {
                return Err("box needs two lo,hi pairs".into());
            }
            let x = parse_floats(rest[0])?;
            let y = parse_floats(rest[1])?;
            if x.len() != 2 || y.len() != 2 || x[0] >= x[1] || y[0] >= y[1] {
                return Err("box bounds must be lo,hi with lo < hi per axis".into());
            }
            Ok(DomainSpec::Box { lo: [x[0], y[0]], hi: [x[1], y[1]] })
        }
        "interval" => {
            if rest.len() != 1 {
                return Err("interval needs a,b".into());
            }
            let ab = parse_floats(rest[0])?;
            if ab.len() != 2 || ab[0] >= ab[1] {
                return Err("interval needs a,b with a < b".into());
            }
            Ok(DomainSpec::Interval { a: ab[0], b: ab[1] })
        }
        other => Err(format!(
            "unknown domain '{other}' (disk[:r], box:<lo>,<hi>:<lo>,<hi>, interval:<a>,<b>)"
        )),
    }
}

/// Field descriptors for the envelope command.
pub enum FieldSpec {
    Coord(usize),
    Const(f64),
}

pub fn parse_field(s: &str) -> Result<FieldSpec, String> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| format!("bad field '{s}'"))?;
    match kind {
        "coord" => Ok(FieldSpec::Coord(
            rest.parse::<usize>().map_err(|_| format!("bad axis '{rest}'"))?,
        )),
        "const" => Ok(FieldSpec::Const(
            rest.parse::<f64>().map_err(|_| format!("bad constant '{rest}'"))?,
        )),
        other => Err(format!("unknown field kind '{other}' (coord:<axis>, const:<v>)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_round_trips() {
        assert_eq!(parse_metric("euclidean").unwrap(), MetricSpec::Euclidean);
        assert_eq!(parse_metric("snowflake:0.5").unwrap(), MetricSpec::Snowflake { alpha: 0.5 });
        assert_eq!(parse_metric("scaled:2").unwrap(), MetricSpec::Scaled { c: 2.0 });
        assert_eq!(
            parse_metric("cantor_pullback:8").unwrap(),
            MetricSpec::CantorPullback { level: 8 }
        );
        assert!(parse_metric("fancy").is_err());
    }

    #[test]
    fn shape_round_trips() {
        assert_eq!(parse_shape("cantor:8").unwrap(), ShapeSpec::Cantor { level: 8 });
        assert_eq!(
            parse_shape("grid:-1,1:-1,1:5").unwrap(),
            ShapeSpec::Grid { bounds: vec![[-1.0, 1.0], [-1.0, 1.0]], points_per_axis: 5 }
        );
        assert_eq!(
            parse_shape("ball:1:33:2").unwrap(),
            ShapeSpec::BallGrid { radius: 1.0, points_per_axis: 33, dim: 2 }
        );
    }

    #[test]
    fn negative_level_is_rejected_with_message() {
        let err = parse_shape("cantor:-1").unwrap_err();
        assert!(err.contains("level must be >= 0"), "got: {err}");
    }

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("4..12").unwrap(), (4, 12));
        assert!(parse_levels("12..4").is_err());
        assert!(parse_levels("4-12").is_err());
    }
}
