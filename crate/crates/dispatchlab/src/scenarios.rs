//! Study profiles: the two-unit spike and decreasing-ramp cases, the
//! three-point procurement counterexamples, a synthetic double-peak daily
//! net-load curve, and profile CSV ingestion.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::system::NetLoadProfile;
use crate::DispatchError;

/// Peak-to-mean ratio of the daily curve: fleet capacity over the top
/// load level.
pub const DOUBLE_PEAK_RATIO: f64 = 2561.0 / 1395.0;
pub const DAILY_POINTS: usize = 288;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSpec {
    File(PathBuf),
    /// Flat `base` with one interval at `spike` starting at `at_min`.
    Spike { base: f64, spike: f64, at_min: u32, horizon_min: u32 },
    /// Flat `base`, a step of `first` at `at_min`, then a smaller step of
    /// `second` one interval later, held to the horizon.
    DecreasingRamp { base: f64, first: f64, second: f64, at_min: u32, horizon_min: u32 },
    /// Three points with deltas +80 then −40.
    Fig1 { base: f64 },
    /// Three points with deltas +10 then +70.
    Fig2 { base: f64 },
    /// 24 h at 5-min resolution scaled to `mean`.
    DoublePeak { mean: f64 },
}

impl ScenarioSpec {
    pub fn spike() -> Self {
        ScenarioSpec::Spike { base: 900.0, spike: 1000.0, at_min: 20, horizon_min: 45 }
    }

    pub fn decreasing_ramp() -> Self {
        ScenarioSpec::DecreasingRamp { base: 700.0, first: 100.0, second: 20.0, at_min: 20, horizon_min: 45 }
    }

    /// Parses `kind[:key=value,...]`, e.g. `spike:base=900,spike=1000` or
    /// `double_peak:mean=1270`.
    pub fn parse(text: &str) -> Result<Self, DispatchError> {
        let (kind, params) = match text.split_once(':') {
            Some((k, p)) => (k, p),
            None => (text, ""),
        };
        if kind == "file" {
            return Ok(ScenarioSpec::File(PathBuf::from(params)));
        }
        let mut kv = BTreeMap::new();
        for part in params.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| DispatchError::Config(format!("scenario parameter '{part}' needs key=value")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| DispatchError::Config(format!("scenario parameter '{k}' is not a number")))?;
            kv.insert(k.to_string(), v);
        }
        let mut spec = match kind {
            "spike" => Self::spike(),
            "decreasing_ramp" => Self::decreasing_ramp(),
            "fig1" | "fig1_counterexample" => ScenarioSpec::Fig1 { base: 0.0 },
            "fig2" | "fig2_counterexample" => ScenarioSpec::Fig2 { base: 0.0 },
            "double_peak" => ScenarioSpec::DoublePeak { mean: 1195.0 },
            other => return Err(DispatchError::Config(format!("unknown scenario kind '{other}'"))),
        };
        for (k, v) in kv {
            let unknown = || DispatchError::Config(format!("scenario '{kind}' has no parameter '{k}'"));
            match (&mut spec, k.as_str()) {
                (ScenarioSpec::Spike { base, .. }, "base")
                | (ScenarioSpec::DecreasingRamp { base, .. }, "base")
                | (ScenarioSpec::Fig1 { base }, "base")
                | (ScenarioSpec::Fig2 { base }, "base") => *base = v,
                (ScenarioSpec::Spike { spike, .. }, "spike") => *spike = v,
                (ScenarioSpec::DecreasingRamp { first, .. }, "first") => *first = v,
                (ScenarioSpec::DecreasingRamp { second, .. }, "second") => *second = v,
                (ScenarioSpec::Spike { at_min, .. }, "at") | (ScenarioSpec::DecreasingRamp { at_min, .. }, "at") => {
                    *at_min = v as u32
                }
                (ScenarioSpec::Spike { horizon_min, .. }, "horizon")
                | (ScenarioSpec::DecreasingRamp { horizon_min, .. }, "horizon") => *horizon_min = v as u32,
                (ScenarioSpec::DoublePeak { mean }, "mean") => *mean = v,
                _ => return Err(unknown()),
            }
        }
        Ok(spec)
    }
}

fn steps(at_min: u32, horizon_min: u32) -> Result<(usize, usize), DispatchError> {
    if horizon_min % 5 != 0 || at_min % 5 != 0 || at_min > horizon_min {
        return Err(DispatchError::Config(format!(
            "times must be multiples of 5 min with at ≤ horizon (at {at_min}, horizon {horizon_min})"
        )));
    }
    Ok(((at_min / 5) as usize, (horizon_min / 5) as usize + 1))
}

pub fn generate(spec: &ScenarioSpec) -> Result<NetLoadProfile, DispatchError> {
    match *spec {
        ScenarioSpec::File(ref path) => load_profile_csv(path),
        ScenarioSpec::Spike { base, spike, at_min, horizon_min } => {
            let (k, n) = steps(at_min, horizon_min)?;
            let mut v = vec![base; n];
            v[k] = spike;
            NetLoadProfile::new(v)
        }
        ScenarioSpec::DecreasingRamp { base, first, second, at_min, horizon_min } => {
            let (k, n) = steps(at_min, horizon_min)?;
            let v = (0..n)
                .map(|t| match t {
                    t if t < k => base,
                    t if t == k => base + first,
                    _ => base + first + second,
                })
                .collect();
            NetLoadProfile::new(v)
        }
        ScenarioSpec::Fig1 { base } => NetLoadProfile::new(vec![base, base + 80.0, base + 40.0]),
        ScenarioSpec::Fig2 { base } => NetLoadProfile::new(vec![base, base + 10.0, base + 80.0]),
        ScenarioSpec::DoublePeak { mean } => {
            if !(mean > 0.0) {
                return Err(DispatchError::Config("double_peak mean must be positive".into()));
            }
            scale_to_mean(&double_peak_shape(), mean)
        }
    }
}

/// Evening ramp stages: (target MW, slope MW/5min) at the reference scale.
const EVENING_RISE: [(f64, f64); 6] =
    [(900.0, 104.0), (1500.0, 95.0), (1600.0, 60.0), (1700.0, 44.0), (2140.0, 30.0), (2194.0, 16.0)];
const PEAK_HOLD_H: f64 = 0.6;
const TROUGH_MW: f64 = 400.0;

/// Knots (hour, MW) of the daily curve for night base level `n`.
fn knots(n: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![
        (0.0, n),
        (4.0, n - 60.0),
        (7.0, n + 110.0),
        (7.5, n + 110.0),
        (13.25, 520.0),
        (14.75, TROUGH_MW),
        (15.5, TROUGH_MW),
    ];
    let (mut h, mut level) = *pts.last().unwrap();
    for (target, slope) in EVENING_RISE {
        h += (target - level) / slope / 12.0;
        level = target;
        pts.push((h, level));
    }
    pts.push((h + PEAK_HOLD_H, level));
    pts.push((19.5 + PEAK_HOLD_H, 2150.0));
    pts.push((21.0 + PEAK_HOLD_H, 1800.0));
    pts.push((24.0, n));
    pts
}

fn interp(x: f64, pts: &[(f64, f64)]) -> f64 {
    if x <= pts[0].0 {
        return pts[0].1;
    }
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x <= x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    pts[pts.len() - 1].1
}

fn template(n: f64) -> Vec<f64> {
    let pts = knots(n);
    let raw: Vec<f64> = (0..DAILY_POINTS).map(|k| interp(k as f64 * 5.0 / 60.0, &pts)).collect();
    let last = DAILY_POINTS - 1;
    (0..DAILY_POINTS)
        .map(|k| (raw[k.saturating_sub(1)] + raw[k] + raw[(k + 1).min(last)]) / 3.0)
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unscaled daily curve whose peak/mean equals [`DOUBLE_PEAK_RATIO`].
pub fn double_peak_shape() -> NetLoadProfile {
    let ratio = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max) / mean(v);
    let (mut lo, mut hi) = (200.0, 2000.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ratio(&template(mid)) > DOUBLE_PEAK_RATIO {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    NetLoadProfile { values: template(0.5 * (lo + hi)), interval_minutes: 5 }
}

pub fn scale_to_mean(profile: &NetLoadProfile, target_mean: f64) -> Result<NetLoadProfile, DispatchError> {
    let m = profile.mean();
    if !(m > 0.0) {
        return Err(DispatchError::Profile("cannot scale a profile with non-positive mean".into()));
    }
    if !(target_mean > 0.0) {
        return Err(DispatchError::Profile("target mean must be positive".into()));
    }
    let k = target_mean / m;
    Ok(NetLoadProfile {
        values: profile.values.iter().map(|v| v * k).collect(),
        interval_minutes: profile.interval_minutes,
    })
}

pub fn load_profile_csv(path: &Path) -> Result<NetLoadProfile, DispatchError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DispatchError::Io(format!("{}: {e}", path.display())))?;
    parse_profile_csv(&text)
}

pub fn parse_profile_csv(text: &str) -> Result<NetLoadProfile, DispatchError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.len() != 2 || &header[0] != "t_min" || &header[1] != "net_load_mw" {
        return Err(DispatchError::Profile(format!(
            "line 1: expected header 't_min,net_load_mw', found '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| DispatchError::Profile(format!("line {line}: {e}")))?;
        if rec.len() != 2 {
            return Err(DispatchError::Profile(format!("line {line}: expected 2 fields")));
        }
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DispatchError::Profile(format!("line {line}: bad {what} '{s}'")))
        };
        let t = num(&rec[0], "t_min")?;
        let v = num(&rec[1], "net_load_mw")?;
        if let Some(&prev) = times.last() {
            if t == prev {
                return Err(DispatchError::Profile(format!("line {line}: duplicate timestamp {t}")));
            }
            if t < prev {
                return Err(DispatchError::Profile(format!("line {line}: non-increasing timestamp {t}")));
            }
            if times.len() >= 2 {
                let step = times[1] - times[0];
                if (t - prev - step).abs() > 1e-9 {
                    return Err(DispatchError::Profile(format!(
                        "line {line}: gap of {} min, expected {step}",
                        t - prev
                    )));
                }
            }
        }
        times.push(t);
        values.push(v);
    }
    if values.is_empty() {
        return Err(DispatchError::Profile("no data rows".into()));
    }
    let interval = if times.len() >= 2 { times[1] - times[0] } else { 5.0 };
    if interval.fract() != 0.0 || interval < 1.0 {
        return Err(DispatchError::Profile(format!("interval {interval} min is not a positive integer")));
    }
    NetLoadProfile::with_interval(values, interval as u32)
}

pub fn write_profile_csv(profile: &NetLoadProfile, path: &Path) -> Result<(), DispatchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_min", "net_load_mw"])?;
    for (t, v) in profile.values.iter().enumerate() {
        w.write_record([format!("{}", profile.t_min(t)), format!("{v}")])?;
    }
    w.flush().map_err(|e| DispatchError::Io(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_profile() {
        let p = generate(&ScenarioSpec::spike()).unwrap();
        assert_eq!(p.values, vec![900.0, 900.0, 900.0, 900.0, 1000.0, 900.0, 900.0, 900.0, 900.0, 900.0]);
    }

    #[test]
    fn decreasing_ramp_profile() {
        let p = generate(&ScenarioSpec::decreasing_ramp()).unwrap();
        assert_eq!(&p.values[..6], &[700.0, 700.0, 700.0, 700.0, 800.0, 820.0]);
        assert_eq!(p.len(), 10);
    }

    #[test]
    fn counterexample_deltas() {
        let f1 = generate(&ScenarioSpec::Fig1 { base: 0.0 }).unwrap().values;
        assert_eq!((f1[1] - f1[0], f1[2] - f1[1]), (80.0, -40.0));
        let f2 = generate(&ScenarioSpec::Fig2 { base: 0.0 }).unwrap().values;
        assert_eq!((f2[1] - f2[0], f2[2] - f2[1]), (10.0, 70.0));
    }

    #[test]
    fn double_peak_calibration() {
        let top = generate(&ScenarioSpec::DoublePeak { mean: 1395.0 }).unwrap();
        assert_eq!(top.len(), DAILY_POINTS);
        assert!((top.mean() - 1395.0).abs() < 1e-9);
        assert!((top.peak() - 2561.0).abs() < 1e-6);
        let max_up = top.values.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
        assert!(max_up > 120.0, "steepest rise {max_up} should exceed the fleet ramp");
        let low = generate(&ScenarioSpec::DoublePeak { mean: 1195.0 }).unwrap();
        assert!((low.peak() / low.mean() - DOUBLE_PEAK_RATIO).abs() < 1e-9);
    }

    #[test]
    fn scaling() {
        let flat = NetLoadProfile::new(vec![500.0; 4]).unwrap();
        assert_eq!(scale_to_mean(&flat, 250.0).unwrap().values, vec![250.0; 4]);
        let p = NetLoadProfile::new(vec![800.0, 1200.0]).unwrap();
        assert_eq!(scale_to_mean(&p, 1000.0).unwrap(), p);
        let s = scale_to_mean(&p, 1395.0).unwrap();
        assert!((s.values[0] - 800.0 * 1.395).abs() < 1e-9);
        assert!(scale_to_mean(&NetLoadProfile::new(vec![0.0]).unwrap(), 1.0).is_err());
    }

    #[test]
    fn csv_errors() {
        assert!(parse_profile_csv("a,b\n0,1\n").unwrap_err().to_string().contains("header"));
        let shuffled = "t_min,net_load_mw\n0,1\n10,2\n5,3\n";
        let e = parse_profile_csv(shuffled).unwrap_err().to_string();
        assert!(e.contains("non-increasing") && e.contains("line 4"), "{e}");
        assert!(parse_profile_csv("t_min,net_load_mw\n0,1\n0,2\n").unwrap_err().to_string().contains("duplicate"));
        assert!(parse_profile_csv("t_min,net_load_mw\n0,1\n5,2\n15,2\n").unwrap_err().to_string().contains("gap"));
        assert!(parse_profile_csv("t_min,net_load_mw\n0,x\n").is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!(ScenarioSpec::parse("spike").unwrap(), ScenarioSpec::spike());
        assert_eq!(
            ScenarioSpec::parse("double_peak:mean=1270").unwrap(),
            ScenarioSpec::DoublePeak { mean: 1270.0 }
        );
        assert!(ScenarioSpec::parse("spike:mean=3").is_err());
        assert!(ScenarioSpec::parse("nope").is_err());
    }
}
