//! Flag value parsers: ranges, geometries, metric descriptors, grid resolutions.

use std::path::PathBuf;

use yamabe_core::lie_curvature::BergerParams;
use yamabe_core::metric_spec::{MetricSpec, ResolvedMetric};
use yamabe_core::su2_chart::HopfGrid;
use yamabe_core::{Error, Result};

fn number(text: &str, what: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{what}: `{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("{what}: `{text}` is not finite")));
    }
    Ok(v)
}

/// `a:b:n`, `n` evenly spaced values from `a` to `b` inclusive. A single point is written
/// `a:a:1`.
pub fn range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(Error::InvalidInput(format!("range `{text}`: expected a:b:n")));
    };
    let a = number(a, "range start")?;
    let b = number(b, "range end")?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("range `{text}`: count must be a positive integer")))?;
    if n == 1 && a == b {
        return Ok(vec![a]);
    }
    if n < 2 || !(a < b) {
        return Err(Error::InvalidInput(format!(
            "range `{text}`: need a < b and n >= 2 (or a:a:1)"
        )));
    }
    let step = (b - a) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i + 1 == n { b } else { a + step * i as f64 })
        .collect())
}

/// `round`, `round-hemisphere` or `berger:s,t`.
pub fn berger(text: &str) -> Result<BergerParams> {
    match text {
        "round" | "round-hemisphere" => Ok(BergerParams::round()),
        _ => {
            let Some(rest) = text.strip_prefix("berger:") else {
                return Err(Error::InvalidInput(format!(
                    "geometry `{text}`: expected round-hemisphere or berger:s,t"
                )));
            };
            let Some((s, t)) = rest.split_once(',') else {
                return Err(Error::InvalidInput(format!("geometry `{text}`: expected berger:s,t")));
            };
            BergerParams::new(number(s, "s")?, number(t, "t")?)
        }
    }
}

/// A Berger descriptor, or a path to a JSON metric spec.
pub fn metric(text: &str) -> Result<ResolvedMetric> {
    if text.starts_with("berger:") || text == "round" {
        let p = berger(text)?;
        return MetricSpec::Berger(yamabe_core::metric_spec::BergerSpec { s: p.s(), t: p.t() })
            .resolve();
    }
    spec_file(&PathBuf::from(text))
}

pub fn spec_file(path: &PathBuf) -> Result<ResolvedMetric> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    MetricSpec::from_json(&text)?.resolve()
}

/// `N` for an `N³` grid or `Nη,Nξ1,Nξ2`; every count at least 4.
pub fn resolution(text: &str) -> Result<HopfGrid> {
    let counts: Vec<usize> = text
        .split(',')
        .map(|c| {
            c.trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("resolution `{text}`: not an integer list")))
        })
        .collect::<Result<_>>()?;
    let dims = match counts[..] {
        [n] => [n; 3],
        [a, b, c] => [a, b, c],
        _ => {
            return Err(Error::InvalidInput(format!(
                "resolution `{text}`: expected N or a,b,c"
            )))
        }
    };
    if dims.iter().any(|&n| n < 4) {
        return Err(Error::InvalidInput(format!(
            "resolution `{text}`: every count must be at least 4"
        )));
    }
    HopfGrid::new(dims[0], dims[1], dims[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(range("1:4:4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(range("2:2:1").unwrap(), vec![2.0]);
        let r = range("1:5:401").unwrap();
        assert_eq!(r.len(), 401);
        assert_eq!(r[200], 3.0);
        assert_eq!(r[400], 5.0);
        for bad in ["1:4", "4:1:3", "1:4:1", "1:4:x", "1:nan:3", "a:b:c:d"] {
            assert!(range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn geometries() {
        assert_eq!(berger("round-hemisphere").unwrap(), BergerParams::round());
        let p = berger("berger:1,3.5").unwrap();
        assert_eq!((p.s(), p.t()), (1.0, 3.5));
        assert!(berger("berger:3,1").is_err());
        assert!(berger("torus").is_err());
    }

    #[test]
    fn resolutions() {
        assert_eq!(resolution("8").unwrap().dims(), [8, 8, 8]);
        assert_eq!(resolution("4,5,6").unwrap().dims(), [4, 5, 6]);
        assert!(resolution("3").is_err());
        assert!(resolution("4,4").is_err());
    }
}
