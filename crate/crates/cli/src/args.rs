//! Value parsers and output-path confinement.

use std::path::{Component, Path, PathBuf};

use lpdecode::experiments::float_range;

/// `a,b,c` or `start:step:stop`.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range {s:?} must have the form start:step:stop"));
        }
        let nums = parts
            .iter()
            .map(|p| parse_f64(p))
            .collect::<Result<Vec<_>, _>>()?;
        return float_range(nums[0], nums[1], nums[2]).map_err(|e| e.to_string());
    }
    let out = s.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let s = s.trim();
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("{s:?} is not a finite number"))
}

/// `a,b,c` or `start:step:stop` with integer entries.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    let int = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("{t:?} is not a nonnegative integer"))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range {s:?} must have the form start:step:stop"));
        }
        let (start, step, stop) = (int(parts[0])?, int(parts[1])?, int(parts[2])?);
        if step == 0 || stop < start {
            return Err(format!("range {s:?} is empty or has a zero step"));
        }
        return Ok((start..=stop).step_by(step).collect());
    }
    s.split(',').map(int).collect()
}

/// Resolve `name` inside `dir`, refusing absolute paths and `..`.
pub fn confined(dir: &Path, name: &Path) -> Result<PathBuf, String> {
    let escapes = name
        .components()
        .any(|c| !matches!(c, Component::Normal(_) | Component::CurDir));
    if escapes || name.as_os_str().is_empty() {
        return Err(format!(
            "output name {} must be a relative path inside the output directory",
            name.display()
        ));
    }
    Ok(dir.join(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_f64_list("0.1,0.5, 0.9").unwrap(), vec![0.1, 0.5, 0.9]);
        assert_eq!(parse_f64_list("2:0.5:3").unwrap(), vec![2.0, 2.5, 3.0]);
        assert!(parse_f64_list("1:2").is_err());
        assert!(parse_f64_list("1,x").is_err());
        assert!(parse_f64_list("nan").is_err());
        assert_eq!(parse_usize_list("1,3,5").unwrap(), vec![1, 3, 5]);
        assert_eq!(parse_usize_list("2:2:7").unwrap(), vec![2, 4, 6]);
        assert!(parse_usize_list("3:0:5").is_err());
        assert!(parse_usize_list("-1").is_err());
    }

    #[test]
    fn confinement() {
        let dir = Path::new("/tmp/out");
        assert_eq!(confined(dir, Path::new("a/b.csv")).unwrap(), dir.join("a/b.csv"));
        assert!(confined(dir, Path::new("../x")).is_err());
        assert!(confined(dir, Path::new("/etc/x")).is_err());
        assert!(confined(dir, Path::new("")).is_err());
    }
}
