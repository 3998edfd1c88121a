//! JSON instance files.
//!
//! Syntax and type errors carry the line and column reported by serde.
//! Semantic errors (wrong row lengths, rows that are not distributions, ...)
//! name the offending field path, e.g. `w[1][0]`, and are mapped back to a
//! source line by a small locator that walks the raw JSON text.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::channel::ChannelFamily;
use super::dist::{Dist, SUM_TOL};
use super::instance::GameInstance;
use super::seq::DEFAULT_BUDGET;
use super::source::SourceSpec;
use crate::fbbounds::params::BoundParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub x_size: usize,
    pub y_size: usize,
    pub t_size: usize,
    pub w: Vec<Vec<Vec<f64>>>,
    pub p_s: Vec<f64>,
    pub d_mat: Vec<Vec<f64>>,
    pub d_max: f64,
    pub k: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_params: Option<BoundParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub message: String,
    pub path: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(l) = self.line {
            write!(f, " at line {l}")?;
            if let Some(c) = self.column {
                write!(f, ", column {c}")?;
            }
        }
        if let Some(p) = &self.path {
            write!(f, " ({p})")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum PathSeg {
    Key(String),
    Index(usize),
}

fn path_string(path: &[PathSeg]) -> String {
    let mut s = String::new();
    for seg in path {
        match seg {
            PathSeg::Key(k) => {
                if !s.is_empty() {
                    s.push('.');
                }
                s.push_str(k);
            }
            PathSeg::Index(i) => s.push_str(&format!("[{i}]")),
        }
    }
    s
}

struct Semantic {
    path: Vec<PathSeg>,
    message: String,
}

fn key(k: &str) -> PathSeg {
    PathSeg::Key(k.to_string())
}

fn check_row(row: &[f64], path: Vec<PathSeg>) -> Result<(), Semantic> {
    if let Some((i, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        let mut p = path;
        p.push(PathSeg::Index(i));
        return Err(Semantic {
            path: p,
            message: format!("probability {v} must be finite and nonnegative"),
        });
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Semantic {
            path,
            message: format!("entries sum to {total}, expected 1"),
        });
    }
    Ok(())
}

impl InstanceConfig {
    fn validate(&self) -> Result<(), Semantic> {
        for (name, v) in [("x_size", self.x_size), ("y_size", self.y_size), ("t_size", self.t_size), ("k", self.k), ("n", self.n)] {
            if v == 0 {
                return Err(Semantic {
                    path: vec![key(name)],
                    message: format!("{name} must be at least 1"),
                });
            }
        }
        if self.w.len() != self.t_size {
            return Err(Semantic {
                path: vec![key("w")],
                message: format!("expected {} state matrices, found {}", self.t_size, self.w.len()),
            });
        }
        for (t, mat) in self.w.iter().enumerate() {
            let p = vec![key("w"), PathSeg::Index(t)];
            if mat.len() != self.x_size {
                return Err(Semantic {
                    path: p,
                    message: format!("expected {} rows, found {}", self.x_size, mat.len()),
                });
            }
            for (x, row) in mat.iter().enumerate() {
                let mut p = p.clone();
                p.push(PathSeg::Index(x));
                if row.len() != self.y_size {
                    return Err(Semantic {
                        path: p,
                        message: format!("expected {} entries, found {}", self.y_size, row.len()),
                    });
                }
                check_row(row, p)?;
            }
        }
        check_row(&self.p_s, vec![key("p_s")])?;
        let a = self.p_s.len();
        if self.d_mat.len() != a {
            return Err(Semantic {
                path: vec![key("d_mat")],
                message: format!("expected {a} rows to match p_s, found {}", self.d_mat.len()),
            });
        }
        for (i, row) in self.d_mat.iter().enumerate() {
            let p = vec![key("d_mat"), PathSeg::Index(i)];
            if row.len() != a {
                return Err(Semantic {
                    path: p,
                    message: format!("expected {a} entries, found {}", row.len()),
                });
            }
            if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
                let mut p = p;
                p.push(PathSeg::Index(j));
                return Err(Semantic {
                    path: p,
                    message: format!("distortion {v} must be finite and nonnegative"),
                });
            }
        }
        if !self.d_max.is_finite() || self.d_max < 0.0 {
            return Err(Semantic {
                path: vec![key("d_max")],
                message: "d_max must be finite and nonnegative".into(),
            });
        }
        if let Some(b) = self.budget {
            if !(b > 0.0) {
                return Err(Semantic {
                    path: vec![key("budget")],
                    message: "budget must be positive".into(),
                });
            }
        }
        if let Some(bp) = &self.bound_params {
            if let Err(msg) = bp.validate() {
                return Err(Semantic {
                    path: vec![key("bound_params")],
                    message: msg,
                });
            }
        }
        Ok(())
    }

    pub fn to_instance(&self) -> crate::error::Result<GameInstance> {
        let family = ChannelFamily::new(self.w.clone())?;
        let source = SourceSpec::new(Dist::new(self.p_s.clone())?, self.d_mat.clone(), self.d_max)?;
        Ok(GameInstance::new(self.k, self.n, family, source)?.with_budget(self.budget.unwrap_or(DEFAULT_BUDGET)))
    }

    pub fn from_instance(inst: &GameInstance) -> Self {
        Self {
            x_size: inst.family.x_size,
            y_size: inst.family.y_size,
            t_size: inst.family.t_size,
            w: inst.family.to_nested(),
            p_s: inst.source.p_s.probs().to_vec(),
            d_mat: inst.source.d_mat.clone(),
            d_max: inst.source.d_max,
            k: inst.k,
            n: inst.n,
            budget: Some(inst.budget),
            bound_params: None,
        }
    }
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<InstanceConfig, ConfigError> {
    let cfg: InstanceConfig = serde_json::from_str(text).map_err(|e| ConfigError {
        message: e.to_string(),
        path: None,
        line: Some(e.line()),
        column: Some(e.column()),
    })?;
    cfg.validate().map_err(|s| {
        let (line, column) = match locate(text, &s.path) {
            Some((l, c)) => (Some(l), Some(c)),
            None => (None, None),
        };
        ConfigError {
            message: s.message,
            path: Some(path_string(&s.path)),
            line,
            column,
        }
    })?;
    Ok(cfg)
}

/// 1-based line and column of the value at `path` in a JSON document.
pub fn locate(text: &str, path: &[PathSeg]) -> Option<(usize, usize)> {
    let bytes = text.as_bytes();
    let pos = find(bytes, skip_ws(bytes, 0), path)?;
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let column = pos - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Some((line, column))
}

fn skip_ws(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

fn find(b: &[u8], i: usize, path: &[PathSeg]) -> Option<usize> {
    let Some(head) = path.first() else {
        return Some(i);
    };
    match (b.get(i)?, head) {
        (b'{', PathSeg::Key(want)) => {
            let mut j = skip_ws(b, i + 1);
            while b.get(j)? != &b'}' {
                let (k, after) = read_string(b, j)?;
                j = skip_ws(b, after);
                if b.get(j)? != &b':' {
                    return None;
                }
                j = skip_ws(b, j + 1);
                if &k == want {
                    return find(b, j, &path[1..]);
                }
                j = skip_ws(b, skip_value(b, j)?);
                if b.get(j)? == &b',' {
                    j = skip_ws(b, j + 1);
                }
            }
            None
        }
        (b'[', PathSeg::Index(want)) => {
            let mut j = skip_ws(b, i + 1);
            let mut idx = 0;
            while b.get(j)? != &b']' {
                if idx == *want {
                    return find(b, j, &path[1..]);
                }
                j = skip_ws(b, skip_value(b, j)?);
                if b.get(j)? == &b',' {
                    j = skip_ws(b, j + 1);
                }
                idx += 1;
            }
            None
        }
        _ => None,
    }
}

fn read_string(b: &[u8], i: usize) -> Option<(String, usize)> {
    if b.get(i)? != &b'"' {
        return None;
    }
    let mut j = i + 1;
    while *b.get(j)? != b'"' {
        if b[j] == b'\\' {
            j += 1;
        }
        j += 1;
    }
    let s: String = serde_json::from_slice(&b[i..=j]).ok()?;
    Some((s, j + 1))
}

fn skip_value(b: &[u8], i: usize) -> Option<usize> {
    match b.get(i)? {
        b'"' => read_string(b, i).map(|(_, j)| j),
        b'{' | b'[' => {
            let mut depth = 0usize;
            let mut j = i;
            loop {
                match b.get(j)? {
                    b'"' => {
                        j = read_string(b, j)?.1;
                        continue;
                    }
                    b'{' | b'[' => depth += 1,
                    b'}' | b']' => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(j + 1);
                        }
                    }
                    _ => {}
                }
                j += 1;
            }
        }
        _ => {
            let mut j = i;
            while j < b.len() && !matches!(b[j], b',' | b'}' | b']') && !b[j].is_ascii_whitespace() {
                j += 1;
            }
            Some(j)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
  "x_size": 2, "y_size": 2, "t_size": 2,
  "w": [
    [[0.9, 0.1], [0.1, 0.9]],
    [[0.8, 0.2],
     [0.2, 0.8]]
  ],
  "p_s": [0.5, 0.5],
  "d_mat": [[0, 1], [1, 0]],
  "d_max": 0.11,
  "k": 1, "n": 1
}"#;

    #[test]
    fn parses_good_file() {
        let cfg = parse_instance(GOOD).unwrap();
        let inst = cfg.to_instance().unwrap();
        assert_eq!(inst.family.t_size, 2);
        assert!((inst.family.w(1, 1, 0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn locator_finds_nested_rows() {
        let p = [key("w"), PathSeg::Index(1), PathSeg::Index(1)];
        assert_eq!(locate(GOOD, &p), Some((6, 6)));
        assert_eq!(locate(GOOD, &[key("d_max")]).map(|x| x.0), Some(10));
    }

    #[test]
    fn missing_row_is_named() {
        let bad = GOOD.replace("[[0.8, 0.2],\n     [0.2, 0.8]]", "[[0.8, 0.2]]");
        let err = parse_instance(&bad).unwrap_err();
        assert_eq!(err.path.as_deref(), Some("w[1]"));
        assert_eq!(err.line, Some(5));
    }

    #[test]
    fn bad_row_sum_is_named() {
        let bad = GOOD.replace("[0.2, 0.8]]", "[0.3, 0.8]]");
        let err = parse_instance(&bad).unwrap_err();
        assert_eq!(err.path.as_deref(), Some("w[1][1]"));
        assert_eq!(err.line, Some(6));
    }

    #[test]
    fn syntax_errors_have_lines() {
        let bad = GOOD.replace("\"k\": 1", "\"k\": -1");
        let err = parse_instance(&bad).unwrap_err();
        assert_eq!(err.line, Some(11));
        assert!(err.path.is_none());
        let unknown = GOOD.replace("\"k\": 1", "\"kk\": 1, \"k\": 1");
        assert!(parse_instance(&unknown).is_err());
    }
}
