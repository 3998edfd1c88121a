//! Bounds along a one-parameter grid. Every row carries the full point
//! `(n, k, ρ, ε, d)` so that it can be reproduced on its own.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;

use avcgame::fbbounds::{
    dispersion_rates, index_code_lengths, k_on_sequence, second_order_limit, theorem10_bound, theorem11_upper,
    theorem12_lower, theorem9_bound, BoundParams, BoundReport, RateDirection, SecondOrder,
};
use avcgame::model::SourceSpec;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{Axis, SweepArgs};
use crate::commands::{parse_which, Loaded};
use crate::output::{invalid, io_error, CliError};

const SWEEP_NAMES: [&str; 6] = ["t9", "t10", "t11", "t12", "limit", "rates"];
const LEAD: [&str; 10] = ["n", "k", "k_requested", "rho", "eps", "d_max", "bound_name", "value", "raw", "error"];

fn terms_of(bound: &str) -> &'static [&'static str] {
    match bound {
        "t9" => &["chebyshev", "clt", "index_sqrt", "z_types"],
        "t10" => &["berry_esseen", "gaussian", "k0"],
        "t11" => &["berry_esseen", "chebyshev", "clt", "gaussian", "index_sqrt", "k0", "z_types"],
        "t12" => &["b_prime", "finite_n", "gaussian", "k1", "k2"],
        "limit" => &["gaussian"],
        _ => &[],
    }
}

/// CSV header for a list of requested bounds.
pub fn columns(which: &[String]) -> Vec<String> {
    let terms: BTreeSet<&str> = which.iter().flat_map(|w| terms_of(w).iter().copied()).collect();
    LEAD.iter()
        .map(|s| s.to_string())
        .chain(terms.into_iter().map(|t| format!("term:{t}")))
        .collect()
}

/// `a,b,c`, `a..b` or `a..b:count`, sorted and deduplicated.
pub fn parse_grid(field: &str, s: &str, geometric: bool) -> Result<Vec<f64>, CliError> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| invalid(field, format!("'{t}': {e}")));
    let mut v = if let Some((a, rest)) = s.split_once("..") {
        let (b, count) = match rest.split_once(':') {
            Some((b, c)) => (
                num(b)?,
                Some(c.trim().parse::<usize>().map_err(|e| invalid(field, format!("count '{c}': {e}")))?),
            ),
            None => (num(rest)?, None),
        };
        let a = num(a)?;
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(invalid(field, "range needs finite a <= b"));
        }
        if geometric && a <= 0.0 {
            return Err(invalid(field, "geometric range needs a > 0"));
        }
        let count = count.unwrap_or(if geometric { ((b / a).log10() + 1e-9).floor() as usize + 1 } else { 5 });
        if count == 0 {
            return Err(invalid(field, "count must be at least 1"));
        }
        if count == 1 || a == b {
            vec![a]
        } else {
            (0..count)
                .map(|i| {
                    let t = i as f64 / (count - 1) as f64;
                    if geometric {
                        // Trimmed to 12 significant digits so that decades come out exact.
                        let v = a * (b / a).powf(t);
                        format!("{v:.11e}").parse().expect("formatted float")
                    } else {
                        a + (b - a) * t
                    }
                })
                .collect()
        }
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "grid values must be finite"));
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

#[derive(Debug, Clone, Copy)]
struct Point {
    n: f64,
    rho: f64,
    eps: f64,
    d_max: f64,
}

#[derive(Debug, Clone)]
struct Row {
    point: Point,
    k: Option<f64>,
    k_requested: Option<f64>,
    bound: String,
    value: Option<f64>,
    raw: Option<f64>,
    error: Option<String>,
    terms: Vec<(String, f64)>,
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::N => "n",
        Axis::Rho => "rho",
        Axis::Eps => "eps",
        Axis::DMax => "d_max",
    }
}

fn fmt(v: Option<f64>) -> String {
    // `+ 0.0` folds -0 into 0.
    v.map(|x| format!("{}", x + 0.0)).unwrap_or_default()
}

fn row_of(point: Point, bound: &str, k: Option<(f64, f64)>, r: Result<BoundReport, String>) -> Row {
    let (k_requested, k) = match k {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    match r {
        Ok(rep) => Row {
            point,
            k,
            k_requested,
            bound: bound.to_string(),
            value: Some(rep.value),
            raw: Some(rep.raw),
            error: None,
            terms: rep.terms.into_iter().collect(),
        },
        Err(e) => Row {
            point,
            k,
            k_requested,
            bound: bound.to_string(),
            value: None,
            raw: None,
            error: Some(e),
            terms: Vec::new(),
        },
    }
}

fn evaluate(point: Point, which: &[String], so: Result<&SecondOrder, String>, params: &BoundParams) -> Vec<Row> {
    let so = match so {
        Ok(so) => so,
        Err(e) => return which.iter().map(|w| row_of(point, w, None, Err(e.clone()))).collect(),
    };
    let k = k_on_sequence(point.n, point.rho, so.c, so.r).map_err(|e| e.to_string());
    let mut rows = Vec::new();
    for w in which {
        let with_k = |f: &dyn Fn(f64) -> avcgame::Result<BoundReport>| match &k {
            Ok((req, real)) => row_of(point, w, Some((*req, *real)), f(*real).map_err(|e| e.to_string())),
            Err(e) => row_of(point, w, None, Err(e.clone())),
        };
        match w.as_str() {
            "t9" => {
                let r = index_code_lengths(point.n as usize, so.c, params)
                    .and_then(|(kk, d_n)| theorem9_bound(params, so.c, d_n, kk, so.v0, so.sizes));
                let kk = k.as_ref().ok().copied();
                rows.push(row_of(point, w, kk, r.map_err(|e| e.to_string())));
            }
            "t10" => rows.push(with_k(&|kr| theorem10_bound(point.n, kr, so, params))),
            "t11" => rows.push(with_k(&|kr| theorem11_upper(point.n, kr, so, params))),
            "t12" => rows.push(with_k(&|kr| theorem12_lower(point.n, kr, so, params))),
            "limit" => {
                let r = second_order_limit(point.rho, so.c, so.r, so.v_c_plus, so.v_s)
                    .map(|v| BoundReport::with_raw("limit", v, &[("gaussian", v)]));
                rows.push(row_of(point, w, k.as_ref().ok().copied(), r.map_err(|e| e.to_string())));
            }
            "rates" => {
                for (dir, name) in [
                    (RateDirection::Achievability, "rates_achievability"),
                    (RateDirection::Converse, "rates_converse"),
                ] {
                    let row = match dispersion_rates(point.n, point.eps, so, params, dir) {
                        Ok(rep) => Row {
                            point,
                            k: rep.k,
                            k_requested: None,
                            bound: name.to_string(),
                            value: rep.rate,
                            raw: rep.rate,
                            error: rep.note.clone(),
                            terms: Vec::new(),
                        },
                        Err(e) => row_of(point, name, None, Err(e.to_string())),
                    };
                    rows.push(row);
                }
            }
            _ => unreachable!("validated by parse_which"),
        }
    }
    rows
}

fn scalar(field: &str, s: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|e| invalid(field, format!("'{s}': {e}")))
}

pub fn sweep_cmd(l: &Loaded, a: &SweepArgs) -> Result<Value, CliError> {
    let which = parse_which(&a.which, &SWEEP_NAMES)?;
    let d_max_text = a.d_max.clone().unwrap_or_else(|| format!("{}", l.inst.source.d_max));
    let fields = [
        (Axis::N, "--n", a.n.as_str()),
        (Axis::Rho, "--rho", a.rho.as_str()),
        (Axis::Eps, "--eps", a.eps.as_str()),
        (Axis::DMax, "--d-max", d_max_text.as_str()),
    ];
    let (axis, grid) = match (a.axis, &a.grid) {
        (Some(ax), Some(g)) => (ax, parse_grid("--grid", g, ax == Axis::N)?),
        (Some(_), None) => return Err(invalid("--grid", "an axis needs a grid")),
        (None, Some(_)) => return Err(invalid("--axis", "a grid needs an axis")),
        (None, None) => {
            let mut multi = Vec::new();
            for (ax, field, text) in fields {
                let g = parse_grid(field, text, ax == Axis::N)?;
                if g.len() > 1 {
                    multi.push((ax, g));
                }
            }
            match multi.len() {
                0 => (Axis::N, parse_grid("--n", &a.n, true)?),
                1 => multi.pop().expect("one grid"),
                _ => return Err(invalid("--axis", "only one parameter may carry a grid")),
            }
        }
    };
    let mut base = Point { n: 0.0, rho: 0.0, eps: 0.0, d_max: 0.0 };
    for (ax, field, text) in fields {
        if ax != axis {
            let v = scalar(field, text)?;
            match ax {
                Axis::N => base.n = v,
                Axis::Rho => base.rho = v,
                Axis::Eps => base.eps = v,
                Axis::DMax => base.d_max = v,
            }
        }
    }
    let points: Vec<Point> = grid
        .iter()
        .map(|&v| {
            let mut p = base;
            match axis {
                Axis::N => p.n = v,
                Axis::Rho => p.rho = v,
                Axis::Eps => p.eps = v,
                Axis::DMax => p.d_max = v,
            }
            p
        })
        .collect();

    let src = &l.inst.source;
    let at = |d_max: f64| -> Result<SecondOrder, String> {
        let s = SourceSpec::new(src.p_s.clone(), src.d_mat.clone(), d_max).map_err(|e| e.to_string())?;
        SecondOrder::compute(&l.inst.family, &s).map_err(|e| e.to_string())
    };
    let shared = if axis == Axis::DMax { None } else { Some(at(base.d_max)) };
    let rows: Vec<Row> = points
        .par_iter()
        .flat_map_iter(|&p| {
            let own;
            let so = match &shared {
                Some(s) => s.as_ref().map_err(|e| e.clone()),
                None => {
                    own = at(p.d_max);
                    own.as_ref().map_err(|e| e.clone())
                }
            };
            evaluate(p, &which, so, &l.params)
        })
        .collect();

    let cols = columns(&which);
    let csv_out: Box<dyn Write> = match &a.csv {
        Some(p) => Box::new(File::create(p).map_err(|e| io_error(p, e))?),
        None => Box::new(std::io::stdout()),
    };
    let csv_path = a.csv.clone().unwrap_or_else(|| "<stdout>".into());
    let csv_err = |e: csv::Error| CliError::Io {
        path: csv_path.clone(),
        message: e.to_string(),
    };
    let mut wtr = csv::Writer::from_writer(csv_out);
    wtr.write_record(&cols).map_err(csv_err)?;
    for r in &rows {
        let mut rec = vec![
            fmt(Some(r.point.n)),
            fmt(r.k),
            fmt(r.k_requested),
            fmt(Some(r.point.rho)),
            fmt(Some(r.point.eps)),
            fmt(Some(r.point.d_max)),
            r.bound.clone(),
            fmt(r.value),
            fmt(r.raw),
            r.error.clone().unwrap_or_default(),
        ];
        for c in &cols[LEAD.len()..] {
            let name = &c["term:".len()..];
            rec.push(fmt(r.terms.iter().find(|(t, _)| t == name).map(|(_, v)| *v)));
        }
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| io_error(&csv_path, e))?;

    let errors = rows.iter().filter(|r| r.value.is_none()).count();
    Ok(json!({
        "axis": axis_name(axis),
        "grid": grid,
        "which": which,
        "columns": cols,
        "rows": rows.len(),
        "failed_rows": errors,
        "csv": a.csv.as_ref().map(|p| p.display().to_string()),
        "second_order": match &shared {
            Some(Ok(so)) => serde_json::to_value(so).expect("serializes"),
            _ => Value::Null,
        },
    }))
}
