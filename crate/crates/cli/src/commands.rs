//! One function per subcommand; each returns the `result` part of the report.

use std::fs;
use std::io::Write;

use avcgame::exactgame::{game_values, lower_value_exact};
use avcgame::fbbounds::{
    default_t7_gamma_grid, dispersion_rates, index_code_lengths, second_order_limit, theorem10_bound, theorem11_upper,
    theorem12_lower, theorem5_bound, theorem7_bound, theorem8_bound, theorem9_bound, BoundParams, BoundReport,
    RateDirection, SecondOrder, Theorem5Inputs, Theorem7Inputs, Theorem8Inputs,
};
use avcgame::lprelax::{
    aux_output_law, default_gamma_grid, default_q_grid, maximin_lp_bound, partition, solve_lp, solve_sc, theorem4_bound,
    AuxLaw, Evaluation, PartitionKind,
};
use avcgame::model::config::{parse_instance, InstanceConfig};
use avcgame::model::{Dist, GameInstance};
use avcgame::simulator::{
    cond_k, ensemble_error, random_code_transmit, reduce_random_code, required_codebook_size, stochastic_code_transmit,
    JammerStrategy, PrefixCode, RandomCodeSpec, SimReport, TranscriptRow,
};
use avcgame::singleletter::{
    avc_capacity, capacity, dispersions, is_symmetrizable, rate_distortion, ratedist, symmetrizability_margin,
    CapacityResult, DispersionOptions, RateDistortionResult,
};
use serde_json::{json, Map, Value};

use crate::args::{AuxArg, Common, ExactGameArgs, FbBoundArgs, LpBoundArgs, PartitionArg, SimMode, SimulateArgs};
use crate::output::{invalid, io_error, CliError};

/// Retries of the ensemble reduction before the last draw is kept.
const REDUCE_RETRIES: usize = 20;
/// Starts of the symmetrizability margin search.
const MARGIN_STARTS: usize = 64;

pub struct Loaded {
    pub cfg: InstanceConfig,
    pub inst: GameInstance,
    pub params: BoundParams,
}

pub fn load(common: &Common) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(&common.config).map_err(|e| io_error(&common.config, e))?;
    let cfg = parse_instance(&text).map_err(CliError::Config)?;
    let mut inst = cfg.to_instance()?;
    if let Some(b) = common.budget {
        if !(b > 0.0) {
            return Err(invalid("--budget", "budget must be positive"));
        }
        inst = inst.with_budget(b);
    }
    let params = cfg.bound_params.clone().unwrap_or_default();
    Ok(Loaded { cfg, inst, params })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn eval_mode(common: &Common) -> Evaluation {
    match common.trials {
        Some(trials) => Evaluation::MonteCarlo { trials, seed: common.seed },
        None => Evaluation::Exact,
    }
}

fn caps_of(inst: &GameInstance) -> Result<CapacityResult, CliError> {
    Ok(avc_capacity(&inst.family, capacity::DEFAULT_TOL)?)
}

fn rd_of(inst: &GameInstance) -> Result<RateDistortionResult, CliError> {
    Ok(rate_distortion(&inst.source, ratedist::DEFAULT_TOL)?)
}

pub fn capacity_cmd(l: &Loaded) -> Result<Value, CliError> {
    Ok(to_value(&caps_of(&l.inst)?))
}

pub fn rd_cmd(l: &Loaded) -> Result<Value, CliError> {
    Ok(to_value(&rd_of(&l.inst)?))
}

pub fn dispersion_cmd(l: &Loaded) -> Result<Value, CliError> {
    let caps = caps_of(&l.inst)?;
    let rd = rd_of(&l.inst)?;
    let d = dispersions(&l.inst.family, &l.inst.source, &caps, &rd, &DispersionOptions::default())?;
    Ok(json!({ "capacity": caps.c_bits, "rate": rd.r_bits, "dispersions": to_value(&d) }))
}

pub fn symmetrizable_cmd(l: &Loaded, seed: u64) -> Result<Value, CliError> {
    let s = is_symmetrizable(&l.inst.family)?;
    let margin = if s.symmetrizable {
        Value::Null
    } else {
        let caps = caps_of(&l.inst)?;
        to_value(&symmetrizability_margin(&l.inst.family, &caps.p_x_star, MARGIN_STARTS, seed)?)
    };
    Ok(json!({ "symmetrizable": s.symmetrizable, "certificate": s.kernel, "margin": margin }))
}

pub fn exact_game_cmd(l: &Loaded, a: &ExactGameArgs) -> Result<Value, CliError> {
    Ok(to_value(&game_values(&l.inst, a.starts, a.common.seed)?))
}

fn parse_list(field: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| invalid(field, format!("'{t}': {e}"))))
        .collect()
}

fn lp_bound(l: &Loaded, q: Option<Vec<f64>>, kind: PartitionKind, aux: AuxLaw, grid_limit: usize, eval: Evaluation) -> Result<Value, CliError> {
    let inst = &l.inst;
    let nt = inst.t_space().size();
    let q = match q {
        Some(q) => q,
        None => match lower_value_exact(inst) {
            Ok(lv) => lv.q_star.into_vec(),
            Err(avcgame::Error::Budget { .. }) => vec![1.0 / nt as f64; nt],
            Err(e) => return Err(e.into()),
        },
    };
    let rd = rd_of(inst)?;
    let part = partition(inst, kind)?;
    let p_ybar = aux_output_law(inst, &q, &part, &aux)?;
    let grid = default_gamma_grid(inst, 32);
    let sc = solve_sc(inst, &q)?;
    let lp = solve_lp(inst, &q)?;
    let t4 = theorem4_bound(inst, &q, &rd, &part, &p_ybar, &grid, eval)?;
    let maximin = maximin_lp_bound(inst, &rd, &default_q_grid(inst, grid_limit), &grid, kind, &aux)?;
    Ok(json!({
        "q": q,
        "sc": to_value(&sc),
        "lp": {
            "value": lp.value,
            "dual_value": lp.dual_value,
            "dual_residual": lp.dual_residual.max(),
            "iterations": lp.iterations,
        },
        "theorem4": to_value(&t4),
        "maximin": to_value(&maximin),
    }))
}

pub fn lp_bound_cmd(l: &Loaded, a: &LpBoundArgs) -> Result<Value, CliError> {
    let nt = l.inst.t_space().size();
    let q = match &a.q {
        Some(s) => {
            let q = parse_list("--q", s)?;
            if q.len() != nt {
                return Err(invalid("--q", format!("expected {nt} entries, one per state sequence")));
            }
            Dist::new(q.clone()).map_err(|e| invalid("--q", e.to_string()))?;
            Some(q)
        }
        None => None,
    };
    let kind = match a.partition {
        PartitionArg::Types => PartitionKind::Types,
        PartitionArg::Single => PartitionKind::Single,
    };
    let aux = match a.aux {
        AuxArg::TypeIid => AuxLaw::TypeIid,
        AuxArg::Uniform => AuxLaw::Uniform,
    };
    lp_bound(l, q, kind, aux, a.grid, eval_mode(&a.common))
}

const FB_NAMES: [&str; 10] = ["t4", "t5", "t7", "t8", "t9", "t10", "t11", "t12", "limit", "rates"];

pub fn parse_which(s: &str, allowed: &[&str]) -> Result<Vec<String>, CliError> {
    let mut out: Vec<String> = Vec::new();
    for w in s.split(',').map(str::trim).filter(|w| !w.is_empty()) {
        if !allowed.contains(&w) {
            return Err(invalid("--which", format!("unknown bound '{w}', expected one of {}", allowed.join(","))));
        }
        if !out.iter().any(|o| o == w) {
            out.push(w.to_string());
        }
    }
    if out.is_empty() {
        return Err(invalid("--which", "no bounds requested"));
    }
    Ok(out)
}

fn t7_inputs(caps: &CapacityResult, rd: &RateDistortionResult, eval: Evaluation) -> Theorem7Inputs {
    Theorem7Inputs {
        q_star: caps.q_theta_star.clone(),
        p_x: caps.p_x_star.clone(),
        p_shat: rd.p_shat_star.clone(),
        gamma_grid: default_t7_gamma_grid(32),
        eval,
    }
}

fn limit_report(rho: f64, so: &SecondOrder) -> Result<BoundReport, CliError> {
    let v = second_order_limit(rho, so.c, so.r, so.v_c_plus, so.v_s)?;
    Ok(BoundReport::with_raw("limit", v, &[("gaussian", v)]).detail("rho", rho))
}

pub fn fb_bound_cmd(l: &Loaded, a: &FbBoundArgs) -> Result<Value, CliError> {
    let which = parse_which(&a.which, &FB_NAMES)?;
    let inst = &l.inst;
    let params = &l.params;
    let eval = eval_mode(&a.common);
    let n = a.n.unwrap_or(inst.n as f64);
    let k = a.k.unwrap_or(inst.k as f64);
    let rho = a.rho.unwrap_or(params.rho);
    let needs_so = which.iter().any(|w| ["t9", "t10", "t11", "t12", "limit", "rates"].contains(&w.as_str()));
    let so = if needs_so { Some(SecondOrder::compute(&inst.family, &inst.source)?) } else { None };
    let so_ref = || so.as_ref().expect("computed above");
    let mut caps_rd: Option<(CapacityResult, RateDistortionResult)> = None;
    let mut bounds = Map::new();
    for w in &which {
        if ["t5", "t7", "t8"].contains(&w.as_str()) && caps_rd.is_none() {
            caps_rd = Some((caps_of(inst)?, rd_of(inst)?));
        }
        let v = match w.as_str() {
            "t4" => {
                let lp = lp_bound(l, None, PartitionKind::Types, AuxLaw::TypeIid, 64, eval)?;
                json!({ "at_q": lp["theorem4"], "maximin": lp["maximin"], "q": lp["q"] })
            }
            "t5" => {
                let (caps, _) = caps_rd.as_ref().expect("computed above");
                to_value(&theorem5_bound(
                    &inst.family,
                    &Theorem5Inputs {
                        n: inst.n,
                        p_x: caps.p_x_star.clone(),
                        typ_gamma: a.typ_gamma,
                        m_codes: a.m_codes,
                        eta: params.eta,
                        eval,
                        budget: inst.budget,
                    },
                )?)
            }
            "t7" => {
                let (caps, rd) = caps_rd.as_ref().expect("computed above");
                to_value(&theorem7_bound(inst, &t7_inputs(caps, rd, eval))?)
            }
            "t8" => {
                let (caps, rd) = caps_rd.as_ref().expect("computed above");
                let inp = Theorem8Inputs {
                    d_n: a.d_n,
                    k_codes: a.m_codes,
                    p_x_index: caps.p_x_star.clone(),
                    typ_gamma: a.typ_gamma,
                    jscc: t7_inputs(caps, rd, eval),
                };
                to_value(&theorem8_bound(inst, params, &inp)?)
            }
            "t9" => {
                let so = so_ref();
                let (kk, d_n) = index_code_lengths(n as usize, so.c, params)?;
                to_value(&theorem9_bound(params, so.c, d_n, kk, so.v0, so.sizes)?)
            }
            "t10" => to_value(&theorem10_bound(n, k, so_ref(), params)?),
            "t11" => to_value(&theorem11_upper(n, k, so_ref(), params)?),
            "t12" => to_value(&theorem12_lower(n, k, so_ref(), params)?),
            "limit" => to_value(&limit_report(rho, so_ref())?),
            "rates" => json!({
                "achievability": to_value(&dispersion_rates(n, a.eps, so_ref(), params, RateDirection::Achievability)?),
                "converse": to_value(&dispersion_rates(n, a.eps, so_ref(), params, RateDirection::Converse)?),
            }),
            _ => unreachable!("validated by parse_which"),
        };
        bounds.insert(w.clone(), v);
    }
    Ok(json!({
        "n": n,
        "k": k,
        "bounds": bounds,
        "second_order": so.as_ref().map(to_value),
    }))
}

fn parse_jammer(s: &str, q_star: &Dist, budget: usize, seed: u64) -> Result<JammerStrategy, CliError> {
    let mut jam = match s {
        "greedy" => JammerStrategy::greedy(budget),
        "iid" => JammerStrategy::iid(q_star.clone()),
        other => match other.strip_prefix("fixed=") {
            Some(d) => {
                let theta = d
                    .chars()
                    .map(|c| c.to_digit(10).map(|v| v as usize))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| invalid("--jammer", "fixed state sequence must be decimal digits"))?;
                JammerStrategy::fixed(theta)
            }
            None => return Err(invalid("--jammer", format!("unknown jammer '{other}'"))),
        },
    };
    jam.seed = seed;
    Ok(jam)
}

fn write_transcript(path: &std::path::Path, rep: &SimReport) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| io_error(path, e))?;
    writeln!(f, "{}", TranscriptRow::HEADER).map_err(|e| io_error(path, e))?;
    for row in &rep.transcript {
        writeln!(f, "{}", row.csv()).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

pub fn simulate_cmd(l: &Loaded, a: &SimulateArgs) -> Result<Value, CliError> {
    let inst = &l.inst;
    let seed = a.common.seed;
    let trials = a.common.trials.unwrap_or(10_000);
    let caps = caps_of(inst)?;
    let rd = rd_of(inst)?;
    let t7 = theorem7_bound(inst, &t7_inputs(&caps, &rd, Evaluation::Exact))?;
    let gamma_l = a.gamma_l.unwrap_or(t7.details["gamma"]);
    let m = required_codebook_size(inst, &rd.p_shat_star, gamma_l)?;
    let spec = RandomCodeSpec {
        m,
        p_shat: rd.p_shat_star.clone(),
        p_x: caps.p_x_star.clone(),
        gamma_l,
        q_star: caps.q_theta_star.clone(),
        seed,
    };
    let jam = parse_jammer(&a.jammer, &caps.q_theta_star, a.jammer_budget, seed)?;
    let limit = if a.transcript.is_some() { a.transcript_limit } else { 0 };
    let mut out = Map::new();
    let rep = match a.mode {
        SimMode::Random => {
            out.insert("theorem7".into(), to_value(&t7));
            random_code_transmit(inst, &spec, &jam, trials, seed, limit)?
        }
        SimMode::Stochastic => {
            let k_codes = match a.k_codes {
                Some(0) => return Err(invalid("--k-codes", "must be at least 1")),
                Some(k) => k,
                None => {
                    let e = ensemble_error(inst, &spec, 200, seed)?;
                    out.insert("ensemble_error".into(), json!(e.value));
                    cond_k(inst.family.t_size, inst.n, e.value)?
                }
            };
            let target = out.get("ensemble_error").and_then(Value::as_f64);
            let ens = reduce_random_code(inst, &spec, k_codes, REDUCE_RETRIES, target)?;
            let x = inst.family.x_size;
            let d_n = match a.d_n {
                Some(d) => d,
                None => (1..64).find(|&d| (x as f64).powi(d as i32) >= k_codes as f64).unwrap_or(64),
            };
            let prefix = PrefixCode::min_distance(&inst.family, k_codes, d_n, inst.budget)?;
            out.insert("k_codes".into(), json!(k_codes));
            out.insert("d_n".into(), json!(d_n));
            out.insert("validation".into(), to_value(&ens.validation));
            stochastic_code_transmit(inst, &ens, &prefix, &jam, trials, seed, limit)?
        }
    };
    if let Some(p) = &a.transcript {
        write_transcript(p, &rep)?;
    }
    let mut sim = to_value(&rep);
    if let Some(o) = sim.as_object_mut() {
        o.remove("transcript");
    }
    out.insert("mode".into(), json!(format!("{:?}", a.mode).to_lowercase()));
    out.insert("spec".into(), to_value(&spec));
    out.insert("simulation".into(), sim);
    Ok(Value::Object(out))
}

pub fn instance_summary(cfg: &InstanceConfig) -> Value {
    json!({ "k": cfg.k, "n": cfg.n, "x_size": cfg.x_size, "y_size": cfg.y_size, "t_size": cfg.t_size, "d_max": cfg.d_max })
}
