//! One-parameter sweeps over a base instance.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use modlab_core::content::ct_p;
use modlab_core::modulus::{m_p, FunctionClass};

use crate::fail::{Fail, Outcome};
use crate::instance::{build_family, build_space, FamilySpec, Instance, SpaceSpec};
use crate::report::{text, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    K,
    Grid,
    L,
    P,
    Depth,
}

impl Param {
    pub fn parse(s: &str) -> Outcome<Param> {
        Ok(match s {
            "k" => Param::K,
            "grid" => Param::Grid,
            "L" | "l" => Param::L,
            "p" => Param::P,
            "depth" => Param::Depth,
            _ => return Err(Fail::Schema(format!("unknown sweep parameter {s:?} (k, grid, L, p, depth)"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::K => "k",
            Param::Grid => "grid",
            Param::L => "L",
            Param::P => "p",
            Param::Depth => "depth",
        }
    }

    fn integral(self) -> bool {
        matches!(self, Param::K | Param::Grid | Param::Depth)
    }
}

fn parse_number(s: &str) -> Outcome<f64> {
    let s = s.trim();
    let bad = || Fail::Schema(format!("bad sweep value {s:?}"));
    if let Some(e) = s.strip_prefix("2^") {
        let e: i32 = e.parse().map_err(|_| bad())?;
        return Ok(2f64.powi(e));
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad)
}

/// Comma-separated items; an item `a..b` is the inclusive integer range, and
/// `2^a..2^b` the powers of two in between.
pub fn parse_values(s: &str) -> Outcome<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) if a.trim().starts_with("2^") && b.trim().starts_with("2^") => {
                let (lo, hi) = (parse_number(a)?.log2().round() as i32, parse_number(b)?.log2().round() as i32);
                out.extend((lo..=hi).map(|e| 2f64.powi(e)));
            }
            Some((a, b)) => {
                let (lo, hi) = (parse_number(a)?, parse_number(b)?);
                if lo.fract() != 0.0 || hi.fract() != 0.0 || lo > hi {
                    return Err(Fail::Schema(format!("bad range {item:?}")));
                }
                let mut v = lo;
                while v <= hi {
                    out.push(v);
                    v += 1.0;
                }
            }
            None => out.push(parse_number(item)?),
        }
    }
    if out.is_empty() {
        return Err(Fail::Schema("no sweep values".into()));
    }
    Ok(out)
}

/// The instance and class at one sweep value.
fn apply(base: &Instance, class: FunctionClass, p: f64, param: Param, value: f64) -> Outcome<(Instance, FunctionClass, f64)> {
    if param.integral() && (value.fract() != 0.0 || value < 1.0) {
        return Err(Fail::Schema(format!("{} takes positive integers, got {value}", param.name())));
    }
    let mut inst = base.clone();
    let n = value as usize;
    let mut class = class;
    let mut p = p;
    match param {
        Param::K => match &mut inst.family {
            FamilySpec::Interval(f) => f.k = n,
            FamilySpec::Radial(f) => f.k = n,
            _ => return Err(Fail::Schema("sweeping k needs an interval or radial family".into())),
        },
        Param::Grid => match &mut inst.space {
            SpaceSpec::Grid1d(g) => g.n = n,
            SpaceSpec::Grid2d(g) => {
                g.nx = n;
                g.ny = n;
            }
            SpaceSpec::Spiky(s) => s.cells = n,
            SpaceSpec::Explicit(_) => return Err(Fail::Schema("an explicit space has no grid parameter".into())),
        },
        Param::Depth => match &mut inst.space {
            SpaceSpec::Spiky(s) => s.depth = n,
            _ => return Err(Fail::Schema("sweeping depth needs a spiky space".into())),
        },
        Param::L => {
            if !(value > 0.0) {
                return Err(Fail::Schema(format!("L must be positive, got {value}")));
            }
            class = FunctionClass::Lipschitz(value);
        }
        Param::P => {
            if !(value >= 1.0) {
                return Err(Fail::Schema(format!("p must be at least 1, got {value}")));
            }
            p = value;
        }
    }
    Ok((inst, class, p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub value: f64,
    pub modulus: f64,
    pub content: f64,
    /// `M^{1/p} − Ct`.
    pub gap: f64,
    pub primal: f64,
    pub dual: f64,
    pub rel_gap: f64,
}

fn row(base: &Instance, class: FunctionClass, p: f64, param: Param, value: f64) -> Outcome<Row> {
    let (inst, class, p) = apply(base, class, p, param, value)?;
    let built = build_space(&inst.space)?;
    let family = build_family(&built, &inst.family)?;
    let m = m_p(&family, p, class)?;
    let c = ct_p(&family, p)?;
    let modulus = m.value.to_f64();
    let content = c.value.to_f64();
    let root = modulus.powf(1.0 / p);
    let gap = if root.is_infinite() && content.is_infinite() { 0.0 } else { root - content };
    Ok(Row {
        value,
        modulus,
        content,
        gap,
        primal: m.residuals.primal,
        dual: m.residuals.dual,
        rel_gap: m.residuals.gap,
    })
}

pub fn run(base: &Instance, class: FunctionClass, p: f64, param: Param, values: &[f64], jobs: usize) -> Outcome<Vec<Row>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Fail::Io(format!("thread pool: {e}")))?;
    pool.install(|| values.par_iter().map(|&v| row(base, class, p, param, v)).collect::<Vec<_>>())
        .into_iter()
        .collect()
}

pub fn table(param: Param, rows: &[Row]) -> String {
    let mut s = format!("{}\tmodulus\tcontent\tgap\tprimal_residual\tdual_residual\tgap_residual\n", param.name());
    for r in rows {
        let cols = [r.value, r.modulus, r.content, r.gap, r.primal, r.dual, r.rel_gap];
        let line: Vec<String> = cols.iter().map(|&x| text(x)).collect();
        writeln!(s, "{}", line.join("\t")).expect("string write");
    }
    s
}

/// Two-column files `<param>-modulus.dat`, `<param>-content.dat` and
/// `<param>-gap.dat`.
pub fn write_plots(dir: &Path, param: Param, rows: &[Row]) -> Outcome<()> {
    std::fs::create_dir_all(dir).map_err(|e| Fail::Io(format!("{}: {e}", dir.display())))?;
    let curves: [(&str, fn(&Row) -> f64); 3] = [("modulus", |r| r.modulus), ("content", |r| r.content), ("gap", |r| r.gap)];
    for (name, f) in curves {
        let mut body = String::new();
        for r in rows {
            writeln!(body, "{} {}", text(r.value), text(f(r))).expect("string write");
        }
        write_atomic(&dir.join(format!("{}-{name}.dat", param.name())), &body)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("1..4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_values("2^6..2^8").unwrap(), vec![64.0, 128.0, 256.0]);
        assert_eq!(parse_values("1.5, 2,2^3").unwrap(), vec![1.5, 2.0, 8.0]);
        assert!(parse_values("3..1").is_err());
        assert!(parse_values("x").is_err());
    }

    #[test]
    fn interval_k_sweep() {
        let inst = Instance::parse(
            r#"{"schema":"modlab.instance/1","space":{"kind":"grid1d","n":256},"family":{"kind":"interval","k":1}}"#,
        )
        .unwrap();
        let rows = run(&inst, FunctionClass::All, 1.0, Param::K, &[1.0, 2.0, 3.0], 2).unwrap();
        assert!(rows.iter().all(|r| (r.modulus - 1.0).abs() < 1e-9 && r.gap.abs() < 1e-9));
        assert!(table(Param::K, &rows).starts_with("k\tmodulus"));
        assert!(matches!(run(&inst, FunctionClass::All, 1.0, Param::Depth, &[2.0], 1), Err(Fail::Schema(_))));
    }
}
