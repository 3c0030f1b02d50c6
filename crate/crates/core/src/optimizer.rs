//! Search for the smallest admissible r of a (g, k) cell.
//!
//! v runs over α_g + n for n = 1, 2, ...; for each v the threshold is
//! minimised in w (independent of u) and then in u, both through their
//! stationarity equations:
//!
//! ```text
//! F_g(v(τ₁ - 1/w)) = (v/e^γ) F_{g+1}(v(τ₂ - 1/w)),
//! k f_g(τ₁v) = ∫_w^v F_g(v(τ₁ - 1/s)) ds/s² + (v/e^γ) ∫_u^w F_{g+1}(v(τ₂ - 1/s)) ds/s².
//! ```

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{minimal_r, r_threshold, ParameterPoint, SieveTables, ThresholdBreakdown, QUAD_DEPTH, QUAD_TOL};
use crate::numeric::{adaptive_simpson, brent_root, exp_gamma, RootError};
use crate::sievefn::{
    solve_sieve_limits, LimitsSource, ReferenceLimits, SieveDimension, SieveFunctionTable, SieveLimits,
};
use crate::{Error, Result};

/// Default number of grid offsets n tried.
pub const DEFAULT_N_MAX: u32 = 400;
/// Stop after this many consecutive increases of the per-n threshold.
pub const EARLY_STOP: u32 = 25;
/// Root tolerance for w and u.
pub const ROOT_TOL: f64 = 1e-10;
/// Smallest sieve-function argument used to open a root bracket.
const BRACKET_EDGE: f64 = 1e-3;

/// Classical admissible r for g = 2, 3, 4 and k = 1..14.
pub const CLASSICAL_TABLE: [(u32, [u32; 14]); 3] = [
    (2, [7, 11, 16, 20, 24, 28, 32, 36, 40, 44, 48, 52, 56, 60]),
    (3, [12, 19, 25, 32, 38, 44, 50, 56, 62, 69, 75, 81, 87, 93]),
    (4, [17, 27, 35, 44, 52, 61, 69, 77, 86, 94, 102, 110, 118, 126]),
];

/// Published admissible r obtained with the auxiliary-sieve switch; `None` marks a dash.
pub const PUBLISHED_TABLE: [(u32, [Option<u32>; 14]); 3] = [
    (2, [None, None, Some(15), Some(18), Some(21), Some(23), Some(26), Some(29), Some(31), Some(33), Some(36), Some(38), Some(40), Some(43)]),
    (3, [None, None, None, Some(30), Some(35), Some(39), Some(43), Some(47), Some(51), Some(55), Some(59), Some(62), Some(66), Some(70)]),
    (4, [None, None, None, Some(43), Some(50), Some(56), Some(63), Some(68), Some(74), Some(79), Some(85), Some(90), Some(95), Some(100)]),
];

/// Classical admissible r for (g, k), when tabulated.
pub fn classical_r(g: u32, k: u32) -> Option<u32> {
    lookup(&CLASSICAL_TABLE, g, k).copied()
}

/// Published r for (g, k): `Some(None)` is a published dash, `None` is outside the table.
pub fn published_r(g: u32, k: u32) -> Option<Option<u32>> {
    lookup(&PUBLISHED_TABLE, g, k).copied()
}

fn lookup<T>(table: &[(u32, [T; 14])], g: u32, k: u32) -> Option<&T> {
    let row = table.iter().find(|(rg, _)| *rg == g)?;
    row.1.get((k as usize).checked_sub(1)?)
}

/// Sifting limits and sieve-function tables, built on first use and shared.
#[derive(Debug)]
pub struct SieveContext {
    source: LimitsSource,
    reference: ReferenceLimits,
    limits: Mutex<HashMap<u32, SieveLimits>>,
    tables: Mutex<HashMap<u32, Arc<SieveFunctionTable>>>,
}

impl SieveContext {
    pub fn new(source: LimitsSource) -> Self {
        Self::with_reference(source, ReferenceLimits::bundled())
    }

    pub fn with_reference(source: LimitsSource, reference: ReferenceLimits) -> Self {
        Self { source, reference, limits: Mutex::new(HashMap::new()), tables: Mutex::new(HashMap::new()) }
    }

    pub fn source(&self) -> LimitsSource {
        self.source
    }

    pub fn limits(&self, g: SieveDimension) -> Result<SieveLimits> {
        if let Some(l) = self.limits.lock().expect("limits cache poisoned").get(&g.get()) {
            return Ok(*l);
        }
        let l = match self.source {
            LimitsSource::Reference => self.reference.get(g)?,
            LimitsSource::Solved => solve_sieve_limits(g, 1e-9)?,
        };
        self.limits.lock().expect("limits cache poisoned").insert(g.get(), l);
        Ok(l)
    }

    pub fn table(&self, g: SieveDimension) -> Result<Arc<SieveFunctionTable>> {
        if let Some(t) = self.tables.lock().expect("table cache poisoned").get(&g.get()) {
            return Ok(t.clone());
        }
        let table = Arc::new(SieveFunctionTable::with_defaults(self.limits(g)?)?);
        let mut map = self.tables.lock().expect("table cache poisoned");
        Ok(map.entry(g.get()).or_insert(table).clone())
    }

    /// Tables for g and g + 1.
    pub fn tables(&self, g: SieveDimension) -> Result<SieveTables> {
        SieveTables::new(self.table(g)?, self.table(g.next()?)?)
    }
}

/// The root bracket a solve started from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

/// Best parameters for one (g, k) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleResult {
    pub g: u32,
    pub k: u32,
    pub r: u64,
    pub params: ParameterPoint,
    pub breakdown: ThresholdBreakdown,
    /// Offset n of the best v = α_g + n.
    pub n_star: u32,
    pub classical_r: Option<u32>,
    pub w_bracket: Bracket,
    pub u_bracket: Bracket,
}

/// Why a grid offset n produced no candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub n: u32,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}: {}", self.n, self.reason)
    }
}

fn root_error(what: &str, e: RootError) -> Error {
    match e {
        RootError::NoSignChange { fa, fb } => Error::NoRoot(format!("{what}: no sign change ({fa:e}, {fb:e})")),
        RootError::NotConverged { a, b } => Error::NoRoot(format!("{what}: bracket [{a}, {b}] did not shrink")),
        RootError::NotFinite { x } => Error::NoRoot(format!("{what}: non-finite value at {x}")),
    }
}

/// Root of F_g(v(τ₁ - 1/w)) = (v/e^γ) F_{g+1}(v(τ₂ - 1/w)) in (1/τ₁, v).
pub fn solve_w(v: f64, tau1: f64, tau2: f64, tables: &SieveTables) -> Result<(f64, Bracket)> {
    let eg = exp_gamma();
    let h = |w: f64| tables.base.upper(v * (tau1 - 1.0 / w)) - v / eg * tables.next.upper(v * (tau2 - 1.0 / w));
    let lo = 1.0 / (tau1 - BRACKET_EDGE / v);
    let hi = v;
    if !(lo < hi) {
        return Err(Error::NoRoot(format!("w bracket is empty for v={v}")));
    }
    let w = brent_root(h, lo, hi, ROOT_TOL, 200).map_err(|e| root_error("w equation", e))?;
    Ok((w, Bracket { lo, hi }))
}

fn weighted_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    adaptive_simpson(|s| f(s) / (s * s), a, b, QUAD_TOL, QUAD_DEPTH).value
}

/// Root of the u-stationarity equation in (1/τ₂, 1/τ₁ ∧ w).
///
/// The derivative of the threshold in u is g(k f_g(τ₁v) - A - B(u))/f_g(τ₁v) with
/// A, B(u) the two integrals above; B decreases in u, so the threshold is
/// convex in u and the root is its minimiser.
pub fn solve_u(k: u32, v: f64, w: f64, tau1: f64, tau2: f64, tables: &SieveTables) -> Result<(f64, Bracket)> {
    let eg = exp_gamma();
    let at = tau1 * v;
    if at <= tables.base.limits().beta {
        return Err(Error::Infeasible(format!("tau1 v = {at} does not exceed beta_g")));
    }
    let kf = k as f64 * tables.base.lower(at);
    let fixed = weighted_integral(|s| tables.base.upper(v * (tau1 - 1.0 / s)), w, v);
    let balance =
        |u: f64| kf - fixed - v / eg * weighted_integral(|s| tables.next.upper(v * (tau2 - 1.0 / s)), u, w);
    let hi = (1.0 / tau1).min(w);
    // Open the bracket where F_{g+1} is moderate; move left only if needed.
    let mut edge = 1.0;
    let mut lo = 1.0 / (tau2 - edge / v);
    while lo < hi && balance(lo) >= 0.0 && edge > BRACKET_EDGE {
        edge *= 0.5;
        lo = 1.0 / (tau2 - edge / v);
    }
    if !(lo < hi) {
        return Err(Error::NoRoot(format!("u bracket is empty for v={v}, w={w}")));
    }
    let u = brent_root(balance, lo, hi, ROOT_TOL, 200).map_err(|e| match e {
        RootError::NoSignChange { fb, .. } if fb < 0.0 => {
            Error::Infeasible(format!("threshold still decreasing at u = {hi}; no admissible u below 1/tau1"))
        }
        other => root_error("u equation", other),
    })?;
    if !(u > lo && u < hi) {
        return Err(Error::Infeasible(format!("u={u} lies on the edge of ({lo}, {hi})")));
    }
    Ok((u, Bracket { lo, hi }))
}

/// Optimised candidate at v = α_g + n.
fn candidate(k: u32, n: u32, tables: &SieveTables) -> Result<AdmissibleResult> {
    let g = tables.g();
    let v = tables.base.limits().alpha + n as f64;
    let (tau1, tau2) = (0.5, 1.0);
    let (w, w_bracket) = solve_w(v, tau1, tau2, tables)?;
    let (u, u_bracket) = solve_u(k, v, w, tau1, tau2, tables)?;
    let params = ParameterPoint::new(v, w, u, tau1, tau2)?;
    let breakdown = r_threshold(k, &params, tables)?;
    if !(breakdown.eta > 0.0) {
        return Err(Error::Infeasible(format!("eta={} is not positive", breakdown.eta)));
    }
    Ok(AdmissibleResult {
        g,
        k,
        r: breakdown.r,
        params,
        breakdown,
        n_star: n,
        classical_r: classical_r(g, k),
        w_bracket,
        u_bracket,
    })
}

/// Minimal admissible r for (g, k) over v = α_g + n, n = 1..=n_max.
pub fn minimize_r(k: u32, n_max: u32, tables: &SieveTables) -> Result<AdmissibleResult> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let mut best: Option<AdmissibleResult> = None;
    let mut rejections = Vec::new();
    let mut last: Option<f64> = None;
    let mut rising = 0;
    for n in 1..=n_max {
        match candidate(k, n, tables) {
            Ok(c) => {
                let t = c.breakdown.threshold;
                rising = match last {
                    Some(prev) if t > prev => rising + 1,
                    _ => 0,
                };
                last = Some(t);
                if best.as_ref().map_or(true, |b| t < b.breakdown.threshold) {
                    best = Some(c);
                }
                if rising >= EARLY_STOP {
                    break;
                }
            }
            Err(e @ (Error::Infeasible(_) | Error::NoRoot(_) | Error::Domain(_) | Error::Hypothesis(_))) => {
                rejections.push(Rejection { n, reason: e.to_string() });
                last = None;
                rising = 0;
            }
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| {
        let g = tables.g();
        let shown: Vec<String> = rejections.iter().take(6).map(|r| r.to_string()).collect();
        Error::Infeasible(format!(
            "no feasible v for g={g}, k={k} among n=1..={n_max}; {}{}",
            shown.join("; "),
            if rejections.len() > shown.len() { "; ..." } else { "" }
        ))
    })
}

/// How a table cell is shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    /// Feasible and, where a classical value exists, strictly below it.
    Admissible,
    /// Feasible but no better than the classical value; shown as a dash.
    NoImprovement,
    /// No feasible parameters at any n; shown as a dash.
    Infeasible,
}

/// One cell of a generated table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub g: u32,
    pub k: u32,
    pub classical_r: Option<u32>,
    pub status: CellStatus,
    /// Best parameters found; absent for infeasible cells.
    pub result: Option<CellResult>,
}

/// The parts of an [`AdmissibleResult`] that a table shows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub r: u64,
    pub v: f64,
    pub w: f64,
    pub u: f64,
    pub threshold: f64,
}

impl TableCell {
    fn from_result(g: u32, k: u32, result: Option<CellResult>) -> Self {
        let classical_r = classical_r(g, k);
        let status = match (result, classical_r) {
            (None, _) => CellStatus::Infeasible,
            (Some(res), Some(c)) if res.r >= c as u64 => CellStatus::NoImprovement,
            _ => CellStatus::Admissible,
        };
        Self { g, k, classical_r, status, result }
    }

    /// The r shown in the table; `None` for a dash.
    pub fn r(&self) -> Option<u64> {
        match self.status {
            CellStatus::Admissible => self.result.map(|c| c.r),
            _ => None,
        }
    }

    /// Best computed r, even when the table shows a dash.
    pub fn computed_r(&self) -> Option<u64> {
        self.result.map(|c| c.r)
    }

    /// Computed r minus the classical value, when both exist.
    pub fn delta(&self) -> Option<i64> {
        Some(self.computed_r()? as i64 - self.classical_r? as i64)
    }
}

/// Computes every (g, k) cell, in parallel, returned in (g, k) order.
pub fn generate_table(gs: &[u32], ks: &[u32], n_max: u32, ctx: &SieveContext) -> Result<Vec<TableCell>> {
    let mut tables = Vec::new();
    for &g in gs {
        tables.push((g, ctx.tables(SieveDimension::new(g)?)?));
    }
    let jobs: Vec<(u32, u32, SieveTables)> =
        tables.iter().flat_map(|(g, t)| ks.iter().map(move |&k| (*g, k, t.clone()))).collect();
    jobs.par_iter()
        .map(|(g, k, t)| {
            let result = match minimize_r(*k, n_max, t) {
                Ok(res) => Some(CellResult {
                    r: res.r,
                    v: res.params.v,
                    w: res.params.w,
                    u: res.params.u,
                    threshold: res.breakdown.threshold,
                }),
                Err(Error::Infeasible(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(TableCell::from_result(*g, *k, result))
        })
        .collect()
}

/// Header of the CSV table format.
pub const CSV_HEADER: [&str; 8] = ["g", "k", "r", "classical_r", "v", "w", "u", "threshold"];

/// Writes cells as CSV. Dashed cells have `-` for r; infeasible cells also
/// have `-` for v, w, u and threshold.
pub fn write_table_csv<W: std::io::Write>(cells: &[TableCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(crate::sievefn::csv_error)?;
    for c in cells {
        let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
        let res = c.result;
        w.write_record([
            c.g.to_string(),
            c.k.to_string(),
            opt(c.r().map(|r| r.to_string())),
            opt(c.classical_r.map(|r| r.to_string())),
            opt(res.map(|r| format!("{:?}", r.v))),
            opt(res.map(|r| format!("{:?}", r.w))),
            opt(res.map(|r| format!("{:?}", r.u))),
            opt(res.map(|r| format!("{:?}", r.threshold))),
        ])
        .map_err(crate::sievefn::csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the output of [`write_table_csv`].
pub fn read_table_csv<R: std::io::Read>(input: R) -> Result<Vec<TableCell>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(crate::sievefn::csv_error)?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected table header {header:?}")));
    }
    let mut cells = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(crate::sievefn::csv_error)?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |i: usize| Error::Parse(format!("bad {} field {:?}", CSV_HEADER[i], field(i)));
        let g: u32 = field(0).parse().map_err(|_| bad(0))?;
        let k: u32 = field(1).parse().map_err(|_| bad(1))?;
        let classical_r = match field(3) {
            "-" => None,
            s => Some(s.parse().map_err(|_| bad(3))?),
        };
        let result = match field(4) {
            "-" => None,
            _ => {
                let num = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
                let threshold = num(7)?;
                Some(CellResult { r: minimal_r(threshold), v: num(4)?, w: num(5)?, u: num(6)?, threshold })
            }
        };
        let cell = TableCell::from_result(g, k, result);
        if cell.classical_r != classical_r {
            return Err(bad(3));
        }
        let shown = match field(2) {
            "-" => None,
            s => Some(s.parse::<u64>().map_err(|_| bad(2))?),
        };
        if shown != cell.r() {
            return Err(bad(2));
        }
        cells.push(cell);
    }
    Ok(cells)
}

/// Aligned text grid with one row per g and one column per k.
pub fn format_table_text(cells: &[TableCell]) -> String {
    let mut gs: Vec<u32> = cells.iter().map(|c| c.g).collect();
    gs.dedup();
    let mut ks: Vec<u32> = cells.iter().map(|c| c.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut out = String::new();
    out.push_str(&format!("{:>4}", "g\\k"));
    for k in &ks {
        out.push_str(&format!("{k:>5}"));
    }
    out.push('\n');
    for g in gs {
        out.push_str(&format!("{g:>4}"));
        for k in &ks {
            let cell = cells.iter().find(|c| c.g == g && c.k == *k);
            let text = cell.and_then(|c| c.r()).map_or("-".to_string(), |r| r.to_string());
            out.push_str(&format!("{text:>5}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_tables_have_the_documented_entries() {
        assert_eq!(classical_r(3, 1), Some(12));
        assert_eq!(classical_r(2, 14), Some(60));
        assert_eq!(published_r(2, 14), Some(Some(43)));
        assert_eq!(published_r(2, 1), Some(None));
        assert_eq!(published_r(5, 1), None);
        assert_eq!(classical_r(2, 0), None);
        let published = PUBLISHED_TABLE.iter().flat_map(|(_, row)| row.iter()).filter(|x| x.is_some()).count();
        assert_eq!(published, 34);
    }

    #[test]
    fn csv_round_trip() {
        let cells = vec![
            TableCell::from_result(2, 1, Some(CellResult { r: 11, v: 9.36, w: 2.9, u: 1.9, threshold: 10.5 })),
            TableCell::from_result(3, 1, None),
            TableCell::from_result(
                2,
                3,
                Some(CellResult { r: 15, v: 11.357727445594, w: 2.4, u: 1.4, threshold: 14.1 + 1e-13 }),
            ),
        ];
        assert_eq!(cells[0].status, CellStatus::NoImprovement);
        assert_eq!(cells[1].status, CellStatus::Infeasible);
        assert_eq!(cells[2].status, CellStatus::Admissible);
        let mut buf = Vec::new();
        write_table_csv(&cells, &mut buf).unwrap();
        let back = read_table_csv(buf.as_slice()).unwrap();
        assert_eq!(back, cells);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("g,k,r,classical_r,v,w,u,threshold\n2,1,-,7,9.36,"), "{text}");
        assert!(text.contains("\n3,1,-,12,-,-,-,-\n"), "{text}");
    }

    #[test]
    fn text_table_marks_dashes() {
        let cells = vec![
            TableCell::from_result(2, 1, None),
            TableCell::from_result(2, 3, Some(CellResult { r: 12, v: 1.0, w: 1.0, u: 1.0, threshold: 11.5 })),
        ];
        let text = format_table_text(&cells);
        assert!(text.contains("   2    -   12"), "{text}");
        assert!(text.starts_with(" g\\k    1    3"), "{text}");
    }
}
