use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use blockbfgs::problems::Manifest;

use crate::grid::{GridResult, Metric, RunOutcome, SolverEntry};
use crate::profile::{performance_profile, CostMatrix, ProfileCurve};
use crate::BenchError;

/// Everything needed to repeat a `run`, echoed next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub metric: Metric,
    pub eps: Vec<f64>,
    pub parallel: usize,
    pub suite: Manifest,
    pub solvers: Vec<SolverEntry>,
    pub f_best: Vec<(String, f64)>,
    /// `(ε, dropped problem names)`.
    pub dropped: Vec<(f64, Vec<String>)>,
    pub runs: Vec<RunOutcome>,
}

/// File-name label for a tolerance, e.g. `0.01`.
pub fn eps_label(eps: f64) -> String {
    format!("{eps}")
}

fn fmt_cost(c: f64) -> String {
    if c.is_finite() {
        format!("{c}")
    } else {
        "inf".into()
    }
}

/// Rows are problems, columns are solvers, `inf` marks unsolved.
pub fn write_costs_csv(path: &Path, costs: &CostMatrix) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["problem".to_string()];
    header.extend(costs.solvers.iter().cloned());
    w.write_record(&header)?;
    for (name, row) in costs.problems.iter().zip(&costs.t) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|&c| fmt_cost(c)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_costs_csv(path: &Path) -> Result<CostMatrix, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.len() < 2 {
        return Err(BenchError::MalformedCosts("expected a problem column and at least one solver".into()));
    }
    let solvers: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut problems = Vec::new();
    let mut t = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        problems.push(rec.get(0).unwrap_or_default().to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| BenchError::MalformedCosts(format!("invalid cost '{v}'")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        t.push(row);
    }
    CostMatrix::new(solvers, problems, t)
}

/// `(solver, r, ρ)` rows, one per breakpoint.
pub fn write_profile_csv(path: &Path, curves: &[ProfileCurve]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["solver", "r", "rho"])?;
    for c in curves {
        for (r, v) in c.breakpoints.iter().zip(&c.values) {
            w.write_record([c.solver.clone(), format!("{r}"), format!("{v}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Step-function plot of the curves over `log₂ r`.
pub fn write_profile_svg(path: &Path, curves: &[ProfileCurve], title: &str) -> Result<(), BenchError> {
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 60.0, 170.0, 40.0, 50.0);
    let r_max = curves
        .iter()
        .flat_map(|c| c.breakpoints.iter().cloned())
        .fold(1.0f64, f64::max);
    let x_max = (r_max.log2() * 1.1).max(1.0);
    let px = |lr: f64| left + (w - left - right) * lr / x_max;
    let py = |rho: f64| h - bottom - (h - top - bottom) * rho;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (w - right + left) / 2.0, xml_escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{l},{t} L{l},{b} L{r},{b}" stroke="black" fill="none"/>"#,
        l = left,
        t = top,
        b = h - bottom,
        r = w - right
    );
    for i in 0..=4 {
        let rho = i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{rho}</text>"#, left - 6.0, py(rho) + 4.0);
    }
    let ticks = x_max.floor() as usize;
    let stride = ticks.div_ceil(8).max(1);
    for k in (0..=ticks).step_by(stride) {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(k as f64), h - bottom + 16.0, 1u64 << k.min(62));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">r (log scale)</text>"#, (w - right + left) / 2.0, h - 12.0);
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = format!("M{},{}", px(0.0), py(0.0));
        let mut rho = 0.0;
        for (r, v) in c.breakpoints.iter().zip(&c.values) {
            let x = px(r.log2());
            let _ = write!(d, " L{x},{} L{x},{}", py(rho), py(*v));
            rho = *v;
        }
        let _ = write!(d, " L{},{}", px(x_max), py(rho));
        let _ = writeln!(s, r#"<path d="{d}" stroke="{color}" stroke-width="2" fill="none"/>"#);
        let ly = top + 20.0 * i as f64 + 10.0;
        let lx = w - right + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, xml_escape(&c.solver));
    }
    s.push_str("</svg>\n");
    fs::write(path, s)?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes costs, profiles, per-run traces and the run manifest into `out`.
pub fn write_run_outputs(out: &Path, grid: &GridResult, manifest: &RunManifest) -> Result<(), BenchError> {
    fs::create_dir_all(out)?;
    for (eps, costs, _) in &grid.costs {
        let label = eps_label(*eps);
        write_costs_csv(&out.join(format!("costs_{label}.csv")), costs)?;
        if costs.problems.is_empty() {
            continue;
        }
        let curves = performance_profile(costs)?;
        write_profile_csv(&out.join(format!("profile_{label}.csv")), &curves)?;
        write_profile_svg(
            &out.join(format!("profile_{label}.svg")),
            &curves,
            &format!("Performance profile, {} metric, eps = {label}", grid.metric),
        )?;
    }
    let traces = out.join("traces");
    fs::create_dir_all(&traces)?;
    for run in &grid.runs {
        if let Some(trace) = &run.trace {
            let file = fs::File::create(traces.join(format!("{}__{}.csv", run.problem, run.solver)))?;
            trace.write_csv(std::io::BufWriter::new(file))?;
        }
    }
    let mut f = fs::File::create(out.join("run_manifest.json"))?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    writeln!(f)?;
    Ok(())
}
