//! Executes an [`ExperimentSpec`] and persists its outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{time_averaged_density, PropagatorPlan, DEFAULT_PANELS_PER_UNIT};
use crate::error::{Error, Result};
use crate::fft::Grid;
use crate::lattice::{classify, parse_rational, RationalVector};
use crate::microlocal::{
    conditional_density, limit_extrapolate, marginal_variation, propagation_law_test, sigma_proxy, PropagationConfig,
};
use crate::mode::ModeBox;
use crate::observability::{
    gram, observability_constant, rows_to_csv, spectral_window_constant, sweep, ObservabilityRow,
};
use crate::quantization::{lifted_pair, twomicro_pair, wigner_pair, Cutoff, FourierState, Side};

use super::snap::snap_frequency;
use super::spec::{ExperimentSpec, Kind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A long-format table: one observation per row.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl PlotData {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        PlotData { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    fn from_csv(name: impl Into<String>, csv: &str) -> Self {
        let mut lines = csv.lines();
        let columns = lines.next().unwrap_or_default().split(',').map(str::to_string).collect();
        let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        PlotData { name: name.into(), columns, rows }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: Kind,
    pub spec_hash: String,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputFile>,
    pub summary: BTreeMap<String, f64>,
    #[serde(skip)]
    pub plots: Vec<PlotData>,
    /// JSON documents written next to the tables.
    #[serde(skip)]
    pub documents: Vec<(String, String)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn spec_hash(spec: &ExperimentSpec) -> String {
    sha256_hex(serde_json::to_string(spec).expect("spec serialises").as_bytes())
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn f(v: f64) -> String {
    v.to_string()
}

struct Outputs {
    plots: Vec<PlotData>,
    documents: Vec<(String, String)>,
    summary: BTreeMap<String, f64>,
}

impl Outputs {
    fn new() -> Self {
        Outputs { plots: Vec::new(), documents: Vec::new(), summary: BTreeMap::new() }
    }
}

fn family_member(spec: &ExperimentSpec, h: f64) -> Result<FourierState> {
    let family = spec.family.as_ref().ok_or_else(|| Error::validation("family", "missing"))?;
    family.build(spec.d, h, spec.module()?.as_ref())
}

fn padded_window(u: &FourierState, pad: i64) -> ModeBox {
    ModeBox::bounding(u.dim(), u.modes(), pad)
}

fn plan_for(spec: &ExperimentSpec, u: &FourierState) -> Result<PropagatorPlan> {
    let window = padded_window(u, spec.pad());
    match spec.scheme {
        Some(s) => PropagatorPlan::new(spec.potential()?, window, s),
        None => PropagatorPlan::auto(spec.potential()?, window),
    }
}

fn run_classify(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let mut table = PlotData::new("classify", &["index", "xi", "rank", "basis", "non_resonant_token"]);
    let mut tokens = 0usize;
    for (i, entries) in spec.frequencies.iter().enumerate() {
        let exact: Result<Vec<_>> = entries.iter().map(|s| parse_rational(s)).collect();
        let (xi, token) = match (exact, spec.max_den) {
            (Ok(v), _) => (RationalVector::new(v), false),
            (Err(_), Some(q)) => {
                let x = entries
                    .iter()
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::validation(format!("frequencies[{i}]"), "entries must be rationals or decimals"))?;
                let snap = snap_frequency(&x, q);
                (snap.value, snap.non_resonant)
            }
            (Err(e), None) => {
                return Err(Error::validation(format!("frequencies[{i}]"), format!("{e}; set max_den to snap decimals")))
            }
        };
        let module = if token { crate::lattice::PrimitiveModule::zero(spec.d) } else { classify(&xi) };
        tokens += token as usize;
        let xi_s: Vec<String> = xi.entries().iter().map(crate::lattice::format_rational).collect();
        let basis: Vec<String> = module
            .basis()
            .iter()
            .map(|b| b.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        table.push(vec![
            i.to_string(),
            xi_s.join(" "),
            module.rank().to_string(),
            basis.join(";"),
            token.to_string(),
        ]);
    }
    out.summary.insert("frequencies".into(), spec.frequencies.len() as f64);
    out.summary.insert("non_resonant_tokens".into(), tokens as f64);
    out.plots.push(table);
    Ok(())
}

fn run_evolve(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let times = spec.times();
    let rows: Vec<(f64, Vec<FourierState>, f64, f64)> = spec
        .h_values()
        .par_iter()
        .map(|&h| {
            let u0 = family_member(spec, h)?;
            let plan = plan_for(spec, &u0)?;
            let states = plan.trajectory(&u0, &times)?;
            let boundary = plan.boundary_mass(&u0, &times)?;
            Ok((h, states, u0.norm_sq(), boundary))
        })
        .collect::<Result<_>>()?;
    let d = spec.d;
    let mut cols = vec!["h".to_string(), "t".to_string(), "norm_sq".to_string()];
    cols.extend((1..=d).map(|a| format!("mean_xi{a}")));
    let mut table = PlotData { name: "evolve".into(), columns: cols, rows: Vec::new() };
    let mut drift: f64 = 0.0;
    let mut boundary: f64 = 0.0;
    for (h, states, n0, b) in &rows {
        boundary = boundary.max(*b);
        for (t, u) in times.iter().zip(states) {
            drift = drift.max((u.norm_sq() - n0).abs());
            let mut mean = vec![0.0; d];
            for (k, c) in u.iter() {
                for (a, m) in mean.iter_mut().enumerate() {
                    *m += h * k[a] as f64 * c.norm_sqr();
                }
            }
            let mut row = vec![f(*h), f(*t), f(u.norm_sq())];
            row.extend(mean.iter().map(|m| f(m / u.norm_sq())));
            table.push(row);
        }
    }
    out.summary.insert("norm_drift".into(), drift);
    out.summary.insert("boundary_mass".into(), boundary);
    out.plots.push(table);
    Ok(())
}

fn run_wigner(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let symbols = spec.symbols()?;
    let mut table = PlotData::new("wigner", &["h", "symbol", "re", "im"]);
    for h in spec.h_values() {
        let u = family_member(spec, h)?;
        for (i, a) in symbols.iter().enumerate() {
            let w = wigner_pair(&u, a, h);
            table.push(vec![f(h), i.to_string(), f(w.re), f(w.im)]);
        }
    }
    out.plots.push(table);
    Ok(())
}

fn run_twomicro(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let module = spec.module()?.expect("validated");
    let symbols = spec
        .symbols()?
        .into_iter()
        .map(|s| s.with_module(module.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut table = PlotData::new(
        "twomicro",
        &["h", "R", "symbol", "inner_re", "inner_im", "outer_re", "outer_im", "uncut_re", "uncut_im"],
    );
    let mut defect: f64 = 0.0;
    for h in spec.h_values() {
        let u = family_member(spec, h)?;
        for r in spec.r_values() {
            let c = Cutoff::new(r);
            for (i, a) in symbols.iter().enumerate() {
                let inner = twomicro_pair(&u, a, h, c, Side::Inner)?;
                let outer = twomicro_pair(&u, a, h, c, Side::Outer)?;
                let uncut = lifted_pair(&u, a, h)?;
                defect = defect.max((inner + outer - uncut).norm());
                table.push(vec![
                    f(h),
                    f(r),
                    i.to_string(),
                    f(inner.re),
                    f(inner.im),
                    f(outer.re),
                    f(outer.im),
                    f(uncut.re),
                    f(uncut.im),
                ]);
            }
        }
    }
    out.summary.insert("sum_defect".into(), defect);
    out.plots.push(table);
    Ok(())
}

fn run_sigma_propagation(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let module = spec.module()?.expect("validated");
    let cfg = PropagationConfig {
        module: module.clone(),
        potential: spec.potential()?,
        observables: spec.symbols()?,
        h_grid: spec.h_values(),
        r_grid: spec.r_values(),
        times: spec.times(),
        pad: vec![spec.pad(); spec.d],
    };
    let family = |h: f64| family_member(spec, h);
    let report = propagation_law_test(&family, &cfg)?;
    let mut summaries = Vec::new();
    for (i, t) in report.tables.iter().enumerate() {
        for (name, table) in [("lhs", &t.lhs), ("rhs", &t.rhs), ("deviation", &t.deviation)] {
            out.plots.push(PlotData::from_csv(format!("{name}_{i}"), &table.to_csv()));
        }
        let s = limit_extrapolate(&t.deviation)?;
        out.summary.insert(format!("deviation_{i}_estimate"), s.estimate);
        summaries.push(s);
    }
    out.summary.insert("signal_scale".into(), report.signal_scale);
    out.summary.insert("boundary_mass".into(), report.boundary_mass.iter().copied().fold(0.0, f64::max));
    out.documents.push(("extrapolation.json".into(), serde_json::to_string_pretty(&summaries)?));
    let h0 = cfg.h_grid[0];
    let r = *cfg.r_grid.last().expect("validated");
    let proxy = sigma_proxy(&family_member(spec, h0)?, &module, h0, Cutoff::new(r))?;
    out.summary.insert("sigma_trace".into(), proxy.trace());
    out.summary.insert("sigma_min_eigenvalue".into(), proxy.min_eigenvalue());
    out.documents.push(("sigma_proxy.json".into(), serde_json::to_string_pretty(&proxy)?));
    Ok(())
}

fn run_marginal(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let boxes = spec.boxes()?;
    let times = spec.times();
    let values: Vec<(f64, f64)> = spec
        .h_values()
        .par_iter()
        .map(|&h| {
            let u = family_member(spec, h)?;
            let plan = plan_for(spec, &u)?;
            Ok((h, marginal_variation(&plan, &u, h, &boxes, &times)?))
        })
        .collect::<Result<_>>()?;
    let mut table = PlotData::new("marginal", &["h", "variation"]);
    for (h, v) in &values {
        table.push(vec![f(*h), f(*v)]);
    }
    if let (Some(first), Some(last)) = (values.first(), values.last()) {
        out.summary.insert("variation_first_h".into(), first.1);
        out.summary.insert("variation_last_h".into(), last.1);
    }
    out.plots.push(table);
    Ok(())
}

fn run_disintegration(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let boxes = spec.boxes()?;
    let t_end = spec.horizon.expect("validated").0;
    let grid = Grid::cube(spec.d, spec.grid_points.expect("validated"));
    let mut summary = PlotData::new("disintegration", &["h", "box", "present", "max_nonzero_coefficient"]);
    for (ih, h) in spec.h_values().into_iter().enumerate() {
        let u = family_member(spec, h)?;
        let plan = plan_for(spec, &u)?;
        let total = time_averaged_density(&plan, &u, t_end, &grid, DEFAULT_PANELS_PER_UNIT)?;
        out.summary.insert(format!("density_{ih}_max_nonzero_coefficient"), total.max_nonzero_coefficient());
        out.plots.push(PlotData::from_csv(format!("density_{ih}"), &total.to_csv()));
        let parts = conditional_density(&plan, &u, t_end, h, &boxes, &grid, DEFAULT_PANELS_PER_UNIT)?;
        for (ib, p) in parts.iter().enumerate() {
            match p {
                Some(rho) => {
                    summary.push(vec![f(h), ib.to_string(), "true".into(), f(rho.max_nonzero_coefficient())]);
                    out.plots.push(PlotData::from_csv(format!("density_{ih}_box_{ib}"), &rho.to_csv()));
                }
                None => summary.push(vec![f(h), ib.to_string(), "false".into(), String::new()]),
            }
        }
    }
    out.plots.push(summary);
    Ok(())
}

fn run_observability(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let obs = spec.observation.as_ref().expect("validated").build(spec.d)?;
    let v = spec.potential()?;
    let radii = spec.radii();
    let rows: Vec<ObservabilityRow> = sweep(&obs, &v, &radii, "omega")?;
    let mut plot = PlotData::new("observability_plot", &["N", "lambda_min"]);
    for r in &rows {
        plot.push(vec![r.radius.to_string(), f(r.lambda_min)]);
        out.summary.insert(format!("lambda_min_N{}", r.radius), r.lambda_min);
    }
    out.plots.push(PlotData::from_csv("observability", &rows_to_csv(&rows)));
    out.plots.push(plot);
    if let Some(profile) = &spec.spectral_window {
        let mut cross = PlotData::new("observability_spectral_window", &["N", "h", "lambda_min"]);
        for &n in &radii {
            for h in spec.h_values() {
                let c = spectral_window_constant(&obs, &v, n, h, profile)?;
                cross.push(vec![n.to_string(), f(h), f(c.lambda_min)]);
            }
        }
        out.plots.push(cross);
    }
    let top = *radii.iter().max().expect("validated");
    let c = observability_constant(&gram(&obs, &v, top)?);
    out.summary.insert("lambda_max".into(), c.lambda_max);
    Ok(())
}

/// Validates and executes the spec in memory.
pub fn execute(spec: &ExperimentSpec) -> Result<RunRecord> {
    spec.validate()?;
    let started_unix = now();
    let mut out = Outputs::new();
    match spec.kind {
        Kind::Classify => run_classify(spec, &mut out)?,
        Kind::Evolve => run_evolve(spec, &mut out)?,
        Kind::Wigner => run_wigner(spec, &mut out)?,
        Kind::Twomicro => run_twomicro(spec, &mut out)?,
        Kind::SigmaPropagation => run_sigma_propagation(spec, &mut out)?,
        Kind::Marginal => run_marginal(spec, &mut out)?,
        Kind::Disintegration => run_disintegration(spec, &mut out)?,
        Kind::Observability => run_observability(spec, &mut out)?,
    }
    Ok(RunRecord {
        kind: spec.kind,
        spec_hash: spec_hash(spec),
        version: VERSION.to_string(),
        started_unix,
        finished_unix: now(),
        outputs: Vec::new(),
        summary: out.summary,
        plots: out.plots,
        documents: out.documents,
    })
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<OutputFile> {
    std::fs::write(dir.join(name), content)?;
    Ok(OutputFile { name: name.to_string(), bytes: content.len(), sha256: sha256_hex(content.as_bytes()) })
}

/// Writes every table of the record as `<name>.csv` in `dir`.
pub fn emit_plot_data(record: &RunRecord, dir: &Path) -> Result<Vec<OutputFile>> {
    std::fs::create_dir_all(dir)?;
    record.plots.iter().map(|p| write_file(dir, &format!("{}.csv", p.name), &p.to_csv())).collect()
}

/// Executes the spec and writes tables, documents, `summary.json` and `record.json` to `dir`.
///
/// Everything but `record.json` (which carries timestamps) is byte-identical
/// across runs of the same spec and version.
pub fn run(spec: &ExperimentSpec, dir: &Path) -> Result<RunRecord> {
    let mut record = execute(spec)?;
    let mut files = emit_plot_data(&record, dir)?;
    for (name, content) in &record.documents {
        files.push(write_file(dir, name, content)?);
    }
    files.push(write_file(dir, "summary.json", &serde_json::to_string_pretty(&record.summary)?)?);
    files.push(write_file(dir, "spec.json", &spec.to_json())?);
    record.outputs = files;
    std::fs::write(dir.join("record.json"), serde_json::to_string_pretty(&record)?)?;
    Ok(record)
}

/// Output directory: explicit override, else the spec's `output`, else `out/<kind>`.
pub fn output_dir(spec: &ExperimentSpec, over: Option<&Path>) -> PathBuf {
    over.map(Path::to_path_buf)
        .or_else(|| spec.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(spec.kind.name()))
}

/// One line per summary scalar, sorted by key.
pub fn summary_text(record: &RunRecord) -> String {
    let mut s = String::new();
    for (k, v) in &record.summary {
        writeln!(s, "{k} = {v}").expect("write to string");
    }
    s
}
