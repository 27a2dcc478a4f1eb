//! Parameter sweeps, sign-change refinement and tabular output.
//!
//! Rows come out in a fixed order (group, then axis ascending) no matter how
//! many worker threads evaluate them, and numbers are printed as
//! `{:.16e}`, so a sweep written twice is byte-identical and parses back to
//! the same bits.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Quench, QuenchConfig, SourceKind, SourceModel, DEFAULT_N_CAP, DEFAULT_SOURCE_TOL};
use crate::infomeasures::EntropyReport;
use crate::spectrum::{ground_level, levels, negative_branch_set, singlet_energy, GroundLevel, ModelParams};
use crate::thermal::{ThermalConfig, ThermalEnsemble, DEFAULT_TRUNC_TOL};
use crate::{Error, Result};

/// Axis tolerance for crossover bisection.
pub const CROSSOVER_TOL: f64 = 1e-6;

/// `points` evenly spaced values from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidSweep(format!("need at least 2 points, got {points}")));
    }
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(Error::InvalidSweep(format!("invalid range [{min}, {max}]")));
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { max } else { min + step * i as f64 }).collect())
}

/// Formats a float so that parsing it back gives the same bits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One line of tabular output.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

const REPORT_COLUMNS: [&str; 8] = ["S_joint", "S_A", "S_R", "cond_R", "cond_A", "mutual", "ratio", "regime"];

fn report_fields(report: &Option<EntropyReport>, error: &Option<String>) -> Vec<String> {
    match (report, error) {
        (Some(r), _) => {
            let mut out: Vec<String> =
                [r.s_joint, r.s_atom, r.s_rad, r.cond_given_rad, r.cond_given_atom, r.mutual].map(format_f64).into();
            out.push(r.ratio.map(format_f64).unwrap_or_default());
            out.push(r.regime.as_str().to_owned());
            out
        }
        (None, err) => {
            let mut out = vec![String::new(); REPORT_COLUMNS.len() - 1];
            out.push(format!("error({})", err.as_deref().unwrap_or("unknown")));
            out
        }
    }
}

fn split_outcome(outcome: Result<EntropyReport>) -> (Option<EntropyReport>, Option<String>) {
    match outcome {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalRow {
    pub inv_beta: f64,
    pub kappa_ratio: f64,
    pub report: Option<EntropyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ThermalRow {
    pub fn ratio(&self) -> Option<f64> {
        self.report.and_then(|r| r.ratio)
    }
}

impl CsvRow for ThermalRow {
    fn header() -> &'static [&'static str] {
        &["inv_beta", "kappa_ratio", "S_joint", "S_A", "S_R", "cond_R", "cond_A", "mutual", "ratio", "regime"]
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![format_f64(self.inv_beta), format_f64(self.kappa_ratio)];
        out.extend(report_fields(&self.report, &self.error));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchRow {
    pub tau: f64,
    pub kt: f64,
    pub source: SourceKind,
    pub nbar: f64,
    pub report: Option<EntropyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl QuenchRow {
    pub fn ratio(&self) -> Option<f64> {
        self.report.and_then(|r| r.ratio)
    }
}

impl CsvRow for QuenchRow {
    fn header() -> &'static [&'static str] {
        &["tau", "kt", "source", "nbar", "S_joint", "S_A", "S_R", "cond_R", "cond_A", "mutual", "ratio", "regime"]
    }

    fn fields(&self) -> Vec<String> {
        let mut out =
            vec![format_f64(self.tau), format_f64(self.kt), self.source.as_str().to_owned(), format_f64(self.nbar)];
        out.extend(report_fields(&self.report, &self.error));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSweepSpec {
    /// κ/ω values; rows are emitted in ascending order.
    pub kappa_ratios: Vec<f64>,
    /// ω₀/ω; 1 is resonance.
    pub omega0: f64,
    pub inv_beta_min: f64,
    pub inv_beta_max: f64,
    pub points: usize,
    pub trunc_tol: f64,
    pub n_cap: usize,
}

impl Default for ThermalSweepSpec {
    fn default() -> Self {
        Self {
            kappa_ratios: vec![0.5, 2.5, 5.0],
            omega0: 1.0,
            inv_beta_min: 0.01,
            inv_beta_max: 4.0,
            points: 400,
            trunc_tol: DEFAULT_TRUNC_TOL,
            n_cap: crate::thermal::DEFAULT_N_CAP,
        }
    }
}

impl ThermalSweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.inv_beta_min <= 0.0 {
            return Err(Error::InvalidSweep(format!("inv_beta_min must be > 0, got {}", self.inv_beta_min)));
        }
        linear_grid(self.inv_beta_min, self.inv_beta_max, self.points)
    }

    fn sorted_params(&self) -> Result<Vec<(f64, ModelParams)>> {
        if self.kappa_ratios.is_empty() {
            return Err(Error::InvalidSweep("no kappa ratios given".into()));
        }
        let mut kappas = self.kappa_ratios.clone();
        kappas.sort_by(f64::total_cmp);
        kappas.dedup();
        kappas.into_iter().map(|k| Ok((k, ModelParams::new(1.0, self.omega0, k)?))).collect()
    }

    fn config(&self, params: ModelParams, inv_beta: f64) -> ThermalConfig {
        ThermalConfig::new(params, inv_beta).with_trunc_tol(self.trunc_tol).with_n_cap(self.n_cap)
    }

    /// The temperature grid and the `(κ/ω, params)` groups.
    #[allow(clippy::type_complexity)]
    fn validate(&self) -> Result<(Vec<f64>, Vec<(f64, ModelParams)>)> {
        let grid = self.grid()?;
        let params = self.sorted_params()?;
        self.config(params[0].1, grid[0]).validate()?;
        Ok((grid, params))
    }
}

fn thermal_point(spec: &ThermalSweepSpec, params: ModelParams, inv_beta: f64) -> Result<EntropyReport> {
    ThermalEnsemble::new(&spec.config(params, inv_beta))?.report()
}

/// Evaluates every (κ, inv_beta) point. Per-point numeric failures become
/// error rows; only invalid sweep settings fail the whole sweep.
pub fn run_thermal_sweep(spec: &ThermalSweepSpec) -> Result<Vec<ThermalRow>> {
    let (grid, params) = spec.validate()?;
    let jobs: Vec<(f64, ModelParams, f64)> =
        params.iter().flat_map(|&(k, p)| grid.iter().map(move |&x| (k, p, x))).collect();
    Ok(jobs
        .into_par_iter()
        .map(|(kappa_ratio, params, inv_beta)| {
            let (report, error) = split_outcome(thermal_point(spec, params, inv_beta));
            ThermalRow { inv_beta, kappa_ratio, report, error }
        })
        .collect())
}

/// Sign changes of the ratio in a thermal sweep, per κ in ascending order.
pub fn thermal_crossovers(spec: &ThermalSweepSpec, rows: &[ThermalRow]) -> Result<Vec<CrossoverRecord>> {
    let (_, params) = spec.validate()?;
    let mut out = Vec::new();
    for (kappa_ratio, params) in params {
        let points: Vec<(f64, Option<f64>)> =
            rows.iter().filter(|r| r.kappa_ratio == kappa_ratio).map(|r| (r.inv_beta, r.ratio())).collect();
        let eval = |x: f64| thermal_point(spec, params, x).ok().and_then(|r| r.ratio);
        let group = format!("kappa_ratio={kappa_ratio}");
        out.extend(find_crossovers(&points, eval, CROSSOVER_TOL).into_iter().map(|c| c.in_group(&group)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchSweepSpec {
    pub kappa_ratio: f64,
    pub omega0: f64,
    /// Groups in output order.
    pub sources: Vec<SourceModel>,
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
    pub trunc_tol: f64,
    pub n_cap: usize,
}

impl Default for QuenchSweepSpec {
    fn default() -> Self {
        Self {
            kappa_ratio: 1.0,
            omega0: 1.0,
            sources: [1.0, 5.0, 50.0].map(|nbar| SourceModel::Geometric { nbar }).into(),
            tau_min: 1e-4,
            tau_max: 3.0,
            points: 1000,
            trunc_tol: DEFAULT_SOURCE_TOL,
            n_cap: DEFAULT_N_CAP,
        }
    }
}

impl QuenchSweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.tau_min < 0.0 {
            return Err(Error::InvalidSweep(format!("tau_min must be >= 0, got {}", self.tau_min)));
        }
        linear_grid(self.tau_min, self.tau_max, self.points)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let params = ModelParams::new(1.0, self.omega0, self.kappa_ratio)?;
        if params.kappa <= 0.0 {
            return Err(Error::InvalidSweep("quench sweeps need kappa_ratio > 0".into()));
        }
        Ok(params)
    }

    /// One prepared quench per source, in output order.
    pub fn quenches(&self) -> Result<Vec<Quench>> {
        if self.sources.is_empty() {
            return Err(Error::InvalidSweep("no photon sources given".into()));
        }
        let params = self.params()?;
        self.sources
            .iter()
            .map(|source| {
                let cfg =
                    QuenchConfig::new(params, source.clone()).with_trunc_tol(self.trunc_tol).with_n_cap(self.n_cap);
                Quench::new(&cfg)
            })
            .collect()
    }
}

fn quench_point(quench: &Quench, tau: f64) -> Result<EntropyReport> {
    quench.report(quench.cfg.time_from_tau(tau))
}

pub fn run_quench_sweep(spec: &QuenchSweepSpec) -> Result<Vec<QuenchRow>> {
    let grid = spec.grid()?;
    let quenches = spec.quenches()?;
    let jobs: Vec<(&Quench, f64)> = quenches.iter().flat_map(|q| grid.iter().map(move |&tau| (q, tau))).collect();
    Ok(jobs
        .into_par_iter()
        .map(|(quench, tau)| {
            let (report, error) = split_outcome(quench_point(quench, tau));
            QuenchRow {
                tau,
                kt: quench.cfg.kt_from_tau(tau),
                source: quench.cfg.source.kind(),
                nbar: quench.cfg.source.nbar(),
                report,
                error,
            }
        })
        .collect())
}

/// Sign changes of the ratio in a quench sweep, per source in the order given.
pub fn quench_crossovers(spec: &QuenchSweepSpec, rows: &[QuenchRow]) -> Result<Vec<CrossoverRecord>> {
    let mut out = Vec::new();
    for quench in spec.quenches()? {
        let (kind, nbar) = (quench.cfg.source.kind(), quench.cfg.source.nbar());
        let points: Vec<(f64, Option<f64>)> =
            rows.iter().filter(|r| r.source == kind && r.nbar == nbar).map(|r| (r.tau, r.ratio())).collect();
        let eval = |tau: f64| quench_point(&quench, tau).ok().and_then(|r| r.ratio);
        let group = format!("{}:nbar={nbar}", kind.as_str());
        out.extend(find_crossovers(&points, eval, CROSSOVER_TOL).into_iter().map(|c| c.in_group(&group)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    PositiveToNegative,
    NegativeToPositive,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::PositiveToNegative => "positive_to_negative",
            Direction::NegativeToPositive => "negative_to_positive",
        }
    }
}

/// A sign change of the ratio, bracketed by `[lo, hi]` on the sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverRecord {
    pub group: String,
    /// Bracket midpoint.
    pub axis: f64,
    pub lo: f64,
    pub hi: f64,
    pub direction: Direction,
}

impl CrossoverRecord {
    fn in_group(mut self, group: &str) -> Self {
        self.group = group.to_owned();
        self
    }
}

impl CsvRow for CrossoverRecord {
    fn header() -> &'static [&'static str] {
        &["group", "axis", "lo", "hi", "direction"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.group.clone(),
            format_f64(self.axis),
            format_f64(self.lo),
            format_f64(self.hi),
            self.direction.as_str().to_owned(),
        ]
    }
}

/// Locates every sign change between adjacent defined ratios of an
/// axis-sorted column and bisects it with `eval` down to `axis_tol`.
///
/// Rows with `None` (degenerate or failed) are skipped. Bisection stops early,
/// keeping the current bracket, if `eval` returns `None` or an exact zero.
pub fn find_crossovers<F>(points: &[(f64, Option<f64>)], eval: F, axis_tol: f64) -> Vec<CrossoverRecord>
where
    F: Fn(f64) -> Option<f64>,
{
    let defined: Vec<(f64, f64)> = points.iter().filter_map(|&(x, r)| r.map(|r| (x, r))).collect();
    let mut out = Vec::new();
    for pair in defined.windows(2) {
        let ((mut lo, r_lo), (mut hi, r_hi)) = (pair[0], pair[1]);
        let lo_negative = r_lo < 0.0;
        if lo_negative == (r_hi < 0.0) {
            continue;
        }
        while hi - lo > axis_tol {
            let mid = 0.5 * (lo + hi);
            match eval(mid) {
                Some(r) if r != 0.0 => {
                    if (r < 0.0) == lo_negative {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                _ => break,
            }
        }
        let direction = if lo_negative { Direction::NegativeToPositive } else { Direction::PositiveToNegative };
        out.push(CrossoverRecord { group: String::new(), axis: 0.5 * (lo + hi), lo, hi, direction });
    }
    out
}

/// Closed axis range `[start, end]` covered by consecutive negative ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

/// Maximal runs of negative ratios among the defined rows of an axis-sorted
/// column. Undefined rows neither extend nor break a run.
pub fn negative_intervals(points: &[(f64, Option<f64>)]) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    let mut open = false;
    for (x, r) in points.iter().filter_map(|&(x, r)| r.map(|r| (x, r))) {
        if r < 0.0 {
            match (open, out.last_mut()) {
                (true, Some(last)) => last.end = x,
                _ => out.push(Interval { start: x, end: x }),
            }
            open = true;
        } else {
            open = false;
        }
    }
    out
}

/// Turning points of a sequence, counting a local extremum only once the
/// sequence has retraced from it by more than `min_swing`.
///
/// With `min_swing = 0` every strict reversal counts; a positive threshold
/// ignores ripples smaller than the swing.
pub fn count_extrema(values: &[f64], min_swing: f64) -> usize {
    let Some((&first, rest)) = values.split_first() else {
        return 0;
    };
    let (mut count, mut rising, mut extreme) = (0, None::<bool>, first);
    for &x in rest {
        match rising {
            None if (x - extreme).abs() > min_swing => rising = Some(x > extreme),
            None => continue,
            Some(up) if (x > extreme) == up && x != extreme => {}
            Some(up) => {
                if (x - extreme).abs() <= min_swing {
                    continue;
                }
                count += 1;
                rising = Some(!up);
            }
        }
        extreme = x;
    }
    count
}

/// One eigenstate in a spectrum listing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    /// `None` for the singlet `|0,g⟩`.
    pub n: Option<usize>,
    pub s: Option<u8>,
    pub energy: f64,
    pub theta: Option<f64>,
}

impl CsvRow for SpectrumRow {
    fn header() -> &'static [&'static str] {
        &["level", "n", "s", "energy", "theta"]
    }

    fn fields(&self) -> Vec<String> {
        let label = match (self.n, self.s) {
            (Some(n), Some(s)) => format!("phi({n},{s})"),
            _ => "singlet".to_owned(),
        };
        vec![
            label,
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            self.s.map(|s| s.to_string()).unwrap_or_default(),
            format_f64(self.energy),
            self.theta.map(format_f64).unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumListing {
    pub params: ModelParams,
    pub rows: Vec<SpectrumRow>,
    /// Indices `n` with `Ω(n,2) < 0`.
    pub negative_branch: Vec<usize>,
    pub ground: GroundLevel,
}

/// The singlet and every dressed level up to `n_max`, sorted by `(n, s)`.
pub fn spectrum_listing(params: &ModelParams, n_max: usize) -> Result<SpectrumListing> {
    let mut rows = vec![SpectrumRow { n: None, s: None, energy: singlet_energy(params), theta: None }];
    rows.extend(levels(params, n_max).into_iter().map(|l| SpectrumRow {
        n: Some(l.n),
        s: Some(l.s),
        energy: l.energy,
        theta: Some(l.theta),
    }));
    Ok(SpectrumListing {
        params: *params,
        rows,
        negative_branch: negative_branch_set(params, n_max),
        ground: ground_level(params, n_max)?,
    })
}

pub fn write_csv<R: CsvRow, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    writer.write_record(R::header())?;
    for row in rows {
        writer.write_record(row.fields())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Rows that can be written in either [`OutputFormat`].
pub trait TableRow: CsvRow + Serialize {}

impl<T: CsvRow + Serialize> TableRow for T {}

pub fn write_rows<R: TableRow, W: Write>(rows: &[R], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(rows, out),
        OutputFormat::Json => write_json(rows, out),
    }
}

/// A CSV file read back as header plus raw string fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric column; empty fields read as `None`.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx = self.column(name).ok_or_else(|| Error::InvalidSweep(format!("no column {name}")))?;
        self.records
            .iter()
            .map(|rec| match rec[idx].as_str() {
                "" => Ok(None),
                field => field.parse().map(Some).map_err(|e| Error::InvalidSweep(format!("{name}: {field:?}: {e}"))),
            })
            .collect()
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<CsvTable> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.iter().map(str::to_owned).collect();
    let records = reader
        .records()
        .map(|rec| Ok(rec?.iter().map(str::to_owned).collect()))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok(CsvTable { header, records })
}
