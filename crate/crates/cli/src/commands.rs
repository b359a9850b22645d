use std::io::Write;
use std::path::{Path, PathBuf};

use afrelay::asymptotics::{dmt_linear_tx_report, dmt_naive, dmt_optimal, drt_mmse_tx, drt_naive};
use afrelay::montecarlo::{
    estimate_outage_with, fit_diversity_slope, Encoding, EngineOptions, EvalPath, RatePolicy, SlopeFit,
};
use afrelay::transceiver::{Scheme, SystemDims};
use chrono::Utc;
use serde::Serialize;

use crate::args::{parse_dims, parse_scheme, DrtScheme};
use crate::config::ConfigFile;
use crate::error::CliError;
use crate::report::{
    companion_json, config_digest, read_curve_csv, read_curve_document, to_stable_json, write_curve_csv,
    write_text, CurveDocument, RunManifest,
};

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Global {
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Global {
    fn out_dir(&self) -> Result<PathBuf, CliError> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub manifest: PathBuf,
}

pub fn simulate(config: &Path, g: &Global) -> Result<SimulateOutput, CliError> {
    let started_at = Utc::now();
    let cfg = ConfigFile::load(config)?.resolve(g.seed)?;
    cfg.validate()?;
    let curve = estimate_outage_with(&cfg, EngineOptions { workers: g.workers, path: EvalPath::Spectral })?;
    let digest = config_digest(&cfg);

    let dir = g.out_dir()?;
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    let out = SimulateOutput {
        csv: dir.join(format!("{stem}.csv")),
        json: dir.join(format!("{stem}.json")),
        manifest: dir.join(format!("{stem}.manifest.json")),
    };
    write_curve_csv(&out.csv, &curve)?;
    let doc = CurveDocument { config: cfg, config_digest: digest.clone(), points: curve.points };
    write_text(&out.json, &to_stable_json(&doc)?)?;
    let manifest = RunManifest {
        config_digest: digest,
        tool_version: crate::report::TOOL_VERSION.to_string(),
        started_at,
        finished_at: Utc::now(),
        workers: g.workers,
        outputs: vec![out.csv.clone(), out.json.clone()],
    };
    write_text(&out.manifest, &to_stable_json(&manifest)?)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DmtRow {
    pub r: f64,
    pub scheme: f64,
    /// Empty beyond `r = N/2`, where the cut-set curve is undefined.
    pub optimal: Option<f64>,
    /// Whether the scheme value is established at this `r`.
    pub valid: bool,
}

pub fn dmt_table(dims: SystemDims, scheme: Scheme, grid: &[f64]) -> Result<Vec<DmtRow>, CliError> {
    grid.iter()
        .map(|&r| {
            let (value, valid) = match scheme {
                Scheme::MmseTx | Scheme::ZfTx => {
                    let rep = dmt_linear_tx_report(dims, r, scheme)?;
                    (rep.value, rep.is_valid_at(r))
                }
                Scheme::NaiveMmse | Scheme::NaiveZf => (dmt_naive(dims, r)?, true),
                Scheme::OptimalLb => (dmt_optimal(dims, r)?, true),
            };
            let optimal = if r <= dims.n() as f64 / 2.0 { Some(dmt_optimal(dims, r)?) } else { None };
            Ok(DmtRow { r, scheme: value, optimal, valid })
        })
        .collect::<Result<_, afrelay::RelayError>>()
        .map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct DrtRow {
    pub rate: f64,
    pub index_arg: f64,
    pub lower_index: usize,
    pub upper_index: usize,
    pub lower: f64,
    pub upper: f64,
    pub discontinuity: bool,
}

pub fn drt_table(dims: SystemDims, scheme: DrtScheme, grid: &[f64]) -> Result<Vec<DrtRow>, CliError> {
    grid.iter()
        .map(|&rate| {
            let b = match scheme {
                DrtScheme::MmseTx => drt_mmse_tx(dims, rate),
                DrtScheme::NaiveMmse => drt_naive(dims, rate),
            }
            .map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(DrtRow {
                rate,
                index_arg: b.index_arg,
                lower_index: b.lower_index,
                upper_index: b.upper_index,
                lower: b.lower,
                upper: b.upper,
                discontinuity: b.discontinuity,
            })
        })
        .collect()
}

/// Writes rows as CSV to stdout and, when `--out` is set, to `<out>/<name>`.
pub fn emit_table<R: Serialize>(rows: &[R], name: &str, g: &Global) -> Result<Option<PathBuf>, CliError> {
    let mut buf = csv::Writer::from_writer(Vec::new());
    for row in rows {
        buf.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = buf.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    std::io::stdout().write_all(&bytes)?;
    if g.out.is_some() {
        let path = g.out_dir()?.join(name);
        std::fs::write(&path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok(Some(path));
    }
    Ok(None)
}

/// Diversity range a fitted slope is compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryRange {
    pub lower: f64,
    pub upper: f64,
    pub basis: String,
    /// Set when the comparison rests on an unproven conjecture.
    pub note: Option<String>,
    #[serde(skip)]
    pub dims: Option<SystemDims>,
}

/// Theoretical diversity for a scheme under a rate policy.
pub fn theory_for(
    dims: SystemDims,
    scheme: Scheme,
    encoding: Encoding,
    policy: RatePolicy,
) -> Result<TheoryRange, CliError> {
    let usage = |e: afrelay::RelayError| CliError::Usage(e.to_string());
    let point = |v: f64, basis: String| TheoryRange { lower: v, upper: v, basis, note: None, dims: Some(dims) };
    let range = match (policy, scheme) {
        (RatePolicy::FixedRate(_), Scheme::MmseTx) if encoding == Encoding::Separate => {
            let mut t = point(dmt_linear_tx_report(dims, 0.0, scheme).map_err(usage)?.value, "linear transceiver DMT at r = 0".into());
            t.note = Some("no closed-form DRT for separate encoding; comparison is unproven".into());
            t
        }
        (RatePolicy::FixedRate(rate), Scheme::MmseTx) => {
            let b = drt_mmse_tx(dims, rate).map_err(usage)?;
            TheoryRange { lower: b.lower, upper: b.upper, basis: format!("MMSE transceiver DRT at R = {rate}"), note: None, dims: Some(dims) }
        }
        (RatePolicy::FixedRate(rate), Scheme::NaiveMmse) => {
            let b = drt_naive(dims, rate).map_err(usage)?;
            TheoryRange { lower: b.lower, upper: b.upper, basis: format!("naive MMSE DRT at R = {rate}"), note: None, dims: Some(dims) }
        }
        (RatePolicy::FixedRate(_), Scheme::ZfTx) => {
            point(dmt_linear_tx_report(dims, 0.0, scheme).map_err(usage)?.value, "ZF transceiver DMT at r = 0".into())
        }
        (RatePolicy::FixedRate(_), Scheme::NaiveZf) => point(dmt_naive(dims, 0.0).map_err(usage)?, "naive ZF DMT at r = 0".into()),
        (RatePolicy::FixedRate(_), Scheme::OptimalLb) => point(dmt_optimal(dims, 0.0).map_err(usage)?, "cut-set DMT at r = 0".into()),
        (RatePolicy::Multiplexing(r), Scheme::MmseTx | Scheme::ZfTx) => {
            let rep = dmt_linear_tx_report(dims, r, scheme).map_err(usage)?;
            if !rep.is_valid_at(r) {
                return Err(CliError::Usage(
                    "the MMSE transceiver DMT is only established for r > 0; use a fixed-rate theory instead".into(),
                ));
            }
            point(rep.value, format!("linear transceiver DMT at r = {r}"))
        }
        (RatePolicy::Multiplexing(r), Scheme::NaiveMmse | Scheme::NaiveZf) => {
            point(dmt_naive(dims, r).map_err(usage)?, format!("naive DMT at r = {r}"))
        }
        (RatePolicy::Multiplexing(r), Scheme::OptimalLb) => point(dmt_optimal(dims, r).map_err(usage)?, format!("cut-set DMT at r = {r}")),
    };
    Ok(range)
}

/// Parses `--theory`: a number, `auto`, or a `key=value;…` descriptor.
pub fn parse_theory(spec: &str, doc: Option<&CurveDocument>) -> Result<TheoryRange, CliError> {
    let spec = spec.trim();
    if let Ok(v) = spec.parse::<f64>() {
        return Ok(TheoryRange { lower: v, upper: v, basis: "given value".into(), note: None, dims: None });
    }
    if spec == "auto" {
        let doc = doc.ok_or_else(|| CliError::Usage("`--theory auto` needs the curve's JSON companion".into()))?;
        let c = &doc.config;
        return theory_for(c.dims, c.scheme, c.encoding, c.rate_policy);
    }
    let (mut dims, mut scheme, mut encoding, mut policy) = (None, None, Encoding::Joint, None);
    for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("theory entry `{item}` is not key=value")))?;
        let value = value.trim();
        let number = || value.parse::<f64>().map_err(|_| CliError::Usage(format!("`{value}` is not a number")));
        match key.trim() {
            "dims" => dims = Some(parse_dims(value).map_err(CliError::Usage)?),
            "scheme" => scheme = Some(parse_scheme(value).map_err(CliError::Usage)?),
            "encoding" => encoding = value.parse().map_err(|e: afrelay::RelayError| CliError::Usage(e.to_string()))?,
            "fixed_rate" => policy = Some(RatePolicy::FixedRate(number()?)),
            "multiplexing" => policy = Some(RatePolicy::Multiplexing(number()?)),
            other => return Err(CliError::Usage(format!("unknown theory key `{other}`"))),
        }
    }
    match (dims, scheme, policy) {
        (Some(d), Some(s), Some(p)) => theory_for(d, s, encoding, p),
        _ => Err(CliError::Usage("theory descriptor needs dims, scheme and fixed_rate or multiplexing".into())),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeReport {
    pub csv: PathBuf,
    pub config_digest: Option<String>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: Option<f64>,
    pub window_snr_db: Vec<f64>,
    pub theory: TheoryRange,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn slope(csv: &Path, theory: &str, tol: f64, min_count: u64, g: &Global) -> Result<SlopeReport, CliError> {
    let curve = read_curve_csv(csv)?;
    let json = companion_json(csv);
    let doc = if json.exists() { Some(read_curve_document(&json)?) } else { None };
    let theory = parse_theory(theory, doc.as_ref())?;
    match (&doc, theory.dims) {
        (Some(doc), Some(d)) if doc.config.dims != d => {
            return Err(CliError::Usage(format!(
                "theory is for {d} but the curve was simulated with {} (config {})",
                doc.config.dims, doc.config_digest
            )));
        }
        (None, Some(d)) => log::warn!("no JSON companion for {}; cannot confirm the curve is {d}", csv.display()),
        _ => {}
    }

    let fit: SlopeFit = fit_diversity_slope(&curve, min_count)?;
    let pass = fit.slope >= theory.lower - tol && fit.slope <= theory.upper + tol;
    let report = SlopeReport {
        csv: csv.to_path_buf(),
        config_digest: doc.map(|d| d.config_digest),
        slope: fit.slope,
        intercept: fit.intercept,
        stderr: fit.stderr,
        window_snr_db: fit.window.iter().map(|&k| curve.points[k].snr_db).collect(),
        theory,
        tolerance: tol,
        pass,
    };
    let text = to_stable_json(&report)?;
    print!("{text}");
    if g.out.is_some() {
        let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
        write_text(&g.out_dir()?.join(format!("{stem}.slope.json")), &text)?;
    }
    Ok(report)
}
