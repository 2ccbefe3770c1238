//! Command implementations. Each returns the rendered output plus the exit
//! code for outcomes that are not errors (verification failure = 2,
//! numerical failure = 3); malformed input surfaces as `Err` and exits 1.

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;
use std::path::Path;

use superball_core::certifier::{self, CertifyError};
use superball_core::family::{self, FamilyPoint, FamilyRow};
use superball_core::geometry::{Exponent, LOG2_3};
use superball_core::lattice::{self, Basis, NeighborCase};
use superball_core::optimizer::{self, CriticalPoint, SearchConfig};

use crate::formats::{self, BasisEntry};

/// Fixed default seed for reproducible searches.
pub const DEFAULT_SEED: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Rendered command outcome. `warnings` go to stderr.
#[derive(Debug, Default)]
pub struct CmdOutput {
    pub text: String,
    pub code: i32,
    pub warnings: Vec<String>,
}

impl CmdOutput {
    fn ok(text: String) -> Self {
        CmdOutput {
            text,
            code: EXIT_OK,
            warnings: Vec::new(),
        }
    }
}

fn read_entries(path: &Path) -> Result<Vec<BasisEntry>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    formats::parse_basis_entries(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn exponent_for(entry: &BasisEntry, flag: Option<f64>) -> Result<Exponent> {
    let p = flag
        .or(entry.p)
        .ok_or_else(|| anyhow!("no exponent available: pass --p or use a file that carries p"))?;
    Exponent::new(p).map_err(|e| anyhow!("{e}"))
}

fn basis_for(entry: &BasisEntry) -> Result<Basis> {
    Basis::new(entry.matrix).map_err(|e| anyhow!("{e}"))
}

/// `density`: density, |det|, and neighbor count of each basis in the file.
pub fn cmd_density(input: &Path, p: Option<f64>, tol: f64) -> Result<CmdOutput> {
    let entries = read_entries(input)?;
    let mut values = Vec::new();
    for entry in &entries {
        let pe = exponent_for(entry, p)?;
        let basis = basis_for(entry)?;
        let report = lattice::verify_packing(&basis, pe, tol);
        values.push(serde_json::json!({
            "p": pe.get(),
            "density": lattice::density(&basis, pe),
            "det": basis.det().abs(),
            "neighbors": lattice::count_neighbors(&basis, pe, tol),
            "verified": report.is_packing,
        }));
    }
    let out = if values.len() == 1 {
        formats::to_json(&values[0])
    } else {
        formats::to_json(&Value::Array(values))
    };
    Ok(CmdOutput::ok(out + "\n"))
}

fn report_value(pe: Exponent, report: &lattice::PackingCheckReport) -> Value {
    let min_norm = if report.min_norm.is_finite() {
        Value::from(report.min_norm)
    } else {
        // empty enumeration box: no nonzero vector reaches the radius
        Value::Null
    };
    serde_json::json!({
        "p": pe.get(),
        "is_packing": report.is_packing,
        "min_norm": min_norm,
        "argmin": report.argmin.to_vec(),
        "enumeration_box": report.enumeration_box.to_vec(),
        "vectors_checked": report.vectors_checked,
        "violators": report.violators.iter().map(|v| v.to_vec()).collect::<Vec<_>>(),
    })
}

/// `verify`: finite packing check; exits 2 when any input is not a packing.
pub fn cmd_verify(input: &Path, p: Option<f64>, tol: f64) -> Result<CmdOutput> {
    let entries = read_entries(input)?;
    let mut values = Vec::new();
    let mut all_packing = true;
    for entry in &entries {
        let pe = exponent_for(entry, p)?;
        let basis = basis_for(entry)?;
        let report = lattice::verify_packing(&basis, pe, tol);
        all_packing &= report.is_packing;
        values.push(report_value(pe, &report));
    }
    let text = if values.len() == 1 {
        formats::to_json(&values[0])
    } else {
        formats::to_json(&Value::Array(values))
    };
    Ok(CmdOutput {
        text: text + "\n",
        code: if all_packing {
            EXIT_OK
        } else {
            EXIT_VERIFICATION
        },
        warnings: Vec::new(),
    })
}

fn critical_point_value(cp: &CriticalPoint, pe: Exponent) -> Value {
    let m = cp.basis.matrix();
    serde_json::json!({
        "case": cp.case.index(),
        "p": pe.get(),
        "matrix": m.iter().flatten().copied().collect::<Vec<f64>>(),
        "density": cp.density,
        "residual": cp.residual,
        "neighbors": lattice::count_neighbors(&cp.basis, pe, 1e-6),
        "verified": cp.verified,
    })
}

/// `search`: random-restart search; prints a density-sorted JSON array.
/// An empty result list is a valid outcome (exit 0).
pub fn cmd_search(
    case_index: u8,
    p: f64,
    restarts: usize,
    seed: u64,
    jobs: usize,
) -> Result<CmdOutput> {
    let case =
        NeighborCase::from_index(case_index).ok_or_else(|| anyhow!("--case must be 1, 2, or 3"))?;
    let pe = Exponent::new(p).map_err(|e| anyhow!("{e}"))?;
    let cfg = SearchConfig {
        restarts,
        seed,
        ..SearchConfig::default()
    };
    let jobs = jobs.max(1);
    let results = if jobs == 1 {
        optimizer::random_search(case, pe, &cfg)
    } else {
        parallel_search(case, pe, &cfg, jobs)
    };
    let values: Vec<Value> = results
        .iter()
        .map(|cp| critical_point_value(cp, pe))
        .collect();
    Ok(CmdOutput::ok(
        formats::to_json(&Value::Array(values)) + "\n",
    ))
}

/// Splits restart indices over `jobs` threads; each index uses its own
/// derived random stream, so the merged outcome is identical to the
/// sequential run.
fn parallel_search(
    case: NeighborCase,
    pe: Exponent,
    cfg: &SearchConfig,
    jobs: usize,
) -> Vec<CriticalPoint> {
    let mut found: Vec<CriticalPoint> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for worker in 0..jobs {
            let cfg = *cfg;
            handles.push(scope.spawn(move || {
                let mut local = Vec::new();
                let mut index = worker as u64;
                while (index as usize) < cfg.restarts {
                    if let Ok(cp) = optimizer::search_restart(case, pe, &cfg, index) {
                        local.push(cp);
                    }
                    index += jobs as u64;
                }
                local
            }));
        }
        for handle in handles {
            found.extend(handle.join().expect("search worker panicked"));
        }
    });
    optimizer::collect_results(found)
}

/// Parses `start:step:end` (inclusive of both ends when the span is an
/// integer multiple of the step within 1e-12) or a single value.
pub fn parse_p_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.len() {
        1 => Ok(vec![parts[0]
            .parse()
            .map_err(|_| anyhow!("invalid p value `{}`", parts[0]))?]),
        3 => {
            let start: f64 = parts[0]
                .parse()
                .map_err(|_| anyhow!("invalid grid start `{}`", parts[0]))?;
            let step: f64 = parts[1]
                .parse()
                .map_err(|_| anyhow!("invalid grid step `{}`", parts[1]))?;
            let end: f64 = parts[2]
                .parse()
                .map_err(|_| anyhow!("invalid grid end `{}`", parts[2]))?;
            if step <= 0.0 || !step.is_finite() || end < start {
                bail!("grid must satisfy step > 0 and end >= start");
            }
            let span = (end - start) / step;
            let n = span.round() as usize;
            let mut grid: Vec<f64> = (0..n).map(|k| start + k as f64 * step).collect();
            if (span - span.round()).abs() <= 1e-12 {
                grid.push(end);
            } else {
                // end is not on the grid; keep the last on-grid point
                grid.push(start + n as f64 * step);
                if *grid.last().unwrap() > end + 1e-12 {
                    grid.pop();
                }
            }
            Ok(grid)
        }
        _ => bail!("p grid must be `value` or `start:step:end`, got `{spec}`"),
    }
}

fn family_csv(rows: &[FamilyRow]) -> String {
    let mut out = String::from("p,x,y,z,det,density,neighbors\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            formats::fmt_sig12(r.p),
            formats::fmt_sig12(r.x),
            formats::fmt_sig12(r.y),
            formats::fmt_sig12(r.z),
            formats::fmt_sig12(r.det),
            formats::fmt_sig12(r.density),
            r.neighbors,
        ));
    }
    out
}

/// `family`: tabulates the circulant family over a p grid as CSV. Rows that
/// fail to solve are reported on stderr; exit 3 when any failed.
pub fn cmd_family(grid_spec: &str) -> Result<CmdOutput> {
    let grid = parse_p_grid(grid_spec)?;
    let results = family::family_table(&grid);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (pv, result) in results {
        match result {
            Ok(row) => rows.push(row),
            Err(err) => warnings.push(format!("p = {pv}: {err}")),
        }
    }
    Ok(CmdOutput {
        text: family_csv(&rows),
        code: if warnings.is_empty() {
            EXIT_OK
        } else {
            EXIT_NUMERICAL
        },
        warnings,
    })
}

/// The family endpoint row at p = log₂ 3 (body centered cubic), inserted
/// analytically: the Newton solver degenerates there.
fn endpoint_row() -> FamilyRow {
    let (x, y, z) = family::ENDPOINT;
    let pe = Exponent::new(LOG2_3).expect("log2 3 is a valid exponent");
    let pt = FamilyPoint::new(pe, x, y, z, 0.0).expect("endpoint satisfies the region");
    FamilyRow::from_point(&pt)
}

/// `table --regime 1|2`: reproduces the regime density tables.
pub fn cmd_table(regime: u8) -> Result<CmdOutput> {
    match regime {
        1 => {
            let grid = [1.0, 1.1, 1.2, 1.3, 1.4, 1.5];
            let results = family::family_table(&grid);
            let mut rows = Vec::new();
            for (pv, result) in results {
                rows.push(result.map_err(|e| anyhow!("family row p = {pv} failed: {e}"))?);
            }
            rows.push(endpoint_row());
            Ok(CmdOutput::ok(family_csv(&rows)))
        }
        2 => {
            let mut out = String::from("p,det,density,neighbors\n");
            // the shared endpoint (bcc) opens the second regime
            let bcc = endpoint_row();
            out.push_str(&format!(
                "{},{},{},{}\n",
                formats::fmt_sig12(bcc.p),
                formats::fmt_sig12(bcc.det),
                formats::fmt_sig12(bcc.density),
                bcc.neighbors,
            ));
            for (pv, matrix) in superball_core::catalog::SECOND_REGIME {
                let pe = Exponent::new(pv).unwrap();
                let basis = Basis::new(matrix).expect("catalog bases are invertible");
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    formats::fmt_sig12(pv),
                    formats::fmt_sig12(basis.det().abs()),
                    formats::fmt_sig12(lattice::density(&basis, pe)),
                    lattice::count_neighbors(&basis, pe, 1e-6),
                ));
            }
            Ok(CmdOutput::ok(out))
        }
        other => bail!("--regime must be 1 or 2, got {other}"),
    }
}

/// `certify`: verifies a schedule file, or builds an adaptive one.
///
/// Output is the certificate JSONL; exit 2 when the chain does not cover
/// the requested range.
pub fn cmd_certify(
    schedule: Option<&Path>,
    auto: bool,
    range: Option<(f64, f64, f64)>,
) -> Result<CmdOutput> {
    match (schedule, auto) {
        (Some(path), false) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let rows = formats::parse_schedule(&text)?;
            match certifier::certify_schedule(&rows) {
                Ok(chain) => Ok(CmdOutput::ok(formats::certificate_jsonl(
                    &chain.rows,
                    chain.covered,
                    true,
                ))),
                Err(CertifyError::RowFailed {
                    index,
                    status,
                    rows,
                }) => {
                    let covered = covered_prefix(&rows);
                    Ok(CmdOutput {
                        text: formats::certificate_jsonl(&rows, covered, false),
                        code: EXIT_VERIFICATION,
                        warnings: vec![format!(
                            "row {index} (p0 = {}) failed: {status}",
                            rows[index].p_lo
                        )],
                    })
                }
                Err(CertifyError::Gap {
                    first_uncovered,
                    rows,
                }) => {
                    let covered = covered_prefix(&rows);
                    Ok(CmdOutput {
                        text: formats::certificate_jsonl(&rows, covered, false),
                        code: EXIT_VERIFICATION,
                        warnings: vec![format!("coverage gap at p = {first_uncovered}")],
                    })
                }
                Err(e) => Err(anyhow!("{e}")),
            }
        }
        (None, true) => {
            let (p_start, p_end, step) = range.unwrap_or((1.0, 1.58, 0.01));
            let outcome = certifier::auto_schedule(p_start, p_end, step);
            let covered = if outcome.rows.is_empty() {
                (p_start, p_start)
            } else {
                (outcome.rows[0].p_lo, outcome.reached)
            };
            let mut warnings = Vec::new();
            if !outcome.complete {
                warnings.push(format!(
                    "certified only up to p = {}; target was {p_end}",
                    outcome.reached
                ));
            }
            Ok(CmdOutput {
                text: formats::certificate_jsonl(&outcome.rows, covered, outcome.complete),
                code: if outcome.complete {
                    EXIT_OK
                } else {
                    EXIT_VERIFICATION
                },
                warnings,
            })
        }
        (Some(_), true) => bail!("--schedule and --auto are mutually exclusive"),
        (None, false) => bail!("certify needs either --schedule FILE or --auto"),
    }
}

/// Covered range of the gap-free passing prefix.
fn covered_prefix(rows: &[superball_core::certifier::CertificateRow]) -> (f64, f64) {
    if rows.is_empty() {
        return (0.0, 0.0);
    }
    let lo = rows[0].p_lo;
    let mut hi = lo;
    for row in rows {
        if !row.pass || row.p_lo > hi {
            break;
        }
        hi = row.p_hi;
    }
    (lo, hi)
}

/// The classic fixed-step schedule as CSV (regenerated centers); used to
/// inspect or replay the historical parameters.
pub fn emit_step_schedule(p_start: f64, p_end: f64) -> Result<String> {
    let rows = certifier::step_schedule(p_start, p_end)
        .map_err(|e| anyhow!("schedule generation failed: {e}"))?;
    Ok(formats::schedule_to_csv(&rows))
}
