//! Report and verdict files.

use std::path::{Path, PathBuf};

use exclt_core::criteria::Summary;
use exclt_core::{Criterion, CriterionVerdict, ScenarioConfig, ScenarioReport, SCHEMA_VERSION};
use serde::Serialize;

use crate::CliError;

#[derive(Serialize)]
struct CfRow {
    n: u64,
    t: f64,
    re: f64,
    im: f64,
    target_re: Option<f64>,
    target_im: Option<f64>,
}

#[derive(Serialize)]
struct CharRow<'a> {
    n: u64,
    b_n: f64,
    c_n: f64,
    quantity: &'a str,
    count: usize,
    mean: f64,
    sd: f64,
    q10: f64,
    q25: f64,
    q50: f64,
    q75: f64,
    q90: f64,
}

#[derive(Serialize)]
struct GapRow {
    n: u64,
    t: f64,
    s: f64,
    joint_re: f64,
    joint_im: f64,
    product_re: f64,
    product_im: f64,
    gap: f64,
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    schema_version: u32,
    scenario: &'a str,
    criterion: Criterion,
    seed: u64,
    verdict: &'a CriterionVerdict,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// `<name>.report.json`, `<name>.cf.csv`, `<name>.characteristics.csv` and,
/// with two or more rows, `<name>.gap.csv`.
pub fn write_report(report: &ScenarioReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let name = &report.scenario;
    let mut files = Vec::new();

    let path = dir.join(format!("{name}.report.json"));
    write_json(&path, report)?;
    files.push(path);

    let path = dir.join(format!("{name}.cf.csv"));
    write_csv(
        &path,
        report.cf.iter().flat_map(|table| {
            table.points.iter().map(move |p| CfRow {
                n: table.n,
                t: p.t,
                re: p.re,
                im: p.im,
                target_re: p.target_re,
                target_im: p.target_im,
            })
        }),
    )?;
    files.push(path);

    let path = dir.join(format!("{name}.characteristics.csv"));
    write_csv(
        &path,
        report.characteristics.iter().flat_map(|c| {
            let quantities: [(&str, &Summary); 4] = [
                ("trunc_mean", &c.trunc_mean),
                ("trunc_variance", &c.trunc_variance),
                ("smooth_mean", &c.smooth_mean),
                ("tail_mass", &c.tail_mass),
            ];
            quantities.into_iter().map(move |(quantity, s)| CharRow {
                n: c.n,
                b_n: c.b_n,
                c_n: c.c_n,
                quantity,
                count: s.count,
                mean: s.mean,
                sd: s.sd,
                q10: s.quantiles[0],
                q25: s.quantiles[1],
                q50: s.quantiles[2],
                q75: s.quantiles[3],
                q90: s.quantiles[4],
            })
        }),
    )?;
    files.push(path);

    if !report.joint.is_empty() {
        let path = dir.join(format!("{name}.gap.csv"));
        write_csv(
            &path,
            report.joint.iter().flat_map(|table| {
                table.points.iter().map(move |p| GapRow {
                    n: table.n,
                    t: p.t,
                    s: p.s,
                    joint_re: p.joint_re,
                    joint_im: p.joint_im,
                    product_re: p.product_re,
                    product_im: p.product_im,
                    gap: p.gap,
                })
            }),
        )?;
        files.push(path);
    }
    Ok(files)
}

/// `<name>.<criterion>.verdict.json`
pub fn write_verdict(
    config: &ScenarioConfig,
    criterion: Criterion,
    verdict: &CriterionVerdict,
    dir: &Path,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.{criterion}.verdict.json", config.name));
    write_json(
        &path,
        &VerdictFile {
            schema_version: SCHEMA_VERSION,
            scenario: &config.name,
            criterion,
            seed: config.seed,
            verdict,
        },
    )?;
    Ok(path)
}
