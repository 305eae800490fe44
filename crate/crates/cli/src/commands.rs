use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qsdc_core::adversary::{detection_power, literal_attacked_distribution, predict_attacked_distribution};
use qsdc_core::analysis::{
    delta_theta_threshold, error_budget, eta_threshold, fidelity_threshold, max_distance, sweep as run_sweep,
    CapacityParams, SweepAxis, SweepSpec,
};
use qsdc_core::protocol::transcript::write_jsonl;
use qsdc_core::protocol::{
    run_full_protocol, step1_prepare, step2_distribute, step3_first_check, BasisPolicy, RoundStats,
};
use qsdc_core::verify::{self, VerifyOptions};
use qsdc_core::{BlindingAttackParams, Error, SeedTree};
use serde::Serialize;

use crate::config::{AxisKind, RunConfig, TableFormat};
use crate::CliError;

fn output_path(cfg: &RunConfig, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.output.dir)?;
    Ok(cfg.output.dir.join(name))
}

/// Writes serializable rows with one header line.
pub fn write_table<S: Serialize>(path: &Path, format: TableFormat, rows: &[S]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().delimiter(format.delimiter()).from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn check_p1_values(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.analysis.p1_values.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        Some(p) => Err(CliError::Config(format!("analysis.p1_values entry {p} outside (0, 1)"))),
        None if cfg.analysis.p1_values.is_empty() => Err(CliError::Config("analysis.p1_values is empty".into())),
        None => Ok(()),
    }
}

fn print_round(label: &str, s: &RoundStats) {
    println!(
        "  {label}: gain {:.5} ± {:.5}  E {:.5} ± {:.5}  P(g=0) {:.5} ± {:.5}",
        s.gain, s.gain_se, s.total_error, s.total_error_se, s.p0, s.p0_se
    );
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.protocol_params()?;
    let t = run_full_protocol(&params)?;
    if cfg.output.transcript {
        let mut w = BufWriter::new(File::create(output_path(cfg, "transcript.jsonl")?)?);
        write_jsonl(&t, &mut w)?;
        w.flush()?;
    }
    let mut w = BufWriter::new(File::create(output_path(cfg, "summary.json")?)?);
    serde_json::to_writer_pretty(&mut w, &t.summary)?;
    w.write_all(b"\n")?;
    w.flush()?;

    let s = &t.summary;
    println!("status: {:?} (seed {}, r = {})", s.status, s.seed, s.r);
    for rep in std::iter::once(&s.round_one).chain(s.round_two.as_ref()) {
        println!(
            "  check {}: theory {:.5}, observed {:.5}, deviation {:.5}, tolerance {:.5} -> {:?}",
            rep.round, rep.theoretical_p0, rep.empirical_p0, rep.deviation, rep.tolerance, rep.verdict
        );
    }
    print_round("after one trip  ", &s.stats.ab);
    if let Some(aba) = &s.stats.aba {
        print_round("after round trip", aba);
    }
    if let BasisPolicy::TargetP1 { target } = params.policy {
        let env = params.environment()?;
        let closed = CapacityParams {
            p1: target,
            theta: params.config.theta(),
            delta_theta: params.noise.nominal(),
            gain: qsdc_core::GainModel::Link(env.link),
        };
        let e = error_budget(&closed)?;
        println!("  closed form: E_AB {:.5}, E_ABA {:.5}", e.total_ab, e.total_aba);
    }
    if let Some(m) = &s.message {
        println!("  message: {} ok, {} lost, {} flipped (BER {:.5})", m.ok, m.lost, m.flipped, m.bit_error_rate);
    }
    if let Some(a) = &s.attack {
        println!(
            "  attack: predicted P(g=0) {:.5}, observed {:.5}, Eve read {} bits ({:.3} correct)",
            a.predicted_p0, a.empirical_p0, a.intercepted_bits, a.eve_information
        );
    }
    println!("wrote {}", cfg.output.dir.display());
    Ok(())
}

fn axis_name(axis: AxisKind) -> (&'static str, SweepAxis) {
    match axis {
        AxisKind::Eta => ("eta", SweepAxis::Eta),
        AxisKind::Distance => ("distance_km", SweepAxis::Distance),
        AxisKind::DeltaTheta => ("delta_theta", SweepAxis::DeltaTheta),
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    check_p1_values(cfg)?;
    let grid = cfg.grid()?;
    let (label, axis) = axis_name(cfg.analysis.axis);
    let gain = cfg.gain()?;
    let link = cfg.link()?;
    let mut rows = Vec::new();
    for &p1 in &cfg.analysis.p1_values {
        let spec = SweepSpec {
            axis,
            grid: grid.clone(),
            base: CapacityParams { p1, theta: cfg.protocol.theta, delta_theta: cfg.physics.delta_theta, gain },
            link,
            efficiency: Some(cfg.efficiency()),
        };
        rows.extend(run_sweep(&spec).map_err(|e| match e {
            Error::InvalidArgument(m) => CliError::Config(m),
            other => other.into(),
        })?.into_iter().map(|(row, _)| row));
    }
    let name = format!("sweep.{}", cfg.output.format.extension());
    let path = output_path(cfg, &name)?;
    write_table(&path, cfg.output.format, &rows)?;
    if cfg.output.gnuplot {
        fs::write(output_path(cfg, "sweep.gp")?, gnuplot_script(cfg, &name, label, grid.len()))?;
    }
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn gnuplot_script(cfg: &RunConfig, table: &str, label: &str, points: usize) -> String {
    let sep = match cfg.output.format {
        TableFormat::Csv => "\",\"",
        TableFormat::Tsv => "\"\\t\"",
    };
    let p1s: Vec<String> = cfg.analysis.p1_values.iter().map(|p| p.to_string()).collect();
    format!(
        "set datafile separator {sep}\n\
         set xlabel \"{label}\"\n\
         set ylabel \"C_S\"\n\
         set grid\n\
         p1s = \"{}\"\n\
         n = {points}\n\
         plot for [i=0:{}] \"{table}\" skip 1 every ::(i*n)::(i*n+n-1) using 1:11 with lines title sprintf(\"P1 = %s\", word(p1s, i+1))\n",
        p1s.join(" "),
        p1s.len().saturating_sub(1),
    )
}

#[derive(Debug, Serialize)]
struct ThresholdRow {
    p1: f64,
    delta_theta: f64,
    eta_star: Option<f64>,
    max_distance_km: Option<f64>,
    delta_theta_star: Option<f64>,
    fidelity_per_trip: Option<f64>,
    fidelity_round_trip: Option<f64>,
}

fn found(r: Result<f64, Error>) -> Result<Option<f64>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NoThreshold(_) | Error::Unreachable { .. }) => Ok(None),
        Err(Error::InvalidArgument(m)) => Err(CliError::Config(m)),
        Err(e) => Err(e.into()),
    }
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:.digits$}"))
}

pub fn threshold(cfg: &RunConfig) -> Result<(), CliError> {
    check_p1_values(cfg)?;
    let tol = cfg.analysis.solver_tol;
    let delta = cfg.physics.delta_theta;
    let link = cfg.link()?;
    let mut rows = Vec::new();
    for &p1 in &cfg.analysis.p1_values {
        let d_star = found(delta_theta_threshold(p1, tol))?;
        let fid = d_star.map(fidelity_threshold);
        rows.push(ThresholdRow {
            p1,
            delta_theta: delta,
            eta_star: found(eta_threshold(p1, delta, tol))?,
            max_distance_km: found(max_distance(p1, delta, &link, tol))?,
            delta_theta_star: d_star,
            fidelity_per_trip: fid.map(|f| f.per_trip),
            fidelity_round_trip: fid.map(|f| f.round_trip),
        });
    }
    println!("{:>8} {:>10} {:>12} {:>12} {:>10} {:>10}", "P1", "eta*", "L_max [km]", "dtheta*", "F", "F(2x)");
    for r in &rows {
        println!(
            "{:>8} {:>10} {:>12} {:>12} {:>10} {:>10}",
            r.p1,
            cell(r.eta_star, 6),
            cell(r.max_distance_km, 3),
            cell(r.delta_theta_star, 6),
            cell(r.fidelity_per_trip, 5),
            cell(r.fidelity_round_trip, 5)
        );
    }
    let path = output_path(cfg, &format!("thresholds.{}", cfg.output.format.extension()))?;
    write_table(&path, cfg.output.format, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct AttackRow {
    attack_p1: f64,
    attack_p2: f64,
    m: usize,
    theoretical_p0: f64,
    predicted_p0: f64,
    literal_p0: f64,
    empirical_p0: f64,
    empirical_se: f64,
    tolerance: f64,
    abort_probability: f64,
    aborted: bool,
}

pub fn attack_scan(cfg: &RunConfig) -> Result<(), CliError> {
    let base = cfg.protocol_params()?;
    let a = &cfg.adversary;
    if a.p1_grid.is_empty() || a.p2_grid.is_empty() {
        return Err(CliError::Config("adversary.p1_grid and adversary.p2_grid must be non-empty".into()));
    }
    let seeds = SeedTree::new(base.seed);
    let mut rows = Vec::new();
    for (i, &p1) in a.p1_grid.iter().enumerate() {
        for (j, &p2) in a.p2_grid.iter().enumerate() {
            let attack = BlindingAttackParams::new(p1, p2).map_err(|e| CliError::Config(e.to_string()))?;
            let index = (i * a.p2_grid.len() + j) as u64;
            let params = qsdc_core::ProtocolParams {
                attack: Some(attack),
                seed: seeds.child(index).master,
                ..base.clone()
            };
            let env = params.environment()?;
            let (ledger, mut photons) = step1_prepare(params.r, &env, &params.policy, params.second_round)?;
            step2_distribute(&mut photons, &env)?;
            let rep = step3_first_check(&ledger, &mut photons, &env, &params.tolerance)?;
            let predicted = predict_attacked_distribution(rep.theoretical_p0, &attack);
            rows.push(AttackRow {
                attack_p1: p1,
                attack_p2: p2,
                m: rep.m,
                theoretical_p0: rep.theoretical_p0,
                predicted_p0: predicted,
                literal_p0: literal_attacked_distribution(rep.theoretical_p0, &attack),
                empirical_p0: rep.empirical_p0,
                empirical_se: (rep.empirical_p0 * (1.0 - rep.empirical_p0) / rep.m as f64).sqrt(),
                tolerance: rep.tolerance,
                abort_probability: detection_power(rep.theoretical_p0, &attack, rep.m, rep.tolerance)?,
                aborted: !rep.passed(),
            });
        }
    }
    let path = output_path(cfg, &format!("attack_scan.{}", cfg.output.format.extension()))?;
    write_table(&path, cfg.output.format, &rows)?;
    println!("wrote {} grid points to {}", rows.len(), path.display());
    Ok(())
}

pub fn verify(_cfg: &RunConfig, quick: bool) -> Result<(), CliError> {
    let opts = if quick { VerifyOptions::quick() } else { VerifyOptions::default() };
    let checks = verify::run_all(&opts);
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} passed, {failed} failed", checks.len(), checks.len() - failed);
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(())
}
