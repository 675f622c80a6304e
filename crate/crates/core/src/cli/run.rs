use std::path::{Path, PathBuf};

use crate::error::{accept_enclosure, Error, Result};
use crate::exec::map_indexed;
use crate::finite_measures::{bowen_sn, optimize_block_weights, spread_to_shift_invariant};
use crate::induced::{build_induced, induced_b_curve};
use crate::maps::MarkovMap;
use crate::numerics::Enclosure;
use crate::pressure::{Combo, ThermoSystem};
use crate::spectrum::{endpoints, legendre_spectrum_with, LegendreOptions};
use crate::weak_gibbs::{local_dimension, sample_points, WeakGibbsModel};

use super::config::{CommandName, RunConfig};
use super::output::{emit_csv, enclosure_cells, sha256_hex, spectrum_table, Cell, Manifest, Table};

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Result of one command: the manifest that was written and the CSV tables.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub tables: Vec<(String, Table)>,
    /// Files written, CSV artifacts first, the manifest last.
    pub written: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.manifest.exit_code
    }
}

struct Report {
    manifest: Manifest,
    tables: Vec<(String, Table)>,
    converged: bool,
}

impl Report {
    fn table(&mut self, name: String, t: Table) {
        self.tables.push((name, t));
    }

    fn unconverged(&mut self, what: &str) {
        self.converged = false;
        self.manifest.notes.push(format!("{what} did not reach the requested tolerance"));
    }
}

/// SHA-256 of the canonical serialization of `config`.
pub fn config_hash(config: &RunConfig) -> Result<String> {
    Ok(sha256_hex(config.to_toml_string()?.as_bytes()))
}

/// Executes the configured command and writes its CSV artifacts and
/// `manifest.toml` into `out_dir`. Exit code 0 on success, 2 when an
/// enclosure is wider than requested, 1 on any other error.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let hash = config_hash(config)?;
    let mut report =
        Report { manifest: Manifest::new(config.command.name.as_str(), hash), tables: Vec::new(), converged: true };
    let result = dispatch(config, &mut report);
    let mut m = report.manifest;
    match result {
        Ok(()) if report.converged => {}
        Ok(()) => {
            m.status = "not_converged".into();
            m.exit_code = 2;
        }
        Err(e) => {
            if let Some(enc) = e.enclosure() {
                m.status = "not_converged".into();
                m.exit_code = 2;
                m.bracket("unconverged", enc);
            } else {
                m.status = "error".into();
                m.exit_code = 1;
            }
            m.error = Some(e.name().into());
            m.error_message = Some(e.to_string());
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let stem = config.stem();
    for (suffix, table) in &report.tables {
        let name = if suffix.is_empty() { format!("{stem}.csv") } else { format!("{stem}_{suffix}.csv") };
        let path = out_dir.join(&name);
        emit_csv(table, &path, config.output.precision)?;
        m.artifacts.push(name);
        written.push(path);
    }
    let path = out_dir.join(MANIFEST_FILE);
    m.write(&path)?;
    written.push(path);
    Ok(RunOutcome { manifest: m, tables: report.tables, written })
}

fn system(config: &RunConfig, map: MarkovMap, normalize: bool) -> Result<ThermoSystem> {
    let cmd = &config.command;
    let phi = if normalize { config.potential.build(&map, cmd.tol().min(1e-10))? } else { config.potential.raw(&map)? };
    let mut sys = ThermoSystem::new(map, phi)?.with_execution(cmd.execution());
    if let Some(l) = cmd.level {
        sys = sys.with_level(l);
    }
    Ok(sys)
}

fn dispatch(config: &RunConfig, r: &mut Report) -> Result<()> {
    let map = config.map.build()?;
    r.manifest.checks.insert("parabolic".into(), map.is_parabolic());
    r.manifest.checks.insert("full_shift".into(), map.is_full_shift());
    match config.command.name {
        CommandName::Pressure => pressure(config, map, r),
        CommandName::Validate => validate(config, map, r),
        name => {
            let sys = system(config, map, config.potential.normalize())?;
            match name {
                CommandName::Bcurve => bcurve(config, &sys, r),
                CommandName::Spectrum => spectrum(config, &sys, r),
                CommandName::Endpoints => endpoint_report(config, &sys, r),
                CommandName::Blockopt => blockopt(config, &sys, r),
                CommandName::Localdim => localdim(config, sys, r),
                CommandName::Induce => induce(config, &sys, r),
                CommandName::Pressure | CommandName::Validate => unreachable!(),
            }
        }
    }
}

fn pressure(config: &RunConfig, map: MarkovMap, r: &mut Report) -> Result<()> {
    let cmd = &config.command;
    let sys = system(config, map, false)?;
    let levels = cmd.levels.clone().unwrap_or_else(|| (1..=cmd.level.unwrap_or(8)).collect());
    let mut t = Table::new(&["level", "p", "p_low", "p_high", "exact"]);
    for &n in &levels {
        let b = sys.pressure_bracket(Combo::phi(), n)?;
        t.push(vec![n.into(), b.value.into(), b.lower.into(), b.upper.into(), b.exact.into()]);
    }
    r.table(String::new(), t);
    let (p, ok) = accept_enclosure(sys.pressure(Combo::phi(), cmd.tol()).map(|b| b.enclosure()))?;
    r.manifest.bracket("pressure", p);
    if !ok {
        r.unconverged("pressure");
    }
    Ok(())
}

fn validate(config: &RunConfig, map: MarkovMap, r: &mut Report) -> Result<()> {
    let sys = system(config, map, config.potential.normalize())?;
    r.manifest.bracket("sup_phi", Enclosure::exact(sys.sup_phi()?));
    r.manifest.bracket("pressure_shift", Enclosure::exact(sys.phi().pressure_shift));
    let accepted = WeakGibbsModel::new(sys, config.potential.kn_law()).is_ok();
    r.manifest.checks.insert("kn_law_accepted".into(), accepted);
    Ok(())
}

fn bcurve(config: &RunConfig, sys: &ThermoSystem, r: &mut Report) -> Result<()> {
    let cmd = &config.command;
    let a = cmd.a_values().ok_or_else(|| Error::Config("bcurve needs `a_grid` or `a_range`".into()))?;
    let tol = cmd.tol();
    let samples = map_indexed(sys.execution(), a.len(), |k| accept_enclosure(sys.b_of_a(a[k], tol)));
    let mut t = Table::new(&["a", "b", "b_low", "b_high", "converged"]);
    let mut all = true;
    for (x, s) in a.iter().zip(samples) {
        let (b, ok) = s?;
        all &= ok;
        let [v, lo, hi] = enclosure_cells(b);
        t.push(vec![(*x).into(), v, lo, hi, ok.into()]);
    }
    r.table(String::new(), t);
    if !all {
        r.unconverged("some b(a) values");
    }
    Ok(())
}

fn default_alphas(sys: &ThermoSystem, level: usize) -> Result<Vec<f64>> {
    let ends = endpoints(sys, level)?;
    let lo = ends.alpha_min.hi;
    let hi = ends.alpha_max.map_or(lo + 4.0, |e| e.lo);
    if hi <= lo {
        return Ok(vec![ends.alpha_min.value]);
    }
    Ok((0..33).map(|k| lo + (hi - lo) * k as f64 / 32.0).collect())
}

fn spectrum(config: &RunConfig, sys: &ThermoSystem, r: &mut Report) -> Result<()> {
    let cmd = &config.command;
    let level = sys.level().clamp(2, 10);
    let alphas = match cmd.alpha_grid() {
        Some(a) => a,
        None => default_alphas(sys, level)?,
    };
    let [lo, hi] = cmd.a_range.unwrap_or([-8.0, 8.0]);
    let opts = LegendreOptions { grid_points: cmd.grid_points.unwrap_or(33), ..LegendreOptions::default() };
    let curve = legendre_spectrum_with(sys, &alphas, (lo, hi), cmd.tol(), &opts)?;
    r.table(String::new(), spectrum_table(&curve));
    let mut s = Table::new(&["a", "b", "b_low", "b_high", "on_ray", "converged"]);
    for x in &curve.samples {
        let [b, b_lo, b_hi] = enclosure_cells(x.b);
        s.push(vec![x.a.into(), b, b_lo, b_hi, x.on_ray.into(), x.converged.into()]);
    }
    r.table("samples".into(), s);

    let m = &mut r.manifest;
    m.bracket("alpha_min", curve.alpha_min);
    m.bracket("alpha_max", curve.alpha_max.unwrap_or(Enclosure::exact(f64::INFINITY)));
    m.bracket("dim_lambda", curve.dim_lambda);
    if let Some(a_c) = curve.transition {
        m.bracket("transition", Enclosure::exact(a_c));
    }
    if let Some(a0) = curve.alpha_0 {
        m.bracket("alpha_0", Enclosure::exact(a0));
    }
    m.checks.insert("concave".into(), curve.is_concave(1e-6));
    m.checks.insert("continuous_at_alpha_min".into(), curve.is_continuous_at_endpoint());
    m.notes.extend(curve.notes.iter().cloned());
    if !curve.converged {
        r.converged = false;
    }
    Ok(())
}

fn endpoint_report(config: &RunConfig, sys: &ThermoSystem, r: &mut Report) -> Result<()> {
    let level = config.command.level.unwrap_or(sys.level().min(10)).max(2);
    let ends = endpoints(sys, level)?;
    let word = |w: &[usize]| w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("-");
    let mut t = Table::new(&["quantity", "value", "low", "high", "cycle"]);
    let [v, lo, hi] = enclosure_cells(ends.alpha_min);
    t.push(vec!["alpha_min".into(), v, lo, hi, word(&ends.min_cycle).into()]);
    match (ends.alpha_max, &ends.max_cycle) {
        (Some(e), Some(c)) => {
            let [v, lo, hi] = enclosure_cells(e);
            t.push(vec!["alpha_max".into(), v, lo, hi, word(c).into()]);
        }
        _ => {
            let inf = || Cell::Num(f64::INFINITY);
            let orbit = sys.map().parabolic_orbits().first().map(|o| word(&o.symbols));
            t.push(vec!["alpha_max".into(), inf(), inf(), inf(), orbit.into()]);
        }
    }
    r.table(String::new(), t);
    r.manifest.bracket("alpha_min", ends.alpha_min);
    r.manifest.bracket("alpha_max", ends.alpha_max.unwrap_or(Enclosure::exact(f64::INFINITY)));
    Ok(())
}

fn blockopt(config: &RunConfig, sys: &ThermoSystem, r: &mut Report) -> Result<()> {
    let cmd = &config.command;
    let alphas = cmd.alpha_grid().ok_or_else(|| Error::Config("blockopt needs `alphas` or `alpha_range`".into()))?;
    let levels = cmd.levels.clone().unwrap_or_else(|| vec![cmd.level.unwrap_or(8)]);
    let eps = cmd.eps.unwrap_or(0.05);
    let mut t = Table::new(&[
        "level", "alpha", "objective", "objective_low", "objective_high", "ratio", "ratio_low", "ratio_high", "s_n", "s_n_low",
        "s_n_high",
    ]);
    for &alpha in &alphas {
        for &n in &levels {
            let bm = optimize_block_weights(sys, n, alpha)?;
            let inv = spread_to_shift_invariant(&bm);
            let l = inv.lyapunov;
            let obj = Enclosure::clamped(inv.entropy / l.hi, bm.stats.objective(), inv.entropy / l.lo.max(f64::MIN_POSITIVE));
            let ratio = Enclosure::clamped(-inv.phi_avg.hi / l.hi, bm.stats.ratio(), -inv.phi_avg.lo / l.lo.max(f64::MIN_POSITIVE));
            let sn = match bowen_sn(sys, n, alpha, eps) {
                Ok(s) => enclosure_cells(s),
                Err(Error::EmptyWindow { .. }) => {
                    r.manifest.notes.push(format!("no level-{n} cylinder in the window around alpha = {alpha}"));
                    [Cell::Empty, Cell::Empty, Cell::Empty]
                }
                Err(e) => return Err(e),
            };
            let [o, o_lo, o_hi] = enclosure_cells(obj);
            let [q, q_lo, q_hi] = enclosure_cells(ratio);
            let [s, s_lo, s_hi] = sn;
            t.push(vec![n.into(), alpha.into(), o, o_lo, o_hi, q, q_lo, q_hi, s, s_lo, s_hi]);
        }
    }
    r.table(String::new(), t);
    Ok(())
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn localdim(config: &RunConfig, sys: ThermoSystem, r: &mut Report) -> Result<()> {
    let cmd = &config.command;
    let (count, depth, seed) = (cmd.count.unwrap_or(1000), cmd.depth.unwrap_or(20), cmd.seed.unwrap_or(0));
    let exec = sys.execution();
    let model = WeakGibbsModel::new(sys, config.potential.kn_law())?;
    let words = sample_points(&model, count, depth, seed)?;
    let dims = map_indexed(exec, words.len(), |k| local_dimension(&model, &words[k]));
    let mut t = Table::new(&["index", "word", "estimate", "estimate_low", "estimate_high", "cesaro", "symbolic", "boundary_ok"]);
    let (mut est, mut widths) = (Vec::new(), Vec::new());
    let mut flagged = 0;
    for (k, (w, d)) in words.iter().zip(dims).enumerate() {
        let d = d?;
        est.push(d.bracket.value);
        widths.push(d.bracket.width());
        flagged += usize::from(!d.boundary_ok);
        let code: String = w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("-");
        let [v, lo, hi] = enclosure_cells(d.bracket);
        t.push(vec![k.into(), code.into(), v, lo, hi, d.cesaro.into(), d.symbolic.into(), d.boundary_ok.into()]);
    }
    r.table(String::new(), t);
    let mut sorted = est.clone();
    let med = median(&mut sorted);
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p).round() as usize];
    r.manifest.bracket("median_estimate", Enclosure::new(q(0.25), med, q(0.75)));
    let w = median(&mut widths);
    r.manifest.bracket("median_bracket_width", Enclosure::exact(w));
    if flagged > 0 {
        r.manifest.notes.push(format!("{flagged} of {count} samples lie near cylinder boundaries"));
    }
    Ok(())
}

fn induce(config: &RunConfig, sys: &ThermoSystem, r: &mut Report) -> Result<()> {
    let cmd = &config.command;
    let a = cmd.a_values().ok_or_else(|| Error::Config("induce needs `a_grid` or `a_range`".into()))?;
    let isys = build_induced(sys, &cmd.base_choice(), cmd.truncation.unwrap_or(40))?;
    let tol = cmd.tol().max(1e-12);
    let curve = induced_b_curve(&isys, &a, tol)?;
    let mut t = Table::new(&["a", "b", "b_low", "b_high", "tail"]);
    for s in &curve {
        let [b, lo, hi] = enclosure_cells(s.b);
        t.push(vec![s.a.into(), b, lo, hi, s.tail.into()]);
    }
    r.table(String::new(), t);
    r.manifest.bracket("kept_fraction", Enclosure::exact(isys.kept_fraction));
    r.manifest.checks.insert("complete".into(), isys.complete);
    r.manifest.notes.push(format!("{} induced branches over base {:?}", isys.branches.len(), isys.base));
    r.manifest.notes.push("agreement with the direct curve compares truncated computations, not the level sets themselves".into());
    Ok(())
}
