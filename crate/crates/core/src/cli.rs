// SPDX-License-Identifier: Apache-2.0

//! Command dispatch and CSV emission for the `qsde` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::composite::{self, CompositeSpec};
use crate::config::ConfigDocument;
use crate::decoherence;
use crate::error::{Error, Result};
use crate::isolated::{self, ModeCoordinate};
use crate::linalg::{self, RVec};
use crate::model;
use crate::oracle::{self, GkslOracle, HilbertRep, ResidualRow};
use crate::qsde::{self, QsdeCoefficients, SystemSpec};
use crate::spectrum::{self, LambdaOperator};
use crate::weak::{self, CouplingShape, WeakSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Coeffs,
    MeanFlow,
    Steady,
    Qcf,
    Spectrum,
    Modes,
    Decoherence,
    Weak,
    Composite,
    Oracle,
}

#[derive(Debug, Parser)]
#[command(name = "qsde", about = "Quasilinear QSDE moment dynamics for finite-level open quantum systems")]
pub struct Cli {
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Write one CSV per table here instead of printing to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// `T0:T1:STEPS`.
    #[arg(long)]
    pub grid: Option<String>,
}

/// Flag values after merging with the `analysis` block.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub grid: Option<(f64, f64, usize)>,
}

impl Options {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        Ok(Self { seed: cli.seed, tol: cli.tol, eps: cli.eps.clone(), grid: cli.grid.as_deref().map(parse_grid).transpose()? })
    }
}

pub fn parse_grid(s: &str) -> Result<(f64, f64, usize)> {
    let bad = || Error::Schema(format!("grid must be T0:T1:STEPS, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let t0: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let t1: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(t0 >= 0.0 && t1 >= t0 && t1.is_finite()) || steps == 0 {
        return Err(bad());
    }
    Ok((t0, t1, steps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub pass: bool,
}

pub fn num(x: f64) -> String {
    // Adding 0.0 folds −0 into +0.
    format!("{:.16e}", x + 0.0)
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One analysis target: a configured system, or a composite viewed on its
/// augmented constants.
struct Target {
    name: String,
    spec: SystemSpec,
    composite: Option<CompositeSpec>,
    rep: Option<HilbertRep>,
    mu0: RVec,
}

impl Target {
    fn coefficients(&self) -> Result<QsdeCoefficients> {
        match &self.composite {
            Some(cs) => composite::composite_coefficients(cs),
            None => qsde::build_coefficients(&self.spec),
        }
    }

    fn weak_split(&self) -> Result<WeakSplit> {
        match &self.composite {
            Some(cs) => composite::composite_weak(cs),
            None => CouplingShape::new(self.spec.clone()).split(),
        }
    }
}

fn targets(doc: &ConfigDocument) -> Result<Vec<Target>> {
    let mut out = Vec::new();
    for s in &doc.systems {
        let spec = s.build()?;
        let mu0 = s.mu0(spec.n())?;
        let rep = s.is_pauli().then(oracle::pauli_representation);
        out.push(Target { name: s.name.clone(), spec, composite: None, rep, mu0 });
    }
    for entry in &doc.composites {
        let cs = doc.build_composite(entry)?;
        let spec = cs.augmented()?;
        let rep = match (doc.system(&entry.first)?.is_pauli(), doc.system(&entry.second)?.is_pauli()) {
            (true, true) => {
                let p = oracle::pauli_representation();
                Some(oracle::tensor_representation(&p, &p))
            }
            _ => None,
        };
        let mu0 = RVec::zeros(spec.n());
        out.push(Target { name: entry.name.clone(), spec, composite: Some(cs), rep, mu0 });
    }
    Ok(out)
}

const DEFAULT_GRID: (f64, f64, usize) = (0.0, 10.0, 100);
const DEFAULT_EPS: [f64; 3] = [0.2, 0.1, 0.05];
const DEFAULT_BUDGET: usize = 4 * decoherence::LAMBDA_GRID;

fn resolve(doc: &ConfigDocument, opts: &Options) -> Result<Options> {
    let a = &doc.analysis;
    let grid = match (&opts.grid, &a.grid) {
        (Some(g), _) => Some(*g),
        (None, Some(g)) => Some(parse_grid(&format!("{}:{}:{}", g.t0, g.t1, g.steps))?),
        (None, None) => None,
    };
    let eps = opts.eps.clone().or_else(|| a.eps.clone());
    if let Some(list) = &eps {
        if list.is_empty() || list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Schema("eps values must be positive".into()));
        }
    }
    let tol = opts.tol.or(a.tol);
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Schema(format!("tol must be positive, got {t}")));
        }
    }
    Ok(Options { seed: opts.seed.or(a.seed), tol, eps, grid })
}

fn grid_times((t0, t1, steps): (f64, f64, usize)) -> Vec<f64> {
    (0..=steps).map(|i| t0 + (t1 - t0) * i as f64 / steps as f64).collect()
}

pub fn execute(command: Command, doc: &ConfigDocument, opts: &Options) -> Result<Report> {
    let opts = resolve(doc, opts)?;
    let targets = targets(doc)?;
    match command {
        Command::Validate => validate(&targets, &opts),
        Command::Coeffs => coeffs(&targets),
        Command::MeanFlow => mean_flow(&targets, &opts),
        Command::Steady => steady(&targets),
        Command::Qcf => qcf(doc, &targets),
        Command::Spectrum => spectrum_cmd(&targets, &opts),
        Command::Modes => modes(&targets, &opts),
        Command::Decoherence => decoherence_cmd(doc, &targets, &opts),
        Command::Weak => weak_cmd(&targets, &opts),
        Command::Composite => composite_cmd(&targets, &opts),
        Command::Oracle => oracle_cmd(&targets, &opts),
    }
}

fn validate(targets: &[Target], opts: &Options) -> Result<Report> {
    let tol = opts.tol.unwrap_or(model::DEFAULT_TOL);
    let mut summary = Table::new("validate", &["target", "passed", "max_residual", "alpha_min_eigenvalue", "alpha_psd"]);
    let mut detail = Table::new("validate_violations", &["target", "constraint", "indices", "residual"]);
    let mut pass = true;
    for t in targets {
        let r = model::validate(&t.spec.constants, tol)?;
        pass &= r.passed;
        summary.push(vec![
            t.name.clone(),
            r.passed.to_string(),
            num(r.max_residual),
            num(r.alpha_min_eigenvalue),
            r.alpha_psd.to_string(),
        ]);
        for v in &r.violations {
            let idx: Vec<String> = v.indices.iter().map(usize::to_string).collect();
            detail.push(vec![t.name.clone(), format!("{:?}", v.constraint), idx.join(" "), num(v.residual)]);
        }
    }
    Ok(Report { tables: vec![summary, detail], pass })
}

fn coeffs(targets: &[Target]) -> Result<Report> {
    let mut tables = Vec::new();
    for t in targets {
        let k = t.coefficients()?;
        let mut tab = Table::new(format!("coeffs_{}", t.name), &["matrix", "row", "col", "value"]);
        for (label, m) in [("A", &k.a), ("A0", &k.a0), ("A_tilde", &k.a_tilde)] {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    tab.push(vec![label.into(), i.to_string(), j.to_string(), num(m[(i, j)])]);
                }
            }
        }
        for i in 0..k.b.len() {
            tab.push(vec!["b".into(), i.to_string(), "0".into(), num(k.b[i])]);
        }
        tables.push(tab);
    }
    Ok(Report { tables, pass: true })
}

fn mu_header(n: usize, first: &str) -> Vec<String> {
    std::iter::once(first.to_string()).chain((0..n).map(|k| format!("mu_{k}"))).collect()
}

fn mean_flow(targets: &[Target], opts: &Options) -> Result<Report> {
    let times = grid_times(opts.grid.unwrap_or(DEFAULT_GRID));
    let mut tables = Vec::new();
    for t in targets {
        let k = t.coefficients()?;
        let flow = qsde::mean_flow(&k, &t.mu0, &times)?;
        let mut tab = Table { name: format!("mean_flow_{}", t.name), header: mu_header(t.spec.n(), "t"), rows: Vec::new() };
        for (time, mu) in times.iter().zip(&flow) {
            tab.push(std::iter::once(num(*time)).chain(mu.iter().map(|x| num(*x))).collect());
        }
        tables.push(tab);
    }
    Ok(Report { tables, pass: true })
}

fn steady(targets: &[Target]) -> Result<Report> {
    let mut tab = Table::new("steady", &["target", "index", "mu"]);
    for t in targets {
        let mu = qsde::steady_mean(&t.coefficients()?)?;
        for (i, x) in mu.iter().enumerate() {
            tab.push(vec![t.name.clone(), i.to_string(), num(*x)]);
        }
    }
    Ok(Report { tables: vec![tab], pass: true })
}

fn qcf(doc: &ConfigDocument, targets: &[Target]) -> Result<Report> {
    let mut tab = Table::new("qcf", &["target", "u_index", "re", "im"]);
    for t in targets {
        let n = t.spec.n();
        let mu = qsde::steady_mean(&t.coefficients()?)?;
        let us: Vec<RVec> = match &doc.analysis.qcf_u {
            Some(list) => list
                .iter()
                .map(|u| {
                    if u.len() == n {
                        Ok(RVec::from_vec(u.clone()))
                    } else {
                        Err(Error::Schema(format!("qcf_u entry has length {}, target {} has n = {n}", u.len(), t.name)))
                    }
                })
                .collect::<Result<_>>()?,
            None => (0..n).map(|k| RVec::from_fn(n, |j, _| if j == k { 1.0 } else { 0.0 })).collect(),
        };
        for (i, u) in us.iter().enumerate() {
            let z = qsde::qcf(&t.spec.constants, &mu, u)?;
            tab.push(vec![t.name.clone(), i.to_string(), num(z.re), num(z.im)]);
        }
    }
    Ok(Report { tables: vec![tab], pass: true })
}

fn spectrum_cmd(targets: &[Target], opts: &Options) -> Result<Report> {
    let tol = opts.tol.unwrap_or(1e-9);
    let times = grid_times(opts.grid.unwrap_or(DEFAULT_GRID));
    let mut summary = Table::new(
        "spectrum",
        &[
            "target",
            "sigma_a",
            "sigma_lambda_h",
            "leading_real_eigenvalue",
            "max_imag_part",
            "sandwich_gap",
            "trace_margin",
            "pass",
        ],
    );
    let mut tables = Vec::new();
    let mut pass = true;
    for t in targets {
        let k = t.coefficients()?;
        let sigma_a = spectrum::spectral_abscissa(&k.a)?;
        let op = LambdaOperator::from_system(&t.spec, &k)?;
        let h = spectrum::lambda_hermitian_abscissa(&op)?;
        let traces = spectrum::pi_trace_flow(&op, &times)?;
        let norms = spectrum::flow_frobenius_sq(&k.a, &times)?;
        let margin = traces.iter().zip(&norms).map(|(tr, f)| tr - f).fold(f64::INFINITY, f64::min);
        let gap = h.abscissa - 2.0 * sigma_a;
        let ok = gap >= -tol && margin >= -tol;
        pass &= ok;
        summary.push(vec![
            t.name.clone(),
            num(sigma_a),
            num(h.abscissa),
            num(h.leading_real_eigenvalue),
            num(h.max_imag_part),
            num(gap),
            num(margin),
            ok.to_string(),
        ]);
        let mut eig = Table::new(format!("eigenvalues_{}", t.name), &["index", "re", "im"]);
        let mut ev = linalg::eigenvalues_real(&k.a)?;
        ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        for (i, z) in ev.iter().enumerate() {
            eig.push(vec![i.to_string(), num(z.re), num(z.im)]);
        }
        tables.push(eig);
    }
    tables.insert(0, summary);
    Ok(Report { tables, pass })
}

fn modes(targets: &[Target], opts: &Options) -> Result<Report> {
    let tol = opts.tol.unwrap_or(1e-10);
    let mut summary = Table::new("modes", &["target", "period", "pairing_unique", "reconstruct_residual"]);
    let mut tables = Vec::new();
    let mut pass = true;
    for t in targets {
        let k = t.coefficients()?;
        let m = isolated::eigenmodes(&k.a0, t.spec.constants.alpha())?;
        let residual = linalg::max_abs(&(m.reconstruct() - linalg::to_complex(&k.a0)));
        pass &= residual <= tol * (1.0 + linalg::max_abs(&k.a0));
        summary.push(vec![
            t.name.clone(),
            opt_num(isolated::oscillation_period(&m)),
            m.pairing_unique.to_string(),
            num(residual),
        ]);
        let mut tab = Table::new(format!("modes_{}", t.name), &["index", "omega", "kind", "component", "xi", "eta"]);
        for coord in isolated::mode_coordinates(&m) {
            match coord {
                ModeCoordinate::Oscillatory { index, omega, xi, eta } => {
                    for j in 0..xi.len() {
                        tab.push(vec![
                            index.to_string(),
                            num(omega),
                            "oscillatory".into(),
                            j.to_string(),
                            num(xi[j]),
                            num(eta[j]),
                        ]);
                    }
                }
                ModeCoordinate::Static { index, row } => {
                    for (j, x) in row.iter().enumerate() {
                        tab.push(vec![index.to_string(), num(0.0), "static".into(), j.to_string(), num(*x), String::new()]);
                    }
                }
            }
        }
        tables.push(tab);
    }
    tables.insert(0, summary);
    Ok(Report { tables, pass })
}

fn decoherence_cmd(doc: &ConfigDocument, targets: &[Target], opts: &Options) -> Result<Report> {
    let seed = opts.seed.unwrap_or(0);
    let budget = doc.analysis.budget.unwrap_or(DEFAULT_BUDGET);
    let factor = doc.analysis.horizon_factor.unwrap_or(decoherence::DEFAULT_HORIZON_FACTOR);
    let mut summary = Table::new(
        "decoherence",
        &["target", "tau_star", "crossed", "horizon", "bound", "lambda", "k_index", "seed", "holds"],
    );
    let mut tables = Vec::new();
    let mut pass = true;
    for t in targets {
        let k = t.coefficients()?;
        let mu = qsde::steady_mean(&k)?;
        let ccr = model::dot_product(t.spec.constants.theta(), &mu)?;
        let ts = decoherence::tau_star(&k.a, &ccr, factor)?;
        let opt = decoherence::optimize_tau_bound(&k.a, &ccr, budget, seed)?;
        let holds = ts.tau <= opt.bound;
        pass &= holds;
        summary.push(vec![
            t.name.clone(),
            num(ts.tau),
            ts.crossed.to_string(),
            num(ts.horizon),
            num(opt.bound),
            num(opt.lambda),
            opt.k_index.to_string(),
            seed.to_string(),
            holds.to_string(),
        ]);
        let mut trace = Table::new(format!("decoherence_trace_{}", t.name), &["eval", "k_index", "lambda", "bound"]);
        for (i, e) in opt.trace.iter().enumerate() {
            trace.push(vec![i.to_string(), e.k_index.to_string(), num(e.lambda), num(e.bound)]);
        }
        tables.push(trace);
    }
    tables.insert(0, summary);
    Ok(Report { tables, pass })
}

fn weak_cmd(targets: &[Target], opts: &Options) -> Result<Report> {
    let eps_list = opts.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec());
    let tol = opts.tol.unwrap_or(1e-10);
    let mut nu_tab = Table::new("weak_nu", &["target", "index", "omega", "nu_re", "nu_im"]);
    let mut thr = Table::new(
        "weak",
        &["target", "stable", "lead_abscissa_coefficient", "tau_hat_coefficient", "eps_hat", "eps_tilde"],
    );
    let mut asym = Table::new("weak_asymptotics", &["target", "eps", "max_residual", "ambiguous", "non_increasing"]);
    let mut lim = Table::new("weak_limit", &["target", "index", "value", "note"]);
    let mut conv = Table::new("weak_convergence", &["target", "eps", "distance"]);
    let mut pauli = Table::new(
        "pauli_rate",
        &[
            "target",
            "re_nu1_normative",
            "re_nu1_quadratic",
            "re_nu1_display",
            "display_ratio",
            "re_nu3_normative",
            "re_nu3_closed",
            "identity_residual",
        ],
    );
    let mut pass = true;
    for t in targets {
        let split = t.weak_split()?;
        let m = isolated::eigenmodes(&split.a0, t.spec.constants.alpha())?;
        let nus = weak::nu_values(&split, &m)?;
        for (i, z) in nus.iter().enumerate() {
            nu_tab.push(vec![t.name.clone(), i.to_string(), num(m.omegas[i]), num(z.re), num(z.im)]);
        }
        let p = weak::stability_and_thresholds(&m, &nus)?;
        thr.push(vec![
            t.name.clone(),
            p.stable.to_string(),
            num(p.lead_abscissa_coefficient),
            num(p.tau_hat_coefficient),
            opt_num(p.eps_hat),
            opt_num(p.eps_tilde),
        ]);
        let rows = weak::eigenvalue_asymptotics_check(&split, &m, &nus, &eps_list)?;
        let mut prev = f64::INFINITY;
        for r in &rows {
            let ok = r.max_residual <= prev + tol;
            pass &= ok;
            prev = r.max_residual;
            asym.push(vec![t.name.clone(), num(r.eps), num(r.max_residual), r.ambiguous.to_string(), ok.to_string()]);
        }
        match weak::invariant_mean_limit(&split, &m) {
            Ok(limit) => {
                for (i, x) in limit.iter().enumerate() {
                    lim.push(vec![t.name.clone(), i.to_string(), num(*x), String::new()]);
                }
                for pt in weak::invariant_mean_convergence(&split, &limit, &eps_list)? {
                    conv.push(vec![t.name.clone(), num(pt.eps), num(pt.distance)]);
                }
            }
            Err(e) => lim.push(vec![t.name.clone(), String::new(), String::new(), e.to_string().replace(',', ";")]),
        }
        if t.rep.as_ref().is_some_and(|r| r.d == 2) {
            let d = weak::pauli_diagnostic(&CouplingShape::new(t.spec.clone()), &m)?;
            pass &= (d.re_nu1_normative - d.re_nu1_quadratic).abs() <= tol;
            pauli.push(vec![
                t.name.clone(),
                num(d.re_nu1_normative),
                num(d.re_nu1_quadratic),
                num(d.re_nu1_display),
                num(d.display_ratio),
                num(d.re_nu3_normative),
                num(d.re_nu3_closed),
                num(d.identity_residual),
            ]);
        }
    }
    Ok(Report { tables: vec![nu_tab, thr, asym, lim, conv, pauli], pass })
}

fn composite_cmd(targets: &[Target], opts: &Options) -> Result<Report> {
    let tol = opts.tol.unwrap_or(1e-10);
    let mut tab = Table::new(
        "composite",
        &["target", "n", "constants_valid", "validation_max_residual", "path_difference_a", "path_difference_b", "pass"],
    );
    let mut pass = true;
    for t in targets {
        let Some(cs) = &t.composite else { continue };
        let report = model::validate(&t.spec.constants, model::DEFAULT_TOL)?;
        let direct = composite::composite_coefficients(cs)?;
        let generic = qsde::build_coefficients(&t.spec)?;
        let da = linalg::max_abs(&(&direct.a - &generic.a));
        let db = linalg::max_abs(&(&direct.b - &generic.b));
        let ok = report.passed && da <= tol && db <= tol;
        pass &= ok;
        tab.push(vec![
            t.name.clone(),
            t.spec.n().to_string(),
            report.passed.to_string(),
            num(report.max_residual),
            num(da),
            num(db),
            ok.to_string(),
        ]);
    }
    Ok(Report { tables: vec![tab], pass })
}

fn oracle_cmd(targets: &[Target], opts: &Options) -> Result<Report> {
    let tol = opts.tol.unwrap_or(1e-8);
    let times = grid_times(opts.grid.unwrap_or(DEFAULT_GRID));
    let mut tab = Table::new("oracle", &["target", "check", "residual", "tolerance", "pass"]);
    let mut pass = true;
    for t in targets {
        let Some(rep) = &t.rep else { continue };
        let k = t.coefficients()?;
        let o = GkslOracle::new(rep.clone(), t.spec.clone())?;
        let rho0 = oracle::maximally_mixed(rep.d);
        let mu0 = rep.expectations(&rho0);
        let mut rows = vec![
            ResidualRow::new("representation", oracle::representation_check(rep, &t.spec.constants)?, 1e-12),
            ResidualRow::new("generator_identity", oracle::generator_identity_check(rep, &t.spec, &k)?, 1e-10),
        ];
        for time in [0.1, 1.0, 10.0] {
            let r = o.lindblad_propagate(&rho0, time)?.trace_residual;
            rows.push(ResidualRow::new(format!("trace_t={time}"), r, 1e-9));
        }
        let s = 1.0;
        let mu_s = rep.expectations(&o.lindblad_propagate(&rho0, s)?.rho);
        for tau in [0.5, 1.0, 2.0] {
            let exact = o.two_point_commutator(&rho0, s, s + tau)?;
            let model_side = qsde::mean_two_point_ccr(&k, &t.spec.constants, &mu_s, tau)?;
            rows.push(ResidualRow::new(format!("two_point_tau={tau}"), linalg::max_abs(&(exact - model_side)), tol));
        }
        let flow = qsde::mean_flow(&k, &mu0, &times)?;
        let mut dev: f64 = 0.0;
        for (time, mu) in times.iter().zip(&flow) {
            let rho = o.lindblad_propagate(&rho0, *time)?.rho;
            dev = dev.max((rep.expectations(&rho) - mu).amax());
        }
        rows.push(ResidualRow::new("mean_flow", dev, tol));
        if spectrum::require_hurwitz(&k.a).is_ok() {
            let mu_star = qsde::steady_mean(&k)?;
            let st = o.stationary_state()?;
            rows.push(ResidualRow::new("stationary_mean", (rep.expectations(&st) - mu_star).amax(), tol));
        }
        for r in rows {
            pass &= r.pass;
            tab.push(vec![t.name.clone(), r.check, num(r.residual), num(r.tolerance), r.pass.to_string()]);
        }
    }
    Ok(Report { tables: vec![tab], pass })
}

/// Writes each table to `<out>/<name>.csv`, or to `sink` as `# name` blocks.
pub fn emit(report: &Report, out: Option<&Path>, sink: &mut dyn Write) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for t in &report.tables {
                std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv())?;
            }
            writeln!(sink, "{}", if report.pass { "PASS" } else { "FAIL" })?;
        }
        None => {
            for t in &report.tables {
                write!(sink, "# {}\n{}", t.name, t.to_csv())?;
            }
        }
    }
    Ok(())
}

/// Runs the parsed command line and returns the process exit status.
pub fn run(cli: &Cli, sink: &mut dyn Write) -> i32 {
    let result = ConfigDocument::load(&cli.config)
        .and_then(|doc| execute(cli.command, &doc, &Options::from_cli(cli)?))
        .and_then(|report| emit(&report, cli.out.as_deref(), sink).map(|_| report));
    match result {
        Ok(report) if report.pass => 0,
        Ok(_) => Error::Numeric(String::new()).exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
