use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use signlab::analysis::{delta_search_cap, linspace, oriented_hf1, sweep_point};
use signlab::scalar::default_q;
use signlab::{
    annex_2x2, annex_theorem_checks, auto_window, check_hf1, empirical_delta_system, estimate_amp_interval,
    leading_eigenpairs, solve_direct, solve_jordan, verify, AmpEstimate, CouplingMatrix, DeltaEstimate,
    DomainSpectrum, Error, GridFunction, Method, Side, Sign, SignReport, SweepPoint, SystemProblem, TwoByTwoData,
};

use crate::config::{self, Checked, SweepMode};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 4,
            CliError::Core(e) if e.is_hypothesis() => 2,
            CliError::Core(Error::InvalidGrid(_) | Error::InvalidInput(_)) => 4,
            CliError::Core(_) | CliError::Io(_) => 3,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_error",
            CliError::Core(e) => e.code(),
            CliError::Io(_) => "io_error",
        }
    }

    pub fn record(&self) -> Value {
        json!({ "code": self.code(), "message": self.to_string(), "exit_status": self.exit_code() })
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Solve,
    Sweep,
    Amp,
    Annex,
    CheckHypotheses,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Solve => "solve",
            Verb::Sweep => "sweep",
            Verb::Amp => "amp",
            Verb::Annex => "annex",
            Verb::CheckHypotheses => "check-hypotheses",
        }
    }
}

pub struct Options {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> CliResult<Output> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), files: vec![] })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
        text.push('\n');
        self.write(name, &text)
    }
}

/// Loaded configuration, domain spectrum, decomposed matrix and sampled sources.
pub struct Lab {
    pub checked: Checked,
    pub config_sha256: String,
    pub spectrum: DomainSpectrum,
    pub cm: CouplingMatrix,
    pub f: Vec<GridFunction>,
    pub tol: f64,
}

pub fn load_config(path: &Path) -> CliResult<(Checked, String)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let checked = config::parse(&text).map_err(CliError::Config)?;
    let hash = Sha256::digest(text.as_bytes());
    Ok((checked, format!("{hash:x}")))
}

/// Output directory: `--out`, else `output.dir` from the config, else `./out`.
pub fn output_dir(opts: &Options, checked: Option<&Checked>) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| checked.and_then(|c| c.config.output.as_ref()).map(|o| PathBuf::from(&o.dir)))
        .unwrap_or_else(|| PathBuf::from("out"))
}

impl Lab {
    pub fn build(checked: Checked, config_sha256: String, tol: Option<f64>) -> CliResult<Lab> {
        let tol = tol.unwrap_or(checked.config.tolerances.matrix);
        if !(tol > 0.0) {
            return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
        }
        let spectrum = leading_eigenpairs(&checked.grid)?;
        let f = checked
            .sources
            .iter()
            .enumerate()
            .map(|(i, e)| e.sample(&spectrum).map_err(|m| CliError::Config(format!("sources[{i}]: {m}"))))
            .collect::<CliResult<Vec<_>>>()?;
        let cm = CouplingMatrix::from_rows(&checked.config.matrix.rows, tol)?;
        Ok(Lab { checked, config_sha256, spectrum, cm, f, tol })
    }

    pub fn mu11(&self) -> f64 {
        self.cm.principal_system_eigenvalue(self.spectrum.lambda1)
    }

    fn two_by_two(&self) -> Option<TwoByTwoData> {
        let e = self.cm.entries();
        (self.cm.n() == 2).then(|| annex_2x2(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)], &self.spectrum).ok())?
    }

    fn manifest(&self, verb: Verb, seed: Option<u64>, started: &str, files: &[String]) -> Value {
        let grid = self.spectrum.grid();
        json!({
            "tool": "signlab",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "verb": verb.name(),
            "config_version": config::CONFIG_VERSION,
            "config_sha256": self.config_sha256,
            "seed": seed,
            "tol": self.tol,
            "grid": {
                "dimension": grid.dimension(),
                "extents": grid.extents(),
                "resolution": grid.resolution(),
                "spacing": grid.spacing(),
            },
            "spectrum": { "lambda1": self.spectrum.lambda1, "lambda2": self.spectrum.lambda2 },
            "matrix": {
                "rows": self.checked.config.matrix.rows,
                "eigenvalues": self.cm.eigenvalues(),
                "block_sizes": self.cm.block_sizes(),
                "x1": self.cm.x1(),
                "hypotheses_hold": self.cm.report().verdict,
            },
            "mu11": self.mu11(),
            "started_utc": started,
            "finished_utc": now(),
            "files": files,
        })
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn signs(v: &[Sign]) -> Vec<&'static str> {
    v.iter().map(|s| s.symbol()).collect()
}

fn report_json(r: &SignReport) -> Value {
    json!({
        "mu": r.mu,
        "side": r.side.as_str(),
        "predicted": signs(&r.predicted),
        "observed_interior": signs(&r.observed_interior),
        "observed_normal": signs(&r.observed_normal),
        "hypothesis_hf1": r.hypothesis_hf1,
        "match": r.matches,
    })
}

fn two_by_two_json(t: &TwoByTwoData) -> Value {
    json!({
        "a": t.a, "b": t.b, "c": t.c, "d": t.d,
        "discriminant": t.discriminant,
        "xi1": t.xi1,
        "xi2": t.xi2,
        "mu_minus": t.mu_minus,
        "mu_plus": t.mu_plus,
        "t_star": t.t_star,
        "p": t.p,
        "p_inv": t.p_inv,
        "diagonal_outside_spectrum": t.diagonal_outside_spectrum,
    })
}

fn amp_json(e: &AmpEstimate) -> Value {
    json!({
        "mu_threshold": e.mu_threshold,
        "delta_empirical": e.delta_empirical,
        "delta_formula_ratio": e.delta_formula_ratio,
        "h1": e.h1,
        "h_perp_q_norm": e.h_perp_q_norm,
        "q": e.q,
        "reached_cap": e.reached_cap,
        "bracket_width": e.bracket_width,
    })
}

pub fn run(verb: Verb, opts: &Options) -> CliResult<PathBuf> {
    let started = now();
    let (checked, hash) = load_config(&opts.config)?;
    let dir = output_dir(opts, Some(&checked));
    let lab = Lab::build(checked, hash, opts.tol)?;
    let mut out = Output::new(&dir)?;
    match verb {
        Verb::Solve => solve(&lab, &mut out)?,
        Verb::Sweep => sweep(&lab, &mut out)?,
        Verb::Amp => amp(&lab, &mut out)?,
        Verb::Annex => annex(&lab, &mut out)?,
        Verb::CheckHypotheses => check_hypotheses(&lab, &mut out)?,
    }
    let manifest = lab.manifest(verb, opts.seed, &started, &out.files);
    out.write_json("manifest.json", &manifest)?;
    if verb == Verb::CheckHypotheses && !lab.cm.report().verdict {
        let v = lab.cm.report().violations(&lab.cm);
        return Err(Error::Hypothesis(v[0].clone()).into());
    }
    Ok(dir)
}

fn solve(lab: &Lab, out: &mut Output) -> CliResult<()> {
    let mu = lab.checked.config.solve.mu.ok_or_else(|| CliError::Config("solve needs solve.mu".into()))?;
    let problem = SystemProblem::new(&lab.cm, mu, &lab.f, &lab.spectrum)?;
    let solution = match Method::from(lab.checked.config.solve.method) {
        Method::Jordan => solve_jordan(&problem)?,
        Method::Direct => solve_direct(&problem)?,
    };
    for (i, u) in solution.u.iter().enumerate() {
        out.write(&format!("u_{}.csv", i + 1), &u.to_csv())?;
    }
    let report = match verify(&problem, &solution) {
        Ok(r) => report_json(&r),
        Err(e @ Error::AtEigenvalue { .. }) => json!({ "excluded": e.code() }),
        Err(e) => return Err(e.into()),
    };
    let summary = json!({
        "mu": mu,
        "method": solution.method.tag(),
        "residual": solution.residual,
        "backward_error": solution.backward_error,
        "u_tilde_max": solution.u_tilde.iter().map(GridFunction::norm_max).collect::<Vec<_>>(),
        "signs": report,
    });
    out.write_json("solve.json", &summary)?;
    if let Some(t) = lab.two_by_two() {
        out.write_json("two_by_two.json", &two_by_two_json(&t))?;
    }
    Ok(())
}

pub fn sweep_header(n: usize) -> String {
    let mut cols = vec!["mu".to_string(), "side".to_string()];
    for kind in ["pred", "obs", "normal"] {
        cols.extend((1..=n).map(|i| format!("{kind}_{i}")));
    }
    cols.extend(["match", "hf1_strict", "hf1_weak", "residual", "u1_tilde_max"].map(String::from));
    cols.join(",")
}

/// One CSV row. Excluded points keep `mu`, report `side = at` or the side of
/// `μ₁₁`, leave the sign columns empty and carry the exclusion code under `match`.
pub fn sweep_row(p: &SweepPoint, n: usize, mu11: f64) -> String {
    let mut row = String::new();
    match &p.report {
        Some(r) => {
            write!(row, "{:?},{}", p.mu, r.side).unwrap();
            for v in [&r.predicted, &r.observed_interior, &r.observed_normal] {
                for s in v {
                    write!(row, ",{}", s.symbol()).unwrap();
                }
            }
            write!(row, ",{},{},{},{:?},{:?}", r.matches, p.hf1.strict, p.hf1.weak, p.backward_error, p.u1_tilde_max).unwrap();
        }
        None => {
            let code = p.excluded.unwrap_or("excluded");
            let side = if code == "at_eigenvalue" { "at" } else { Side::of(p.mu, mu11).as_str() };
            write!(row, "{:?},{}", p.mu, side).unwrap();
            row.push_str(&",".repeat(3 * n));
            write!(row, ",{code},{},{},,", p.hf1.strict, p.hf1.weak).unwrap();
        }
    }
    row
}

fn sweep_values(lab: &Lab) -> CliResult<Vec<f64>> {
    let spec = lab.checked.config.sweep.as_ref().ok_or_else(|| CliError::Config("sweep needs a [sweep] table".into()))?;
    Ok(match spec.mode {
        SweepMode::Auto => {
            if delta_search_cap(&lab.cm, &lab.spectrum) <= 0.0 {
                return Err(CliError::Config("auto window is empty: eigenvalue gaps are too small".into()));
            }
            auto_window(&lab.cm, &lab.spectrum, spec.count)
        }
        SweepMode::Range => linspace(spec.min.unwrap(), spec.max.unwrap(), spec.count),
    })
}

fn delta_row(side: Side, est: &signlab::Result<DeltaEstimate>) -> String {
    match est {
        Ok(d) => format!("{side},ok,{:?},{:?},{},{:?}", d.delta, d.cap, d.reached_cap, d.bracket_width),
        Err(e) => format!("{side},{},,,,", e.code()),
    }
}

fn sweep(lab: &Lab, out: &mut Output) -> CliResult<()> {
    let mus = sweep_values(lab)?;
    let mut points = mus
        .par_iter()
        .map(|&mu| sweep_point(&lab.cm, mu, &lab.f, &lab.spectrum))
        .collect::<signlab::Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    let n = lab.cm.n();
    let mu11 = lab.mu11();
    let mut csv = sweep_header(n);
    csv.push('\n');
    for p in &points {
        csv.push_str(&sweep_row(p, n, mu11));
        csv.push('\n');
    }
    out.write("sweep.csv", &csv)?;

    let (below, above) = rayon::join(
        || empirical_delta_system(&lab.cm, &lab.f, &lab.spectrum, Side::Below),
        || empirical_delta_system(&lab.cm, &lab.f, &lab.spectrum, Side::Above),
    );
    let summary = format!(
        "side,status,delta,cap,reached_cap,bracket_width\n{}\n{}\n",
        delta_row(Side::Below, &below),
        delta_row(Side::Above, &above)
    );
    out.write("sweep_summary.csv", &summary)?;
    Ok(())
}

fn amp(lab: &Lab, out: &mut Output) -> CliResult<()> {
    let spec = &lab.checked.config.amp;
    let component = match (lab.cm.n(), spec.component) {
        (_, Some(c)) => c,
        (1, None) => 1,
        (n, None) => return Err(CliError::Config(format!("amp on a {n}-component system needs amp.component"))),
    };
    let h = &lab.f[component - 1];
    let q = spec.q.unwrap_or_else(|| default_q(lab.spectrum.grid().dimension()));
    let base = estimate_amp_interval(h, &lab.spectrum, q)?;
    let split = signlab::split(h, &lab.spectrum, q);

    let mut scales = spec.scales.clone();
    scales.sort_by(f64::total_cmp);
    let rows: Vec<(f64, signlab::Result<AmpEstimate>)> = scales
        .par_iter()
        .map(|&s| {
            let mut hs = lab.spectrum.phi1.scaled(split.h1);
            hs.axpy(s, &split.h_perp);
            (s, estimate_amp_interval(&hs, &lab.spectrum, q))
        })
        .collect();
    let mut csv = String::from("scale,status,mu_threshold,delta_empirical,delta_formula_ratio,h1,h_perp_q_norm,reached_cap\n");
    for (s, r) in &rows {
        match r {
            Ok(e) => writeln!(
                csv,
                "{s:?},ok,{:?},{:?},{:?},{:?},{:?},{}",
                e.mu_threshold, e.delta_empirical, e.delta_formula_ratio, e.h1, e.h_perp_q_norm, e.reached_cap
            )
            .unwrap(),
            Err(e) => writeln!(csv, "{s:?},{},,,,,,", e.code()).unwrap(),
        }
    }
    out.write("amp_sequence.csv", &csv)?;
    let deltas: Vec<f64> = rows.iter().filter_map(|(_, r)| r.as_ref().ok()).map(|e| e.delta_empirical).collect();
    let record = json!({
        "component": component,
        "estimate": amp_json(&base),
        "sequence_delta_nonincreasing": deltas.windows(2).all(|w| w[1] <= w[0]),
    });
    out.write_json("amp.json", &record)?;
    Ok(())
}

fn annex(lab: &Lab, out: &mut Output) -> CliResult<()> {
    if lab.cm.n() != 2 {
        return Err(CliError::Config(format!("annex needs a 2×2 matrix, got {}×{}", lab.cm.n(), lab.cm.n())));
    }
    let e = lab.cm.entries();
    let data = annex_2x2(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)], &lab.spectrum)?;
    out.write_json("two_by_two.json", &two_by_two_json(&data))?;
    let mut csv = String::from(
        "mu,theorem,status,expected_u,expected_v,observed_u,observed_v,normal_u,normal_v,agrees_with_general,within_empirical_delta,detail\n",
    );
    let mut offsets = lab.checked.config.annex.offsets.clone();
    offsets.sort_by(f64::total_cmp);
    for off in offsets {
        let mu = data.mu_minus + off;
        for (theorem, verdict) in annex_theorem_checks(&data, &lab.f[0], &lab.f[1], mu, &lab.spectrum) {
            match verdict {
                Ok(v) => {
                    let within = v.within_empirical_delta.map_or(String::new(), |b| b.to_string());
                    writeln!(
                        csv,
                        "{mu:?},{theorem},{},{},{},{},{},{},{},{},{within},",
                        if v.passed { "pass" } else { "fail" },
                        v.expected[0].symbol(),
                        v.expected[1].symbol(),
                        v.observed_interior[0].symbol(),
                        v.observed_interior[1].symbol(),
                        v.observed_normal[0].symbol(),
                        v.observed_normal[1].symbol(),
                        v.agrees_with_general,
                    )
                    .unwrap();
                }
                Err(Error::HypothesisNotMet(clause)) => {
                    writeln!(csv, "{mu:?},{theorem},not_applicable,,,,,,,,,{}", clause.replace(',', ";")).unwrap();
                }
                Err(e) => writeln!(csv, "{mu:?},{theorem},{},,,,,,,,,", e.code()).unwrap(),
            }
        }
    }
    out.write("annex.csv", &csv)?;
    Ok(())
}

fn check_hypotheses(lab: &Lab, out: &mut Output) -> CliResult<()> {
    let r = lab.cm.report();
    let hf1 = check_hf1(&lab.cm, &lab.f, &lab.spectrum);
    let (orientation, oriented) = oriented_hf1(&lab.cm, &lab.f, &lab.spectrum);
    let violations: Vec<Value> = r
        .violations(&lab.cm)
        .iter()
        .map(|v| json!({ "code": v.code(), "message": v.to_string() }))
        .collect();
    let e = lab.cm.entries();
    let two_by_two = (lab.cm.n() == 2).then(|| match annex_2x2(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)], &lab.spectrum) {
        Ok(t) => two_by_two_json(&t),
        Err(err) => json!({ "violation": err.to_string() }),
    });
    let record = json!({
        "real_spectrum": r.real_spectrum,
        "xi1_positive": r.xi1_positive,
        "xi1_alg_simple": r.xi1_alg_simple,
        "xi1_geom_simple": r.xi1_geom_simple,
        "x1_nonzero_components": r.x1_nonzero_components,
        "verdict": r.verdict,
        "violations": violations,
        "hf1": {
            "strict": hf1.strict,
            "weak": hf1.weak,
            "f_tilde_1_phi1": hf1.f_tilde_1_phi1,
            "x1_orientation": orientation,
            "oriented_strict": oriented.strict,
            "oriented_weak": oriented.weak,
        },
        "two_by_two": two_by_two,
    });
    out.write_json("hypotheses.json", &record)?;
    Ok(())
}
