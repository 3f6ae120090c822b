use std::path::Path;

use nodal_core::critical::{Candidate, Solver};
use nodal_core::forward::Forward;
use nodal_core::oracle::minimize_norm;
use nodal_core::reconstruct::{
    first_integral_residual, junction_slopes, potential_from_wave, Reconstructor,
};
use nodal_core::specialfun::{conjugate, Kernels};
use nodal_core::{OracleConfig, PotentialProfile, ProblemSpec, Sign, WaveProfile};
use rayon::prelude::*;

use crate::args::{ForwardArgs, OracleArgs, ProblemArgs, SolveArgs, SweepArgs};
use crate::output::{fmt_num, numeric_csv, write_atomic, Document};
use crate::CliError;

/// Pass thresholds for the invariant checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub node: f64,
    pub lambda: f64,
    pub norm_triangle: f64,
    pub balance: f64,
    pub first_integral: f64,
    pub junction: f64,
    pub zero_spacing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            node: 1e-5,
            lambda: 1e-6,
            norm_triangle: 1e-5,
            balance: 1e-8,
            first_integral: 1e-5,
            junction: 1e-5,
            zero_spacing: 1e-8,
        }
    }
}

/// Diagnostics of one reconstructed root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checks {
    /// Relative mismatch of the two sides of the mass balance at the root.
    pub balance_residual: f64,
    /// Relative mismatch of `∫u²` on the two sides of `T*`.
    pub l2_balance: f64,
    /// Largest deviation of a zero from even spacing; infinite if the count is wrong.
    pub zero_spacing: f64,
    pub sign_structure: bool,
    pub first_integral_left: f64,
    pub first_integral_right: f64,
    pub junction_left: f64,
    pub junction_right: f64,
    pub norm_analytic: f64,
    pub norm_profile: f64,
    pub norm_wave: f64,
    /// Largest pairwise relative difference of the three norms.
    pub norm_triangle: f64,
    pub forward_lambda: f64,
    pub forward_node: f64,
    pub lambda_error: f64,
    pub node_error: f64,
}

impl Checks {
    pub fn failures(&self, tol: &Tolerances) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut need = |ok: bool, name| {
            if !ok {
                out.push(name);
            }
        };
        need(self.balance_residual <= tol.balance, "balance_residual");
        need(self.l2_balance <= tol.balance, "l2_balance");
        need(self.zero_spacing <= tol.zero_spacing, "zero_spacing");
        need(self.sign_structure, "sign_structure");
        need(self.first_integral_left <= tol.first_integral, "first_integral_left");
        need(self.first_integral_right <= tol.first_integral, "first_integral_right");
        need(self.junction_left <= tol.junction, "junction_left");
        need(self.junction_right <= tol.junction, "junction_right");
        need(self.norm_triangle <= tol.norm_triangle, "norm_triangle");
        need(self.lambda_error <= tol.lambda, "lambda_error");
        need(self.node_error <= tol.node, "node_error");
        out
    }

    pub fn passed(&self, tol: &Tolerances) -> bool {
        self.failures(tol).is_empty()
    }

    fn record(&self, doc: &mut Document, prefix: &str) {
        let fields = [
            ("balance_residual", self.balance_residual),
            ("l2_balance", self.l2_balance),
            ("zero_spacing", self.zero_spacing),
            ("first_integral_left", self.first_integral_left),
            ("first_integral_right", self.first_integral_right),
            ("junction_left", self.junction_left),
            ("junction_right", self.junction_right),
            ("norm_profile", self.norm_profile),
            ("norm_wave", self.norm_wave),
            ("norm_triangle", self.norm_triangle),
            ("forward_lambda", self.forward_lambda),
            ("forward_node", self.forward_node),
            ("lambda_error", self.lambda_error),
            ("node_error", self.node_error),
        ];
        for (k, v) in fields {
            doc.num(format!("{prefix}{k}"), v);
        }
        doc.text(format!("{prefix}sign_structure"), self.sign_structure);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn spec_of(problem: &ProblemArgs, t_star: f64) -> Result<ProblemSpec, CliError> {
    Ok(ProblemSpec::new(problem.i, problem.m, problem.p, t_star, problem.q0)?)
}

fn expected_zeros(spec: &ProblemSpec) -> Vec<f64> {
    let left = (1..=spec.i).map(|j| j as f64 * spec.t_star / spec.i as f64);
    let r = (spec.m - spec.i) as f64;
    let right = (1..spec.m - spec.i).map(|j| spec.t_star + j as f64 * (1.0 - spec.t_star) / r);
    left.chain(right).collect()
}

/// Reconstructs one root and runs every invariant check on it, including
/// the forward round trip.
pub fn check_candidate(
    spec: &ProblemSpec,
    cand: &Candidate,
    samples: usize,
    kernels: Kernels,
) -> Result<(Checks, WaveProfile, PotentialProfile), CliError> {
    let params = &cand.params;
    let wave = Reconstructor::new(kernels).assemble_wave(spec, params, samples)?;
    let q = potential_from_wave(&wave);

    let (l2_left, l2_right) = wave.l2_balance();
    let zeros = wave.interior_zeros();
    let want = expected_zeros(spec);
    let counts_ok = wave.sign_changes(0..wave.junction + 1) == spec.i - 1
        && wave.sign_changes(wave.junction + 1..wave.len()) == spec.m - spec.i - 1
        && zeros.len() == want.len();
    let zero_spacing = if counts_ok {
        zeros.iter().zip(&want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    } else {
        f64::INFINITY
    };
    let e = params.epsilon.value();
    let sign_structure = q.values().iter().enumerate().all(|(j, v)| {
        let side = if j <= wave.junction { e } else { -e };
        side * (v - spec.q0) >= 0.0 && (e != 0.0 || *v == spec.q0)
    });

    let (fi_left, fi_right) = first_integral_residual(&wave, params);
    let (k, k_tilde) = if params.epsilon == Sign::Zero {
        let mu = params.lambda_shifted;
        (mu * wave.amplitude_left.powi(2), mu * wave.amplitude_right.powi(2))
    } else {
        (params.k, params.k_tilde)
    };
    let (dl, dr) = junction_slopes(&wave);

    let norm_profile = q.lp_distance_to_constant(spec.q0, spec.p);
    let norm_wave = if params.epsilon == Sign::Zero {
        0.0
    } else {
        wave.lp_norm(2.0 * conjugate(spec.p)).powf(2.0 / (spec.p - 1.0))
    };
    let norm_triangle = rel(cand.norm, norm_profile)
        .max(rel(cand.norm, norm_wave))
        .max(rel(norm_profile, norm_wave));

    let forward = Forward::default();
    let forward_lambda = forward.eigenvalue(&q, spec.m)?;
    let forward_node = forward.nodes(&q, spec.m, forward_lambda)?[spec.i - 1];

    let checks = Checks {
        balance_residual: cand.balance_residual,
        l2_balance: rel(l2_left, l2_right),
        zero_spacing,
        sign_structure,
        first_integral_left: fi_left,
        first_integral_right: fi_right,
        junction_left: rel(dl * dl, k),
        junction_right: rel(dr * dr, k_tilde),
        norm_analytic: cand.norm,
        norm_profile,
        norm_wave,
        norm_triangle,
        forward_lambda,
        forward_node,
        lambda_error: rel(forward_lambda, params.lambda),
        node_error: (forward_node - spec.t_star).abs(),
    };
    Ok((checks, wave, q))
}

/// Outcome of one command: a summary document and whether every check held.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub document: Document,
    pub success: bool,
}

fn header(doc: &mut Document, command: &str, spec: &ProblemSpec) {
    doc.text("command", command)
        .text("i", spec.i)
        .text("m", spec.m)
        .num("p", spec.p)
        .num("t_star", spec.t_star)
        .num("q0", spec.q0);
}

fn solve_document(command: &str, args: &SolveArgs, all_roots: bool) -> Result<(Report, Option<(WaveProfile, PotentialProfile)>), CliError> {
    let spec = spec_of(&args.problem, args.t_star)?;
    let cfg = args.tol.solver_config();
    let sol = Solver::new(cfg).solve(&spec)?;
    let c = &sol.params;
    let tol = Tolerances::default();

    let mut doc = Document::new();
    header(&mut doc, command, &spec);
    doc.text("epsilon", c.epsilon.as_i8())
        .num("lambda", c.lambda)
        .num("lambda_shifted", c.lambda_shifted)
        .num("alpha", c.alpha)
        .num("beta", c.beta)
        .num("h", c.h)
        .num("h_tilde", c.h_tilde)
        .num("k", c.k)
        .num("k_tilde", c.k_tilde)
        .num("P1", c.period_left)
        .num("P2", c.period_right)
        .num("norm", sol.norm)
        .text("multiplicity_flag", sol.multiplicity)
        .text("uniqueness_proven", spec.p > 1.5)
        .text("samples_per_arc", args.samples);

    let mut success = true;
    let mut best = None;
    for (r, cand) in sol.candidates.iter().enumerate() {
        let chosen = cand.params == sol.params;
        if !(all_roots || chosen) {
            continue;
        }
        let (checks, wave, q) = check_candidate(&spec, cand, args.samples, cfg.kernels)?;
        let prefix = if all_roots { format!("root.{}.", r + 1) } else { "check.".to_string() };
        if all_roots {
            doc.num(format!("{prefix}lambda"), cand.params.lambda)
                .num(format!("{prefix}norm"), cand.norm);
        }
        checks.record(&mut doc, &prefix);
        let failures = checks.failures(&tol);
        doc.text(format!("{prefix}failed"), if failures.is_empty() { "none".to_string() } else { failures.join(" ") });
        success &= failures.is_empty();
        if chosen {
            best = Some((wave, q));
        }
    }
    doc.text("checks_passed", success);
    Ok((Report { document: doc, success }, best))
}

pub fn run_solve(args: &SolveArgs) -> Result<Report, CliError> {
    let (report, best) = solve_document("solve", args, false)?;
    let (wave, q) = best.expect("the chosen root is always checked");
    let dir = &args.out_dir;
    write_atomic(
        &dir.join("wave.csv"),
        &numeric_csv(&["x", "u"], wave.grid.iter().zip(&wave.u_values).map(|(&x, &u)| vec![x, u]))?,
    )?;
    write_atomic(
        &dir.join("potential.csv"),
        &numeric_csv(&["x", "q"], q.grid().iter().zip(q.values()).map(|(&x, &v)| vec![x, v]))?,
    )?;
    write_atomic(&dir.join("result.txt"), report.document.render().as_bytes())?;
    Ok(report)
}

pub fn run_verify(args: &SolveArgs) -> Result<Report, CliError> {
    let (report, _) = solve_document("verify", args, true)?;
    write_atomic(&args.out_dir.join("verify.txt"), report.document.render().as_bytes())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t_star: f64,
    pub epsilon: Option<Sign>,
    pub lambda: f64,
    pub norm: f64,
    /// `ok`, or the error class and message.
    pub status: String,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Node locations `t_min + k·step` up to `t_max`, rounded to 12 decimals.
pub fn sweep_grid(t_min: f64, t_max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && t_min < t_max && t_min.is_finite() && t_max.is_finite()) {
        return Err(CliError::Config(format!(
            "sweep needs t_min < t_max and t_step > 0, got [{t_min}, {t_max}] step {step}"
        )));
    }
    let n = ((t_max - t_min) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| ((t_min + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub fn sweep_rows(args: &SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    let grid = sweep_grid(args.t_min, args.t_max, args.t_step)?;
    let problem = &args.problem;
    // surface spec errors that do not depend on T* up front
    spec_of(problem, 0.5)?;
    let solver = Solver::new(args.tol.solver_config());
    Ok(grid
        .par_iter()
        .map(|&t| {
            let solved = spec_of(problem, t).and_then(|s| Ok(solver.solve(&s)?));
            match solved {
                Ok(sol) => SweepRow {
                    t_star: t,
                    epsilon: Some(sol.params.epsilon),
                    lambda: sol.params.lambda,
                    norm: sol.norm,
                    status: "ok".into(),
                },
                Err(e) => SweepRow {
                    t_star: t,
                    epsilon: None,
                    lambda: f64::NAN,
                    norm: f64::NAN,
                    status: format!("{}: {e}", if e.exit_code() == 2 { "domain" } else { "numerical" }),
                },
            }
        })
        .collect())
}

pub fn run_sweep(args: &SweepArgs) -> Result<Report, CliError> {
    let rows = sweep_rows(args)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t_star", "epsilon", "lambda", "norm", "status"])?;
    for r in &rows {
        w.write_record([
            fmt_num(r.t_star),
            r.epsilon.map(|e| e.as_i8().to_string()).unwrap_or_default(),
            fmt_num(r.lambda),
            fmt_num(r.norm),
            r.status.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    write_atomic(&args.out_dir.join("sweep.csv"), &bytes)?;

    let ok = rows.iter().filter(|r| r.ok()).count();
    let mut doc = Document::new();
    doc.text("command", "sweep")
        .text("i", args.problem.i)
        .text("m", args.problem.m)
        .num("p", args.problem.p)
        .num("q0", args.problem.q0)
        .text("points", rows.len())
        .text("succeeded", ok);
    // at least 95% of the points must succeed
    let success = 20 * ok >= 19 * rows.len();
    Ok(Report { document: doc, success })
}

pub fn run_oracle(args: &OracleArgs) -> Result<Report, CliError> {
    let spec = spec_of(&args.problem, args.t_star)?;
    let cfg = OracleConfig {
        n_bins: args.bins,
        max_iters: args.max_iters,
        seed: args.seed,
        ..OracleConfig::default()
    };
    let r = minimize_norm(&spec, &cfg)?;
    let analytic = Solver::new(args.tol.solver_config()).solve(&spec)?.norm;

    let mut doc = Document::new();
    header(&mut doc, "oracle", &spec);
    doc.text("bins", args.bins)
        .text("seed", args.seed)
        .num("norm", r.norm)
        .num("analytic_norm", analytic)
        .num("relative_gap", rel(r.norm, analytic))
        .num("lambda", r.lambda)
        .num("node", r.node)
        .text("iterations", r.iterations)
        .text("alignment", r.alignment.map(fmt_num).unwrap_or_else(|| "none".into()));

    let dir = &args.out_dir;
    let q = &r.profile;
    write_atomic(
        &dir.join("oracle_potential.csv"),
        &numeric_csv(&["x", "q"], q.grid().iter().zip(q.values()).map(|(&x, &v)| vec![x, v]))?,
    )?;
    write_atomic(
        &dir.join("oracle_history.csv"),
        &numeric_csv(
            &["iteration", "norm", "residual", "step"],
            r.history.iter().enumerate().map(|(k, s)| vec![k as f64, s.norm, s.residual, s.step]),
        )?,
    )?;
    write_atomic(&dir.join("oracle.txt"), doc.render().as_bytes())?;
    Ok(Report { document: doc, success: true })
}

/// Reads a `x,q` CSV with a header row.
pub fn read_profile(path: &Path) -> Result<PotentialProfile, CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    let (mut grid, mut values) = (Vec::new(), Vec::new());
    for (n, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |k: usize| -> Result<f64, CliError> {
            record
                .get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::Config(format!("{}: row {} column {} is not a number", path.display(), n + 2, k + 1)))
        };
        grid.push(cell(0)?);
        values.push(cell(1)?);
    }
    Ok(PotentialProfile::new(grid, values)?)
}

pub fn run_forward(args: &ForwardArgs) -> Result<Report, CliError> {
    let q = match &args.profile {
        Some(path) => read_profile(path)?,
        None => PotentialProfile::constant(args.q0),
    };
    let forward = Forward::default();
    let lambda = forward.eigenvalue(&q, args.m)?;
    let nodes = forward.nodes(&q, args.m, lambda)?;

    let mut doc = Document::new();
    doc.text("command", "forward")
        .text("m", args.m)
        .num("lambda", lambda)
        .text("nodes", nodes.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(" "));
    if let Some(i) = args.i {
        let s = forward.node_sensitivity(&q, i, args.m, None)?;
        doc.text("i", i).num("node", s.node).num("a", s.a).num("b", s.b);
    }
    write_atomic(&args.out_dir.join("forward.txt"), doc.render().as_bytes())?;
    Ok(Report { document: doc, success: true })
}
