//! Scenario execution: named studies that turn a `RunConfig` into branch
//! CSVs, bifurcation records, scaling summaries, and SVG diagrams on disk.

use crate::config::{
    default_half_width, FigureId, LocalizedCenter, PotentialSpec, RunConfig, Scenario,
};
use crate::svg::{LineStyle, Plot};
use nlsbif_core::asymptotics::{
    localized_branch_check, nonexistence_probe, prefactor_ratio_residuals, reference_grid,
    rescale_state, solve_rescaled_family, soliton_profile, ProbeOutcome,
};
use nlsbif_core::bifurcation::{
    branch_switch, build_report, fit_quadratic_law, locate_crossing, pitchfork_sweep,
    refine_e_star, report_record, BifurcationConfig, BifurcationReport, CrossingScan,
};
use nlsbif_core::continuation::{
    branch_derivatives, branch_metadata, branch_to_csv, continue_branch, Branch,
    ContinuationControls, Provenance,
};
use nlsbif_core::grid::{quadrature_of, Grid};
use nlsbif_core::potentials::{solve_linear_modes, LinearModes, Potential, TabulatedPotential};
use nlsbif_core::schrodinger::{NlsSystem, Normalization, ProblemParams};
use nlsbif_core::stationary::{newton_solve, seed_from_linear, NewtonOptions, StationaryState};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

/// Scenario failures: everything here is a numerical/runtime problem; config
/// problems are rejected before execution starts.
#[derive(Debug)]
pub struct ScenarioError {
    pub stage: String,
    pub message: String,
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

impl std::error::Error for ScenarioError {}

fn stage<T, E: std::fmt::Display>(
    stage: &str,
    r: std::result::Result<T, E>,
) -> Result<T, ScenarioError> {
    r.map_err(|e| ScenarioError { stage: stage.to_string(), message: e.to_string() })
}

pub struct RunOutput {
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

pub struct Executor {
    pub cfg: RunConfig,
    pub allow_unverified: bool,
    pub workers: usize,
}

impl Executor {
    pub fn potential(&self) -> Result<Potential, ScenarioError> {
        match &self.cfg.potential {
            PotentialSpec::SingleWell => Ok(Potential::SingleWellSech2),
            PotentialSpec::DoubleWell { s } => stage("potential", Potential::double_well(*s)),
            PotentialSpec::Tabulated { file } => {
                let tab = stage("potential", TabulatedPotential::from_file(file))?;
                Ok(Potential::Tabulated(tab))
            }
        }
    }

    pub fn grid(&self) -> Result<Arc<Grid>, ScenarioError> {
        let l = self.cfg.half_width.unwrap_or_else(|| default_half_width(&self.cfg));
        stage("grid", Grid::from_spacing(l, self.cfg.dx))
    }

    pub fn params(&self) -> Result<ProblemParams, ScenarioError> {
        stage(
            "params",
            ProblemParams::new(self.cfg.sigma, self.cfg.p, self.cfg.normalization),
        )
    }

    pub fn system(&self) -> Result<NlsSystem, ScenarioError> {
        let grid = self.grid()?;
        let pot = self.potential()?;
        let params = self.params()?;
        stage("system", NlsSystem::new(&grid, &pot, params, self.cfg.stencil_order))
    }

    fn newton(&self) -> NewtonOptions {
        NewtonOptions { tol: self.cfg.newton_tol, ..NewtonOptions::symmetric() }
    }

    fn controls(&self, de_init: f64) -> ContinuationControls {
        ContinuationControls {
            de_init,
            de_max: self.cfg.de_max,
            de_min: self.cfg.de_min,
            newton: self.newton(),
            ..ContinuationControls::symmetric()
        }
    }

    /// Linear modes, start state and an E0-aware step scale. For nearly
    /// degenerate wells the onset window shrinks with the mode splitting so
    /// the crossing just above `E0` is not stepped over.
    pub fn symmetric_start(
        &self,
        sys: &NlsSystem,
    ) -> Result<(LinearModes, StationaryState, f64), ScenarioError> {
        let modes = stage(
            "linear_modes",
            solve_linear_modes(
                sys.potential(),
                sys.grid(),
                2,
                self.cfg.normalization,
                self.cfg.stencil_order,
            ),
        )?;
        let splitting = modes.e1.map(|e1| modes.e0 - e1).unwrap_or(f64::INFINITY);
        let mut offset = self.cfg.e_start_offset;
        let mut de_init = self.cfg.de_init.unwrap_or(self.cfg.de_max / 8.0);
        if splitting < 0.01 {
            offset = offset.min(splitting / 20.0);
            de_init = de_init.min(splitting / 10.0);
        }
        let e_start = self.cfg.e_start.unwrap_or(modes.e0 + offset);
        let seed = stage("seed", seed_from_linear(sys, &modes, e_start))?;
        let start = stage("newton_start", newton_solve(sys, &seed, e_start, &self.newton()))?;
        Ok((modes, start, de_init))
    }

    /// Constrained symmetric trace from the onset to `e_target`.
    pub fn trace_symmetric(
        &self,
        sys: &NlsSystem,
        e_target: f64,
    ) -> Result<(LinearModes, Branch), ScenarioError> {
        let (modes, start, de_init) = self.symmetric_start(sys)?;
        let mut branch = stage(
            "continuation",
            continue_branch(
                sys,
                start,
                e_target,
                &self.controls(de_init),
                "symmetric",
                Provenance::FromLinearMode,
            ),
        )?;
        stage("derivatives", branch_derivatives(sys, &mut branch))?;
        Ok((modes, branch))
    }

    /// Stationarity-identity gate for every emitted row.
    fn verify_branch(&self, branch: &Branch) -> Result<(), ScenarioError> {
        if self.allow_unverified {
            return Ok(());
        }
        for p in &branch.points {
            let scale = (p.state.e.abs() * p.state.mass).max(1e-300);
            let rel = p.state.spstat_residual / scale;
            if rel > 1e-6 {
                return Err(ScenarioError {
                    stage: "verify".into(),
                    message: format!(
                        "branch '{}' at E = {:.8}: stationarity identity residual {rel:.3e} exceeds 1e-6; \
                         rerun with --allow-unverified to emit anyway",
                        branch.label, p.state.e
                    ),
                });
            }
        }
        Ok(())
    }

    fn write(&self, name: &str, content: &str, artifacts: &mut Vec<PathBuf>) -> Result<(), ScenarioError> {
        let path = self.cfg.output_dir.join(name);
        if let Some(parent) = path.parent() {
            stage("write", std::fs::create_dir_all(parent))?;
        }
        stage("write", std::fs::write(&path, content))?;
        artifacts.push(path);
        Ok(())
    }

    fn emit_branch(
        &self,
        branch: &Branch,
        sys: &NlsSystem,
        name: &str,
        artifacts: &mut Vec<PathBuf>,
    ) -> Result<(), ScenarioError> {
        self.verify_branch(branch)?;
        self.write(&format!("{name}.csv"), &branch_to_csv(branch, 1e-9), artifacts)?;
        self.write(&format!("{name}.meta.txt"), &branch_metadata(branch, sys), artifacts)?;
        Ok(())
    }

    pub fn run(&self) -> Result<RunOutput, ScenarioError> {
        match self.cfg.scenario {
            Scenario::Trace => self.scenario_trace(),
            Scenario::Pitchfork => self.scenario_pitchfork(),
            Scenario::Scaling => self.scenario_scaling(),
            Scenario::Localized => self.scenario_localized(),
            Scenario::ReproduceFigure => self.scenario_figure(),
        }
    }

    fn scenario_trace(&self) -> Result<RunOutput, ScenarioError> {
        let sys = self.system()?;
        let (_modes, branch) = self.trace_symmetric(&sys, self.cfg.e_target)?;
        let mut artifacts = Vec::new();
        self.emit_branch(&branch, &sys, "branch_symmetric", &mut artifacts)?;

        let n_pts: Vec<(f64, f64)> =
            branch.points.iter().map(|p| (p.state.e, p.state.mass)).collect();
        let mut plot = Plot::new("Mass along the symmetric branch", "E", "N(E)");
        plot.add("symmetric", n_pts, LineStyle::Solid);
        self.write("n_vs_e.svg", &plot.render(), &mut artifacts)?;

        let mut lplot = Plot::new("Critical eigenvalue along the branch", "E", "lambda(E)");
        lplot.hline = Some(0.0);
        lplot.add("lambda", branch.lambda_values(), LineStyle::Solid);
        self.write("lambda_vs_e.svg", &lplot.render(), &mut artifacts)?;

        let mut summary = String::new();
        let last = branch.points.last().unwrap();
        let _ = writeln!(summary, "points = {}", branch.points.len());
        let _ = writeln!(summary, "final_E = {:.8}", last.state.e);
        let _ = writeln!(summary, "final_lambda = {:.6e}", last.lplus_eigenvalues[1]);

        if self.cfg.audit {
            let audit = self.resolution_audit()?;
            self.write("audit.txt", &audit.record, &mut artifacts)?;
            self.write("lambda_audit.svg", &audit.svg, &mut artifacts)?;
            summary.push_str(&audit.record);
        }
        Ok(RunOutput { artifacts, summary })
    }

    fn scenario_pitchfork(&self) -> Result<RunOutput, ScenarioError> {
        let sys = self.system()?;
        let (report, sym_branch, asym_plus, asym_minus, sweep_fit) = self.pitchfork_study(&sys)?;
        let mut artifacts = Vec::new();
        self.emit_branch(&sym_branch, &sys, "branch_symmetric", &mut artifacts)?;
        self.emit_branch(&asym_plus, &sys, "branch_asymmetric_plus", &mut artifacts)?;
        self.emit_branch(&asym_minus, &sys, "branch_asymmetric_minus", &mut artifacts)?;

        let mut record = report_record(&report, &sys);
        let _ = writeln!(record, "quadratic_law_slope = {:.12e}", sweep_fit);
        let _ = writeln!(record, "quadratic_law_expected = {:.12e}", 0.5 * report.q);
        self.write("bifurcation_report.txt", &record, &mut artifacts)?;

        // N(E) with all branches.
        let mut nplot = Plot::new("Mass along the branches", "E", "N(E)");
        for (b, style) in [
            (&sym_branch, LineStyle::Dashed),
            (&asym_plus, LineStyle::Solid),
            (&asym_minus, LineStyle::Solid),
        ] {
            nplot.add(
                b.symmetry.name(),
                b.points.iter().map(|p| (p.state.e, p.state.mass)).collect(),
                style,
            );
        }
        self.write("n_vs_e.svg", &nplot.render(), &mut artifacts)?;

        let mut lplot = Plot::new("Critical eigenvalue", "E", "lambda(E)");
        lplot.hline = Some(0.0);
        lplot.add("symmetric", sym_branch.lambda_values(), LineStyle::Dashed);
        lplot.add("asymmetric_plus", asym_plus.lambda_values(), LineStyle::Solid);
        self.write("lambda_vs_e.svg", &lplot.render(), &mut artifacts)?;

        // Pitchfork diagram in the center of mass.
        let mut xplot = Plot::new("Center-of-mass pitchfork", "E", "x_cm(E)");
        xplot.hline = Some(0.0);
        for (b, style) in [
            (&sym_branch, LineStyle::Dashed),
            (&asym_plus, LineStyle::Solid),
            (&asym_minus, LineStyle::Solid),
        ] {
            xplot.add(
                b.symmetry.name(),
                b.points.iter().map(|p| (p.state.e, p.state.x_cm)).collect(),
                style,
            );
        }
        self.write("xcm_vs_e.svg", &xplot.render(), &mut artifacts)?;

        // Profile overlay at the trace end.
        if let (Some(sym_last), Some(asym_last)) =
            (sym_branch.points.last(), asym_plus.points.last())
        {
            let grid = sym_last.state.phi.grid();
            let mut pplot = Plot::new(
                &format!("Profiles at E = {:.4}", asym_last.state.e),
                "x",
                "phi(x)",
            );
            let xs = grid.nodes();
            pplot.add(
                "symmetric",
                xs.iter().cloned().zip(sym_last.state.phi.values().iter().cloned()).collect(),
                LineStyle::Dashed,
            );
            pplot.add(
                "asymmetric",
                xs.iter().cloned().zip(asym_last.state.phi.values().iter().cloned()).collect(),
                LineStyle::Solid,
            );
            self.write("profiles.svg", &pplot.render(), &mut artifacts)?;
        }

        let mut summary = String::new();
        let _ = writeln!(summary, "E_star = {:.8}", report.e_star);
        let _ = writeln!(summary, "lambda_prime = {:.6}", report.lambda_prime);
        let _ = writeln!(summary, "Q = {:.6}", report.q);
        let _ = writeln!(summary, "R = {:.6}", report.r);
        let _ = writeln!(summary, "classification = {}", report.classification.name());
        Ok(RunOutput { artifacts, summary })
    }

    /// Shared pitchfork pipeline: symmetric trace, crossing refinement,
    /// report, a0-sweep validation, and both switched branches (run
    /// concurrently when workers allow).
    pub fn pitchfork_study(
        &self,
        sys: &NlsSystem,
    ) -> Result<(BifurcationReport, Branch, Branch, Branch, f64), ScenarioError> {
        let (modes, sym_branch) = self.trace_symmetric(sys, self.cfg.e_target)?;
        let scan = locate_crossing(&sym_branch);
        let width = match &scan {
            CrossingScan::Bracket { e_lo, e_hi, .. } => e_hi - e_lo,
            CrossingScan::NoCrossing { lambda_min, at_e } => {
                return Err(ScenarioError {
                    stage: "locate_crossing".into(),
                    message: format!(
                        "no eigenvalue crossing up to E = {}: min lambda = {lambda_min:.3e} at E = {at_e:.6}",
                        self.cfg.e_target
                    ),
                })
            }
        };
        let bif_cfg = BifurcationConfig {
            newton: self.newton(),
            ..BifurcationConfig::default()
        };
        let (state_star, phi_star) =
            stage("refine_e_star", refine_e_star(sys, &sym_branch, &scan, &bif_cfg))?;
        let report = stage(
            "report",
            build_report(sys, state_star, phi_star, width.max(1e-7), Some(&modes), &bif_cfg),
        )?;

        // Normal-form validation with three switch amplitudes.
        let a0 = self.cfg.a0_rel * report.state_star.mass.sqrt();
        let a_values: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|f| f * a0).collect();
        let sweep = stage("a0_sweep", pitchfork_sweep(sys, &report, &a_values, 1.0))?;
        let sweep_fit = fit_quadratic_law(&sweep, report.e_star);

        let e_asym_target = if report.q >= 0.0 {
            self.cfg.e_target
        } else {
            report.e_star - (self.cfg.e_target - report.e_star).abs()
        };
        let mut controls = self.controls(self.cfg.de_init.unwrap_or(self.cfg.de_max / 8.0));
        controls.de_init = controls.de_init.min((e_asym_target - report.e_star).abs() / 8.0);
        let run_switch = |dir: f64, label: &str| -> Result<Branch, ScenarioError> {
            let mut b = stage(
                &format!("branch_switch_{label}"),
                branch_switch(sys, &report, a0, dir, e_asym_target, &controls, label),
            )?;
            stage("derivatives", branch_derivatives(sys, &mut b))?;
            Ok(b)
        };
        let (asym_plus, asym_minus) = if self.workers >= 2 {
            std::thread::scope(|scope| {
                let plus = scope.spawn(|| run_switch(1.0, "asymmetric_plus"));
                let minus = scope.spawn(|| run_switch(-1.0, "asymmetric_minus"));
                (plus.join().expect("thread"), minus.join().expect("thread"))
            })
        } else {
            (run_switch(1.0, "asymmetric_plus"), run_switch(-1.0, "asymmetric_minus"))
        };
        Ok((report, sym_branch, asym_plus?, asym_minus?, sweep_fit))
    }

    fn scenario_scaling(&self) -> Result<RunOutput, ScenarioError> {
        let pot = self.potential()?;
        let params = self.params()?;
        let n = self.cfg.scaling_points;
        let ratio = self.cfg.scaling_e_max / self.cfg.scaling_e_min;
        let e_list: Vec<f64> = (0..n)
            .map(|i| self.cfg.scaling_e_min * ratio.powf(i as f64 / (n - 1) as f64))
            .collect();
        let branch = stage(
            "family",
            solve_rescaled_family(
                &pot,
                params,
                self.cfg.stencil_order,
                self.cfg.scaling_x0,
                &e_list,
                10.0,
                self.cfg.dx,
                8.0,
            ),
        )?;
        let fits = stage(
            "fit",
            nlsbif_core::asymptotics::fit_scaling(
                &params,
                &branch,
                &pot,
                (self.cfg.scaling_e_min, self.cfg.scaling_e_max),
            ),
        )?;
        let (rn, rg) = prefactor_ratio_residuals(&fits, &params);

        let ref_grid = reference_grid();
        let u_inf = soliton_profile(params.p, params.sigma, &ref_grid);
        let mut csv = String::from("E,R,norm_2p2,N,grad_norm2,rescaled_profile_linf_dist\n");
        let c = params.kinetic_coeff();
        for pt in &branch.points {
            let sys_pt = stage(
                "rescale",
                NlsSystem::new(pt.state.phi.grid(), &pot, params, self.cfg.stencil_order),
            )?;
            let u =
                stage("rescale", rescale_state(&sys_pt, &pt.state, self.cfg.scaling_x0, &ref_grid))?;
            let dist = u.add_scaled(&u_inf, -1.0).linf();
            let b = pt.state.e + c * pot.v(self.cfg.scaling_x0);
            let r = (c / b).sqrt();
            let _ = writeln!(
                csv,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                pt.state.e, r, pt.state.norm_2p2, pt.state.mass, pt.state.grad_norm2, dist
            );
        }
        let mut artifacts = Vec::new();
        self.write("scaling.csv", &csv, &mut artifacts)?;

        let mut rec = String::new();
        for f in &fits {
            let _ = writeln!(
                rec,
                "{}: exponent_fitted = {:.6} (expected {:.6}), prefactor = {:.6e}, b = {:.6e}, r2 = {:.8}",
                f.quantity.name(),
                f.exponent_fitted,
                f.exponent_expected,
                f.prefactor_fitted,
                f.b_estimate,
                f.r2
            );
        }
        let _ = writeln!(rec, "prefactor_ratio_residual_N = {rn:.6e}");
        let _ = writeln!(rec, "prefactor_ratio_residual_grad = {rg:.6e}");
        self.write("scaling_summary.txt", &rec, &mut artifacts)?;

        let mut plot = Plot::new("Scaling laws", "E", "norms");
        plot.log_x = true;
        plot.log_y = true;
        for (idx, key) in [(1usize, "norm_2p2"), (2, "N"), (3, "grad_norm2")] {
            let pts: Vec<(f64, f64)> = branch
                .points
                .iter()
                .map(|p| (p.state.e, [0.0, p.state.norm_2p2, p.state.mass, p.state.grad_norm2][idx]))
                .collect();
            plot.add(key, pts, LineStyle::Solid);
        }
        self.write("scaling.svg", &plot.render(), &mut artifacts)?;
        Ok(RunOutput { artifacts, summary: rec })
    }

    fn scenario_localized(&self) -> Result<RunOutput, ScenarioError> {
        let pot = self.potential()?;
        let params = self.params()?;
        let x0 = match self.cfg.localized_x0 {
            LocalizedCenter::At(x) => x,
            LocalizedCenter::WellMinimum => pot.well_minimum().ok_or_else(|| ScenarioError {
                stage: "localized".into(),
                message: "potential has no split well minimum".into(),
            })?,
        };
        let rep = stage(
            "localized",
            localized_branch_check(&pot, params, self.cfg.stencil_order, x0, &self.cfg.localized_e_list),
        )?;
        let mut csv = String::from("E,R,n_negative,lambda2,lambda2_rescaled,u_mass,x_cm\n");
        for row in &rep.rows {
            let _ = writeln!(
                csv,
                "{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e}",
                row.e, row.r, row.n_negative, row.lambda2, row.lambda2_rescaled, row.u_mass, row.x_cm
            );
        }
        let mut artifacts = Vec::new();
        self.write("localized.csv", &csv, &mut artifacts)?;
        let mut rec = String::new();
        let _ = writeln!(rec, "x0 = {:.8}", rep.x0);
        let _ = writeln!(rec, "V_second = {:.8}", rep.v_second);
        let _ = writeln!(rec, "lambda2_slope = {:.6e}", rep.lambda2_slope);
        let _ = writeln!(rec, "lambda2_expected = {:.6e}", rep.lambda2_expected);
        let _ = writeln!(rec, "mass_defect_slope = {:.6e}", rep.mass_defect_slope);
        let _ = writeln!(rec, "mass_defect_expected = {:.6e}", rep.mass_defect_expected);
        let _ = writeln!(rec, "mass_slope_in_E = {:.6e}", rep.mass_slope_in_e);
        if let Some(px) = self.cfg.probe_x0 {
            let e_probe = *self.cfg.localized_e_list.last().unwrap_or(&100.0);
            let out = stage(
                "probe",
                nonexistence_probe(&pot, params, self.cfg.stencil_order, px, e_probe),
            )?;
            let verdict = match out {
                ProbeOutcome::NoBranchNonConvergence => "no_branch(non_convergence)".to_string(),
                ProbeOutcome::NoBranchDrift { x_cm } => format!("no_branch(drift to x_cm = {x_cm:.4})"),
                ProbeOutcome::Pinned { x_cm } => format!("pinned(x_cm = {x_cm:.4})"),
                ProbeOutcome::NeutralTranslation { x_cm } => {
                    format!("neutral_translation(x_cm = {x_cm:.4})")
                }
            };
            let _ = writeln!(rec, "probe_x0 = {px}");
            let _ = writeln!(rec, "probe_outcome = {verdict}");
        }
        self.write("localized_summary.txt", &rec, &mut artifacts)?;
        Ok(RunOutput { artifacts, summary: rec })
    }

    /// Rerun the λ(E) trace at the configured dx and at dx/2, compare the
    /// crossing sets, and flag disagreements (the spurious-crossing audit).
    pub fn resolution_audit(&self) -> Result<AuditOutput, ScenarioError> {
        let run_arm = |dx: f64| -> Result<(f64, Vec<(f64, f64)>, Vec<f64>), ScenarioError> {
            let mut cfg = self.cfg.clone();
            cfg.dx = dx;
            let arm = Executor { cfg, allow_unverified: self.allow_unverified, workers: 1 };
            let sys = arm.system()?;
            let (_modes, branch) = arm.trace_symmetric(&sys, arm.cfg.e_target)?;
            let lambda = branch.lambda_values();
            let crossings = crossing_list(&lambda);
            Ok((dx, lambda, crossings))
        };
        let dx0 = self.cfg.dx;
        let dx1 = 0.5 * self.cfg.dx;
        let (coarse, fine) = if self.workers >= 2 {
            std::thread::scope(|scope| {
                let a = scope.spawn(|| run_arm(dx0));
                let b = scope.spawn(|| run_arm(dx1));
                (a.join().expect("thread"), b.join().expect("thread"))
            })
        } else {
            (run_arm(dx0), run_arm(dx1))
        };
        let (dx_c, lam_c, cross_c) = coarse?;
        let (dx_f, lam_f, cross_f) = fine?;

        let disagree = cross_c.len() != cross_f.len();
        let mut record = String::new();
        let _ = writeln!(record, "audit_dx_coarse = {dx_c}");
        let _ = writeln!(record, "audit_dx_fine = {dx_f}");
        let _ = writeln!(record, "crossings_coarse = {}", fmt_list(&cross_c));
        let _ = writeln!(record, "crossings_fine = {}", fmt_list(&cross_f));
        let _ = writeln!(record, "crossing_count_coarse = {}", cross_c.len());
        let _ = writeln!(record, "crossing_count_fine = {}", cross_f.len());
        let _ = writeln!(record, "resolutions_disagree = {disagree}");
        if disagree {
            let _ = writeln!(
                record,
                "note = crossing set changes under refinement; the extra coarse-grid crossing is a discretization artifact"
            );
        }

        let mut plot = Plot::new("Resolution audit: critical eigenvalue", "E", "lambda(E)");
        plot.hline = Some(0.0);
        plot.add(&format!("dx = {dx_c}"), lam_c, LineStyle::Dashed);
        plot.add(&format!("dx = {dx_f}"), lam_f, LineStyle::Solid);
        Ok(AuditOutput { record, svg: plot.render(), disagree })
    }

    fn scenario_figure(&self) -> Result<RunOutput, ScenarioError> {
        let figure = self.cfg.figure.expect("validated");
        let mut artifacts = Vec::new();
        let mut summary = String::new();
        match figure {
            FigureId::Fig1 | FigureId::Fig2 => {
                let p = if figure == FigureId::Fig1 { 1.0 } else { 3.0 };
                let e_target = if figure == FigureId::Fig1 { 50.0 } else { 30.0 };
                let mut nplot = Plot::new("Mass of the symmetric state", "E", "N(E)");
                let mut lplot = Plot::new("Second eigenvalue of the linearization", "E", "lambda(E)");
                lplot.hline = Some(0.0);
                for (s, style) in [(0.6, LineStyle::Solid), (0.7, LineStyle::Dashed)] {
                    let cfg = RunConfig {
                        p,
                        sigma: -2.0,
                        normalization: Normalization::Section5,
                        potential: PotentialSpec::DoubleWell { s },
                        e_target,
                        ..self.cfg.clone()
                    };
                    let arm = Executor { cfg, allow_unverified: self.allow_unverified, workers: 1 };
                    let sys = arm.system()?;
                    let (_m, branch) = arm.trace_symmetric(&sys, e_target)?;
                    self.emit_branch(
                        &branch,
                        &sys,
                        &format!("branch_symmetric_s{s}"),
                        &mut artifacts,
                    )?;
                    nplot.add(
                        &format!("s = {s}"),
                        branch.points.iter().map(|pt| (pt.state.e, pt.state.mass)).collect(),
                        style,
                    );
                    lplot.add(&format!("s = {s}"), branch.lambda_values(), style);
                    let _ = writeln!(summary, "s = {s}: {} points", branch.points.len());
                }
                self.write("n_vs_e.svg", &nplot.render(), &mut artifacts)?;
                self.write("lambda_vs_e.svg", &lplot.render(), &mut artifacts)?;
                if figure == FigureId::Fig2 {
                    // The resolution sensitivity panel for the stiffer p = 3.
                    let mut cfg = self.cfg.clone();
                    cfg.p = 3.0;
                    cfg.sigma = -2.0;
                    cfg.normalization = Normalization::Section5;
                    cfg.potential = PotentialSpec::DoubleWell { s: 0.7 };
                    cfg.dx = 0.025;
                    cfg.e_target = e_target;
                    let arm = Executor {
                        cfg,
                        allow_unverified: self.allow_unverified,
                        workers: self.workers,
                    };
                    let audit = arm.resolution_audit()?;
                    self.write("audit.txt", &audit.record, &mut artifacts)?;
                    self.write("lambda_audit.svg", &audit.svg, &mut artifacts)?;
                    summary.push_str(&audit.record);
                }
            }
            FigureId::Fig1a => {
                let cfg = RunConfig {
                    p: 1.0,
                    sigma: -2.0,
                    normalization: Normalization::Section5,
                    potential: PotentialSpec::DoubleWell { s: 0.7 },
                    e_target: 15.0,
                    scenario: Scenario::Pitchfork,
                    ..self.cfg.clone()
                };
                let arm =
                    Executor { cfg, allow_unverified: self.allow_unverified, workers: self.workers };
                let out = arm.scenario_pitchfork()?;
                artifacts.extend(out.artifacts);
                summary.push_str(&out.summary);
            }
            FigureId::Fig2a | FigureId::FigNew => {
                let (p, s, e_target) = if figure == FigureId::Fig2a {
                    (3.0, 10.0, 0.8)
                } else {
                    (5.0, 4.0, 0.32)
                };
                let cfg = RunConfig {
                    p,
                    sigma: -2.0,
                    normalization: Normalization::Section5,
                    potential: PotentialSpec::DoubleWell { s },
                    e_target,
                    scenario: Scenario::Pitchfork,
                    ..self.cfg.clone()
                };
                let arm =
                    Executor { cfg, allow_unverified: self.allow_unverified, workers: self.workers };
                let sys = arm.system()?;
                let (report, sym, plus, minus, _fit) = arm.pitchfork_study(&sys)?;
                self.emit_branch(&sym, &sys, "branch_symmetric", &mut artifacts)?;
                self.emit_branch(&plus, &sys, "branch_asymmetric_plus", &mut artifacts)?;
                self.emit_branch(&minus, &sys, "branch_asymmetric_minus", &mut artifacts)?;
                self.write("bifurcation_report.txt", &report_record(&report, &sys), &mut artifacts)?;

                // Anti-symmetric (excited) branch from the odd mode seed.
                let anti = arm.trace_antisymmetric(&sys, e_target)?;
                self.emit_branch(&anti, &sys, "branch_antisymmetric", &mut artifacts)?;

                let mut nplot = Plot::new("Mass of the stationary states", "E", "N(E)");
                nplot.add(
                    "antisymmetric",
                    anti.points.iter().map(|pt| (pt.state.e, pt.state.mass)).collect(),
                    LineStyle::Solid,
                );
                nplot.add(
                    "symmetric",
                    sym.points.iter().map(|pt| (pt.state.e, pt.state.mass)).collect(),
                    LineStyle::Dashed,
                );
                nplot.add(
                    "asymmetric",
                    plus.points.iter().map(|pt| (pt.state.e, pt.state.mass)).collect(),
                    LineStyle::Solid,
                );
                self.write("n_vs_e.svg", &nplot.render(), &mut artifacts)?;
                let _ = writeln!(summary, "E_star = {:.8}", report.e_star);
                let _ = writeln!(summary, "classification = {}", report.classification.name());
            }
        }
        Ok(RunOutput { artifacts, summary })
    }

    /// Excited-state branch seeded from the odd linear mode; Newton without
    /// the even constraint preserves the odd subspace to rounding.
    pub fn trace_antisymmetric(
        &self,
        sys: &NlsSystem,
        e_target: f64,
    ) -> Result<Branch, ScenarioError> {
        let modes = stage(
            "linear_modes",
            solve_linear_modes(
                sys.potential(),
                sys.grid(),
                2,
                self.cfg.normalization,
                self.cfg.stencil_order,
            ),
        )?;
        let e1 = modes.e1.ok_or_else(|| ScenarioError {
            stage: "antisymmetric".into(),
            message: "no second bound state to seed the excited branch".into(),
        })?;
        let psi1 = modes.psi1.as_ref().expect("psi1 accompanies e1");
        let params = sys.params();
        let x1 = quadrature_of(psi1.grid(), |i| {
            let v = psi1.values()[i];
            (v * v).powf(params.p + 1.0)
        });
        let splitting = modes.e0 - e1;
        let offset = if splitting < 0.01 {
            self.cfg.e_start_offset.min(splitting / 20.0)
        } else {
            self.cfg.e_start_offset
        };
        let e_start = e1 + offset;
        let a = ((e_start - e1) / (-params.sigma_eff() * x1)).powf(1.0 / (2.0 * params.p));
        let seed = psi1.scale(a);
        let opts = NewtonOptions {
            symmetric_constraint: false,
            tol: self.cfg.newton_tol,
            ..NewtonOptions::default()
        };
        let start = stage("newton_start", newton_solve(sys, &seed, e_start, &opts))?;
        let controls = ContinuationControls {
            de_init: self.cfg.de_init.unwrap_or(self.cfg.de_max / 8.0).min(splitting / 10.0),
            de_max: self.cfg.de_max,
            de_min: self.cfg.de_min,
            newton: opts,
            ..ContinuationControls::default()
        };
        stage(
            "continuation",
            continue_branch(sys, start, e_target, &controls, "antisymmetric", Provenance::FromLinearMode),
        )
    }
}

pub struct AuditOutput {
    pub record: String,
    pub svg: String,
    pub disagree: bool,
}

/// E locations where λ changes sign along the sampled trace.
pub fn crossing_list(lambda: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in lambda.windows(2) {
        let (e0, l0) = w[0];
        let (e1, l1) = w[1];
        if l0 == 0.0 {
            continue;
        }
        if l0.signum() != l1.signum() && l1 != 0.0 {
            // Linear interpolation of the sign change.
            out.push(e0 + (e1 - e0) * (l0 / (l0 - l1)));
        }
    }
    out
}

fn fmt_list(v: &[f64]) -> String {
    if v.is_empty() {
        return "none".to_string();
    }
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ")
}

/// Execution manifest accompanying every run: resolved configuration echo,
/// version, and wall time.
pub fn manifest(cfg: &RunConfig, wall_ms: u128, artifacts: &[PathBuf]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tool = nlsbif {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "scenario = {}", cfg.scenario.name());
    let _ = writeln!(s, "normalization = {}", cfg.normalization.name());
    let _ = writeln!(s, "p = {}", cfg.p);
    let _ = writeln!(s, "sigma = {}", cfg.sigma);
    match &cfg.potential {
        PotentialSpec::SingleWell => {
            let _ = writeln!(s, "potential = single_well_sech2");
        }
        PotentialSpec::DoubleWell { s: sep } => {
            let _ = writeln!(s, "potential = double_well_sech2");
            let _ = writeln!(s, "separation = {sep}");
        }
        PotentialSpec::Tabulated { file } => {
            let _ = writeln!(s, "potential = tabulated");
            let _ = writeln!(s, "potential_file = {}", file.display());
        }
    }
    let _ = writeln!(s, "half_width = {}", cfg.half_width.map(|l| l.to_string()).unwrap_or_else(|| "auto".into()));
    let _ = writeln!(s, "dx = {}", cfg.dx);
    let _ = writeln!(s, "stencil_order = {}", cfg.stencil_order);
    let _ = writeln!(s, "e_target = {}", cfg.e_target);
    let _ = writeln!(s, "wall_time_ms = {wall_ms}");
    let _ = writeln!(s, "artifacts = {}", artifacts.len());
    for a in artifacts {
        let _ = writeln!(s, "artifact = {}", a.display());
    }
    s
}

/// Relative stationarity-identity residual used by the row gate.
pub fn spstat_relative(state: &StationaryState) -> f64 {
    state.spstat_residual / (state.e.abs() * state.mass).max(1e-300)
}
