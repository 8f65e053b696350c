//! Locating the symmetry-breaking point `E*` on an even branch, computing
//! the critical eigenfunction `φ*` and the pitchfork normal-form data
//! (`λ'(E*)`, `Q`, `R`, `a*`), classifying the bifurcation, and switching
//! onto the asymmetric branches.

use crate::continuation::{
    continue_branch, Branch, BranchSymmetry, ContinuationControls, Provenance,
};
use crate::error::{CoreError, Result};
use crate::grid::{inner, quadrature_of, GridFunction};
use crate::potentials::LinearModes;
use crate::schrodinger::{NlsSystem, OperatorTag, Parity};
use crate::stationary::{newton_solve, NewtonOptions, StationaryState};

/// Pitchfork classification by the signs of `Q` and `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// `Q > 0` and `R > 0`: asymmetric states orbitally stable near `E*`.
    Supercritical,
    /// `Q > 0` and `R < 0`: unstable until the mass slope turns positive.
    SubcriticalR,
    /// `Q < 0`: the asymmetric branch opens toward decreasing `E`.
    SubcriticalQ,
    /// `|λ'(E*)|` below the non-degeneracy tolerance.
    Degenerate,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Supercritical => "supercritical",
            Classification::SubcriticalR => "subcritical_R",
            Classification::SubcriticalQ => "subcritical_Q",
            Classification::Degenerate => "degenerate",
        }
    }
}

/// Everything computed at the located bifurcation point.
#[derive(Debug, Clone)]
pub struct BifurcationReport {
    pub e_star: f64,
    /// Even state at `E*`.
    pub state_star: StationaryState,
    /// Odd critical eigenfunction, L²-normalized, deterministic sign.
    pub phi_star: GridFunction,
    /// `λ'(E*)` by the eigenvalue-perturbation integral (primary estimate).
    pub lambda_prime: f64,
    /// Centered finite-difference estimate of `λ'(E*)`.
    pub lambda_prime_fd: f64,
    /// Relative discrepancy of the two estimates.
    pub lambda_prime_discrepancy: f64,
    /// Set when the two estimates differ by more than 5%.
    pub lambda_prime_inconsistent: bool,
    pub q: f64,
    /// Local quartic term of `Q` before the common prefactor.
    pub q_term_local: f64,
    /// Near-kernel solve term of `Q` before the common prefactor.
    pub q_term_solve: f64,
    pub r: f64,
    pub n_prime: f64,
    /// `⟨ψ_{0,s}, ψ_{E*}⟩` (double-well runs with linear modes supplied).
    pub a_star: Option<f64>,
    /// Large-separation estimate of `a*` from the mode splitting.
    pub a_star_asymptotic: Option<f64>,
    pub classification: Classification,
}

/// Tolerances for the crossing refinement and classification.
#[derive(Debug, Clone, Copy)]
pub struct BifurcationConfig {
    /// `|λ(E*)|` target for the refined crossing (eigenvalue units).
    pub crossing_tol: f64,
    /// Bracket width floor; refinement stops when the bracket is tighter.
    pub bracket_tol: f64,
    /// `|λ'(E*)|` below this is reported as degenerate.
    pub nondegeneracy_tol: f64,
    /// Step for the centered finite differences across `E*`; `None` derives
    /// it from the initial bracket width.
    pub fd_step: Option<f64>,
    pub newton: NewtonOptions,
}

impl Default for BifurcationConfig {
    fn default() -> Self {
        Self {
            crossing_tol: 1e-8,
            bracket_tol: 1e-10,
            nondegeneracy_tol: 1e-4,
            fd_step: None,
            newton: NewtonOptions::symmetric(),
        }
    }
}

/// Outcome of scanning a branch for the first sign change of the critical
/// eigenvalue.
#[derive(Debug, Clone)]
pub enum CrossingScan {
    /// `λ` changes sign between the two bracketing branch points.
    Bracket { e_lo: f64, e_hi: f64, index: usize },
    /// No sign change on the swept window; the minimum of `λ` is reported.
    NoCrossing { lambda_min: f64, at_e: f64 },
}

/// First sign change of `λ(E)` (second `L₊` eigenvalue) along increasing E.
pub fn locate_crossing(branch: &Branch) -> CrossingScan {
    let mut lambda_min = f64::INFINITY;
    let mut at_e = f64::NAN;
    for (i, w) in branch.points.windows(2).enumerate() {
        let (l0, l1) = (w[0].lplus_eigenvalues[1], w[1].lplus_eigenvalues[1]);
        if l0.min(l1) < lambda_min {
            lambda_min = l0.min(l1);
            at_e = if l1 < l0 { w[1].state.e } else { w[0].state.e };
        }
        if l0 > 0.0 && l1 <= 0.0 {
            return CrossingScan::Bracket { e_lo: w[0].state.e, e_hi: w[1].state.e, index: i };
        }
    }
    CrossingScan::NoCrossing { lambda_min, at_e }
}

/// Evaluate `λ(E)` by a constrained solve seeded from `seed`, returning the
/// converged state and the lowest odd eigenpair of `L₊`.
fn lambda_at(
    sys: &NlsSystem,
    e: f64,
    seed: &GridFunction,
    newton: &NewtonOptions,
) -> Result<(StationaryState, f64, GridFunction)> {
    let mut opts = *newton;
    opts.symmetric_constraint = true;
    // The even-restricted Jacobian stays invertible across the crossing; the
    // guard would misfire exactly where refinement needs to evaluate.
    opts.jacobian_guard = 0.0;
    let state = newton_solve(sys, seed, e, &opts)?;
    let lplus = sys.assemble_lplus(&state.phi, e);
    let spec = sys.lowest_eigenpairs(&lplus, 1, Parity::Odd, OperatorTag::Lplus, e)?;
    Ok((state, spec.eigenvalues[0], spec.eigenfunctions[0].clone()))
}

/// Refine a crossing bracket to `(E*, ψ_{E*}, φ*)` by a secant/bisection
/// hybrid on `λ(E)`.
pub fn refine_e_star(
    sys: &NlsSystem,
    branch: &Branch,
    scan: &CrossingScan,
    cfg: &BifurcationConfig,
) -> Result<(StationaryState, GridFunction)> {
    let (e_lo, e_hi, index) = match scan {
        CrossingScan::Bracket { e_lo, e_hi, index } => (*e_lo, *e_hi, *index),
        CrossingScan::NoCrossing { at_e, .. } => return Err(CoreError::BracketLost(*at_e)),
    };
    let seed_lo = branch.points[index].state.phi.clone();
    let (_, l_lo0, _) = lambda_at(sys, e_lo, &seed_lo, &cfg.newton)?;
    let (state_hi, l_hi0, _) = lambda_at(sys, e_hi, &seed_lo, &cfg.newton)?;
    if !(l_lo0 > 0.0 && l_hi0 <= 0.0) {
        // The recomputed eigenvalues no longer bracket: grid artifact.
        return Err(CoreError::BracketLost(0.5 * (e_lo + e_hi)));
    }

    let mut lo = (e_lo, l_lo0);
    let mut hi = (e_hi, l_hi0);
    let mut best: Option<(StationaryState, f64, GridFunction)> = None;
    let mut seed = state_hi.phi;
    for _ in 0..80 {
        let width = hi.0 - lo.0;
        // Secant step, clamped into the middle of the bracket.
        let mut e_next = (lo.0 * hi.1 - hi.0 * lo.1) / (hi.1 - lo.1);
        let margin = 0.05 * width;
        if !(e_next > lo.0 + margin && e_next < hi.0 - margin) {
            e_next = 0.5 * (lo.0 + hi.0);
        }
        let (state, lam, phi_star) = lambda_at(sys, e_next, &seed, &cfg.newton)?;
        seed = state.phi.clone();
        let better = match &best {
            None => true,
            Some((_, l_b, _)) => lam.abs() < l_b.abs(),
        };
        if better {
            best = Some((state, lam, phi_star));
        }
        if lam.abs() <= cfg.crossing_tol || width <= cfg.bracket_tol {
            break;
        }
        if lam > 0.0 {
            lo = (e_next, lam);
        } else {
            hi = (e_next, lam);
        }
    }
    let (state, _, phi_star) = best.ok_or(CoreError::BracketLost(0.5 * (e_lo + e_hi)))?;
    Ok((state, phi_star))
}

/// Signed power `ψ^{q}` for real field values (`|ψ|^{q} sign(ψ)` when `q`
/// keeps odd symmetry, and `|ψ|^{q}` for the even powers used in `Q`).
fn signed_pow(v: f64, q: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.abs().powf(q) * v.signum()
    }
}

fn abs_pow(v: f64, q: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.abs().powf(q)
    }
}

/// Two estimates of `λ'(E*)`: the eigenvalue-perturbation integral
/// `1 + (2p+1) 2p σ_c ∫ ψ^{2p-1} φ*² (dψ/dE)` (primary) and a centered
/// finite difference of `λ(E)` across the crossing.
pub fn compute_lambda_prime(
    sys: &NlsSystem,
    state_star: &StationaryState,
    phi_star: &GridFunction,
    fd_step: f64,
    newton: &NewtonOptions,
) -> Result<(f64, f64, f64, f64)> {
    let p = sys.params().p;
    let sc = sys.params().sigma_eff();
    let e_star = state_star.e;

    // Route (ii): dψ/dE = -L₊^{-1} ψ on the even subspace.
    let lplus = sys.assemble_lplus(&state_star.phi, e_star);
    let dpsi_de = sys.solve_even_restricted(&lplus, &state_star.phi.scale(-1.0))?;
    let integral = quadrature_of(state_star.phi.grid(), |i| {
        let psi = state_star.phi.values()[i];
        let fs = phi_star.values()[i];
        signed_pow(psi, 2.0 * p - 1.0) * fs * fs * dpsi_de.values()[i]
    });
    let primary = 1.0 + (2.0 * p + 1.0) * 2.0 * p * sc * integral;

    // Route (i): centered finite difference, reusing the refined state as the
    // seed on both sides. Also provides N'(E*).
    let (state_m, lam_m, _) = lambda_at(sys, e_star - fd_step, &state_star.phi, newton)?;
    let (state_p, lam_p, _) = lambda_at(sys, e_star + fd_step, &state_star.phi, newton)?;
    let fd = (lam_p - lam_m) / (2.0 * fd_step);
    let n_prime = (state_p.mass - state_m.mass) / (2.0 * fd_step);

    let disc = ((fd - primary) / primary.abs().max(1e-300)).abs();
    Ok((primary, fd, disc, n_prime))
}

/// The pitchfork curvature `Q` (run-convention units):
/// `Q = -(2p(2p+1)σ_c²/λ') [ (2p-1)/(3σ_c) ⟨φ*², ψ^{2p-2}φ*²⟩
///      - 2p(2p+1) ⟨ψ^{2p-1}φ*², L*^{-1} ψ^{2p-1}φ*²⟩ ]`.
/// Returns `(Q, local term, solve term)`; the two quadrature terms are kept
/// for the report audit.
pub fn compute_q(
    sys: &NlsSystem,
    state_star: &StationaryState,
    phi_star: &GridFunction,
    lambda_prime: f64,
    nondegeneracy_tol: f64,
) -> Result<(f64, f64, f64)> {
    let p = sys.params().p;
    if p < 0.5 {
        return Err(CoreError::InvalidParams(format!(
            "pitchfork coefficients require p >= 1/2, got {p}"
        )));
    }
    if lambda_prime.abs() < nondegeneracy_tol {
        return Err(CoreError::DegenerateLambdaPrime(lambda_prime));
    }
    let sc = sys.params().sigma_eff();
    let grid = state_star.phi.grid().clone();

    let i1 = quadrature_of(&grid, |i| {
        let psi = state_star.phi.values()[i];
        let fs = phi_star.values()[i];
        abs_pow(psi, 2.0 * p - 2.0) * fs * fs * fs * fs
    });

    let rhs = GridFunction::from_fn(&grid, |_| 0.0);
    let mut rhs = rhs;
    for (i, v) in rhs.values_mut().iter_mut().enumerate() {
        let psi = state_star.phi.values()[i];
        let fs = phi_star.values()[i];
        *v = signed_pow(psi, 2.0 * p - 1.0) * fs * fs;
    }
    let lstar = sys.assemble_lplus(&state_star.phi, state_star.e);
    let w = sys.solve_on_complement(&lstar, &rhs, Some(phi_star))?;
    let i2 = inner(&rhs, &w);

    let term_local = (2.0 * p - 1.0) / (3.0 * sc) * i1;
    let term_solve = 2.0 * p * (2.0 * p + 1.0) * i2;
    let q = -(2.0 * p * (2.0 * p + 1.0) * sc * sc / lambda_prime) * (term_local - term_solve);
    Ok((q, term_local, term_solve))
}

/// `R = 2 λ'(E*)/Q + N'(E*)`, the limiting mass slope on the asymmetric
/// branch.
pub fn compute_r(q: f64, lambda_prime: f64, n_prime: f64) -> Result<f64> {
    if q == 0.0 || !q.is_finite() {
        return Err(CoreError::ZeroQ);
    }
    Ok(2.0 * lambda_prime / q + n_prime)
}

pub fn classify(q: f64, r: f64, lambda_prime: f64, nondegeneracy_tol: f64) -> Classification {
    if lambda_prime.abs() < nondegeneracy_tol {
        Classification::Degenerate
    } else if q < 0.0 {
        Classification::SubcriticalQ
    } else if r < 0.0 {
        Classification::SubcriticalR
    } else {
        Classification::Supercritical
    }
}

/// `a* = ⟨ψ_{0,s}, ψ_{E*}⟩` together with its large-separation estimate
/// `((E0-E1)/(2p (-σ_c) ‖ψ_{0,s}‖^{2p+2}))^{1/2p}` from the splitting and
/// the limiting slope `λ'(0,s) → -2p`.
pub fn compute_a_star(
    sys: &NlsSystem,
    state_star: &StationaryState,
    modes: &LinearModes,
) -> (f64, Option<f64>) {
    let a = inner(&modes.psi0, &state_star.phi);
    let est = modes.e1.map(|e1| {
        let p = sys.params().p;
        let sc = sys.params().sigma_eff();
        let x0 = quadrature_of(modes.psi0.grid(), |i| {
            let v = modes.psi0.values()[i];
            (v * v).powf(p + 1.0)
        });
        ((modes.e0 - e1) / (2.0 * p * (-sc) * x0)).powf(1.0 / (2.0 * p))
    });
    (a, est)
}

/// Full report at a refined crossing.
#[allow(clippy::too_many_arguments)]
pub fn build_report(
    sys: &NlsSystem,
    state_star: StationaryState,
    phi_star: GridFunction,
    initial_bracket_width: f64,
    modes: Option<&LinearModes>,
    cfg: &BifurcationConfig,
) -> Result<BifurcationReport> {
    let fd_step = cfg.fd_step.unwrap_or(0.25 * initial_bracket_width.max(1e-9));
    let (lambda_prime, lambda_prime_fd, disc, n_prime) =
        compute_lambda_prime(sys, &state_star, &phi_star, fd_step, &cfg.newton)?;
    let (q, q_term_local, q_term_solve) =
        compute_q(sys, &state_star, &phi_star, lambda_prime, cfg.nondegeneracy_tol)?;
    let r = compute_r(q, lambda_prime, n_prime)?;
    let (a_star, a_star_asymptotic) = match modes {
        Some(m) => {
            let (a, est) = compute_a_star(sys, &state_star, m);
            (Some(a), est)
        }
        None => (None, None),
    };
    Ok(BifurcationReport {
        e_star: state_star.e,
        state_star,
        phi_star,
        lambda_prime,
        lambda_prime_fd,
        lambda_prime_discrepancy: disc,
        lambda_prime_inconsistent: disc > 0.05,
        q,
        q_term_local,
        q_term_solve,
        r,
        n_prime,
        a_star,
        a_star_asymptotic,
        classification: classify(q, r, lambda_prime, cfg.nondegeneracy_tol),
    })
}

/// One asymmetric state obtained by stepping off the symmetric branch with
/// seed `ψ* + direction·a0·φ*` at `E = E* + Q a0²/2`.
pub fn branch_switch_state(
    sys: &NlsSystem,
    report: &BifurcationReport,
    a0: f64,
    direction: f64,
) -> Result<StationaryState> {
    let e = report.e_star + 0.5 * report.q * a0 * a0;
    let seed = report.state_star.phi.add_scaled(&report.phi_star, direction * a0);
    let opts = NewtonOptions {
        symmetric_constraint: false,
        // The crossing direction is genuinely near-singular here; damping
        // handles it.
        jacobian_guard: 0.0,
        ..NewtonOptions::default()
    };
    let state = newton_solve(sys, &seed, e, &opts)?;
    let asym = state.phi.antisymmetric_part().l2_norm();
    if asym <= 1e-8 * state.mass.sqrt() {
        return Err(CoreError::FellBackToSymmetric(asym / state.mass.sqrt().max(1e-300)));
    }
    Ok(state)
}

/// Sweep of switch amplitudes for the normal-form validation: returns
/// `(a_measured, E)` pairs, where `a_measured = ⟨φ*, φ⟩`.
pub fn pitchfork_sweep(
    sys: &NlsSystem,
    report: &BifurcationReport,
    a_values: &[f64],
    direction: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(a_values.len());
    for &a0 in a_values {
        let state = branch_switch_state(sys, report, a0, direction)?;
        let a_meas = inner(&report.phi_star, &state.phi);
        out.push((a_meas, state.e));
    }
    Ok(out)
}

/// Least-squares slope of `E - E*` against `a²` through the origin; the
/// normal form predicts `Q/2`.
pub fn fit_quadratic_law(sweep: &[(f64, f64)], e_star: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(a, e) in sweep {
        let a2 = a * a;
        num += (e - e_star) * a2;
        den += a2 * a2;
    }
    num / den
}

/// Switch onto an asymmetric branch and continue it toward `e_target`
/// (increasing for `Q > 0`, decreasing for `Q < 0`).
pub fn branch_switch(
    sys: &NlsSystem,
    report: &BifurcationReport,
    a0: f64,
    direction: f64,
    e_target: f64,
    controls: &ContinuationControls,
    label: &str,
) -> Result<Branch> {
    let state = branch_switch_state(sys, report, a0, direction)?;
    let mut controls = *controls;
    controls.newton.symmetric_constraint = false;
    controls.newton.jacobian_guard = 0.0;
    let mut branch =
        continue_branch(sys, state, e_target, &controls, label, Provenance::FromBranchSwitch)?;
    // Label by the sign of the switch direction, not the (possibly tiny)
    // center-of-mass of the first point.
    branch.symmetry = if direction >= 0.0 {
        BranchSymmetry::AsymmetricPlus
    } else {
        BranchSymmetry::AsymmetricMinus
    };
    Ok(branch)
}

/// Key-value text record of a report, including both `λ'` estimates and both
/// `Q` integral terms for audit.
pub fn report_record(report: &BifurcationReport, sys: &NlsSystem) -> String {
    let p = sys.params();
    let mut s = String::new();
    s.push_str(&format!("E_star = {:.12e}\n", report.e_star));
    s.push_str(&format!("lambda_prime = {:.12e}\n", report.lambda_prime));
    s.push_str(&format!("lambda_prime_fd = {:.12e}\n", report.lambda_prime_fd));
    s.push_str(&format!(
        "lambda_prime_rel_discrepancy = {:.6e}\n",
        report.lambda_prime_discrepancy
    ));
    s.push_str(&format!("lambda_prime_inconsistent = {}\n", report.lambda_prime_inconsistent));
    s.push_str(&format!("Q = {:.12e}\n", report.q));
    s.push_str(&format!("Q_term_local = {:.12e}\n", report.q_term_local));
    s.push_str(&format!("Q_term_solve = {:.12e}\n", report.q_term_solve));
    s.push_str(&format!("R = {:.12e}\n", report.r));
    s.push_str(&format!("N_prime = {:.12e}\n", report.n_prime));
    if let Some(a) = report.a_star {
        s.push_str(&format!("a_star = {:.12e}\n", a));
    }
    if let Some(a) = report.a_star_asymptotic {
        s.push_str(&format!("a_star_asymptotic = {:.12e}\n", a));
    }
    s.push_str(&format!("normalization = {}\n", p.normalization.name()));
    s.push_str(&format!("sigma = {}\n", p.sigma));
    s.push_str(&format!("p = {}\n", p.p));
    s.push_str(&format!("classification = {}\n", report.classification.name()));
    let rationale = match report.classification {
        Classification::Supercritical => "Q > 0 and R > 0: asymmetric branch opens toward larger E with increasing mass",
        Classification::SubcriticalR => "Q > 0 and R < 0: asymmetric branch opens toward larger E with decreasing mass",
        Classification::SubcriticalQ => "Q < 0: asymmetric branch opens toward smaller E",
        Classification::Degenerate => "lambda'(E*) within tolerance of zero: normal form unreliable",
    };
    s.push_str(&format!("rationale = {rationale}\n"));
    s
}
