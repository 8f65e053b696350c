//! Natural-parameter continuation of stationary-state branches in `E`, with
//! adaptive steps, per-point spectral data for `L₊` and `L₋`, finite
//! difference derivatives along the branch, and the slope/spectral stability
//! classification.

use crate::error::{CoreError, Result};
use crate::grid::{inner, GridFunction};
use crate::linalg::norm2;
use crate::schrodinger::{NlsSystem, OperatorTag, Parity};
use crate::stationary::{newton_solve_detailed, NewtonOptions, StationaryState, Symmetry};

/// One accepted continuation point: the state plus its linearization data.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub state: StationaryState,
    /// Two lowest eigenvalues of `L₊` (ground + critical), ordered.
    pub lplus_eigenvalues: Vec<f64>,
    /// Count of strictly negative `L₊` eigenvalues (full operator).
    pub lplus_n_negative: usize,
    /// Lowest eigenvalue of `L₋` (should be ~0: `L₋φ = 0`).
    pub lminus_lowest: f64,
    /// |correlation| of the lowest `L₋` eigenfunction with `φ/‖φ‖`.
    pub lminus_correlation: f64,
    pub dn_de: Option<f64>,
    pub dlambda_de: Option<f64>,
    /// Relative discrepancy between `∂_E ψ` by finite differences and by the
    /// even-restricted solve of `L₊ w = -ψ`.
    pub dpsi_de_discrepancy: Option<f64>,
    /// Relative discrepancy of `d/dE ‖ψ‖^{2p+2}` against `(p+1)/(-σ_c p) N`.
    pub dnorm2p2_identity_discrepancy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSymmetry {
    Even,
    AsymmetricPlus,
    AsymmetricMinus,
    Odd,
}

impl BranchSymmetry {
    pub fn name(self) -> &'static str {
        match self {
            BranchSymmetry::Even => "even",
            BranchSymmetry::AsymmetricPlus => "asymmetric_plus",
            BranchSymmetry::AsymmetricMinus => "asymmetric_minus",
            BranchSymmetry::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FromLinearMode,
    FromBranchSwitch,
    FromSolitonSeed,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::FromLinearMode => "from_linear_mode",
            Provenance::FromBranchSwitch => "from_branch_switch",
            Provenance::FromSolitonSeed => "from_soliton_seed",
        }
    }
}

/// An ordered branch of stationary states sharing a symmetry class.
#[derive(Debug, Clone)]
pub struct Branch {
    pub label: String,
    pub symmetry: BranchSymmetry,
    pub points: Vec<BranchPoint>,
    pub provenance: Provenance,
}

impl Branch {
    pub fn lambda_values(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.lplus_eigenvalues.len() > 1)
            .map(|p| (p.state.e, p.lplus_eigenvalues[1]))
            .collect()
    }
}

/// Adaptive stepping controls for one branch trace.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationControls {
    pub de_init: f64,
    pub de_max: f64,
    pub de_min: f64,
    pub newton: NewtonOptions,
    /// Step-to-step growth of `‖Δφ‖/ΔE` beyond which the step is retried
    /// smaller (branch-jump detector). `None` disables the check.
    pub continuity_factor: Option<f64>,
    /// Clamp `dE <= |λ|/(2|λ'|)` when the critical eigenvalue heads to zero,
    /// so points land on both sides of a crossing.
    pub crossing_slowdown: bool,
}

impl Default for ContinuationControls {
    fn default() -> Self {
        Self {
            de_init: 0.03125,
            de_max: 0.25,
            de_min: 1e-7,
            newton: NewtonOptions::default(),
            continuity_factor: Some(25.0),
            crossing_slowdown: true,
        }
    }
}

impl ContinuationControls {
    pub fn symmetric() -> Self {
        Self { newton: NewtonOptions::symmetric(), ..Self::default() }
    }
}

/// Compute the spectral payload of one accepted state. Even states use the
/// parity reductions (the critical eigenvalue is the lowest odd one); other
/// states use the full operator.
pub fn spectral_point(sys: &NlsSystem, state: StationaryState) -> Result<BranchPoint> {
    let e = state.e;
    let lplus = sys.assemble_lplus(&state.phi, e);
    let lminus = sys.assemble_lminus(&state.phi, e);
    let (lp_vals, n_neg) = if state.symmetry == Symmetry::Even {
        let even = sys.lowest_eigenpairs(&lplus, 1, Parity::Even, OperatorTag::Lplus, e)?;
        let odd = sys.lowest_eigenpairs(&lplus, 1, Parity::Odd, OperatorTag::Lplus, e)?;
        (vec![even.eigenvalues[0], odd.eigenvalues[0]], even.n_negative)
    } else {
        let spec = sys.lowest_eigenpairs(&lplus, 2, Parity::Any, OperatorTag::Lplus, e)?;
        (spec.eigenvalues.clone(), spec.n_negative)
    };
    let lm = sys.lowest_eigenpairs(&lminus, 1, Parity::Any, OperatorTag::Lminus, e)?;
    let corr = if state.mass > 0.0 {
        (inner(&lm.eigenfunctions[0], &state.phi) / state.mass.sqrt()).abs()
    } else {
        0.0
    };
    Ok(BranchPoint {
        state,
        lplus_eigenvalues: lp_vals,
        lplus_n_negative: n_neg,
        lminus_lowest: lm.eigenvalues[0],
        lminus_correlation: corr,
        dn_de: None,
        dlambda_de: None,
        dpsi_de_discrepancy: None,
        dnorm2p2_identity_discrepancy: None,
    })
}

/// Trace a branch from a converged state toward `e_target` with adaptive
/// natural-parameter steps. Fails with `StepUnderflow` when the step control
/// collapses and `StateCollapsed` when the iterates fall onto the zero
/// solution mid-branch.
pub fn continue_branch(
    sys: &NlsSystem,
    start: StationaryState,
    e_target: f64,
    controls: &ContinuationControls,
    label: &str,
    provenance: Provenance,
) -> Result<Branch> {
    let (branch, failure) = try_continue_branch(sys, start, e_target, controls, label, provenance);
    match failure {
        None => Ok(branch),
        Some(err) => Err(err),
    }
}

/// Like [`continue_branch`] but always hands back the points accepted so
/// far together with the failure, if any.
pub fn try_continue_branch(
    sys: &NlsSystem,
    start: StationaryState,
    e_target: f64,
    controls: &ContinuationControls,
    label: &str,
    provenance: Provenance,
) -> (Branch, Option<CoreError>) {
    let symmetry = match start.symmetry {
        Symmetry::Even => BranchSymmetry::Even,
        Symmetry::Odd => BranchSymmetry::Odd,
        Symmetry::None => {
            if start.x_cm >= 0.0 {
                BranchSymmetry::AsymmetricPlus
            } else {
                BranchSymmetry::AsymmetricMinus
            }
        }
    };
    let mut branch =
        Branch { label: label.to_string(), symmetry, points: Vec::new(), provenance };

    let dir = if e_target > start.e {
        1.0
    } else if e_target < start.e {
        -1.0
    } else {
        // Target indistinguishable from the start at this magnitude.
        return (branch, Some(CoreError::StepUnderflow { e: start.e, de_min: controls.de_min }));
    };
    let first = match spectral_point(sys, start) {
        Ok(p) => p,
        Err(e) => return (branch, Some(e)),
    };
    branch.points.push(first);

    let mut de = controls.de_init.min(controls.de_max);
    let mut prev_rate: Option<f64> = None;

    loop {
        let last_e = branch.points.last().unwrap().state.e;
        if (e_target - last_e) * dir <= 0.0 {
            break;
        }
        let step = de.min((e_target - last_e) * dir);
        let e_next = last_e + dir * step;
        if e_next == last_e {
            return (
                branch,
                Some(CoreError::StepUnderflow { e: last_e, de_min: controls.de_min }),
            );
        }

        // Secant predictor when two points are available.
        let np = branch.points.len();
        let seed = if np >= 2 {
            let phi_i = &branch.points[np - 1].state.phi;
            let phi_h = &branch.points[np - 2].state.phi;
            let e_i = branch.points[np - 1].state.e;
            let e_h = branch.points[np - 2].state.e;
            let t = (e_next - e_i) / (e_i - e_h);
            phi_i.add_scaled(&phi_i.add_scaled(phi_h, -1.0), t)
        } else {
            branch.points[np - 1].state.phi.clone()
        };

        let solved = newton_solve_detailed(sys, &seed, e_next, &controls.newton);
        let (state, info) = match solved {
            Ok(ok) => ok,
            Err(CoreError::DivergedToZero) => {
                return (branch, Some(CoreError::StateCollapsed(e_next)));
            }
            Err(_) => {
                de *= 0.5;
                if de < controls.de_min {
                    return (
                        branch,
                        Some(CoreError::StepUnderflow { e: last_e, de_min: controls.de_min }),
                    );
                }
                continue;
            }
        };

        // Branch-jump detector: compare the state-change rate to history.
        let dphi = norm2(
            &state
                .phi
                .values()
                .iter()
                .zip(branch.points[np - 1].state.phi.values())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        ) * sys.grid().dx().sqrt();
        let rate = dphi / step;
        if let (Some(factor), Some(pr)) = (controls.continuity_factor, prev_rate) {
            if rate > factor * pr && dphi > 1e-6 * state.mass.sqrt().max(1e-12) {
                de *= 0.5;
                if de < controls.de_min {
                    return (
                        branch,
                        Some(CoreError::StepUnderflow { e: last_e, de_min: controls.de_min }),
                    );
                }
                continue;
            }
        }
        prev_rate = Some(rate.max(1e-300));

        let point = match spectral_point(sys, state) {
            Ok(p) => p,
            Err(e) => return (branch, Some(e)),
        };
        branch.points.push(point);

        // Step adaptation on Newton effort.
        if info.iterations <= 3 {
            de = (de * 1.3).min(controls.de_max);
        } else if info.iterations >= 8 {
            de *= 0.7;
        }
        // Land points on both sides of an imminent crossing.
        if controls.crossing_slowdown && branch.points.len() >= 2 {
            let n = branch.points.len();
            let (e1, l1) = (branch.points[n - 2].state.e, branch.points[n - 2].lplus_eigenvalues[1]);
            let (e2, l2) = (branch.points[n - 1].state.e, branch.points[n - 1].lplus_eigenvalues[1]);
            let slope = (l2 - l1) / (e2 - e1);
            if slope * dir < 0.0 && l2 * dir.signum() != 0.0 && l2 > 0.0 {
                let to_zero = (l2 / (2.0 * slope)).abs();
                if to_zero < de {
                    de = to_zero.max(controls.de_min * 4.0);
                }
            }
        }
    }
    (branch, None)
}

/// Fill `dN/dE`, `dλ/dE` by centered nonuniform finite differences and run
/// the two-route derivative cross-checks at every interior point:
/// `∂_E ψ` against the even-restricted solve of `L₊ w = -ψ`, and
/// `d/dE ‖ψ‖^{2p+2}` against `(p+1)/(-σ_c p) · N`.
pub fn branch_derivatives(sys: &NlsSystem, branch: &mut Branch) -> Result<()> {
    let n = branch.points.len();
    if n < 3 {
        return Err(CoreError::InvalidParams(
            "branch derivatives need at least 3 points".into(),
        ));
    }
    let es: Vec<f64> = branch.points.iter().map(|p| p.state.e).collect();
    let ns: Vec<f64> = branch.points.iter().map(|p| p.state.mass).collect();
    let ls: Vec<f64> = branch.points.iter().map(|p| p.lplus_eigenvalues[1]).collect();
    let xs: Vec<f64> = branch.points.iter().map(|p| p.state.norm_2p2).collect();

    let diff = |f: &[f64], i: usize| -> f64 {
        if i == 0 {
            (f[1] - f[0]) / (es[1] - es[0])
        } else if i == n - 1 {
            (f[n - 1] - f[n - 2]) / (es[n - 1] - es[n - 2])
        } else {
            let hl = es[i] - es[i - 1];
            let hr = es[i + 1] - es[i];
            (hl * hl * f[i + 1] - hr * hr * f[i - 1] + (hr * hr - hl * hl) * f[i])
                / (hl * hr * (hl + hr))
        }
    };

    let p = sys.params().p;
    let sc = sys.params().sigma_eff();
    for i in 0..n {
        let dn = diff(&ns, i);
        let dl = diff(&ls, i);
        let dxnorm = diff(&xs, i);
        branch.points[i].dn_de = Some(dn);
        branch.points[i].dlambda_de = Some(dl);
        if i > 0 && i < n - 1 {
            // Identity d/dE ||psi||^{2p+2} = (p+1)/(-sigma_c p) N.
            let rhs = (p + 1.0) / (-sc * p) * ns[i];
            let rel = ((dxnorm - rhs) / rhs.abs().max(1e-300)).abs();
            branch.points[i].dnorm2p2_identity_discrepancy = Some(rel);
            // Two routes to ∂_E ψ (even branches only; the finite-difference
            // route needs like-parity neighbors).
            if branch.symmetry == BranchSymmetry::Even {
                let phi_m = &branch.points[i - 1].state.phi;
                let phi_0 = &branch.points[i].state.phi;
                let phi_p = &branch.points[i + 1].state.phi;
                let hl = es[i] - es[i - 1];
                let hr = es[i + 1] - es[i];
                let den = hl * hr * (hl + hr);
                let fd = phi_p
                    .scale(hl * hl / den)
                    .add_scaled(phi_m, -hr * hr / den)
                    .add_scaled(phi_0, (hr * hr - hl * hl) / den);
                let lplus =
                    sys.assemble_lplus(&branch.points[i].state.phi, branch.points[i].state.e);
                let w = sys
                    .solve_even_restricted(&lplus, &branch.points[i].state.phi.scale(-1.0))?;
                let num = fd.add_scaled(&w, -1.0).l2_norm();
                let den = w.l2_norm().max(1e-300);
                branch.points[i].dpsi_de_discrepancy = Some(num / den);
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassExtremum {
    Maximum,
    Minimum,
}

/// Refine the location of a `dN/dE` sign change (a mass extremum along the
/// branch) by golden-section search with direct re-solves seeded from the
/// nearest accepted state. Returns `(E, N)` at the extremum.
pub fn refine_mass_extremum(
    sys: &NlsSystem,
    branch: &Branch,
    which: MassExtremum,
    newton: &NewtonOptions,
) -> Result<(f64, f64)> {
    let pts = &branch.points;
    if pts.len() < 3 {
        return Err(CoreError::InvalidParams("need at least 3 points".into()));
    }
    let better = |a: f64, b: f64| match which {
        MassExtremum::Maximum => a > b,
        MassExtremum::Minimum => a < b,
    };
    let mut i_best = 0;
    for (i, p) in pts.iter().enumerate() {
        if better(p.state.mass, pts[i_best].state.mass) {
            i_best = i;
        }
    }
    if i_best == 0 || i_best == pts.len() - 1 {
        return Err(CoreError::InvalidParams(
            "mass extremum sits at the branch end; extend the sweep".into(),
        ));
    }
    let mut lo = pts[i_best - 1].state.e;
    let mut hi = pts[i_best + 1].state.e;
    let mut seed = pts[i_best].state.phi.clone();
    let mass_at = |e: f64, seed: &GridFunction| -> Result<(f64, GridFunction)> {
        let st = crate::stationary::newton_solve(sys, seed, e, newton)?;
        Ok((st.mass, st.phi))
    };
    let gr = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let (mut f1, s1) = mass_at(x1, &seed)?;
    seed = s1;
    let (mut f2, s2) = mass_at(x2, &seed)?;
    seed = s2;
    for _ in 0..60 {
        if hi - lo < 1e-9 * hi.abs().max(1.0) {
            break;
        }
        if better(f1, f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            let (f, s) = mass_at(x1, &seed)?;
            f1 = f;
            seed = s;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            let (f, s) = mass_at(x2, &seed)?;
            f2 = f;
            seed = s;
        }
    }
    let e = 0.5 * (lo + hi);
    let (n, _) = mass_at(e, &seed)?;
    Ok((e, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityReason {
    TwoNegativeDirections,
    SlopePositive,
    SlopeNegative,
    SlopeBelowTolerance,
    NoNegativeDirections,
}

impl StabilityReason {
    pub fn name(self) -> &'static str {
        match self {
            StabilityReason::TwoNegativeDirections => "two_negative_directions",
            StabilityReason::SlopePositive => "slope_positive",
            StabilityReason::SlopeNegative => "slope_negative",
            StabilityReason::SlopeBelowTolerance => "slope_below_tolerance",
            StabilityReason::NoNegativeDirections => "no_negative_directions",
        }
    }
}

/// Orbital-stability classification from the `L₊` negative-direction count
/// and the mass slope `dN/dE` (slope criterion when exactly one negative
/// direction exists).
pub fn stability_classify(
    point: &BranchPoint,
    slope_tol: f64,
) -> Result<(Stability, StabilityReason)> {
    if point.lplus_eigenvalues.len() < 2 {
        return Err(CoreError::MissingSpectrum);
    }
    if point.lplus_n_negative >= 2 {
        return Ok((Stability::Unstable, StabilityReason::TwoNegativeDirections));
    }
    if point.lplus_n_negative == 0 {
        return Ok((Stability::Stable, StabilityReason::NoNegativeDirections));
    }
    let dn = point.dn_de.ok_or(CoreError::MissingSpectrum)?;
    if dn.abs() < slope_tol {
        Ok((Stability::Indeterminate, StabilityReason::SlopeBelowTolerance))
    } else if dn > 0.0 {
        Ok((Stability::Stable, StabilityReason::SlopePositive))
    } else {
        Ok((Stability::Unstable, StabilityReason::SlopeNegative))
    }
}

/// CSV text of a branch (deterministic fixed-precision formatting). Every
/// row carries the stationarity-identity residual so emitted data is
/// self-auditing.
pub fn branch_to_csv(branch: &Branch, slope_tol: f64) -> String {
    let mut out = String::from(
        "E,N,norm_2p2,grad_norm2,energy,lambda0,lambda1,lminus0,x_cm,residual,pohozaev_residual,stability,spstat_residual\n",
    );
    for p in &branch.points {
        let st = &p.state;
        let stab = match stability_classify(p, slope_tol) {
            Ok((s, r)) => match s {
                Stability::Stable => format!("stable({})", r.name()),
                Stability::Unstable => format!("unstable({})", r.name()),
                Stability::Indeterminate => format!("indeterminate({})", r.name()),
            },
            Err(_) => "unclassified".to_string(),
        };
        let l0 = p.lplus_eigenvalues.first().copied().unwrap_or(f64::NAN);
        let l1 = p.lplus_eigenvalues.get(1).copied().unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.12e}\n",
            st.e,
            st.mass,
            st.norm_2p2,
            st.grad_norm2,
            st.energy,
            l0,
            l1,
            p.lminus_lowest,
            st.x_cm,
            st.residual_norm,
            st.pohozaev_residual,
            stab,
            st.spstat_residual,
        ));
    }
    out
}

/// Sidecar metadata record for a branch CSV.
pub fn branch_metadata(branch: &Branch, sys: &NlsSystem) -> String {
    let grid = sys.grid();
    let params = sys.params();
    let mut s = String::new();
    s.push_str(&format!("label = {}\n", branch.label));
    s.push_str(&format!("symmetry = {}\n", branch.symmetry.name()));
    s.push_str(&format!("provenance = {}\n", branch.provenance.name()));
    s.push_str(&format!("potential = {}\n", sys.potential().kind_name()));
    if let crate::potentials::Potential::DoubleWellSech2 { s: sep } = sys.potential() {
        s.push_str(&format!("separation = {sep}\n"));
    }
    s.push_str(&format!("p = {}\n", params.p));
    s.push_str(&format!("sigma = {}\n", params.sigma));
    s.push_str(&format!("normalization = {}\n", params.normalization.name()));
    s.push_str(&format!("grid_half_width = {}\n", grid.half_width()));
    s.push_str(&format!("grid_n = {}\n", grid.n()));
    s.push_str(&format!("grid_dx = {}\n", grid.dx()));
    s.push_str(&format!("stencil_order = {}\n", sys.order()));
    s.push_str(&format!("points = {}\n", branch.points.len()));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridFunction};
    use crate::potentials::{solve_linear_modes, Potential};
    use crate::schrodinger::{Normalization, ProblemParams};
    use crate::stationary::{diagnostics, newton_solve, seed_from_linear, seed_soliton_at};

    fn dw_system(s: f64, p: f64, dx: f64) -> NlsSystem {
        let grid = Grid::from_spacing(20.0, dx).unwrap();
        let pot = Potential::double_well(s).unwrap();
        let params = ProblemParams::new(-2.0, p, Normalization::Section5).unwrap();
        NlsSystem::new(&grid, &pot, params, 4).unwrap()
    }

    fn start_state(sys: &NlsSystem, de: f64) -> StationaryState {
        let modes = solve_linear_modes(
            sys.potential(),
            sys.grid(),
            1,
            sys.params().normalization,
            sys.order(),
        )
        .unwrap();
        let e = modes.e0 + de;
        let seed = seed_from_linear(sys, &modes, e).unwrap();
        newton_solve(sys, &seed, e, &NewtonOptions::symmetric()).unwrap()
    }

    #[test]
    fn traces_symmetric_branch_with_clean_spectral_data() {
        let sys = dw_system(0.7, 1.0, 0.025);
        let start = start_state(&sys, 0.05);
        let controls = ContinuationControls {
            de_init: 0.02,
            de_max: 0.1,
            ..ContinuationControls::symmetric()
        };
        let branch = continue_branch(&sys, start, 2.0, &controls, "sym", Provenance::FromLinearMode)
            .unwrap();
        assert!(branch.points.len() >= 10);
        let mut prev_e = f64::NEG_INFINITY;
        for p in &branch.points {
            assert!(p.state.e > prev_e);
            prev_e = p.state.e;
            // Ground-state focusing branch below the crossing.
            assert_eq!(p.lplus_n_negative, 1);
            assert!(p.lplus_eigenvalues[0] < 0.0);
            assert!(p.lplus_eigenvalues[1] > 0.0);
            // L₋ has its kernel at the state.
            assert!(p.lminus_lowest.abs() < 1e-7, "lminus {}", p.lminus_lowest);
            assert!(p.lminus_correlation > 1.0 - 1e-6);
            // Identity suite.
            assert!(p.state.spstat_residual <= 1e-6 * (p.state.e * p.state.mass).abs());
            assert!(p.state.pohozaev_residual <= 1e-4 * (p.state.e * p.state.mass).abs());
        }
        assert_eq!(branch.symmetry, BranchSymmetry::Even);
    }

    #[test]
    fn derivative_identities_hold_mid_branch() {
        let sys = dw_system(0.7, 1.0, 0.025);
        let start = start_state(&sys, 0.05);
        // Small steps: the finite-difference side of the two-route checks
        // carries an O(dE²) truncation error.
        let controls = ContinuationControls {
            de_init: 0.01,
            de_max: 0.025,
            ..ContinuationControls::symmetric()
        };
        let mut branch =
            continue_branch(&sys, start, 1.5, &controls, "sym", Provenance::FromLinearMode)
                .unwrap();
        branch_derivatives(&sys, &mut branch).unwrap();
        // Mid-branch only: near the onset the branch curvature in E blows
        // up like (E-E0)^{-2} and the finite-difference route degrades.
        let n = branch.points.len();
        for p in &branch.points[n / 3..2 * n / 3] {
            assert!(
                p.dnorm2p2_identity_discrepancy.unwrap() <= 1e-3,
                "dnormp identity discrepancy {}",
                p.dnorm2p2_identity_discrepancy.unwrap()
            );
            assert!(
                p.dpsi_de_discrepancy.unwrap() <= 1e-3,
                "dpsi discrepancy {}",
                p.dpsi_de_discrepancy.unwrap()
            );
        }
    }

    #[test]
    fn collinear_mass_data_gives_exact_slope() {
        // Synthetic 3-point branch with N affine in E: the nonuniform
        // centered difference recovers the slope exactly.
        let sys = dw_system(0.7, 1.0, 0.1);
        let grid = sys.grid().clone();
        let mk = |e: f64, mass_val: f64| {
            let phi = GridFunction::from_fn(&grid, |x| mass_val.sqrt() * (-x * x).exp());
            let mut st = diagnostics(&sys, phi, e, 0.0);
            st.mass = 2.0 + 3.0 * e; // collinear
            st.norm_2p2 = 1.0;
            BranchPoint {
                state: st,
                lplus_eigenvalues: vec![-1.0, 0.5],
                lplus_n_negative: 1,
                lminus_lowest: 0.0,
                lminus_correlation: 1.0,
                dn_de: None,
                dlambda_de: None,
                dpsi_de_discrepancy: None,
                dnorm2p2_identity_discrepancy: None,
            }
        };
        let mut branch = Branch {
            label: "synthetic".into(),
            symmetry: BranchSymmetry::AsymmetricPlus,
            points: vec![mk(1.0, 5.0), mk(1.13, 5.39), mk(1.31, 5.93)],
            provenance: Provenance::FromSolitonSeed,
        };
        branch_derivatives(&sys, &mut branch).unwrap();
        for p in &branch.points {
            assert!((p.dn_de.unwrap() - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn step_underflow_on_degenerate_target() {
        let sys = dw_system(0.7, 1.0, 0.05);
        let start = start_state(&sys, 0.05);
        let e = start.e;
        let err = continue_branch(
            &sys,
            start,
            e + 1e-17,
            &ContinuationControls::symmetric(),
            "degenerate",
            Provenance::FromLinearMode,
        );
        assert!(matches!(err, Err(CoreError::StepUnderflow { .. })));
    }

    #[test]
    fn stability_classification_rules() {
        let sys = dw_system(0.7, 1.0, 0.1);
        let grid = sys.grid().clone();
        let phi = GridFunction::from_fn(&grid, |x| (-x * x).exp());
        let st = diagnostics(&sys, phi, 1.0, 0.0);
        let mut point = BranchPoint {
            state: st,
            lplus_eigenvalues: vec![-1.0, -0.1],
            lplus_n_negative: 2,
            lminus_lowest: 0.0,
            lminus_correlation: 1.0,
            dn_de: Some(1.0),
            dlambda_de: None,
            dpsi_de_discrepancy: None,
            dnorm2p2_identity_discrepancy: None,
        };
        assert_eq!(
            stability_classify(&point, 1e-9).unwrap(),
            (Stability::Unstable, StabilityReason::TwoNegativeDirections)
        );
        point.lplus_n_negative = 1;
        point.lplus_eigenvalues = vec![-1.0, 0.1];
        assert_eq!(
            stability_classify(&point, 1e-9).unwrap(),
            (Stability::Stable, StabilityReason::SlopePositive)
        );
        point.dn_de = Some(-0.3);
        assert_eq!(
            stability_classify(&point, 1e-9).unwrap(),
            (Stability::Unstable, StabilityReason::SlopeNegative)
        );
        point.dn_de = Some(1e-12);
        assert_eq!(stability_classify(&point, 1e-9).unwrap().0, Stability::Indeterminate);
        point.lplus_eigenvalues = vec![-1.0];
        assert!(matches!(stability_classify(&point, 1e-9), Err(CoreError::MissingSpectrum)));
    }

    #[test]
    fn reflection_conjugate_traces_mirror() {
        // Asymmetric localized branch in a double well: continuing from the
        // reflected start yields the nodewise-reflected branch.
        let grid = Grid::from_spacing(12.0, 0.02).unwrap();
        let pot = Potential::double_well(2.0).unwrap();
        let params = ProblemParams::new(-1.0, 1.0, Normalization::Section1).unwrap();
        let sys = NlsSystem::new(&grid, &pot, params, 4).unwrap();
        let xm = pot.well_minimum().unwrap();
        let e0 = 30.0;
        let seed = seed_soliton_at(&sys, xm, e0).unwrap();
        let opts = NewtonOptions::default();
        let plus = newton_solve(&sys, &seed, e0, &opts).unwrap();
        let minus_seed = plus.phi.reflect();
        let minus = newton_solve(&sys, &minus_seed, e0, &opts).unwrap();
        let controls = ContinuationControls {
            de_init: 0.5,
            de_max: 2.0,
            newton: opts,
            ..ContinuationControls::default()
        };
        let bp = continue_branch(&sys, plus, 38.0, &controls, "p", Provenance::FromSolitonSeed)
            .unwrap();
        let bm = continue_branch(&sys, minus, 38.0, &controls, "m", Provenance::FromSolitonSeed)
            .unwrap();
        assert_eq!(bp.symmetry, BranchSymmetry::AsymmetricPlus);
        assert_eq!(bm.symmetry, BranchSymmetry::AsymmetricMinus);
        assert_eq!(bp.points.len(), bm.points.len());
        for (a, b) in bp.points.iter().zip(&bm.points) {
            assert!((a.state.x_cm + b.state.x_cm).abs() < 1e-8);
            let refl = b.state.phi.reflect();
            let diff = a.state.phi.add_scaled(&refl, -1.0).linf();
            assert!(diff < 1e-7, "mirror mismatch {diff}");
        }
    }

    #[test]
    fn csv_has_expected_columns_and_determinism() {
        let sys = dw_system(0.7, 1.0, 0.05);
        let start = start_state(&sys, 0.05);
        let controls = ContinuationControls {
            de_init: 0.05,
            de_max: 0.1,
            ..ContinuationControls::symmetric()
        };
        let mut branch =
            continue_branch(&sys, start, 0.6, &controls, "sym", Provenance::FromLinearMode)
                .unwrap();
        branch_derivatives(&sys, &mut branch).unwrap();
        let csv1 = branch_to_csv(&branch, 1e-9);
        let csv2 = branch_to_csv(&branch, 1e-9);
        assert_eq!(csv1, csv2);
        let header = csv1.lines().next().unwrap();
        assert_eq!(
            header,
            "E,N,norm_2p2,grad_norm2,energy,lambda0,lambda1,lminus0,x_cm,residual,pohozaev_residual,stability,spstat_residual"
        );
        assert_eq!(csv1.lines().count(), branch.points.len() + 1);
        let meta = branch_metadata(&branch, &sys);
        assert!(meta.contains("normalization = section5"));
        assert!(meta.contains("separation = 0.7"));
    }
}
