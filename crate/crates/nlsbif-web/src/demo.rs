//! Pure-Rust demo backend (native-testable); the wasm exports are thin
//! wrappers around these functions.

use nlsbif_core::bifurcation::{
    branch_switch, build_report, locate_crossing, refine_e_star, BifurcationConfig, CrossingScan,
};
use nlsbif_core::continuation::{continue_branch, Branch, ContinuationControls, Provenance};
use nlsbif_core::grid::Grid;
use nlsbif_core::potentials::{solve_linear_modes, Potential};
use nlsbif_core::schrodinger::{NlsSystem, Normalization, ProblemParams};
use nlsbif_core::stationary::{newton_solve, seed_from_linear, NewtonOptions};
use serde::Serialize;

// Interactive-latency grid: coarse but fine enough that the crossing
// structure matches the production runs to a few percent.
const DX: f64 = 0.05;
const HALF_WIDTH: f64 = 16.0;
const ORDER: usize = 4;

#[derive(Serialize)]
pub struct BranchData {
    pub e: Vec<f64>,
    pub n: Vec<f64>,
    pub lambda: Vec<f64>,
    pub x_cm: Vec<f64>,
}

#[derive(Serialize)]
pub struct SymmetricBranch {
    pub e0: f64,
    pub e1: Option<f64>,
    pub branch: BranchData,
}

#[derive(Serialize)]
pub struct Pitchfork {
    pub e_star: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub classification: Option<String>,
    pub symmetric: BranchData,
    pub asym_plus: Option<BranchData>,
    pub asym_minus: Option<BranchData>,
}

#[derive(Serialize)]
pub struct Profiles {
    pub x: Vec<f64>,
    pub symmetric: Vec<f64>,
    pub asymmetric: Option<Vec<f64>>,
    pub e: f64,
    pub e_star: Option<f64>,
}

fn build(p: f64, s: f64) -> Result<(NlsSystem, nlsbif_core::potentials::LinearModes), String> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(format!("p must be positive, got {p}"));
    }
    if !(0.0..=8.0).contains(&s) {
        return Err(format!("separation must be in [0, 8], got {s}"));
    }
    let grid = Grid::from_spacing(HALF_WIDTH.max(s + 9.0), DX).map_err(|e| e.to_string())?;
    let pot = Potential::double_well(s).map_err(|e| e.to_string())?;
    let params =
        ProblemParams::new(-2.0, p, Normalization::Section5).map_err(|e| e.to_string())?;
    let sys = NlsSystem::new(&grid, &pot, params, ORDER).map_err(|e| e.to_string())?;
    let modes =
        solve_linear_modes(&pot, &grid, 2, Normalization::Section5, ORDER).map_err(|e| e.to_string())?;
    Ok((sys, modes))
}

fn branch_data(b: &Branch) -> BranchData {
    BranchData {
        e: b.points.iter().map(|p| p.state.e).collect(),
        n: b.points.iter().map(|p| p.state.mass).collect(),
        lambda: b.points.iter().map(|p| p.lplus_eigenvalues[1]).collect(),
        x_cm: b.points.iter().map(|p| p.state.x_cm).collect(),
    }
}

fn trace_symmetric(
    sys: &NlsSystem,
    modes: &nlsbif_core::potentials::LinearModes,
    e_max: f64,
) -> Result<Branch, String> {
    let splitting = modes.e1.map(|e1| modes.e0 - e1).unwrap_or(f64::INFINITY);
    let offset = (0.02f64).min(splitting / 20.0).max(1e-9);
    let e_start = modes.e0 + offset;
    if e_max <= e_start {
        return Err(format!("E max must exceed the onset E0 = {:.4}", modes.e0));
    }
    let seed = seed_from_linear(sys, modes, e_start).map_err(|e| e.to_string())?;
    let start =
        newton_solve(sys, &seed, e_start, &NewtonOptions::symmetric()).map_err(|e| e.to_string())?;
    let controls = ContinuationControls {
        de_init: (offset / 2.0).min(0.02),
        de_max: 0.2,
        ..ContinuationControls::symmetric()
    };
    continue_branch(sys, start, e_max, &controls, "symmetric", Provenance::FromLinearMode)
        .map_err(|e| e.to_string())
}

pub fn symmetric_branch(p: f64, s: f64, e_max: f64) -> Result<SymmetricBranch, String> {
    let (sys, modes) = build(p, s)?;
    let branch = trace_symmetric(&sys, &modes, e_max)?;
    Ok(SymmetricBranch { e0: modes.e0, e1: modes.e1, branch: branch_data(&branch) })
}

pub fn pitchfork(p: f64, s: f64, e_max: f64) -> Result<Pitchfork, String> {
    let (sys, modes) = build(p, s)?;
    let sym = trace_symmetric(&sys, &modes, e_max)?;
    let scan = locate_crossing(&sym);
    let out = match scan {
        CrossingScan::NoCrossing { .. } => Pitchfork {
            e_star: None,
            q: None,
            r: None,
            classification: None,
            symmetric: branch_data(&sym),
            asym_plus: None,
            asym_minus: None,
        },
        CrossingScan::Bracket { e_lo, e_hi, .. } => {
            let cfg = BifurcationConfig::default();
            let (state_star, phi_star) =
                refine_e_star(&sys, &sym, &scan, &cfg).map_err(|e| e.to_string())?;
            let report = build_report(&sys, state_star, phi_star, (e_hi - e_lo).max(1e-7), Some(&modes), &cfg)
                .map_err(|e| e.to_string())?;
            let a0 = 0.05 * report.state_star.mass.sqrt();
            let controls = ContinuationControls {
                de_init: 0.01,
                de_max: 0.2,
                newton: NewtonOptions { jacobian_guard: 0.0, ..NewtonOptions::default() },
                ..ContinuationControls::default()
            };
            let plus = branch_switch(&sys, &report, a0, 1.0, e_max, &controls, "plus")
                .map_err(|e| e.to_string())?;
            let minus = branch_switch(&sys, &report, a0, -1.0, e_max, &controls, "minus")
                .map_err(|e| e.to_string())?;
            Pitchfork {
                e_star: Some(report.e_star),
                q: Some(report.q),
                r: Some(report.r),
                classification: Some(report.classification.name().to_string()),
                symmetric: branch_data(&sym),
                asym_plus: Some(branch_data(&plus)),
                asym_minus: Some(branch_data(&minus)),
            }
        }
    };
    Ok(out)
}

pub fn profiles(p: f64, s: f64, e: f64) -> Result<Profiles, String> {
    let (sys, modes) = build(p, s)?;
    if e <= modes.e0 {
        return Err(format!("E must exceed the onset E0 = {:.4}", modes.e0));
    }
    let sym = trace_symmetric(&sys, &modes, e)?;
    let sym_state = &sym.points.last().ok_or("empty branch")?.state;
    let scan = locate_crossing(&sym);
    let mut e_star = None;
    let asym = match scan {
        CrossingScan::Bracket { e_lo, e_hi, .. } => {
            let cfg = BifurcationConfig::default();
            let (state_star, phi_star) =
                refine_e_star(&sys, &sym, &scan, &cfg).map_err(|err| err.to_string())?;
            let report = build_report(&sys, state_star, phi_star, (e_hi - e_lo).max(1e-7), Some(&modes), &cfg)
                .map_err(|err| err.to_string())?;
            e_star = Some(report.e_star);
            if e > report.e_star {
                let a0 = 0.05 * report.state_star.mass.sqrt();
                let controls = ContinuationControls {
                    de_init: 0.01,
                    de_max: 0.2,
                    newton: NewtonOptions { jacobian_guard: 0.0, ..NewtonOptions::default() },
                    ..ContinuationControls::default()
                };
                let b = branch_switch(&sys, &report, a0, 1.0, e, &controls, "plus")
                    .map_err(|err| err.to_string())?;
                b.points.last().map(|pt| pt.state.phi.values().to_vec())
            } else {
                None
            }
        }
        CrossingScan::NoCrossing { .. } => None,
    };
    Ok(Profiles {
        x: sym_state.phi.grid().nodes().to_vec(),
        symmetric: sym_state.phi.values().to_vec(),
        asymmetric: asym,
        e,
        e_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_branch_reports_modes_and_positive_lambda_below_threshold() {
        let out = symmetric_branch(1.0, 0.4, 3.0).unwrap();
        assert!(out.e0 > 0.0);
        assert!(out.branch.lambda.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn pitchfork_fork_appears_past_threshold() {
        let out = pitchfork(1.0, 1.2, 4.0).unwrap();
        let e_star = out.e_star.expect("crossing expected at s=1.2");
        assert!(e_star > 0.0);
        let plus = out.asym_plus.expect("asymmetric branch");
        assert!(plus.x_cm.last().unwrap().abs() > 0.05);
        let minus = out.asym_minus.unwrap();
        assert!((plus.x_cm.last().unwrap() + minus.x_cm.last().unwrap()).abs() < 1e-6);
        assert_eq!(out.classification.as_deref(), Some("supercritical"));
    }

    #[test]
    fn profiles_returns_overlay_past_crossing() {
        let out = profiles(1.0, 1.2, 4.0).unwrap();
        assert_eq!(out.x.len(), out.symmetric.len());
        let asym = out.asymmetric.expect("asymmetric profile at E past E*");
        assert_eq!(out.x.len(), asym.len());
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(symmetric_branch(-1.0, 0.5, 3.0).is_err());
        assert!(symmetric_branch(1.0, 9.0, 3.0).is_err());
        assert!(profiles(1.0, 0.5, 0.0).is_err());
        let json = crate::symmetric_branch_json(-1.0, 0.5, 3.0);
        assert!(json.contains("error"));
    }
}
