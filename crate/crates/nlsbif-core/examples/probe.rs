use nlsbif_core::continuation::*;
use nlsbif_core::grid::Grid;
use nlsbif_core::potentials::{solve_linear_modes, Potential};
use nlsbif_core::schrodinger::{Normalization, NlsSystem, ProblemParams};
use nlsbif_core::stationary::{newton_solve, seed_from_linear, NewtonOptions};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let grid = Grid::from_spacing(25.0, 0.0125).unwrap();
    let pot = Potential::double_well(0.7).unwrap();
    let params = ProblemParams::new(-2.0, 1.0, Normalization::Section5).unwrap();
    let sys = NlsSystem::new(&grid, &pot, params, 4).unwrap();
    let modes = solve_linear_modes(&pot, &grid, 2, Normalization::Section5, 4).unwrap();
    println!("modes: E0={:.9} E1={:?} ({:.2?})", modes.e0, modes.e1, t0.elapsed());
    let e0 = modes.e0;
    let e_start = e0 + 0.02;
    let seed = seed_from_linear(&sys, &modes, e_start).unwrap();
    let start = newton_solve(&sys, &seed, e_start, &NewtonOptions::symmetric()).unwrap();
    let controls = ContinuationControls {
        de_init: 0.01,
        de_max: 0.25,
        ..ContinuationControls::symmetric()
    };
    let t1 = Instant::now();
    let branch = continue_branch(&sys, start, 50.0, &controls, "sym", Provenance::FromLinearMode).unwrap();
    println!("sweep to E=50: {} points in {:.2?}", branch.points.len(), t1.elapsed());
    // where does lambda cross?
    let mut prev: Option<(f64, f64)> = None;
    for p in &branch.points {
        let l = p.lplus_eigenvalues[1];
        if let Some((pe, pl)) = prev {
            if pl > 0.0 && l <= 0.0 {
                println!("crossing bracket: [{pe:.4}, {:.4}] lambda [{pl:.3e}, {l:.3e}]", p.state.e);
            }
        }
        prev = Some((p.state.e, l));
    }
    let last = branch.points.last().unwrap();
    println!("last: E={:.3} lambda={:.4e} nneg={}", last.state.e, last.lplus_eigenvalues[1], last.lplus_n_negative);
    println!("total {:.2?}", t0.elapsed());
}
