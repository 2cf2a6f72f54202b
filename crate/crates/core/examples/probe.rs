// Probe 5: sign of the RONS chirp rate at chirp-free non-soliton states.
use nls_rom::ansatz::{AnsatzFamily, ParameterState};
use nls_rom::grid::PeriodicGrid;
use nls_rom::pde::PdeKind;
use nls_rom::rons;

fn main() {
    let grid = PeriodicGrid::new(64.0 * std::f64::consts::PI, 1 << 11).unwrap();
    for (ar, ai, l) in [
        (1.0, 0.0, 1.0),    // |A|^2 L^2 = 1.0  > 1/2: focusing
        (0.3, 0.0, 1.0),    // 0.09 < 1/2: defocusing
        (0.5, 0.5, 1.2),    // 0.72 > 1/2: focusing
        (0.2, 0.1, 1.5),    // 0.1125 < 1/2: defocusing
        (0.7071067811865476, 0.0, 1.0), // soliton
    ] {
        let state = ParameterState::new(AnsatzFamily::Sech, vec![ar, ai, l, 0.0, 0.0]).unwrap();
        let q = rons::rons_rhs(&rons::assemble(PdeKind::NlsComoving, &state, &grid).unwrap()).unwrap();
        let a2l2 = (ar * ar + ai * ai) * l * l;
        println!("|A|2L2 = {a2l2:.4}  RONS Udot = {:+.5e}   (focusing iff > 1/2)", q[3]);
    }
}
