// Toeplitz matrices and the trace identity `tr T_f = ∫ E_N f dV`.

use hodge_approx::toeplitz::trace_identity_residual;
use hodge_approx::{
    make_geometry, orthonormal_basis, recommended_rule, toeplitz_matrix, Perturbation, TestFunction,
};

fn main() -> hodge_approx::Result<()> {
    let geom = make_geometry(2, Perturbation::single(2, 0, 0.1)?)?;
    let n = 4;
    let basis = orthonormal_basis(&geom, n, recommended_rule(n, &geom, 2)?)?;

    let one = toeplitz_matrix(&basis, &TestFunction::constant(1.0))?;
    println!("tr T_1 = {:.12} (dim {})", one.trace(), basis.dim());

    let f = TestFunction::new([([0, 0, 2], 2.0), ([1, 1, 0], 1.0), ([0, 0, 0], -0.5)])?;
    let t = toeplitz_matrix(&basis, &f)?;
    println!("f = {f}");
    println!(
        "tr T_f = {:.12}, residual {:.2e}",
        t.trace(),
        trace_identity_residual(&t, &basis, &f)?
    );
    println!("hermitian defect {:.2e}", t.hermitian_defect());
    let eig = t.eigenvalues();
    println!("spectrum in [{:.6}, {:.6}]", eig[0], eig[eig.len() - 1]);
    Ok(())
}
