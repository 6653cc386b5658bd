// Orthonormal sections: Gram matrix, closed-form norms, and quadrature rules.

use hodge_approx::{
    closed_form_norms, make_geometry, orthonormal_basis, recommended_rule, ModelGeometry,
    Perturbation,
};

fn main() -> hodge_approx::Result<()> {
    let round = ModelGeometry::round(2)?;
    let n = 3;
    let basis = orthonormal_basis(&round, n, recommended_rule(n, &round, 0)?)?;
    let norms = closed_form_norms(2, n);
    println!("round k=2 N={n}: dim {}", basis.dim());
    for (a, expected) in norms.iter().enumerate() {
        println!(
            "  |m_{a}|^2 = {:.15}  closed form {:.15}",
            basis.gram()[(a, a)].re,
            expected
        );
    }

    let geom = make_geometry(2, Perturbation::single(2, 0, 0.1)?)?;
    for n in [4, 16, 32] {
        let rule = recommended_rule(n, &geom, 0)?;
        let info = rule.info();
        let basis = orthonormal_basis(&geom, n, rule)?;
        println!(
            "perturbed N={n:<2} rule {}x{} (exact to degree {}), residual {:.1e}, scaled cond {:.3}",
            info.n_t,
            info.n_phi,
            info.exact_poly_degree,
            basis.orthonormality_residual(),
            basis.scaled_condition_number()
        );
    }
    Ok(())
}
