// Coherent states, the Bergman kernel, and the operators built from them.

use hodge_approx::{
    apply_pn, apply_qn, make_geometry, orthonormal_basis, recommended_rule, KernelEvaluator,
    Perturbation, SpherePoint, TestFunction,
};

fn main() -> hodge_approx::Result<()> {
    let geom = make_geometry(2, Perturbation::single(1, 1, 0.2)?)?;
    let n = 5;
    let ev = KernelEvaluator::new(orthonormal_basis(&geom, n, recommended_rule(n, &geom, 2)?)?);

    let x = SpherePoint::from_angles(0.8, 0.4);
    let e_x = ev.coherent_state(&x.to_homogeneous());
    let norm2: f64 = e_x.iter().map(|c| c.norm_sqr()).sum();
    println!("|e_x|^2 = {norm2:.12}, E_N(x) = {:.12}", ev.density_e(&x)?);
    println!("∫ K_N(x, ·) dV = {:.12}", ev.kernel_marginal(&x));

    let near = SpherePoint::from_angles(0.85, 0.4);
    let far = x.antipode();
    println!("K_N(x, x) = {:.6e}", ev.kernel_k(&x, &x));
    println!("K_N(x, near) = {:.6e}", ev.kernel_k(&x, &near));
    println!("K_N(x, -x) = {:.6e}", ev.kernel_k(&x, &far));

    let f = TestFunction::monomial(0, 0, 2)?;
    println!(
        "f(x) = {:.6}, P_N f(x) = {:.6}, Q_N f(x) = {:.6}",
        x.y3 * x.y3,
        apply_pn(&ev, &f, &x)?,
        apply_qn(&ev, &f, &x)?
    );
    Ok(())
}
