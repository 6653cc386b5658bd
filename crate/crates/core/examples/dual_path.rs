// `P^0_N f` two ways: the moment map of projective space pulled back by
// the Kodaira embedding, and the kernel integral minus the mean trace.

use hodge_approx::{
    make_geometry, moment_map_value, orthonormal_basis, recommended_rule, toeplitz_matrix,
    HarmonicTerm, KernelEvaluator, KernelIntegrator, Perturbation, SpherePoint, TestFunction,
};

fn main() -> hodge_approx::Result<()> {
    let psi = Perturbation::new(vec![
        HarmonicTerm { l: 2, m: 0, c: 0.1 },
        HarmonicTerm {
            l: 3,
            m: 1,
            c: -0.05,
        },
    ])?;
    let geom = make_geometry(2, psi)?;
    let n = 6;
    let ev = KernelEvaluator::new(orthonormal_basis(&geom, n, recommended_rule(n, &geom, 2)?)?);
    let f = TestFunction::new([([1, 0, 1], 1.0), ([0, 1, 0], 0.5)])?;
    let t = toeplitz_matrix(ev.basis(), &f)?;
    let op = KernelIntegrator::new(&ev, &f)?;
    for (theta, phi) in [(0.3, 0.0), (1.2, 2.0), (2.5, 4.0)] {
        let y = SpherePoint::from_angles(theta, phi);
        let moment = moment_map_value(ev.basis(), &t, &y)?;
        let kernel = op.p0_n(&t, &y)?;
        println!("θ={theta:.1} φ={phi:.1}: moment map {moment:+.15}  kernel {kernel:+.15}");
    }
    Ok(())
}
