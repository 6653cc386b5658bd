// Bergman density on the round and a perturbed sphere.
//
// On the round sphere `E_N` is the constant `(kN+1)/(2πk)`. Under a
// perturbation it varies, but `E_N · 2π/N` still tends to 1 like `1/N`.

use hodge_approx::{
    make_geometry, orthonormal_basis, rate_fit, recommended_rule, KernelEvaluator, ModelGeometry,
    Perturbation, ProbeGrid, SpherePoint,
};

fn main() -> hodge_approx::Result<()> {
    let round = ModelGeometry::round(2)?;
    let ev = KernelEvaluator::new(orthonormal_basis(
        &round,
        4,
        recommended_rule(4, &round, 0)?,
    )?);
    for y in [
        SpherePoint::north(),
        SpherePoint::from_height(0.3, 1.0),
        SpherePoint::south(),
    ] {
        println!(
            "round N=4  E_N({:+.2}, {:+.2}, {:+.2}) = {:.12}",
            y.y1,
            y.y2,
            y.y3,
            ev.density_e(&y)?
        );
    }
    println!(
        "closed form            = {:.12}",
        9.0 / (4.0 * std::f64::consts::PI)
    );

    let geom = make_geometry(2, Perturbation::single(2, 0, 0.1)?)?;
    let grid = ProbeGrid::lat_lon(33, 64);
    let mut pts = Vec::new();
    for n in [8, 16, 32] {
        let ev = KernelEvaluator::new(orthonormal_basis(&geom, n, recommended_rule(n, &geom, 0)?)?);
        let dev = ev.zelditch_deviation(grid.points())?;
        println!("perturbed N={n:<3} sup |E_N 2π/N - 1| = {dev:.6e}");
        pts.push((n, dev));
    }
    println!("fitted slope {:.3}", rate_fit(&pts)?.slope);
    Ok(())
}
