// Eigenvalues of `P_N` on spherical harmonics of the round sphere.

use hodge_approx::{
    chi_via_operator, orthonormal_basis, recommended_rule, KernelEvaluator, ModelGeometry,
    ProbeGrid, SpectralTable,
};

fn main() -> hodge_approx::Result<()> {
    let n = 4;
    let geom = ModelGeometry::round(2)?;
    let degree = 2 * n;
    let ev = KernelEvaluator::new(orthonormal_basis(
        &geom,
        n,
        recommended_rule(n, &geom, degree as usize + 1)?,
    )?);
    let table = SpectralTable::new(n);
    let grid = ProbeGrid::lat_lon(17, 8);
    println!(" m  closed form        operator");
    for m in 0..=degree + 1 {
        let measured = chi_via_operator(&ev, m, &grid)?;
        println!("{m:>2}  {:.15}  {:.15}", table.chi(m), measured.chi);
    }
    Ok(())
}
