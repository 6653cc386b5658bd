// Sup-norm convergence of `P_N f` to `f`, round and perturbed.

use hodge_approx::{
    convergence_study, make_geometry, ModelGeometry, Perturbation, ProbeGrid, TestFunction,
};

fn main() -> hodge_approx::Result<()> {
    let grid = ProbeGrid::lat_lon(33, 64);
    let cases = [
        ("round", ModelGeometry::round(2)?, TestFunction::y3()),
        (
            "perturbed",
            make_geometry(2, Perturbation::single(2, 0, 0.1)?)?,
            TestFunction::y1(),
        ),
    ];
    for (label, geom, f) in cases {
        let report = convergence_study(&geom, &f, &[4, 8, 16, 32], &grid)?;
        println!("{label}, f = {f}");
        for r in &report.records {
            println!(
                "  N={:<3} sup {:.6e}  mean {:.6e}",
                r.n_power, r.sup_error, r.mean_abs_error
            );
        }
        if let Some(fit) = report.fit {
            println!("  error ≈ {:.3} N^{:.3}", fit.constant, fit.slope);
        }
    }
    Ok(())
}
