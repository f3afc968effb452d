use slipflow::connect::{solve_divergence_correction, BoundaryData, AnnulusGrid, AnnulusField};
use nalgebra::Vector2;
fn main() {
    let g = AnnulusGrid::exterior_band(Vector2::zeros(), 1.0, 0.5, 32, 128);
    let mut bc = BoundaryData::zero(&g);
    let rin = g.radius;
    let rout = g.radius + 0.5;
    for i in 0..g.n_s {
        bc.inner_z[i] = 1.0 / rin;
        bc.outer_z[i] = 1.0 / rout;
        bc.inner_s[i] = 0.3 * (g.theta(i)).cos();
        bc.outer_s[i] = -0.1;
    }
    let f = vec![0.0; g.node_count()];
    let (u, rep) = solve_divergence_correction(&g, &f, &bc, 1e-8).unwrap();
    println!("resid_l2 {:LG$e} rel {:e} compat {:e} bound {:e}", rep.residual_l2, rep.relative_residual, rep.compat_defect, rep.bound_ratio, LG=3);
    let div = u.divergence();
    // where is the residual concentrated?
    let mut worst = (0usize,0usize,0.0f64);
    for i in 0..g.n_s { for j in 0..=g.n_z {
        let v = div[g.idx(i,j)].abs();
        if v > worst.2 { worst = (i,j,v); }
    }}
    println!("worst at i={} j={} |div|={:e}", worst.0, worst.1, worst.2);
    let _ = AnnulusField::zeros(g);
}
