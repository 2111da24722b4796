use regrecon::mollify::Mollifier;
use regrecon::rough::{
    cumulative_rough_integral, mollified_integral_sweep, mollify_controlled_path,
    mollify_rough_path, rough_integral, ControlledPath, BranchedRoughPath,
};
use regrecon::structures::WorkingGrid;
use regrecon::weierstrass::Weierstrass;

fn main() {
    // smooth periodic path first
    let grid = WorkingGrid::torus(1 << 11);
    let comps = vec![grid.sample(|t| (std::f64::consts::TAU * t).sin() * 0.5)];
    let x = BranchedRoughPath::lift(grid.clone(), &comps, 0.6, 1).unwrap();
    let z = ControlledPath::tautological(&x, 1);
    let span = grid.len() / 4;
    println!("smooth path, span {span}");
    let rows = mollified_integral_sweep(&x, &z, 1, &[0.125, 0.0625, 0.03125, 0.015625], 2, 0, span).unwrap();
    for r in &rows {
        println!("  eps {:>9.5}  smoothed {:>12.6}  target {:>12.6}  err {:>10.3e}", r.width, r.smoothed_integral, r.target, r.error);
    }
    // classical value: int_0^{1/4} X dX = X(1/4)^2/2 - X(0)^2/2
    let xs = 0.5f64 * (std::f64::consts::TAU * 0.25).sin();
    println!("  classical {:.6}", xs * xs / 2.0);
    let c = cumulative_rough_integral(&x, &z, 1).unwrap();
    println!("  fine-mesh I(0,1/4) = {:.6}", c[span]);

    // Weierstrass
    let w = Weierstrass::new(0.6, 11, 1);
    let comps = vec![grid.sample(|t| w.eval(t))];
    let x = BranchedRoughPath::lift(grid.clone(), &comps, 0.6, 1).unwrap();
    let z = ControlledPath::tautological(&x, 1);
    println!("weierstrass path");
    let rows = mollified_integral_sweep(&x, &z, 1, &[0.125, 0.0625, 0.03125, 0.015625], 2, 0, span).unwrap();
    for r in &rows {
        println!("  eps {:>9.5}  smoothed {:>12.6}  target {:>12.6}  err {:>10.3e}", r.width, r.smoothed_integral, r.target, r.error);
    }
    let c = cumulative_rough_integral(&x, &z, 1).unwrap();
    println!("  fine-mesh I(0,1/4) = {:.6}", c[span]);
    // check smoothed side against a direct computation at one eps
    let mollifier = Mollifier::standard(2, 0.0625);
    let sx = mollify_rough_path(&x, &mollifier).unwrap();
    let sz = mollify_controlled_path(&z, &x, &mollifier, false).unwrap();
    let direct = rough_integral(&sx, &sz, 1, 0, span, span.trailing_zeros()).unwrap();
    println!("  direct smoothed at eps=1/16: {direct:.6}");
}
