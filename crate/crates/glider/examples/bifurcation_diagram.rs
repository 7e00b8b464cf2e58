//! Continue the equilibrium glides over pitch and export the bifurcation
//! diagram. The high-lift shape has saddle-node folds where the fast shallow
//! glide is born and destroyed; the flat plate has a single fold-free branch.

use std::path::Path;

use glider::dynamics::PitchAngle;
use glider::equilibria::{self, StepControl};
use glider::export;
use glider::profiles;

fn main() -> glider::Result<()> {
    let out = Path::new("examples-out/bifurcation");
    std::fs::create_dir_all(out)?;
    let grid: Vec<PitchAngle> = (0..=180)
        .map(|i| PitchAngle::from_degrees(-45.0 + 0.5 * i as f64))
        .collect();

    for name in ["flat-plate", "high-lift"] {
        let profile = profiles::builtin(name).unwrap();
        let diagram = equilibria::bifurcation_diagram(&profile, &grid, &StepControl::default());
        let path = out.join(format!("{name}.csv"));
        export::write_bifurcation_csv(&path, &diagram)?;

        let max_roots = diagram.per_theta.iter().map(|(_, e)| e.len()).max().unwrap();
        println!("{name}: {} branch(es), up to {max_roots} roots per pitch", diagram.branches.len());
        for (id, branch) in diagram.branches.iter().enumerate() {
            let folds = branch.fold_indices();
            print!("  branch {id}: {} points", branch.points.len());
            if folds.is_empty() {
                println!(", no folds");
            } else {
                let at: Vec<String> = folds
                    .iter()
                    .map(|&i| format!("{:+.2} deg", branch.points[i].0.degrees()))
                    .collect();
                println!(", saddle-node folds near {}", at.join(", "));
            }
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
