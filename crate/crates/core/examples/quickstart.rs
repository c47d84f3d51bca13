//! Interval family on a fine grid, then duality on a small family of strips.

use std::sync::Arc;

use modlab_core::content::duality_gap;
use modlab_core::counterexamples::interval_family;
use modlab_core::measures::{path_measure, MeasureFamily};
use modlab_core::modulus::{m_p, FunctionClass};
use modlab_core::space::{grid_1d, grid_2d, Rect};

fn main() -> modlab_core::Result<()> {
    let line = Arc::new(grid_1d(0.0, 1.0, 1 << 12)?);
    let gamma = interval_family(6, &line)?;
    let m1 = m_p(&gamma, 1.0, FunctionClass::All)?;
    println!("M_1(interval family, k = 6) = {:?}", m1.value);

    let square = Arc::new(grid_2d(Rect::square(0.0, 1.0), 32, 32)?);
    let mut strips = MeasureFamily::new(square.clone());
    for i in 0..8 {
        let y = (i as f64 + 0.5) / 8.0;
        strips.push(format!("row{i}"), path_measure(&square, &[vec![0.0, y], vec![1.0, y]])?)?;
    }
    let d = duality_gap(&strips, 2.0)?;
    println!("M_2^(1/2) = {:?}, Ct_2 = {:?}, gap = {:e}", d.modulus_root, d.content.value, d.gap.value());
    Ok(())
}
