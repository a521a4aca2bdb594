//! Crystal threshold in zV with and without correlated hopping t_ch = −U.

use kerr_array::dynamics::{PhaseKind, SeedKind};
use kerr_array::sweep::run_point;
use kerr_array::ModelParams;

fn is_crystal(u: f64, t_ch: f64, zv: f64) -> bool {
    let p = ModelParams { omega: 0.75, u, zv, t_ch, n_max: Some(12), ..Default::default() };
    matches!(
        run_point(&p, &SeedKind::default_sweep(), &Default::default(), &Default::default(), 2),
        Ok(r) if r.label.kind == PhaseKind::Crystal
    )
}

fn main() {
    for u in [0.5, 1.0, 2.0] {
        for t_ch in [0.0, -u] {
            let (mut lo, mut hi) = (1.0, 9.0);
            while hi - lo > 0.05 {
                let mid = 0.5 * (lo + hi);
                if is_crystal(u, t_ch, mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            println!("U={u} t_ch={t_ch:+}: crystal above zV ≈ {:.3}", 0.5 * (lo + hi));
        }
    }
}
