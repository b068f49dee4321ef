use strichlab::cusp::{CuspConfig, CuspModel};
use strichlab::normlab::{loglog_fit, lr_norm, region_norms, NormRegionSpec};
use strichlab::params::make_params;

#[test]
fn regional_powers_add_up() {
    let p = make_params(2f64.powi(-14), 0.1, 0.3).unwrap();
    let m = CuspModel::new(&p, &CuspConfig::default()).unwrap();
    let f = m.field(0, p.time_of(0.3, 0)).unwrap();
    let spec = NormRegionSpec::new(2.0, p.a, p.h, p.a).unwrap();
    for r in [2.0, 3.0, 6.0] {
        let n = region_norms(&f, &spec, r).unwrap();
        let sum = n.inner.powf(r) + n.middle.powf(r) + n.outer.powf(r);
        assert!((sum / n.total.powf(r) - 1.0).abs() < 1e-12, "r={r}");
        assert!((n.total - lr_norm(&f, r).unwrap()).abs() < 1e-12 * n.total);
    }
}

#[test]
fn refining_the_grid_moves_norms_by_under_half_a_percent() {
    let p = make_params(2f64.powi(-14), 0.1, 0.3).unwrap();
    let coarse = CuspConfig::default();
    let fine = CuspConfig { x_per_h23: 2.0 * coarse.x_per_h23, y_oversample: 2 * coarse.y_oversample, ..coarse };
    let t = p.time_of(0.2, 0);
    let a = CuspModel::new(&p, &coarse).unwrap().field(0, t).unwrap();
    let b = CuspModel::new(&p, &fine).unwrap().field(0, t).unwrap();
    assert!(b.grid.nx > a.grid.nx && b.grid.ny > a.grid.ny);
    for r in [2.0, 3.0, 6.0, 8.0] {
        let (na, nb) = (lr_norm(&a, r).unwrap(), lr_norm(&b, r).unwrap());
        assert!((na / nb - 1.0).abs() < 5e-3, "r={r}: {na} vs {nb}");
    }
}

#[test]
fn cusp_norm_exponents_decrease_in_r() {
    let mut slopes = vec![];
    let fields: Vec<_> = (10..=16)
        .step_by(2)
        .map(|e| {
            let p = make_params(2f64.powi(-e), 0.1, 0.3).unwrap();
            (p.h, CuspModel::new(&p, &CuspConfig::default()).unwrap().field(0, 0.0).unwrap())
        })
        .collect();
    for r in [5.0, 6.0, 8.0] {
        let pts: Vec<(f64, f64)> = fields.iter().map(|(h, f)| (*h, lr_norm(f, r).unwrap())).collect();
        slopes.push(loglog_fit(&pts).unwrap().slope);
    }
    assert!(slopes[0] > slopes[1] && slopes[1] > slopes[2], "{slopes:?}");
}

#[test]
fn l2_norm_at_zero_follows_its_exponent() {
    // fast subset of the acceptance range
    let pts: Vec<(f64, f64)> = (10..=16)
        .step_by(2)
        .map(|e| {
            let p = make_params(2f64.powi(-e), 0.1, 0.3).unwrap();
            let f = CuspModel::new(&p, &CuspConfig::default()).unwrap().field(0, 0.0).unwrap();
            (p.h, lr_norm(&f, 2.0).unwrap())
        })
        .collect();
    let slope = loglog_fit(&pts).unwrap().slope;
    assert!((slope - (1.0 + 0.45 / 4.0)).abs() < 0.03, "{slope}");
}
