#![allow(clippy::approx_constant, clippy::too_many_arguments)]

use hysterobeam::beam_fe::{
    assemble, build_element_coupling, build_element_matrices, cantilever_fundamental,
    modal_analysis, natural_frequencies, BeamGeometry,
};
use proptest::prelude::*;

/// Adaptive Simpson quadrature with Richardson correction.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 18)
}

/// Cubic Hermite basis on [0, h], dofs (w0, theta0, w1, theta1).
fn psi(h: f64, x: f64) -> [f64; 4] {
    let s = x / h;
    [
        1.0 - 3.0 * s * s + 2.0 * s.powi(3),
        h * (s - 2.0 * s * s + s.powi(3)),
        3.0 * s * s - 2.0 * s.powi(3),
        h * (-s * s + s.powi(3)),
    ]
}

fn psi_xx(h: f64, x: f64) -> [f64; 4] {
    let s = x / h;
    [
        (-6.0 + 12.0 * s) / (h * h),
        (-4.0 + 6.0 * s) / h,
        (6.0 - 12.0 * s) / (h * h),
        (-2.0 + 6.0 * s) / h,
    ]
}

fn close(a: f64, b: f64, rtol: f64, scale: f64) -> bool {
    (a - b).abs() <= rtol * scale
}

#[test]
fn element_matrices_match_quadrature_oracle() {
    for (l, ei, rho, ne) in [
        (1.0, 2666.7, 3.14, 10),
        (2.5, 7.0, 0.3, 3),
        (1.0, 1.0, 1.0, 1),
    ] {
        let g = BeamGeometry::new(l, ei, rho, ne, 3).unwrap();
        let h = g.element_length();
        let (me, ke) = build_element_matrices(&g);
        for i in 0..4 {
            for j in 0..4 {
                let m = simpson(
                    &|x| rho * psi(h, x)[i] * psi(h, x)[j],
                    0.0,
                    h,
                    1e-15 * me.amax(),
                );
                let k = simpson(
                    &|x| ei * psi_xx(h, x)[i] * psi_xx(h, x)[j],
                    0.0,
                    h,
                    1e-15 * ke.amax(),
                );
                assert!(close(me[(i, j)], m, 1e-12, me.amax()), "M[{i},{j}]");
                assert!(close(ke[(i, j)], k, 1e-12, ke.amax()), "K[{i},{j}]");
            }
        }
        assert!(close(ke[(0, 0)], 12.0 * ei / h.powi(3), 1e-12, ke[(0, 0)]));
        assert!(close(
            me[(0, 0)],
            156.0 * rho * h / 420.0,
            1e-12,
            me[(0, 0)]
        ));
    }
}

fn lagrange(nodes: &[f64], p: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|(q, _)| *q != p)
        .map(|(_, &xq)| (x - xq) / (nodes[p] - xq))
        .product()
}

#[test]
fn coupling_block_matches_quadrature_oracle() {
    let gamma_h = 3000.0;
    for ng in 1..=10 {
        let g = BeamGeometry::new(1.0, 2666.7, 3.14, 7, ng).unwrap();
        let h = g.element_length();
        let block = build_element_coupling(&g, gamma_h).unwrap();
        let scale = block.weights.amax().max(1e-300);
        for p in 0..ng {
            for i in 0..4 {
                let direct = simpson(
                    &|x| gamma_h * lagrange(&block.local_x, p, x) * psi_xx(h, x)[i],
                    0.0,
                    h,
                    1e-15 * scale,
                );
                assert!(
                    close(block.weights[(i, p)], direct, 1e-12, scale),
                    "n_g {ng}: A[{i},{p}] = {} vs {direct}",
                    block.weights[(i, p)]
                );
                let d2 = psi_xx(h, block.local_x[p])[i];
                assert!(close(
                    block.curvature[(p, i)],
                    d2,
                    1e-12,
                    d2.abs().max(1.0 / h)
                ));
            }
        }
    }
}

#[test]
fn assembled_matrices_are_exactly_symmetric() {
    let m = assemble(&BeamGeometry::reference_beam(25).unwrap(), 3000.0).unwrap();
    assert_eq!(m.mass, m.mass.transpose());
    assert_eq!(m.stiffness, m.stiffness.transpose());
    assert!(m.stiffness.clone().cholesky().is_some());
}

#[test]
fn reference_frequencies() {
    let m = assemble(&BeamGeometry::reference_beam(10).unwrap(), 3000.0).unwrap();
    let modes = modal_analysis(&m, 5).unwrap();
    for (f, expect) in modes
        .frequencies
        .iter()
        .zip([16.3, 102.2, 286.2, 561.3, 929.3])
    {
        assert!((f / expect - 1.0).abs() < 5e-3, "{f} vs {expect}");
    }
}

#[test]
fn fundamental_matches_closed_form() {
    let exact = cantilever_fundamental(2666.7, 3.14, 1.0);
    for ne in [10, 20, 40] {
        let m = assemble(&BeamGeometry::reference_beam(ne).unwrap(), 0.0).unwrap();
        let f1 = modal_analysis(&m, 1).unwrap().frequencies[0];
        assert!((f1 / exact - 1.0).abs() < 1e-3);
    }
}

#[test]
fn modes_are_mass_orthonormal_and_stiffness_orthogonal() {
    let m = assemble(&BeamGeometry::reference_beam(30).unwrap(), 0.0).unwrap();
    let modes = modal_analysis(&m, 8).unwrap();
    let r = &modes.shapes;
    let mm = r.transpose() * &m.mass * r;
    let kk = r.transpose() * &m.stiffness * r;
    for i in 0..8 {
        for j in 0..8 {
            let id = if i == j { 1.0 } else { 0.0 };
            assert!((mm[(i, j)] - id).abs() < 1e-8);
            if i != j {
                assert!(kk[(i, j)].abs() < 1e-8 * kk[(i, i)]);
            }
        }
    }
}

#[test]
fn mesh_convergence_of_the_lowest_modes() {
    let f = |ne| {
        let m = assemble(&BeamGeometry::reference_beam(ne).unwrap(), 0.0).unwrap();
        modal_analysis(&m, 3).unwrap().frequencies
    };
    let (coarse, fine) = (f(100), f(200));
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a / b - 1.0).abs() < 1e-4);
    }
}

#[test]
fn shortest_period_of_the_fine_mesh() {
    let m = assemble(&BeamGeometry::reference_beam(100).unwrap(), 0.0).unwrap();
    let f = natural_frequencies(&m).unwrap();
    let t_min = 1.0 / f.last().unwrap();
    assert!((3.0e-7..4.5e-7).contains(&t_min), "{t_min}");
    assert!(1e-4 / t_min > 275.0);
}

proptest! {
    #[test]
    fn global_curvature_matches_element_curvature(seed in proptest::collection::vec(-1.0f64..1.0, 12), ng in 1usize..6) {
        let g = BeamGeometry::new(1.3, 2.0, 1.0, 6, ng).unwrap();
        let model = assemble(&g, 1.0).unwrap();
        let q = nalgebra::DVector::from_vec(seed);
        let chi = &model.curvature * &q;
        let h = g.element_length();
        for k in 0..g.n_hyst() {
            let e = k / ng;
            let x = model.gauss_x[k] - e as f64 * h;
            let dofs: Vec<f64> = (0..4)
                .map(|i| if e == 0 && i < 2 { 0.0 } else { q[2 * e + i - 2] })
                .collect();
            let local: f64 = psi_xx(h, x).iter().zip(&dofs).map(|(a, b)| a * b).sum();
            prop_assert!((chi[k] - local).abs() < 1e-10 * (1.0 + local.abs()));
        }
    }

    #[test]
    fn coupling_is_linear_in_gamma(gamma in 0.0f64..1e4) {
        let g = BeamGeometry::reference_beam(4).unwrap();
        let a1 = assemble(&g, 1.0).unwrap().coupling;
        let ag = assemble(&g, gamma).unwrap().coupling;
        prop_assert!((ag - a1 * gamma).amax() <= 1e-12 * gamma.max(1.0) * 1e3);
    }
}
