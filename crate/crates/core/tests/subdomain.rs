mod common;

use common::{max_abs, random_vector, small_setup};
use stmortar::geometry::BoundarySide;
use stmortar::linalg::max_abs_diff;
use stmortar::subdomain::{MortarData, SubdomainData, SubdomainTrajectory};
use stmortar::verification::example1;
use stmortar::verification::study::{setup_example1, MortarKind};

fn traj_diff(a: &SubdomainTrajectory, b: &SubdomainTrajectory) -> f64 {
    a.u.iter()
        .zip(&b.u)
        .chain(a.p.iter().zip(&b.p))
        .map(|(x, y)| max_abs_diff(x, y))
        .fold(0.0, f64::max)
}

fn traj_scale(a: &SubdomainTrajectory) -> f64 {
    a.u.iter()
        .chain(&a.p)
        .map(|v| max_abs(v))
        .fold(1.0, f64::max)
}

fn combine(
    a: &SubdomainTrajectory,
    alpha: f64,
    b: &SubdomainTrajectory,
    beta: f64,
) -> SubdomainTrajectory {
    let lin = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        x.iter()
            .zip(y)
            .map(|(u, v)| u.iter().zip(v).map(|(p, q)| alpha * p + beta * q).collect())
            .collect()
    };
    SubdomainTrajectory {
        p0: a.p0.clone(),
        u: lin(&a.u, &b.u),
        p: lin(&a.p, &b.p),
    }
}

#[test]
fn star_plus_bar_equals_full_march() {
    let case = example1();
    let setup = setup_example1(&case, 0, MortarKind::Dgq1).unwrap();
    let data = setup.sample_data(&case, setup.zero_initial());
    let lambda = random_vector(setup.n_mortar_dofs(), 3);
    for ((s, cs), d) in setup
        .solvers
        .iter()
        .zip(&setup.coupling.per_subdomain)
        .zip(&data)
    {
        let full = s.trajectory(
            Some(d),
            Some(MortarData {
                couplings: cs,
                lambda: &lambda,
            }),
        );
        let sum = combine(&s.solve_star(cs, &lambda), 1.0, &s.solve_bar(d), 1.0);
        assert!(traj_diff(&full, &sum) <= 1e-12 * traj_scale(&full));
    }
}

#[test]
fn star_is_linear() {
    let setup = small_setup(1);
    let n = setup.n_mortar_dofs();
    let (l1, l2) = (random_vector(n, 1), random_vector(n, 2));
    let (a, b) = (0.7, -1.3);
    let mix: Vec<f64> = l1.iter().zip(&l2).map(|(x, y)| a * x + b * y).collect();
    for (s, cs) in setup.solvers.iter().zip(&setup.coupling.per_subdomain) {
        let lhs = s.solve_star(cs, &mix);
        let rhs = combine(&s.solve_star(cs, &l1), a, &s.solve_star(cs, &l2), b);
        assert!(traj_diff(&lhs, &rhs) <= 1e-12 * traj_scale(&lhs));
    }
}

#[test]
fn zero_mortar_star_is_zero_and_bar_is_march_without_mortar() {
    let case = example1();
    let setup = small_setup(1);
    let data = setup.sample_data(&case, setup.zero_initial());
    let zero = vec![0.0; setup.n_mortar_dofs()];
    for ((s, cs), d) in setup
        .solvers
        .iter()
        .zip(&setup.coupling.per_subdomain)
        .zip(&data)
    {
        let star = s.solve_star(cs, &zero);
        assert!(star.u.iter().chain(&star.p).flatten().all(|&v| v == 0.0));
        let bar = s.solve_bar(d);
        let full = s.trajectory(
            Some(d),
            Some(MortarData {
                couplings: cs,
                lambda: &zero,
            }),
        );
        assert_eq!(traj_diff(&bar, &full), 0.0);
    }
}

#[test]
fn local_mass_balance_holds_per_cell_and_step() {
    let case = example1();
    let setup = setup_example1(&case, 1, MortarKind::Dgq1).unwrap();
    let data = setup.sample_data(&case, setup.zero_initial());
    let lambda = random_vector(setup.n_mortar_dofs(), 9);
    for ((s, cs), d) in setup
        .solvers
        .iter()
        .zip(&setup.coupling.per_subdomain)
        .zip(&data)
    {
        let tr = s.trajectory(
            Some(d),
            Some(MortarData {
                couplings: cs,
                lambda: &lambda,
            }),
        );
        let scale = d.source.iter().map(|q| max_abs(q)).fold(1.0, f64::max) * s.dofmap.cell_area();
        assert!(s.mass_balance_residual(Some(d), &tr) <= 1e-10 * scale);
    }
}

#[test]
fn unit_normal_flux_has_moment_length_times_final_time() {
    let setup = small_setup(0);
    for (s, cs) in setup.solvers.iter().zip(&setup.coupling.per_subdomain) {
        for c in cs {
            let outward = c.side.outward_sign();
            let mut u = vec![0.0; s.dofmap.n_faces()];
            for (local, &f) in c.faces.iter().enumerate() {
                u[f] = outward * c.face_lengths[local];
            }
            let mut out = vec![0.0; setup.n_mortar_dofs()];
            let mut work = Vec::new();
            for k in 0..s.n_steps() {
                c.add_moments(&u, k, 1.0, &mut out, &mut work);
            }
            let f = &setup.decomposition.interfaces[c.interface];
            let expected = f.length() * setup.decomposition.final_time;
            assert!(
                (out[c.offset] - expected).abs() < 1e-14,
                "{} vs {expected}",
                out[c.offset]
            );
            let zero = vec![0.0; s.dofmap.n_faces()];
            let mut none = vec![0.0; setup.n_mortar_dofs()];
            c.add_moments(&zero, 0, 1.0, &mut none, &mut work);
            assert!(none.iter().all(|&v| v == 0.0));
        }
    }
    assert!(matches!(
        setup.coupling.per_subdomain[0][0].side,
        BoundarySide::East | BoundarySide::North
    ));
}

#[test]
fn bar_moments_are_bitwise_reproducible() {
    let case = example1();
    let setup = setup_example1(&case, 0, MortarKind::Dgq1).unwrap();
    let data = setup.sample_data(&case, setup.zero_initial());
    let g1 = setup.compute_g(&data).unwrap();
    let g2 = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| setup.compute_g(&data).unwrap());
    let g3 = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| setup.compute_g(&data).unwrap());
    assert!(g1.iter().all(|v| v.is_finite()));
    assert_eq!(g1, g2);
    assert_eq!(g1, g3);
}

#[test]
fn one_factorization_per_distinct_step() {
    let setup = small_setup(1);
    for s in &setup.solvers {
        assert_eq!(s.n_factorizations(), 1);
    }
    let _ = SubdomainData::zero(&setup.solvers[0]);
}
