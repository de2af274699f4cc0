use chemostat_core::analysis::{
    attractor_bounds, check_envelopes, classify_regime, extinction_rate, positivity_diagnostics,
    sigma_condition_report, DilutionBand, EnvelopeTolerances, Verdict,
};
use chemostat_core::integrators::{
    integrate_deterministic, integrate_heun_stratonovich, integrate_pathwise, DeterministicScheme,
};
use chemostat_core::models::{
    diffusion, drift_stratonovich, rhs_deterministic, rhs_random, rhs_random_bp,
    to_biomass_proportion, to_sigma_kappa, ChemostatParams, State3, StateBP,
};
use chemostat_core::noise::{
    ou_driven_by, perturbed_dilution, sample_ou_path, sample_wiener_path, NoiseKind, NoisePath,
    OUParams,
};
use chemostat_core::{Error, StepFailure, TimeGrid};

const FIG4: ChemostatParams = ChemostatParams {
    s_in: 4.0,
    dilution: 2.0,
    a: 1.6,
    m: 2.0,
    b: 0.5,
    nu: 1.2,
    c: 3.0,
    r1: 0.2,
    r2: 0.4,
    alpha: 0.5,
};

const FIG6: ChemostatParams = ChemostatParams {
    s_in: 4.0,
    dilution: 1.5,
    a: 1.6,
    m: 2.0,
    b: 1.0,
    nu: 1.7,
    c: 2.4,
    r1: 0.6,
    r2: 0.4,
    alpha: 0.5,
};

const OU: fn() -> OUParams = || OUParams::new(1.0, 0.2).unwrap();

struct Run {
    traj: chemostat_core::integrators::Trajectory<State3>,
    dilution: NoisePath,
}

fn run(p: &ChemostatParams, seed: u64, init: State3, t_end: f64, dt: f64) -> Run {
    let grid = TimeGrid::spanning(0.0, t_end, dt).unwrap();
    let z = sample_ou_path(OU(), seed, grid.refined(2).unwrap());
    let traj = integrate_pathwise(|y: &State3, v| rhs_random(y, p, v), &z, init, grid).unwrap();
    let dilution = perturbed_dilution(&z, p.dilution, p.alpha).unwrap();
    Run { traj, dilution }
}

#[test]
fn noise_free_run_sits_inside_collapsed_envelopes() {
    let p = ChemostatParams { alpha: 0.0, ..FIG4 };
    let band = DilutionBand::auto(&p, None).unwrap();
    let bounds = attractor_bounds(&p, &band).unwrap();
    let grid = TimeGrid::spanning(0.0, 20.0, 1e-3).unwrap();
    let init = State3::new(2.5, 2.0, 2.0);
    let traj = integrate_deterministic(
        |y: &State3| rhs_deterministic(y, &p),
        init,
        grid,
        DeterministicScheme::Rk4,
    )
    .unwrap();
    let flat = NoisePath::from_values(
        grid,
        vec![p.dilution; grid.len()],
        NoiseKind::OrnsteinUhlenbeck,
        0,
    )
    .unwrap();
    let r = check_envelopes(
        &traj,
        &p,
        &bounds,
        &band,
        &flat,
        &EnvelopeTolerances::default(),
    )
    .unwrap();
    assert!(r.band_certified);
    assert!(r.p_bound_ok && r.xi_envelopes_ok, "{r:?}");
    assert!(r.xi_tail_ok && r.xi_band_entry_time.is_some());
    assert!(r.extinction_envelope_max_ratio <= 1.0 + 1e-9);
}

#[test]
fn persistent_set_envelopes_on_fine_grid() {
    let band = DilutionBand::auto(&FIG4, Some(OU())).unwrap();
    let bounds = attractor_bounds(&FIG4, &band).unwrap();
    let mut certified = 0;
    for seed in 0..10 {
        let r = run(&FIG4, seed, State3::new(2.5, 2.0, 2.0), 5.0, 1e-4);
        let rep = check_envelopes(
            &r.traj,
            &FIG4,
            &bounds,
            &band,
            &r.dilution,
            &EnvelopeTolerances::default(),
        )
        .unwrap();
        if !rep.band_certified {
            continue;
        }
        certified += 1;
        assert!(rep.p_bound_ok, "seed {seed}: {}", rep.p_max_violation);
        assert!(
            rep.xi_envelopes_ok,
            "seed {seed}: {:?}",
            rep.xi_max_violation
        );
        assert!(positivity_diagnostics(&r.traj, &FIG4).clean());
    }
    assert!(certified > 0);
}

#[test]
fn biomass_proportion_trajectories_are_accepted() {
    let band = DilutionBand::auto(&FIG4, Some(OU())).unwrap();
    let bounds = attractor_bounds(&FIG4, &band).unwrap();
    let grid = TimeGrid::spanning(0.0, 5.0, 1e-3).unwrap();
    let z = sample_ou_path(OU(), 5, grid.refined(2).unwrap());
    let init = to_biomass_proportion(&State3::new(2.5, 2.0, 2.0)).unwrap();
    let traj =
        integrate_pathwise(|y: &StateBP, v| rhs_random_bp(y, &FIG4, v), &z, init, grid).unwrap();
    let d = perturbed_dilution(&z, FIG4.dilution, FIG4.alpha).unwrap();
    let r = check_envelopes(
        &traj,
        &FIG4,
        &bounds,
        &band,
        &d,
        &EnvelopeTolerances::default(),
    )
    .unwrap();
    assert!(!r.band_certified || (r.p_bound_ok && r.xi_envelopes_ok));

    let sk = traj
        .map_states(|t, y| {
            let y3 = chemostat_core::models::from_biomass_proportion(y);
            Ok(to_sigma_kappa(&y3, z.value_at(t)?, FIG4.alpha, FIG4.s_in))
        })
        .unwrap();
    let err = check_envelopes(
        &sk,
        &FIG4,
        &bounds,
        &band,
        &d,
        &EnvelopeTolerances::default(),
    );
    assert!(matches!(err, Err(Error::CoordinateMismatch(_))));
}

#[test]
fn extinct_set_decays_under_pathwise_envelope() {
    let band = DilutionBand::auto(&FIG6, Some(OU())).unwrap();
    let bounds = attractor_bounds(&FIG6, &band).unwrap();
    for seed in 0..5 {
        let r = run(&FIG6, seed, State3::new(2.5, 2.0, 2.0), 20.0, 1e-3);
        let rep = check_envelopes(
            &r.traj,
            &FIG6,
            &bounds,
            &band,
            &r.dilution,
            &EnvelopeTolerances::default(),
        )
        .unwrap();
        assert!(rep.z_band_entry_time.is_some(), "{rep:?}");
        assert!(rep.extinction_envelope_max_ratio <= 2.0);
        let end = r.traj.terminal();
        assert!(end.x1 < 1e-2 && end.x2 < 1e-2, "{end:?}");
    }
}

#[test]
fn certified_extinction_decays_at_the_predicted_rate() {
    let p = ChemostatParams { nu: 2.5, ..FIG6 };
    let band = DilutionBand::auto(&p, Some(OU())).unwrap();
    assert_eq!(
        classify_regime(&p, &band).unwrap().verdict,
        Verdict::Extinction
    );
    let bounds = attractor_bounds(&p, &band).unwrap();
    let rate = extinction_rate(&p, &bounds);
    assert!(rate > 0.0);
    let t_end = 50.0;
    let init = State3::new(2.5, 2.0, 2.0);
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let r = run(&p, seed, init, t_end, 1e-2);
        let rep = check_envelopes(
            &r.traj,
            &p,
            &bounds,
            &band,
            &r.dilution,
            &EnvelopeTolerances::default(),
        )
        .unwrap();
        if rep.band_certified {
            worst = worst.max(r.traj.terminal().biomass());
            assert!(rep.extinction_envelope_max_ratio <= 1.0 + 1e-6, "{rep:?}");
        }
    }
    assert!(
        worst < init.biomass() * (-rate * t_end / 2.0).exp(),
        "{worst}"
    );
}

#[test]
fn persistent_fixture_reaches_its_floors() {
    // found by the grid search in the bounds oracle tests
    let p = ChemostatParams {
        s_in: 10.0,
        dilution: 0.5,
        a: 0.1,
        m: 3.0,
        b: 1.0,
        nu: 0.1,
        c: 3.0,
        r1: 0.1,
        r2: 10.0,
        alpha: 0.1,
    };
    let band = DilutionBand::new(0.45, 0.55).unwrap();
    assert_eq!(
        classify_regime(&p, &band).unwrap().verdict,
        Verdict::Persistence
    );
    let bounds = attractor_bounds(&p, &band).unwrap();
    let mut certified = 0;
    for seed in 0..10 {
        let r = run(&p, seed, State3::new(1.0, 0.5, 0.5), 60.0, 1e-2);
        let rep = check_envelopes(
            &r.traj,
            &p,
            &bounds,
            &band,
            &r.dilution,
            &EnvelopeTolerances::default(),
        )
        .unwrap();
        if !rep.band_certified {
            continue;
        }
        certified += 1;
        assert!(rep.floors_applicable);
        let after = rep.floors_ok_after.expect("floors never settle");
        assert!(after < 60.0 * 0.8, "{after}");
        assert!(rep.z_tail_ok && rep.xi_tail_ok && rep.p_bound_ok, "{rep:?}");
    }
    assert!(certified >= 5);
}

#[test]
fn white_noise_nutrient_dips_below_zero() {
    let p = ChemostatParams {
        s_in: 1.0,
        dilution: 3.0,
        a: 0.6,
        m: 3.0,
        b: 2.0,
        nu: 0.2,
        c: 1.5,
        r1: 0.6,
        r2: 0.4,
        alpha: 1.5,
    };
    let grid = TimeGrid::spanning(0.0, 20.0, 1e-3).unwrap();
    let init = State3::new(5.0, 2.5, 2.5);
    let (mut dipped, mut completed) = (0, 0);
    for seed in 0..10 {
        let w = sample_wiener_path(seed, grid);
        let tr = match integrate_heun_stratonovich(
            |y: &State3| drift_stratonovich(y, &p),
            |y: &State3| diffusion(y, &p),
            &w,
            init,
            grid,
        ) {
            Ok(tr) => tr,
            // the explicit step can jump across s = -a; that must surface as a singularity
            Err(Error::Integration { reason, .. }) => {
                assert!(
                    matches!(reason, StepFailure::Singular { s } if s <= -p.a),
                    "{reason:?}"
                );
                continue;
            }
            Err(e) => panic!("{e:?}"),
        };
        completed += 1;
        let rep = positivity_diagnostics(&tr, &p);
        assert!(rep.above_singularity, "{}", rep.min_s);
        if !rep.clean() {
            dipped += 1;
            assert!(rep.min_s < 0.0);
            let (a, b) = rep.negative_intervals[0];
            assert!(a <= b && rep.min_s_time >= rep.negative_intervals[0].0);
        }
        let z = ou_driven_by(&w, OUParams::new(1.0, 1.0).unwrap()).unwrap();
        let sk = tr
            .map_states(|t, y| Ok(to_sigma_kappa(y, z.value_at(t)?, p.alpha, p.s_in)))
            .unwrap();
        let cond = sigma_condition_report(&sk, &z, &p).unwrap();
        assert!(cond.checked > 0);
        assert!(cond.violations <= cond.checked);
    }
    assert!(completed >= 5);
    assert!(dipped * 2 > completed, "{dipped} of {completed}");
}
