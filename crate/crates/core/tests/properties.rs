use heatex::certificates::{decay_constants, envelope_f, m_zero, mass_functional, ConstantsBundle};
use heatex::data::DataSpec;
use heatex::linear::LinearEvolver;
use heatex::phase::{self, BlurSpec, PhaseGeometry};
use heatex::semilinear::{self, SimulationConfig, Stepper};
use heatex::spectral::{dispersal_asymptotics, mat_mul};
use heatex::{ExchangerParams, Kappa, ModeSymbol, ReactionParams, SpectralGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;
use common::expm;

fn params() -> impl Strategy<Value = ExchangerParams> {
    (0.05..10.0f64, 0.05..10.0f64, 0.05..10.0f64, 0.05..10.0f64)
        .prop_map(|(c, d, mu, nu)| ExchangerParams::new(c, d, mu, nu).unwrap())
}

fn moderate_params() -> impl Strategy<Value = ExchangerParams> {
    (0.3..3.0f64, 0.3..3.0f64, 0.3..3.0f64, 0.3..3.0f64)
        .prop_map(|(c, d, mu, nu)| ExchangerParams::new(c, d, mu, nu).unwrap())
}

fn generator(xi_sq: f64, p: &ExchangerParams, t: f64) -> [[f64; 2]; 2] {
    [
        [-(p.c() * xi_sq + p.mu()) * t, p.nu() * t],
        [p.mu() * t, -(p.d() * xi_sq + p.nu()) * t],
    ]
}

fn max_entry_diff(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    (0..4).map(|k| (a[k / 2][k % 2] - b[k / 2][k % 2]).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn propagator_is_the_matrix_exponential(p in params(), xi in 0.0..5.0f64, t in 0.0..10.0f64) {
        let got = ModeSymbol::new(xi * xi, &p).propagator(t, &p);
        prop_assert!(max_entry_diff(&got, &expm(&generator(xi * xi, &p, t))) < 1e-10);
    }

    #[test]
    fn propagator_semigroup(p in params(), xi in 0.0..5.0f64, t in 0.0..5.0f64, s in 0.0..5.0f64) {
        let m = ModeSymbol::new(xi * xi, &p);
        let product = mat_mul(&m.propagator(t, &p), &m.propagator(s, &p));
        prop_assert!(max_entry_diff(&m.propagator(t + s, &p), &product) < 1e-10);
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant(p in params(), xi in 0.0..20.0f64) {
        let k = xi * xi;
        let m = ModeSymbol::new(k, &p);
        let trace = -(p.c() + p.d()) * k - (p.mu() + p.nu());
        let det = (p.c() * k + p.mu()) * (p.d() * k + p.nu()) - p.mu() * p.nu();
        prop_assert!((m.lambda_plus + m.lambda_minus - trace).abs() <= 1e-12 * trace.abs());
        prop_assert!((m.lambda_plus * m.lambda_minus - det).abs() <= 1e-10 * det.abs().max(1e-300));
        prop_assert!(m.s() > 0.0);
        prop_assert_eq!(m.l(), m.lambda_plus);
    }

    #[test]
    fn evanescent_eigenvalue_bound(p in params(), xi in 0.0..20.0f64) {
        let m = ModeSymbol::new(xi * xi, &p);
        let bound = -((p.c() + p.d()) / 2.0 * xi * xi + p.evanescent_rate());
        prop_assert!(m.lambda_minus <= bound * (1.0 - 1e-14));
    }

    #[test]
    fn projector_coefficient_bounds(p in params(), xi in 0.0..20.0f64) {
        let m = ModeSymbol::new(xi * xi, &p);
        let rho = m.r / m.sqrt_s;
        prop_assert!((1.0 + rho).abs() <= 2.0 && (1.0 - rho).abs() <= 2.0);
        prop_assert!(p.nu() / m.sqrt_s <= (p.nu() / p.mu()).sqrt() * (1.0 + 1e-14));
        prop_assert!(p.mu() / m.sqrt_s <= (p.mu() / p.nu()).sqrt() * (1.0 + 1e-14));
    }

    #[test]
    fn projectors_split_the_identity(p in params(), xi in 0.0..20.0f64) {
        let (pp, ee) = ModeSymbol::new(xi * xi, &p).projectors(&p);
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                prop_assert!((pp[i][j] + ee[i][j] - id).abs() < 1e-14);
            }
        }
        let scale = 1.0 + (p.mu() / p.nu()).max(p.nu() / p.mu());
        prop_assert!(max_entry_diff(&mat_mul(&pp, &pp), &pp) < 1e-12 * scale);
        prop_assert!(max_entry_diff(&mat_mul(&ee, &ee), &ee) < 1e-12 * scale);
    }

    #[test]
    fn dispersal_symbol_shape(p in params(), a in 0.0..10.0f64, b in 0.0..10.0f64) {
        prop_assert_eq!(ModeSymbol::at_radius(0.0, &p).l(), 0.0);
        let (lo, hi) = (a.min(b), a.max(b));
        let (l_lo, l_hi) = (ModeSymbol::at_radius(lo, &p).l(), ModeSymbol::at_radius(hi, &p).l());
        prop_assert!(l_hi <= l_lo);
        if hi > 0.0 {
            prop_assert!(l_hi < 0.0);
        }
    }

    #[test]
    fn dispersal_slopes(p in params()) {
        let (low, high) = dispersal_asymptotics(&p);
        let slope = |xi: f64| -ModeSymbol::at_radius(xi, &p).l() / (xi * xi);
        prop_assert!((slope(1e-3) / low - 1.0).abs() < 0.01);
        prop_assert!((slope(1e3) / high - 1.0).abs() < 0.01);
    }

    #[test]
    fn mode_zero_conserves_mass(p in params(), t in 0.0..50.0f64) {
        let m = ModeSymbol::new(0.0, &p).propagator(t, &p);
        prop_assert!((m[0][0] + m[1][0] - 1.0).abs() < 1e-13);
        prop_assert!((m[0][1] + m[1][1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn envelope_solves_its_ode(p in 2.5..6.0f64, ell in 0.1..3.0f64, frac in 0.3..0.99f64, t in 0.01..10.0f64) {
        let reaction = ReactionParams::new(p, p, Kappa::Zero).unwrap();
        let consts = ConstantsBundle::with_ell(1, ell, ell);
        let m = frac * m_zero(&reaction, &consts).unwrap();
        let f = |s: f64| envelope_f(s, m, &reaction, &consts).unwrap();
        let h = 1e-4 * (1.0 + t);
        let fd = (f(t + h) - f(t - h)) / (2.0 * h);
        let rhs = f(t).powf(1.0 + p) * (ell * m).powf(p) * (1.0 + t).powf(-p / 2.0);
        // below this the difference quotient of F ~ 1 is roundoff
        prop_assume!(rhs > 1e-5);
        prop_assert!(((fd - rhs) / rhs).abs() < 1e-6);
        prop_assert!(f(t + h) >= f(t));
    }

    #[test]
    fn threshold_decreases_with_linear_constant(p in 2.5..8.0f64, a in 0.1..3.0f64, b in 0.1..3.0f64) {
        prop_assume!((a - b).abs() > 1e-6);
        for kappa in [Kappa::Zero, Kappa::One] {
            let r = ReactionParams::new(p, p, kappa).unwrap();
            let m = |ell| m_zero(&r, &ConstantsBundle::with_ell(1, ell, ell)).unwrap();
            prop_assert!((m(a.min(b)) >= m(a.max(b))));
        }
    }

    #[test]
    fn mass_functional_is_linear(a in 0.01..5.0f64, w in 0.2..3.0f64, dim in 1usize..=2) {
        let one = mass_functional(&DataSpec::gaussian(a, a, w), dim).unwrap();
        let two = mass_functional(&DataSpec::gaussian(2.0 * a, 2.0 * a, w), dim).unwrap();
        prop_assert!((two.m - 2.0 * one.m).abs() <= 1e-12 * two.m);
        prop_assert!((one.m - (one.u0_l1 + one.v0_l1 + one.u0_hat_l1 + one.v0_hat_l1)).abs() <= 1e-12 * one.m);
    }

    #[test]
    fn linear_constants_floor(p in params(), dim in 1usize..=2) {
        let c = decay_constants(&p, dim).unwrap();
        let floor = 2f64.powf(dim as f64 / 2.0) * (2.0 * std::f64::consts::PI).powi(-(dim as i32));
        prop_assert!(c.ell >= floor && c.ell_prime >= floor);
    }

    #[test]
    fn blurred_data_ratio(p in params(), eps in 1e-4..2.0f64, eta in 0.1..3.0f64, r in 0.1..3.0f64, dim in 1usize..=2) {
        let blur = BlurSpec::new(dim, eps, eta, r).unwrap();
        prop_assert_eq!(blur.lambda, 2.0 * dim as f64 * eps);
        let (u0, v0) = phase::blurred_data(&blur, &p);
        prop_assert!(u0 > 0.0 && u0 <= eta);
        prop_assert!((v0 / u0 - p.mu() / (2.0 * p.nu())).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_sits_on_both_isoclines(p in params(), power in 0.3..3.0f64, lambda in 1e-6..0.1f64) {
        let g = PhaseGeometry::new(lambda, &p, power);
        let (fp, fq) = phase::vector_field(g.e1.0, g.e1.1, lambda, &p, power);
        let scale = g.e1.0 * (p.mu() + p.nu() + 1.0);
        prop_assert!(fp.abs() <= 1e-12 * scale && fq.abs() <= 1e-12 * scale);
        let larger = PhaseGeometry::new(2.0 * lambda, &p, power);
        prop_assert!(larger.chi > g.chi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linear_flow_keeps_positivity(p in moderate_params(), au in 0.0..2.0f64, av in 0.0..2.0f64, w in 0.3..2.0f64, t in 0.0..20.0f64) {
        let grid = SpectralGrid::new(1, 1024, 32.0).unwrap();
        let data = DataSpec::gaussian(au, av, w).sample(&grid);
        let evolver = LinearEvolver::new(&data, &grid, &p).unwrap();
        let start = evolver.total(0.0).unwrap();
        let back = start.u.iter().zip(&data.u).chain(start.v.iter().zip(&data.v));
        prop_assert!(back.map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-12);
        prop_assert!(evolver.total(t).unwrap().min_entry() >= -1e-10);
    }

    #[test]
    fn linear_steps_conserve_mass(p in moderate_params(), a in 0.1..2.0f64, w in 0.3..2.0f64) {
        let grid = SpectralGrid::new(1, 1024, 32.0).unwrap();
        let data = DataSpec::gaussian(a, 0.5 * a, w).sample(&grid);
        let mass = |f: &heatex::FieldPair| grid.integrate(&f.u) + grid.integrate(&f.v);
        let m0 = mass(&data);
        let mut stepper = Stepper::new(&grid, &p, None, false);
        let mut state = data.to_spectrum(&grid).unwrap();
        for _ in 0..50 {
            state = stepper.step(&state, 0.1).unwrap();
        }
        prop_assert!((mass(&state.to_fields(&grid).unwrap()) - m0).abs() <= 1e-12 * m0);
    }

    #[test]
    fn reaction_raises_mass_and_keeps_positivity(p in moderate_params(), power in 0.5..2.0f64, a in 0.1..0.8f64, w in 0.5..2.0f64) {
        let grid = SpectralGrid::new(1, 1024, 32.0).unwrap();
        let reaction = ReactionParams::new(power, power, Kappa::Zero).unwrap();
        let data = DataSpec::gaussian(a, a, w).sample(&grid);
        let config = SimulationConfig::new(grid, p, reaction, data, 3.0);
        let trace = semilinear::simulate(&config).unwrap();
        let masses: Vec<f64> = trace.rows.iter().map(|r| r.mass_u + r.mass_v).collect();
        prop_assert!(masses.windows(2).all(|m| m[1] >= m[0] * (1.0 - 1e-12)));
        // the last steps before the threshold resolve a spike of height up to 1e6 sup0
        let sup0 = trace.rows[0].sup();
        let resolved = trace.rows.iter().take_while(|r| r.sup() <= 10.0 * sup0);
        prop_assert!(resolved.map(|r| r.min_entry).fold(0.0, f64::min) >= -1e-8);
    }

    #[test]
    fn larger_data_larger_solution(p in moderate_params(), power in 0.5..2.0f64, a in 0.1..0.6f64, extra in 0.05..0.5f64, w in 0.5..2.0f64) {
        let grid = SpectralGrid::new(1, 1024, 32.0).unwrap();
        let reaction = ReactionParams::new(power, power, Kappa::Zero).unwrap();
        let times: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
        let make = |amp: f64| {
            let data = DataSpec::gaussian(amp, amp, w).sample(&grid);
            SimulationConfig::new(grid.clone(), p, reaction, data, 2.0).with_snapshots(times.clone())
        };
        let pairs = semilinear::simulate_lockstep(&make(a), &make(a + extra)).unwrap();
        prop_assert!(semilinear::max_excess(&pairs).unwrap() <= 1e-8);
    }

    #[test]
    fn region_is_forward_invariant(seed in 0u64..1000) {
        let prm = ExchangerParams::unit();
        let g = PhaseGeometry::new(0.03125, &prm, 1.0);
        let starts = phase::sample_omega(&g, 4.0, 5, &mut ChaCha8Rng::seed_from_u64(seed));
        let report = phase::invariance_check(&starts, 0.03125, &prm, 1.0, 1e3).unwrap();
        prop_assert_eq!(report.exits, 0);
        prop_assert_eq!(report.blowups, 5);
    }
}
