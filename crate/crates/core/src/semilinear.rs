//! Time integration of the full reaction-diffusion system.
//!
//! The coupled linear part is handled exactly by the per-mode propagator;
//! the reaction terms are advanced by classical RK4 in the integrating-factor
//! variables (Lawson's method). With the reaction switched off a step is the
//! exact linear flow.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::grid::{FieldPair, SpectralGrid, SpectrumPair};
use crate::params::{ExchangerParams, Kappa, ReactionParams};
use crate::spectral::{build_symbols, PropagatorTable, SymbolTable};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_DT_MIN: f64 = 1e-10;
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 1e6;
pub const DEFAULT_DECAY_MARGIN: f64 = 0.5;
/// A step whose sup-norm grows by more than this factor is rejected.
pub const MAX_STEP_GROWTH: f64 = 1.2;
/// Steps growing less than this factor let the step size recover.
const CALM_GROWTH: f64 = 1.05;
const REGROW: f64 = 1.5;
/// Number of final steps that must grow monotonically for a dt collapse to
/// count as blow-up.
pub const MONOTONE_WINDOW: usize = 10;

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub grid: SpectralGrid,
    pub exchanger: ExchangerParams,
    pub reaction: ReactionParams,
    pub data0: FieldPair,
    pub t_end: f64,
    pub dt_init: f64,
    /// Ceiling for step-size recovery; defaults to `dt_init`.
    pub dt_max: f64,
    pub dt_min: f64,
    pub blowup_threshold: f64,
    pub decay_margin: f64,
    pub dealias: bool,
    /// Times at which full fields are kept. Steps are shortened to land on them.
    pub snapshot_times: Vec<f64>,
}

impl SimulationConfig {
    /// Defaults for everything but the physics and the horizon.
    pub fn new(
        grid: SpectralGrid,
        exchanger: ExchangerParams,
        reaction: ReactionParams,
        data0: FieldPair,
        t_end: f64,
    ) -> Self {
        let sup0 = data0.sup_u().max(data0.sup_v());
        let blowup_threshold = if sup0 > 0.0 {
            DEFAULT_THRESHOLD_FACTOR * sup0
        } else {
            DEFAULT_THRESHOLD_FACTOR
        };
        Self {
            grid,
            exchanger,
            reaction,
            data0,
            t_end,
            dt_init: DEFAULT_DT,
            dt_max: DEFAULT_DT,
            dt_min: DEFAULT_DT_MIN,
            blowup_threshold,
            decay_margin: DEFAULT_DECAY_MARGIN,
            dealias: false,
            snapshot_times: Vec::new(),
        }
    }

    pub fn with_dt(mut self, dt_init: f64, dt_max: f64) -> Self {
        self.dt_init = dt_init;
        self.dt_max = dt_max;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("t_end", self.t_end)?;
        positive("dt_init", self.dt_init)?;
        positive("dt_max", self.dt_max)?;
        positive("dt_min", self.dt_min)?;
        positive("blowup_threshold", self.blowup_threshold)?;
        positive("decay_margin", self.decay_margin)?;
        if self.dt_min >= self.dt_init {
            return Err(Error::InvalidParameter {
                name: "dt_min",
                constraint: format!("must be below dt_init = {}", self.dt_init),
            });
        }
        if self.dt_max < self.dt_init {
            return Err(Error::InvalidParameter {
                name: "dt_max",
                constraint: format!("must be at least dt_init = {}", self.dt_init),
            });
        }
        if self.data0.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "data has {} samples, grid has {}",
                self.data0.len(),
                self.grid.len()
            )));
        }
        if self.data0.min_entry() < 0.0 || self.data0.u.iter().chain(&self.data0.v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "data0",
                constraint: "entries must be finite and non-negative".into(),
            });
        }
        let sup0 = self.data0.sup_u().max(self.data0.sup_v());
        if self.blowup_threshold <= sup0 {
            return Err(Error::InvalidParameter {
                name: "blowup_threshold",
                constraint: format!("must exceed the initial sup-norm {sup0}"),
            });
        }
        if self.snapshot_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "snapshot_times",
                constraint: "must be finite and >= 0".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationRow {
    pub t: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    /// Step that led to this row (0 for the initial row).
    pub dt: f64,
    /// Smallest entry of either component.
    pub min_entry: f64,
}

impl SimulationRow {
    fn of(t: f64, dt: f64, fields: &FieldPair, grid: &SpectralGrid) -> Self {
        Self {
            t,
            sup_u: fields.sup_u(),
            sup_v: fields.sup_v(),
            mass_u: grid.integrate(&fields.u),
            mass_v: grid.integrate(&fields.v),
            dt,
            min_entry: fields.min_entry(),
        }
    }

    pub fn sup(&self) -> f64 {
        self.sup_u.max(self.sup_v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    GlobalDecay,
    BlowUp { t_star: f64 },
    Inconclusive,
}

impl Outcome {
    pub fn t_star(&self) -> Option<f64> {
        match self {
            Outcome::BlowUp { t_star } => Some(*t_star),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::GlobalDecay => "GLOBAL_DECAY",
            Outcome::BlowUp { .. } => "BLOW_UP",
            Outcome::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::BlowUp { t_star } => write!(f, "BLOW_UP t_star={t_star:.16e}"),
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub fields: FieldPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub rows: Vec<SimulationRow>,
    pub outcome: Outcome,
    pub snapshots: Vec<Snapshot>,
}

impl SimulationTrace {
    pub fn last(&self) -> &SimulationRow {
        self.rows.last().expect("trace always holds the initial row")
    }
}

/// Pointwise reaction terms `(max(u,0)^(1+p), kappa max(v,0)^(1+q))`.
pub fn reaction_terms(fields: &FieldPair, reaction: &ReactionParams) -> FieldPair {
    let pu = 1.0 + reaction.p();
    let pv = 1.0 + reaction.q();
    let u = fields.u.iter().map(|&x| x.max(0.0).powf(pu)).collect();
    let v = match reaction.kappa() {
        Kappa::Zero => vec![0.0; fields.len()],
        Kappa::One => fields.v.iter().map(|&x| x.max(0.0).powf(pv)).collect(),
    };
    FieldPair { u, v }
}

/// Integrating-factor RK4 stepper. Propagator tables are cached per step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: SpectralGrid,
    symbols: SymbolTable,
    params: ExchangerParams,
    reaction: Option<ReactionParams>,
    mask: Option<Vec<bool>>,
    cache: HashMap<u64, Arc<(PropagatorTable, PropagatorTable)>>,
}

const CACHE_LIMIT: usize = 64;

impl Stepper {
    /// `reaction = None` switches the nonlinearity off.
    pub fn new(grid: &SpectralGrid, params: &ExchangerParams, reaction: Option<ReactionParams>, dealias: bool) -> Self {
        Self {
            grid: grid.clone(),
            symbols: build_symbols(grid, params),
            params: *params,
            reaction,
            mask: dealias.then(|| grid.two_thirds_mask()),
            cache: HashMap::new(),
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    fn tables(&mut self, dt: f64) -> Arc<(PropagatorTable, PropagatorTable)> {
        if self.cache.len() > CACHE_LIMIT {
            self.cache.clear();
        }
        let (symbols, params) = (&self.symbols, &self.params);
        self.cache
            .entry(dt.to_bits())
            .or_insert_with(|| {
                Arc::new((
                    PropagatorTable::new(dt, symbols, params),
                    PropagatorTable::new(0.5 * dt, symbols, params),
                ))
            })
            .clone()
    }

    fn nonlinear(&self, state: &SpectrumPair, reaction: &ReactionParams) -> Result<SpectrumPair> {
        let fields = state.to_fields(&self.grid)?;
        let mut out = reaction_terms(&fields, reaction).to_spectrum(&self.grid)?;
        if let Some(mask) = &self.mask {
            let zero = Complex64::new(0.0, 0.0);
            for (i, keep) in mask.iter().enumerate() {
                if !keep {
                    out.u_hat[i] = zero;
                    out.v_hat[i] = zero;
                }
            }
        }
        Ok(out)
    }

    /// One step of size `dt`. Non-finite output is reported as `Overflow`
    /// with `t` the step size.
    pub fn step(&mut self, state: &SpectrumPair, dt: f64) -> Result<SpectrumPair> {
        let tables = self.tables(dt);
        let (full, half) = (&tables.0, &tables.1);
        let Some(reaction) = self.reaction else {
            return Ok(full.apply(state));
        };
        let axpy = |a: &SpectrumPair, h: f64, b: &SpectrumPair| SpectrumPair {
            u_hat: a.u_hat.iter().zip(&b.u_hat).map(|(x, y)| x + y * h).collect(),
            v_hat: a.v_hat.iter().zip(&b.v_hat).map(|(x, y)| x + y * h).collect(),
        };
        let eu_half = half.apply(state);
        let k1 = self.nonlinear(state, &reaction)?;
        let k1_half = half.apply(&k1);
        let k2 = self.nonlinear(&axpy(&eu_half, 0.5 * dt, &k1_half), &reaction)?;
        let k3 = self.nonlinear(&axpy(&eu_half, 0.5 * dt, &k2), &reaction)?;
        let k4 = self.nonlinear(&axpy(&full.apply(state), dt, &half.apply(&k3)), &reaction)?;
        // E_h u + h/6 (E_h k1 + 2 E_{h/2}(k2 + k3) + k4)
        let mid = half.apply(&axpy(&k2, 1.0, &k3));
        let mut out = full.apply(&axpy(state, dt / 6.0, &k1));
        for i in 0..out.len() {
            out.u_hat[i] += dt / 6.0 * (2.0 * mid.u_hat[i] + k4.u_hat[i]);
            out.v_hat[i] += dt / 6.0 * (2.0 * mid.v_hat[i] + k4.v_hat[i]);
        }
        if out.u_hat.iter().chain(&out.v_hat).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Overflow { t: dt });
        }
        Ok(out)
    }
}

/// A single integrating-factor step, building the propagators on the fly.
pub fn step(
    state: &SpectrumPair,
    dt: f64,
    grid: &SpectralGrid,
    params: &ExchangerParams,
    reaction: Option<&ReactionParams>,
) -> Result<SpectrumPair> {
    positive("dt", dt)?;
    Stepper::new(grid, params, reaction.copied(), false).step(state, dt)
}

/// Adaptive driver state shared by single and lockstep runs.
struct Clock {
    t: f64,
    dt: f64,
    dt_max: f64,
    dt_min: f64,
    t_end: f64,
    pending: Vec<f64>,
}

impl Clock {
    fn new(config: &SimulationConfig) -> Self {
        let mut pending: Vec<f64> = config
            .snapshot_times
            .iter()
            .copied()
            .filter(|t| *t <= config.t_end)
            .collect();
        pending.sort_by(f64::total_cmp);
        pending.dedup();
        pending.reverse();
        Self {
            t: 0.0,
            dt: config.dt_init,
            dt_max: config.dt_max,
            dt_min: config.dt_min,
            t_end: config.t_end,
            pending,
        }
    }

    fn next_step(&self) -> f64 {
        let mut stop = self.t_end;
        if let Some(&next) = self.pending.last() {
            stop = stop.min(next);
        }
        let h = self.dt.min(stop - self.t);
        // avoid a sliver step right after this one
        if stop - self.t - h < 1e-3 * h {
            stop - self.t
        } else {
            h
        }
    }

    fn advance(&mut self, h: f64, growth: f64) -> bool {
        let near = |target: f64| (self.t + h - target).abs() <= 1e-12 * target.max(1.0);
        let hit = self.pending.last().is_some_and(|&next| near(next));
        self.t = if hit {
            self.pending.pop().unwrap()
        } else if near(self.t_end) {
            self.t_end
        } else {
            self.t + h
        };
        if growth < CALM_GROWTH {
            self.dt = (self.dt * REGROW).min(self.dt_max);
        }
        hit
    }

    fn halve(&mut self, h: f64) -> bool {
        self.dt = 0.5 * h;
        self.dt >= self.dt_min
    }

    fn done(&self) -> bool {
        self.t >= self.t_end
    }

    /// Snapshots requested at `t = 0`.
    fn take_initial(&mut self) -> bool {
        if self.pending.last() == Some(&0.0) {
            self.pending.pop();
            true
        } else {
            false
        }
    }
}

fn monotone_growth(recent: &[f64]) -> bool {
    recent.len() > MONOTONE_WINDOW && recent[recent.len() - MONOTONE_WINDOW - 1..].windows(2).all(|w| w[1] > w[0])
}

fn classify_end(rows: &[SimulationRow], sup0: f64, margin: f64, t_end: f64) -> Outcome {
    let last = rows.last().unwrap().sup();
    let tail: Vec<f64> = rows.iter().filter(|r| r.t >= 0.75 * t_end).map(|r| r.sup()).collect();
    let non_increasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    if last < margin * sup0 && non_increasing {
        Outcome::GlobalDecay
    } else {
        Outcome::Inconclusive
    }
}

pub fn simulate(config: &SimulationConfig) -> Result<SimulationTrace> {
    config.validate()?;
    let grid = &config.grid;
    let mut clock = Clock::new(config);
    let mut fields = config.data0.clone();
    let sup0 = fields.sup_u().max(fields.sup_v());
    let mut rows = vec![SimulationRow::of(0.0, 0.0, &fields, grid)];
    let mut snapshots = Vec::new();
    if clock.take_initial() {
        snapshots.push(Snapshot { t: 0.0, fields: fields.clone() });
    }
    if sup0 == 0.0 {
        // the zero state is an equilibrium
        for t in clock.pending.iter().rev() {
            snapshots.push(Snapshot {
                t: *t,
                fields: fields.clone(),
            });
        }
        rows.push(SimulationRow::of(config.t_end, config.t_end, &fields, grid));
        return Ok(SimulationTrace {
            rows,
            outcome: Outcome::GlobalDecay,
            snapshots,
        });
    }
    let mut stepper = Stepper::new(grid, &config.exchanger, Some(config.reaction), config.dealias);
    let mut state = fields.to_spectrum(grid)?;
    let mut recent = vec![sup0];
    let mut current = sup0;
    let outcome = loop {
        if clock.done() {
            break classify_end(&rows, sup0, config.decay_margin, config.t_end);
        }
        let h = clock.next_step();
        let attempt = stepper.step(&state, h).and_then(|s| {
            let f = s.to_fields(grid)?;
            Ok((s, f))
        });
        let accepted = match attempt {
            Ok((s, f)) => {
                let sup = f.sup_u().max(f.sup_v());
                if sup.is_finite() && sup <= MAX_STEP_GROWTH * current {
                    Some((s, f, sup))
                } else {
                    None
                }
            }
            Err(Error::Overflow { .. }) => None,
            Err(e) => return Err(e),
        };
        let Some((s, f, sup)) = accepted else {
            if !clock.halve(h) {
                break if monotone_growth(&recent) {
                    Outcome::BlowUp { t_star: clock.t }
                } else {
                    Outcome::Inconclusive
                };
            }
            continue;
        };
        let growth = sup / current;
        let hit = clock.advance(h, growth);
        state = s;
        fields = f;
        current = sup;
        recent.push(sup);
        if recent.len() > MONOTONE_WINDOW + 1 {
            recent.remove(0);
        }
        rows.push(SimulationRow::of(clock.t, h, &fields, grid));
        if hit {
            snapshots.push(Snapshot {
                t: clock.t,
                fields: fields.clone(),
            });
        }
        if sup >= config.blowup_threshold {
            break Outcome::BlowUp { t_star: clock.t };
        }
    };
    Ok(SimulationTrace {
        rows,
        outcome,
        snapshots,
    })
}

/// Runs two configurations on one shared step sequence (a step is accepted
/// only when both runs accept it) and returns their snapshots at the common
/// snapshot times, stopping as soon as either run crosses its threshold.
pub fn simulate_lockstep(a: &SimulationConfig, b: &SimulationConfig) -> Result<Vec<(Snapshot, Snapshot)>> {
    a.validate()?;
    b.validate()?;
    if a.grid != b.grid {
        return Err(Error::GridMismatch("lockstep runs need the same grid".into()));
    }
    let grid = &a.grid;
    let mut clock = Clock::new(a);
    clock.t_end = a.t_end.min(b.t_end);
    clock.pending.retain(|t| *t <= a.t_end.min(b.t_end));
    let mut pairs = Vec::new();
    let (mut fa, mut fb) = (a.data0.clone(), b.data0.clone());
    if clock.take_initial() {
        pairs.push((
            Snapshot { t: 0.0, fields: fa.clone() },
            Snapshot { t: 0.0, fields: fb.clone() },
        ));
    }
    let mut sa = Stepper::new(grid, &a.exchanger, Some(a.reaction), a.dealias);
    let mut sb = Stepper::new(grid, &b.exchanger, Some(b.reaction), b.dealias);
    let (mut xa, mut xb) = (fa.to_spectrum(grid)?, fb.to_spectrum(grid)?);
    let floor = f64::MIN_POSITIVE;
    let (mut ca, mut cb) = (fa.sup_u().max(fa.sup_v()).max(floor), fb.sup_u().max(fb.sup_v()).max(floor));
    while !clock.done() {
        let h = clock.next_step();
        let try_one = |st: &mut Stepper, x: &SpectrumPair, cur: f64| -> Result<Option<(SpectrumPair, FieldPair, f64)>> {
            match st.step(x, h) {
                Ok(s) => {
                    let f = s.to_fields(grid)?;
                    let sup = f.sup_u().max(f.sup_v());
                    Ok((sup.is_finite() && sup <= MAX_STEP_GROWTH * cur).then_some((s, f, sup)))
                }
                Err(Error::Overflow { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        };
        match (try_one(&mut sa, &xa, ca)?, try_one(&mut sb, &xb, cb)?) {
            (Some((s1, f1, u1)), Some((s2, f2, u2))) => {
                let growth = (u1 / ca).max(u2 / cb);
                let hit = clock.advance(h, growth);
                (xa, fa, ca, xb, fb, cb) = (s1, f1, u1.max(floor), s2, f2, u2.max(floor));
                if ca >= a.blowup_threshold || cb >= b.blowup_threshold {
                    break;
                }
                if hit {
                    pairs.push((
                        Snapshot { t: clock.t, fields: fa.clone() },
                        Snapshot { t: clock.t, fields: fb.clone() },
                    ));
                }
            }
            _ => {
                if !clock.halve(h) {
                    break;
                }
            }
        }
    }
    Ok(pairs)
}

/// Largest pointwise excess of the first run over the second at shared
/// sample times, `max(u_a - u_b, v_a - v_b)`.
pub fn max_excess(pairs: &[(Snapshot, Snapshot)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::ComparisonWindowEmpty);
    }
    Ok(pairs
        .iter()
        .flat_map(|(x, y)| {
            x.fields
                .u
                .iter()
                .zip(&y.fields.u)
                .chain(x.fields.v.iter().zip(&y.fields.v))
                .map(|(a, b)| a - b)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Runs the `kappa = 0` and `kappa = 1` versions of one problem and returns
/// how far the first ever rises above the second.
pub fn comparison_check(without_v: &SimulationConfig, with_v: &SimulationConfig) -> Result<f64> {
    if without_v.reaction.kappa() != Kappa::Zero || with_v.reaction.kappa() != Kappa::One {
        return Err(Error::InvalidParameter {
            name: "kappa",
            constraint: "first run needs kappa = 0, second kappa = 1".into(),
        });
    }
    if without_v.data0 != with_v.data0
        || without_v.exchanger != with_v.exchanger
        || without_v.reaction.p() != with_v.reaction.p()
        || without_v.reaction.q() != with_v.reaction.q()
    {
        return Err(Error::InvalidParameter {
            name: "config",
            constraint: "runs must share data, rates and exponents".into(),
        });
    }
    max_excess(&simulate_lockstep(without_v, with_v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataSpec;
    use crate::linear::solve_linear;

    fn setup(n: usize, half: f64) -> (SpectralGrid, ExchangerParams) {
        (SpectralGrid::new(1, n, half).unwrap(), ExchangerParams::unit())
    }

    #[test]
    fn disabled_reaction_is_the_linear_flow() {
        let (grid, _) = setup(256, 16.0);
        let p = ExchangerParams::new(0.7, 1.3, 2.0, 0.5).unwrap();
        let data = DataSpec::gaussian(1.0, 0.4, 1.0).sample(&grid);
        let mut stepper = Stepper::new(&grid, &p, None, false);
        let mut state = data.to_spectrum(&grid).unwrap();
        for _ in 0..10 {
            state = stepper.step(&state, 0.05).unwrap();
        }
        let got = state.to_fields(&grid).unwrap();
        let want = solve_linear(&data, 0.5, &grid, &p).unwrap().total;
        for (a, b) in got.u.iter().zip(&want.u) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let (grid, p) = setup(64, 8.0);
        let r = ReactionParams::new(1.0, 1.0, Kappa::One).unwrap();
        let z = SpectrumPair::zeros(64);
        assert_eq!(step(&z, 0.1, &grid, &p, Some(&r)).unwrap(), z);
        let trace = simulate(&SimulationConfig::new(grid, p, r, FieldPair::zeros(64), 1.0)).unwrap();
        assert_eq!(trace.outcome, Outcome::GlobalDecay);
    }

    #[test]
    fn constant_state_follows_the_ode() {
        // spatially constant data reduces to U' = -U + V + U^2, V' = U - V
        let (grid, p) = setup(16, 4.0);
        let r = ReactionParams::new(1.0, 1.0, Kappa::Zero).unwrap();
        let data = FieldPair::new(vec![0.5; 16], vec![0.25; 16]).unwrap();
        let mut stepper = Stepper::new(&grid, &p, Some(r), false);
        let mut state = data.to_spectrum(&grid).unwrap();
        for _ in 0..100 {
            state = stepper.step(&state, 0.01).unwrap();
        }
        let got = state.to_fields(&grid).unwrap();
        // reference: RK4 with a much finer step
        let (mut u, mut v) = (0.5f64, 0.25f64);
        let f = |u: f64, v: f64| (-u + v + u * u, u - v);
        let h = 1e-4;
        for _ in 0..10_000 {
            let k1 = f(u, v);
            let k2 = f(u + 0.5 * h * k1.0, v + 0.5 * h * k1.1);
            let k3 = f(u + 0.5 * h * k2.0, v + 0.5 * h * k2.1);
            let k4 = f(u + h * k3.0, v + h * k3.1);
            u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        assert!((got.u[3] - u).abs() < 1e-9, "{} vs {u}", got.u[3]);
        assert!((got.v[7] - v).abs() < 1e-9);
    }

    #[test]
    fn outcome_lines() {
        assert_eq!(Outcome::GlobalDecay.to_string(), "GLOBAL_DECAY");
        assert_eq!(Outcome::Inconclusive.to_string(), "INCONCLUSIVE");
        assert!(Outcome::BlowUp { t_star: 1.5 }.to_string().starts_with("BLOW_UP t_star=1.5"));
    }

    #[test]
    fn config_validation() {
        let (grid, p) = setup(64, 8.0);
        let r = ReactionParams::new(1.0, 1.0, Kappa::Zero).unwrap();
        let data = DataSpec::gaussian(1.0, 0.0, 1.0).sample(&grid);
        let mut cfg = SimulationConfig::new(grid, p, r, data, 1.0);
        assert!(cfg.validate().is_ok());
        cfg.dt_min = 1.0;
        assert!(cfg.validate().is_err());
        cfg.dt_min = DEFAULT_DT_MIN;
        cfg.blowup_threshold = 0.5;
        assert!(cfg.validate().is_err());
        cfg.blowup_threshold = 1e6;
        cfg.data0.u[0] = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let (grid, p) = setup(128, 16.0);
        let r = ReactionParams::new(2.0, 2.0, Kappa::Zero).unwrap();
        let data = DataSpec::gaussian(0.1, 0.1, 1.0).sample(&grid);
        let cfg = SimulationConfig::new(grid, p, r, data, 1.0).with_snapshots(vec![0.0, 0.123, 0.5, 1.0]);
        let trace = simulate(&cfg).unwrap();
        let ts: Vec<f64> = trace.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.0, 0.123, 0.5, 1.0]);
        assert_eq!(trace.last().t, 1.0);
        assert!(trace.rows.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn self_comparison_is_exactly_zero() {
        let (grid, p) = setup(64, 8.0);
        let r = ReactionParams::new(1.0, 1.0, Kappa::Zero).unwrap();
        let data = DataSpec::gaussian(0.5, 0.5, 1.0).sample(&grid);
        let cfg = SimulationConfig::new(grid, p, r, data, 0.5).with_snapshots(vec![0.25, 0.5]);
        assert_eq!(max_excess(&simulate_lockstep(&cfg, &cfg).unwrap()).unwrap(), 0.0);
    }
}
