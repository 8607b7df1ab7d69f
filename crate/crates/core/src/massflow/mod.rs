//! Mass-flow particle simulation of the mass-weighted measure `ν(t, dx)`.
//!
//! `N` particles of weight `1/N` carry masses `x_i`. Particle `i` jumps
//!
//! * to `x_i + x_J` at rate `x_i`, with the partner `J` uniform on all `N`
//!   particles (including `i` itself), and
//! * to `U · x_i` with `U ~ Uniform(0, 1)` at rate `k · x_i`.
//!
//! The total rate is therefore `R = (1 + k) Σ_i x_i`. Averaged over the
//! empirical measure this generator is exactly the weak form
//! `∫∫ x [ϑ(x+y) - ϑ(x)] ν ν + k ∫ [∫_0^x ϑ - x ϑ(x)] ν`; no particle is ever
//! created or removed, so the total `ν`-mass stays at one.

mod fenwick;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

pub use fenwick::Fenwick;

use crate::error::{CoreError, Result};
use crate::measure::MeasureSpec;

/// Events between full rebuilds of the prefix-sum tree.
pub const REBUILD_EVERY: u64 = 1_000_000;
const STALL_RATE: f64 = 1e-300;

/// SplitMix64 mixing of a base seed with a replicate index.
pub fn derive_seed(base: u64, replicate: u64) -> u64 {
    let mut z = base ^ replicate.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Coagulation { partner: usize },
    Fragmentation { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub waiting: f64,
    pub particle: usize,
    pub kind: EventKind,
    pub old_mass: f64,
    pub new_mass: f64,
}

/// Safety valves for runs that may blow up (the `k = 0` baseline).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunLimits {
    pub event_cap: Option<u64>,
    /// Stop once the mean mass exceeds this multiple of its initial value.
    pub mean_cap_factor: Option<f64>,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits { event_cap: Some(1_000_000_000), mean_cap_factor: Some(1e3) }
    }
}

/// Scalar statistics of the particle cloud, sampled by `run_until`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observer {
    /// Empirical Laplace transform at `s`.
    Laplace(f64),
    /// Empirical first moment `(1/N) Σ x_i`.
    Mean,
    /// Fraction of particles with mass at most `x / t`.
    ScaledCdf(f64),
}

impl Observer {
    pub fn name(&self) -> String {
        match self {
            Observer::Laplace(s) => format!("laplace_s{s}"),
            Observer::Mean => "mean".to_string(),
            Observer::ScaledCdf(x) => format!("scaled_cdf_x{x}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub time: f64,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSeries {
    pub observer: Observer,
    pub points: Vec<Observation>,
}

#[derive(Debug, Clone)]
pub struct ObservationLog {
    pub series: Vec<ObserverSeries>,
    pub event_count: u64,
    pub final_time: f64,
    pub wall_seconds: f64,
}

impl ObservationLog {
    /// Equality of everything except the wall-clock time.
    pub fn same_trajectory(&self, other: &ObservationLog) -> bool {
        self.series == other.series && self.event_count == other.event_count && self.final_time == other.final_time
    }
}

fn mean_and_se(values: impl Iterator<Item = f64>, n: usize) -> (f64, f64) {
    let (mut sum, mut sq) = (0.0, 0.0);
    for v in values {
        sum += v;
        sq += v * v;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / nf).sqrt())
}

/// `N`-particle state of the mass-flow process.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    masses: Vec<f64>,
    tree: Fenwick,
    mass_sum: f64,
    /// Largest tree total since the last rebuild; incremental updates carry
    /// absolute error relative to this, so a large drop forces a rebuild.
    peak_sum: f64,
    initial_mean: f64,
    time: f64,
    k: f64,
    rng: ChaCha8Rng,
    events: u64,
    since_rebuild: u64,
}

impl ParticleSystem {
    /// Draws `n` i.i.d. masses from `measure`. Atomic measures use
    /// proportional allocation with the remainder drawn at random.
    pub fn init_from_measure(measure: &MeasureSpec, n: usize, k: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::Domain("particle count must be at least 1".into()));
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(CoreError::Domain(format!("k must be non-negative, got {k}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let masses = match measure.atoms() {
            Some(atoms) => {
                let mut out = Vec::with_capacity(n);
                let mut fracs = Vec::with_capacity(atoms.len());
                for a in atoms {
                    let share = a.weight * n as f64;
                    let whole = share.floor() as usize;
                    out.extend(std::iter::repeat_n(a.mass, whole));
                    fracs.push(share - whole as f64);
                }
                let frac_total: f64 = fracs.iter().sum();
                while out.len() < n {
                    let mut u = rng.gen::<f64>() * frac_total;
                    let mut pick = atoms.len() - 1;
                    for (i, f) in fracs.iter().enumerate() {
                        if u < *f {
                            pick = i;
                            break;
                        }
                        u -= f;
                    }
                    out.push(atoms[pick].mass);
                }
                out.truncate(n);
                out
            }
            None => (0..n).map(|_| measure.sample_continuous(rng.gen::<f64>())).collect::<Result<Vec<_>>>()?,
        };
        Self::from_masses(masses, k, rng)
    }

    /// Builds a system from explicit masses with its own seed.
    pub fn with_masses(masses: Vec<f64>, k: f64, seed: u64) -> Result<Self> {
        Self::from_masses(masses, k, ChaCha8Rng::seed_from_u64(seed))
    }

    fn from_masses(masses: Vec<f64>, k: f64, rng: ChaCha8Rng) -> Result<Self> {
        if masses.is_empty() {
            return Err(CoreError::Domain("particle count must be at least 1".into()));
        }
        if let Some(bad) = masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(CoreError::Measure(format!("particle mass {bad} is not positive")));
        }
        let tree = Fenwick::new(&masses);
        let mass_sum = tree.total();
        let initial_mean = mass_sum / masses.len() as f64;
        Ok(ParticleSystem { masses, tree, mass_sum, peak_sum: mass_sum, initial_mean, time: 0.0, k, rng, events: 0, since_rebuild: 0 })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn event_count(&self) -> u64 {
        self.events
    }

    /// Total `ν`-mass, `N · (1/N)`.
    pub fn total_weight(&self) -> f64 {
        self.masses.len() as f64 * (1.0 / self.masses.len() as f64)
    }

    pub fn mean_mass(&self) -> f64 {
        self.mass_sum / self.masses.len() as f64
    }

    /// Sum of masses held by the prefix tree.
    pub fn indexed_total(&self) -> f64 {
        self.tree.total()
    }

    pub fn total_rate(&self) -> f64 {
        (1.0 + self.k) * self.tree.total()
    }

    fn rebuild(&mut self) {
        self.tree = Fenwick::new(&self.masses);
        self.mass_sum = self.tree.total();
        self.peak_sum = self.mass_sum;
        self.since_rebuild = 0;
    }

    fn draw_waiting(&mut self) -> Result<f64> {
        let rate = self.total_rate();
        if !(rate >= STALL_RATE) {
            return Err(CoreError::Stalled { rate, time: self.time });
        }
        let e: f64 = self.rng.sample(Exp1);
        Ok(e / rate)
    }

    fn jump(&mut self, waiting: f64) -> EventRecord {
        let total = self.tree.total();
        let i = self.tree.find(self.rng.gen::<f64>() * total);
        let old = self.masses[i];
        let coagulate = self.k == 0.0 || self.rng.gen::<f64>() * (1.0 + self.k) < 1.0;
        let (kind, new) = if coagulate {
            let j = self.rng.gen_range(0..self.masses.len());
            (EventKind::Coagulation { partner: j }, old + self.masses[j])
        } else {
            let mut u: f64 = self.rng.gen();
            while u == 0.0 {
                u = self.rng.gen();
            }
            (EventKind::Fragmentation { fraction: u }, old * u)
        };
        self.masses[i] = new;
        self.tree.add(i, new - old);
        self.mass_sum += new - old;
        self.events += 1;
        self.since_rebuild += 1;
        self.peak_sum = self.peak_sum.max(self.mass_sum);
        if self.since_rebuild >= REBUILD_EVERY || self.mass_sum < 0.5 * self.peak_sum {
            self.rebuild();
        }
        EventRecord { time: self.time, waiting, particle: i, kind, old_mass: old, new_mass: new }
    }

    /// Advances to the next event.
    pub fn step(&mut self) -> Result<EventRecord> {
        let waiting = self.draw_waiting()?;
        self.time += waiting;
        Ok(self.jump(waiting))
    }

    /// `(1/N) Σ e^{-s x_i}` and its standard error.
    pub fn empirical_laplace_with_se(&self, s: f64) -> Result<(f64, f64)> {
        if !(s > 0.0) {
            return Err(CoreError::Domain(format!("empirical transform needs s > 0, got {s}")));
        }
        Ok(mean_and_se(self.masses.iter().map(|x| (-s * x).exp()), self.masses.len()))
    }

    /// Unbiased estimator of `L(t, s)` at the current time.
    pub fn empirical_laplace(&self, s: f64) -> Result<f64> {
        Ok(self.empirical_laplace_with_se(s)?.0)
    }

    /// Fraction of particles with mass at most `x / t` for each grid `x`.
    pub fn empirical_scaled_cdf(&self, x_grid: &[f64]) -> Result<Vec<f64>> {
        if !(self.time > 0.0) {
            return Err(CoreError::Domain("scaled distribution needs t > 0".into()));
        }
        let mut sorted = self.masses.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        Ok(x_grid
            .iter()
            .map(|x| {
                let cut = x / self.time;
                sorted.partition_point(|m| *m <= cut) as f64 / n
            })
            .collect())
    }

    pub fn observe(&self, observer: &Observer) -> Result<Observation> {
        let n = self.masses.len();
        let (estimate, std_error) = match *observer {
            Observer::Laplace(s) => self.empirical_laplace_with_se(s)?,
            Observer::Mean => mean_and_se(self.masses.iter().copied(), n),
            Observer::ScaledCdf(x) => {
                let p = self.empirical_scaled_cdf(&[x])?[0];
                (p, (p * (1.0 - p) / n as f64).sqrt())
            }
        };
        Ok(Observation { time: self.time, estimate, std_error })
    }

    fn check_limits(&self, limits: &RunLimits) -> Result<()> {
        let over_events = limits.event_cap.is_some_and(|cap| self.events > cap);
        let over_mean = limits.mean_cap_factor.is_some_and(|f| self.mean_mass() > f * self.initial_mean);
        if over_events || over_mean || !self.mass_sum.is_finite() {
            return Err(CoreError::ExplosionDetected { time: self.time, events: self.events, mean: self.mean_mass() });
        }
        Ok(())
    }

    /// Runs until `t_end`, sampling every observer at each time in
    /// `observe_at` (which must be ascending and inside `(now, t_end]`).
    ///
    /// The state is piecewise constant, so an observation at `τ` sees the
    /// state just before the first event after `τ`. The pending event that
    /// would cross `t_end` is discarded; by memorylessness the next call
    /// redraws it without bias.
    pub fn run_until(
        &mut self,
        t_end: f64,
        observe_at: &[f64],
        observers: &[Observer],
        limits: &RunLimits,
    ) -> Result<ObservationLog> {
        let (log, stop) = self.run_until_partial(t_end, observe_at, observers, limits)?;
        match stop {
            Some(e) => Err(e),
            None => Ok(log),
        }
    }

    /// As [`run_until`](Self::run_until), but an explosion or stall ends the
    /// run early and is returned next to the observations made before it.
    pub fn run_until_partial(
        &mut self,
        t_end: f64,
        observe_at: &[f64],
        observers: &[Observer],
        limits: &RunLimits,
    ) -> Result<(ObservationLog, Option<CoreError>)> {
        if !(t_end > self.time) {
            return Err(CoreError::Domain(format!("t_end = {t_end} is not after the current time {}", self.time)));
        }
        if observe_at.windows(2).any(|w| !(w[0] < w[1]))
            || observe_at.iter().any(|&o| !(o > self.time && o <= t_end))
        {
            return Err(CoreError::Domain("observation times must be ascending within (now, t_end]".into()));
        }
        for o in observers {
            if let Observer::Laplace(s) = o {
                if !(*s > 0.0) {
                    return Err(CoreError::Domain(format!("empirical transform needs s > 0, got {s}")));
                }
            }
        }
        let started = Instant::now();
        let mut series: Vec<ObserverSeries> =
            observers.iter().map(|o| ObserverSeries { observer: *o, points: Vec::new() }).collect();
        let mut next_obs = 0;
        let mut stop = None;
        loop {
            let waiting = match self.draw_waiting() {
                Ok(w) => w,
                Err(e) => {
                    stop = Some(e);
                    break;
                }
            };
            let next_time = self.time + waiting;
            while next_obs < observe_at.len() && observe_at[next_obs] < next_time {
                let saved = self.time;
                self.time = observe_at[next_obs];
                for s in series.iter_mut() {
                    s.points.push(self.observe(&s.observer)?);
                }
                self.time = saved;
                next_obs += 1;
            }
            if next_time > t_end {
                self.time = t_end;
                break;
            }
            self.time = next_time;
            self.jump(waiting);
            if let Err(e) = self.check_limits(limits) {
                stop = Some(e);
                break;
            }
        }
        let log = ObservationLog {
            series,
            event_count: self.events,
            final_time: self.time,
            wall_seconds: started.elapsed().as_secs_f64(),
        };
        Ok((log, stop))
    }
}

/// Test functions `ϑ` for which the weak-form right-hand side is evaluated
/// exactly on an empirical measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `x ↦ e^{-s x}`
    Exp(f64),
    /// `x ↦ min(x, c)`
    Min(f64),
}

impl TestFunction {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Exp(s) => (-s * x).exp(),
            TestFunction::Min(c) => x.min(c),
        }
    }

    /// `∫_0^x ϑ(y) dy - x ϑ(x)`
    fn fragmentation_gain(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Exp(s) => x * crate::special::psi(s * x) - x * (-s * x).exp(),
            TestFunction::Min(c) => {
                let integral = if x <= c { 0.5 * x * x } else { 0.5 * c * c + c * (x - c) };
                integral - x * x.min(c)
            }
        }
    }

    /// Right-hand side of the weak form evaluated on the empirical measure
    /// `(1/N) Σ δ_{x_i}`.
    pub fn weak_form_rhs(&self, masses: &[f64], k: f64) -> f64 {
        let n = masses.len() as f64;
        let frag: f64 = masses.iter().map(|&x| self.fragmentation_gain(x)).sum::<f64>() / n;
        let coag = match *self {
            TestFunction::Exp(s) => {
                let a: f64 = masses.iter().map(|&x| x * (-s * x).exp()).sum();
                let b: f64 = masses.iter().map(|&x| (-s * x).exp_m1()).sum();
                a * b / (n * n)
            }
            TestFunction::Min(c) => {
                let mut sorted = masses.to_vec();
                sorted.sort_by(f64::total_cmp);
                let mut prefix = vec![0.0; sorted.len() + 1];
                for (i, x) in sorted.iter().enumerate() {
                    prefix[i + 1] = prefix[i] + x;
                }
                let mut acc = 0.0;
                for &x in masses {
                    if x >= c {
                        continue;
                    }
                    // partners with x + y < c contribute x + y, the rest c
                    let below = sorted.partition_point(|y| x + y < c);
                    let inner = below as f64 * x + prefix[below] + (sorted.len() - below) as f64 * c;
                    acc += x * (inner - n * x);
                }
                acc / (n * n)
            }
        };
        coag + k * frag
    }
}

/// Runs independent replicates in parallel with seeds from [`derive_seed`].
#[allow(clippy::too_many_arguments)]
pub fn run_replicates(
    measure: &MeasureSpec,
    n: usize,
    k: f64,
    base_seed: u64,
    replicates: usize,
    t_end: f64,
    observe_at: &[f64],
    observers: &[Observer],
    limits: &RunLimits,
) -> Result<Vec<ObservationLog>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut sys = ParticleSystem::init_from_measure(measure, n, k, derive_seed(base_seed, r))?;
            sys.run_until(t_end, observe_at, observers, limits)
        })
        .collect()
}

/// Averages replicate logs point by point; standard errors combine as
/// `sqrt(Σ se²) / R`.
pub fn merge_logs(logs: &[ObservationLog]) -> Option<ObservationLog> {
    let first = logs.first()?;
    let r = logs.len() as f64;
    let series = first
        .series
        .iter()
        .enumerate()
        .map(|(si, s)| ObserverSeries {
            observer: s.observer,
            points: s
                .points
                .iter()
                .enumerate()
                .map(|(pi, p)| {
                    let est = logs.iter().map(|l| l.series[si].points[pi].estimate).sum::<f64>() / r;
                    let var = logs.iter().map(|l| l.series[si].points[pi].std_error.powi(2)).sum::<f64>();
                    Observation { time: p.time, estimate: est, std_error: var.sqrt() / r }
                })
                .collect(),
        })
        .collect();
    Some(ObservationLog {
        series,
        event_count: logs.iter().map(|l| l.event_count).sum(),
        final_time: first.final_time,
        wall_seconds: logs.iter().map(|l| l.wall_seconds).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monodisperse_init_is_exact() {
        let sys = ParticleSystem::init_from_measure(&MeasureSpec::monodisperse(), 1000, 1.0, 7).unwrap();
        assert!(sys.masses().iter().all(|&m| m == 1.0));
        assert!((sys.empirical_laplace(0.7).unwrap() - (-0.7f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn atomic_allocation_is_proportional() {
        let m = MeasureSpec::atomic(&[(0.5, 0.25), (2.0, 0.75)]).unwrap();
        let sys = ParticleSystem::init_from_measure(&m, 1001, 1.0, 3).unwrap();
        let small = sys.masses().iter().filter(|&&x| x == 0.5).count();
        assert!(small == 250 || small == 251);
        assert_eq!(sys.len(), 1001);
    }

    #[test]
    fn seeds_are_deterministic() {
        let m = MeasureSpec::exponential(1.0).unwrap();
        let a = ParticleSystem::init_from_measure(&m, 500, 1.0, 11).unwrap();
        let b = ParticleSystem::init_from_measure(&m, 500, 1.0, 11).unwrap();
        assert_eq!(a.masses(), b.masses());
        let c = ParticleSystem::init_from_measure(&m, 500, 1.0, 12).unwrap();
        assert_ne!(a.masses(), c.masses());
    }

    #[test]
    fn single_particle_without_fragmentation_doubles() {
        let mut sys = ParticleSystem::init_from_measure(&MeasureSpec::monodisperse(), 1, 0.0, 5).unwrap();
        let mut expected = 1.0;
        for _ in 0..10 {
            let ev = sys.step().unwrap();
            expected *= 2.0;
            assert_eq!(ev.new_mass, expected);
            assert_eq!(ev.kind, EventKind::Coagulation { partner: 0 });
        }
    }

    #[test]
    fn fragmentation_frequency_follows_k() {
        let k = 9.0;
        let mut sys = ParticleSystem::init_from_measure(&MeasureSpec::monodisperse(), 200, k, 9).unwrap();
        let mut frag = 0;
        let total = 20_000;
        for _ in 0..total {
            if matches!(sys.step().unwrap().kind, EventKind::Fragmentation { .. }) {
                frag += 1;
            }
        }
        let p = frag as f64 / total as f64;
        let expected = k / (1.0 + k);
        assert!((p - expected).abs() < 4.0 * (expected * (1.0 - expected) / total as f64).sqrt());
    }

    #[test]
    fn weight_and_count_are_conserved() {
        let mut sys = ParticleSystem::init_from_measure(&MeasureSpec::monodisperse(), 1000, 1.0, 1).unwrap();
        sys.run_until(2.0, &[], &[], &RunLimits::default()).unwrap();
        assert_eq!(sys.len(), 1000);
        assert_eq!(sys.total_weight(), 1.0);
        assert!(sys.masses().iter().all(|&m| m > 0.0));
        let direct: f64 = sys.masses().iter().sum();
        assert!(((sys.indexed_total() - direct) / direct).abs() < 1e-12);
    }

    #[test]
    fn observations_fall_on_requested_times() {
        let mut sys = ParticleSystem::init_from_measure(&MeasureSpec::monodisperse(), 500, 1.0, 2).unwrap();
        let log = sys
            .run_until(1.0, &[0.25, 0.5, 1.0], &[Observer::Mean, Observer::Laplace(1.0)], &RunLimits::default())
            .unwrap();
        assert_eq!(log.series.len(), 2);
        let times: Vec<f64> = log.series[0].points.iter().map(|p| p.time).collect();
        assert_eq!(times, vec![0.25, 0.5, 1.0]);
        assert_eq!(sys.time(), 1.0);
    }

    #[test]
    fn runs_are_reproducible() {
        let m = MeasureSpec::monodisperse();
        let run = || {
            let mut sys = ParticleSystem::init_from_measure(&m, 2000, 1.0, 42).unwrap();
            sys.run_until(1.5, &[0.5, 1.5], &[Observer::Mean], &RunLimits::default()).unwrap()
        };
        assert!(run().same_trajectory(&run()));
    }

    #[test]
    fn invalid_run_arguments() {
        let mut sys = ParticleSystem::init_from_measure(&MeasureSpec::monodisperse(), 10, 1.0, 2).unwrap();
        assert!(sys.run_until(0.0, &[], &[], &RunLimits::default()).is_err());
        assert!(sys.run_until(1.0, &[0.5, 0.2], &[], &RunLimits::default()).is_err());
        assert!(ParticleSystem::init_from_measure(&MeasureSpec::monodisperse(), 0, 1.0, 2).is_err());
        let g = MeasureSpec::generic_gamma(2.0, 1.0).unwrap();
        assert!(matches!(ParticleSystem::init_from_measure(&g, 10, 1.0, 2), Err(CoreError::Measure(_))));
    }

    #[test]
    fn min_weak_form_matches_quadratic_sum() {
        let masses = [0.2, 0.7, 1.5, 3.0, 0.05];
        let k = 0.7;
        let c = 1.0;
        let f = TestFunction::Min(c);
        let n = masses.len() as f64;
        let mut coag = 0.0;
        for &x in &masses {
            for &y in &masses {
                coag += x * (f.value(x + y) - f.value(x));
            }
        }
        coag /= n * n;
        let frag: f64 = masses
            .iter()
            .map(|&x| {
                let integral = crate::quad::integrate(|y| f.value(y), 0.0, x, 1e-14, 1e-14).unwrap();
                integral - x * f.value(x)
            })
            .sum::<f64>()
            / n;
        let got = f.weak_form_rhs(&masses, k);
        assert!((got - (coag + k * frag)).abs() < 1e-12);
    }

    #[test]
    fn exp_weak_form_matches_quadratic_sum() {
        let masses = [0.2, 0.7, 1.5, 3.0];
        let f = TestFunction::Exp(0.8);
        let n = masses.len() as f64;
        let mut coag = 0.0;
        for &x in &masses {
            for &y in &masses {
                coag += x * (f.value(x + y) - f.value(x));
            }
        }
        coag /= n * n;
        let frag: f64 = masses
            .iter()
            .map(|&x| crate::quad::integrate(|y| f.value(y), 0.0, x, 1e-14, 1e-14).unwrap() - x * f.value(x))
            .sum::<f64>()
            / n;
        assert!((f.weak_form_rhs(&masses, 2.0) - (coag + 2.0 * frag)).abs() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|r| derive_seed(7, r)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
    }
}
