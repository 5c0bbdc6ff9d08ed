//! Time-marching driver: sensor, viscosity assembly, step-size control and
//! the Runge–Kutta update, with trace recording and snapshot stops.

use crate::basis::ReferenceElement;
use crate::config::{RunConfig, TimeMode};
use crate::diagnostics::{total_entropy, total_integral, RunTrace, TraceRow};
use crate::equations::{ConservationLaw, FluxKind};
use crate::field::{Field, View};
use crate::mesh::Mesh;
use crate::semidisc::SpatialOperator;
use crate::sensor::{sense, SensorConfig, SensorOutput};
use crate::timeint::{compute_dt, operator_split_advance, Integrator, StepControl};
use crate::viscosity::{build_viscosity_field, ViscosityDistribution, ViscosityField};
use crate::{DgError, Result};

/// States beyond this magnitude overflow the quadratic diagnostics and are
/// treated as a blow-up.
const MAX_MAGNITUDE: f64 = 1e150;

/// Remaining intervals shorter than this fraction of the target time are
/// treated as reached.
const TIME_SNAP: f64 = 1e-13;

/// Viscosity field together with the sensor output that produced it.
#[derive(Debug, Clone)]
pub struct ViscosityState {
    pub field: ViscosityField,
    pub sensor: Option<SensorOutput>,
}

impl ViscosityState {
    pub fn flagged(&self) -> usize {
        self.sensor.as_ref().map_or(0, SensorOutput::flagged)
    }
}

/// A solution stored at a requested output time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub field: Field,
    pub viscosity: ViscosityField,
}

/// Evolving solution of one configured run.
#[derive(Debug, Clone)]
pub struct Simulation {
    law: ConservationLaw,
    flux: FluxKind,
    mesh: Mesh,
    elem: ReferenceElement,
    sensor: SensorConfig,
    distribution: Option<ViscosityDistribution>,
    control: StepControl,
    integrator: Integrator,
    mode: TimeMode,
    parallel: bool,
    viscous_quadrature: Option<usize>,
    series_every: usize,
    state: Field,
    time: f64,
    steps: usize,
    last_dt: f64,
    trace: RunTrace,
}

impl Simulation {
    /// Build the discretization and project the scenario's initial data.
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let law = config.scenario.law();
        let mesh = config.build_mesh()?;
        let elem = ReferenceElement::new(config.degree())?;
        let profile = config.scenario.initial_profile(config.preset_variant);
        let state = Field::project(&mesh, &elem, law.n_vars(), |x| profile.conserved(x))?;
        let mut sim = Self {
            law,
            flux: config.flux(),
            mesh,
            elem,
            sensor: config.sensor_config(),
            distribution: config.distribution(),
            control: config.step_control(),
            integrator: config.time.integrator,
            mode: config.time.mode,
            parallel: config.parallel.elements,
            viscous_quadrature: config.viscosity.quadrature_points,
            series_every: config.output.series_every,
            state,
            time: 0.0,
            steps: 0,
            last_dt: 0.0,
            trace: RunTrace::default(),
        };
        sim.operator()?;
        let visc = sim.viscosity_for(sim.state.data())?;
        sim.record(&visc)?;
        Ok(sim)
    }

    pub fn law(&self) -> &ConservationLaw {
        &self.law
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn elem(&self) -> &ReferenceElement {
        &self.elem
    }

    /// Current solution in the nodal view.
    pub fn field(&self) -> &Field {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    pub fn distribution(&self) -> Option<&ViscosityDistribution> {
        self.distribution.as_ref()
    }

    /// Sense `data` and assemble the corresponding viscosity field.
    pub fn viscosity_for(&self, data: &[f64]) -> Result<ViscosityState> {
        let Some(dist) = &self.distribution else {
            return Ok(ViscosityState {
                field: ViscosityField::zeros(self.mesh.n_elements, self.elem.n_nodes()),
                sensor: None,
            });
        };
        let field = self.state.with_data(data.to_vec())?;
        let out = sense(&field, &self.law, &self.sensor, &self.mesh, &self.elem)?;
        Ok(ViscosityState {
            field: build_viscosity_field(&out.strength, dist, &self.mesh, &self.elem)?,
            sensor: Some(out),
        })
    }

    /// Viscosity field of the current state.
    pub fn current_viscosity(&self) -> Result<ViscosityState> {
        self.viscosity_for(self.state.data())
    }

    fn operator(&self) -> Result<SpatialOperator<'_>> {
        SpatialOperator::new(self.law, self.flux, &self.mesh, &self.elem)?
            .with_parallel(self.parallel)
            .with_viscous_quadrature(self.viscous_quadrature)
    }

    fn record(&mut self, visc: &ViscosityState) -> Result<()> {
        let row = TraceRow {
            t: self.time,
            mass: total_integral(&self.state, &self.elem, &self.mesh),
            entropy: total_entropy(&self.state, &self.law, &self.elem, &self.mesh)?,
            max_eps: visc.field.max_value(),
            flagged: visc.flagged(),
            dt: self.last_dt,
        };
        self.trace.push(row)
    }

    /// Take one step no longer than `max_dt`; returns the step size used.
    pub fn step(&mut self, max_dt: f64) -> Result<f64> {
        let visc = self.current_viscosity()?;
        let mut dt = compute_dt(
            &self.state,
            &self.law,
            &visc.field,
            &self.mesh,
            &self.elem,
            &self.control,
        )?;
        if max_dt < dt {
            dt = max_dt;
        }
        if !(dt > 0.0) {
            return Err(DgError::InvalidInput(format!("non-positive time step {dt}")));
        }
        let op = self.operator()?;
        let step_index = self.steps + 1;
        let fill_step = |e: DgError| match e {
            DgError::BlowUp { stage, .. } => DgError::BlowUp {
                step: step_index,
                stage,
            },
            other => other,
        };
        let next = match self.mode {
            TimeMode::Unsplit if self.sensor.per_stage && self.distribution.is_some() => {
                let this = &*self;
                self.integrator.step(self.state.data(), dt, |u, out| {
                    let v = this.viscosity_for(u)?;
                    op.full_into(u, &v.field, out)
                })
            }
            TimeMode::Unsplit => self
                .integrator
                .step(self.state.data(), dt, |u, out| op.full_into(u, &visc.field, out)),
            TimeMode::SplitFilter => {
                let kind = self
                    .distribution
                    .map(|d| d.kind)
                    .ok_or_else(|| DgError::Unsupported("split_filter needs legendre viscosity".into()))?;
                operator_split_advance(&self.state, dt, &op, self.integrator, &visc.field.strengths, kind)
                    .map(Field::into_data)
            }
        }
        .map_err(fill_step)?;
        if !next.iter().all(|x| x.abs() < MAX_MAGNITUDE) {
            return Err(DgError::BlowUp {
                step: step_index,
                stage: self.integrator.stages(),
            });
        }
        self.state = self.state.with_data(next)?;
        self.steps = step_index;
        self.last_dt = dt;
        self.time += dt;
        Ok(dt)
    }

    /// Step until `target`, landing on it exactly. Trace rows are recorded
    /// every `series_every` steps and at `target`.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let tol = TIME_SNAP * target.abs().max(1.0);
        let mut last_recorded = self.steps;
        while target - self.time > tol {
            let remaining = target - self.time;
            let dt = self.step(remaining)?;
            if dt == remaining || target - self.time <= tol {
                self.time = target;
            }
            if self.steps.is_multiple_of(self.series_every) || self.time == target {
                let visc = self.current_viscosity()?;
                self.record(&visc)?;
                last_recorded = self.steps;
            }
        }
        if last_recorded != self.steps {
            let visc = self.current_viscosity()?;
            self.record(&visc)?;
        }
        Ok(())
    }

    /// Take exactly `n` steps (unless `until` is reached first), recording
    /// the trace as in [`Simulation::advance_to`].
    pub fn advance_steps(&mut self, n: usize, until: f64) -> Result<()> {
        for _ in 0..n {
            let remaining = until - self.time;
            if remaining <= TIME_SNAP * until.abs().max(1.0) {
                break;
            }
            let dt = self.step(remaining)?;
            if dt == remaining {
                self.time = until;
            }
            if self.steps.is_multiple_of(self.series_every) {
                let visc = self.current_viscosity()?;
                self.record(&visc)?;
            }
        }
        if self.trace.rows.last().map(|r| r.t) != Some(self.time) {
            let visc = self.current_viscosity()?;
            self.record(&visc)?;
        }
        Ok(())
    }

    pub fn snapshot(&self) -> Result<Snapshot> {
        Ok(Snapshot {
            time: self.time,
            field: self.state.to_view(View::Nodal, &self.elem),
            viscosity: self.current_viscosity()?.field,
        })
    }
}

/// Result of [`run`]: the simulation as far as it got, the snapshots taken
/// and, on failure, the error that stopped it.
#[derive(Debug)]
pub struct RunOutcome {
    pub simulation: Simulation,
    pub snapshots: Vec<Snapshot>,
    pub failure: Option<DgError>,
}

impl RunOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Output times of a configuration: the requested snapshot times plus the
/// final time, sorted and deduplicated.
pub fn output_times(config: &RunConfig) -> Vec<f64> {
    let mut times: Vec<f64> = config.output.snapshot_times.clone();
    times.push(config.final_time());
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

/// Run a configuration to its final time. Errors during setup are returned
/// directly; errors while stepping are reported in [`RunOutcome::failure`].
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let mut simulation = Simulation::new(config)?;
    let mut snapshots = Vec::new();
    let mut failure = None;
    for t in output_times(config) {
        if let Err(e) = simulation.advance_to(t) {
            failure = Some(e);
            break;
        }
        match simulation.snapshot() {
            Ok(s) => snapshots.push(s),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok(RunOutcome {
        simulation,
        snapshots,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ViscosityChoice;
    use crate::scenario::Scenario;

    #[test]
    fn advection_cfl_step_matches_formula() {
        let cfg = RunConfig::for_scenario(Scenario::AdvectionSquare);
        let mut sim = Simulation::new(&cfg).unwrap();
        let dt = sim.step(1.0).unwrap();
        assert!((dt - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn lands_on_output_times() {
        let mut cfg = RunConfig::for_scenario(Scenario::AdvectionSine);
        cfg.time.final_time = Some(0.0123);
        cfg.output.snapshot_times = vec![0.005];
        let out = run(&cfg).unwrap();
        assert!(out.succeeded());
        let times: Vec<f64> = out.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times, vec![0.005, 0.0123]);
        let rows = &out.simulation.trace().rows;
        assert!(rows.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(rows.last().unwrap().t, 0.0123);
    }

    #[test]
    fn repeated_runs_are_identical() {
        let mut cfg = RunConfig::for_scenario(Scenario::Sod);
        cfg.time.final_time = Some(0.01);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.simulation.field().data(), b.simulation.field().data());
        cfg.parallel.elements = true;
        let c = run(&cfg).unwrap();
        assert_eq!(a.simulation.field().data(), c.simulation.field().data());
    }

    #[test]
    fn split_filter_runs_and_conserves() {
        let mut cfg = RunConfig::for_scenario(Scenario::AdvectionSquare);
        cfg.viscosity.kind = Some(ViscosityChoice::Legendre);
        cfg.time.mode = TimeMode::SplitFilter;
        cfg.time.final_time = Some(0.05);
        let out = run(&cfg).unwrap();
        assert!(out.succeeded());
        let rows = &out.simulation.trace().rows;
        let m0 = rows[0].mass[0];
        assert!(rows.iter().all(|r| (r.mass[0] - m0).abs() < 1e-12));
        assert!(rows.iter().any(|r| r.max_eps > 0.0));
    }

    #[test]
    fn per_stage_sensor_runs() {
        let mut cfg = RunConfig::for_scenario(Scenario::Sod);
        cfg.sensor.per_stage = true;
        cfg.time.final_time = Some(0.005);
        assert!(run(&cfg).unwrap().succeeded());
    }

    #[test]
    fn blow_up_reports_step() {
        let mut cfg = RunConfig::for_scenario(Scenario::AdvectionSquare);
        cfg.time.fixed_dt = Some(0.5);
        cfg.time.final_time = Some(1000.0);
        let out = run(&cfg).unwrap();
        match out.failure {
            Some(DgError::BlowUp { step, .. }) => assert!(step >= 1),
            other => panic!("expected blow-up, got {other:?}"),
        }
        assert!(out.simulation.field().is_finite());
    }
}
