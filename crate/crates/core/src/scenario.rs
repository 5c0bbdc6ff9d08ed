//! Benchmark problems: initial data, domains and boundary treatment.

use serde::{Deserialize, Serialize};

use crate::equations::{ConservationLaw, EulerState};
use crate::mesh::{Boundary, Mesh};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Linear advection of a square wave on the periodic unit interval.
    AdvectionSquare,
    /// Linear advection of `sin(2πx)` on the periodic unit interval.
    AdvectionSine,
    /// Square wave on 12 elements of degree 10.
    AdvectionFig5,
    /// Sod's shock tube on [0, 1].
    Sod,
    /// Shu–Osher shock/entropy-wave interaction on [-5, 5].
    ShuOsher,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::AdvectionSquare,
        Scenario::AdvectionSine,
        Scenario::AdvectionFig5,
        Scenario::Sod,
        Scenario::ShuOsher,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::AdvectionSquare => "advection_square",
            Scenario::AdvectionSine => "advection_sine",
            Scenario::AdvectionFig5 => "advection_fig5",
            Scenario::Sod => "sod",
            Scenario::ShuOsher => "shu_osher",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::AdvectionSquare => "square wave, periodic [0,1], 20 elements, p = 9, t = 1",
            Scenario::AdvectionSine => "sin(2 pi x), periodic [0,1], 20 elements, p = 9, t = 1",
            Scenario::AdvectionFig5 => "square wave, periodic [0,1], 12 elements, p = 10, t = 1",
            Scenario::Sod => "Sod shock tube, [0,1], 40 elements, p = 5, t = 0.2",
            Scenario::ShuOsher => "Shu-Osher shock tube, [-5,5], 80 elements, p = 5, t = 1.8",
        }
    }

    pub fn law(self) -> ConservationLaw {
        match self {
            Scenario::Sod | Scenario::ShuOsher => ConservationLaw::euler(),
            _ => ConservationLaw::advection(),
        }
    }

    pub fn is_advection(self) -> bool {
        !self.law().is_system()
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            Scenario::ShuOsher => (-5.0, 5.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn default_elements(self) -> usize {
        match self {
            Scenario::AdvectionSquare | Scenario::AdvectionSine => 20,
            Scenario::AdvectionFig5 => 12,
            Scenario::Sod => 40,
            Scenario::ShuOsher => 80,
        }
    }

    pub fn default_degree(self) -> usize {
        match self {
            Scenario::AdvectionSquare | Scenario::AdvectionSine => 9,
            Scenario::AdvectionFig5 => 10,
            Scenario::Sod | Scenario::ShuOsher => 5,
        }
    }

    pub fn default_final_time(self) -> f64 {
        match self {
            Scenario::Sod => 0.2,
            Scenario::ShuOsher => 1.8,
            _ => 1.0,
        }
    }

    pub fn initial_profile(self, variant: PresetVariant) -> InitialProfile {
        let gamma = 1.4;
        match self {
            Scenario::AdvectionSquare | Scenario::AdvectionFig5 => InitialProfile::SquareWave {
                low: 0.0,
                high: 1.0,
                start: 0.25,
                end: 0.75,
            },
            Scenario::AdvectionSine => InitialProfile::Sine { wavenumber: 1.0 },
            Scenario::Sod => InitialProfile::Riemann {
                x0: 0.5,
                left: Primitive {
                    rho: 1.0,
                    v: if variant == PresetVariant::PaperLiteral {
                        1.0
                    } else {
                        0.0
                    },
                    p: 1.0,
                },
                right: Primitive {
                    rho: 0.125,
                    v: 0.0,
                    p: 0.1,
                },
                gamma,
            },
            Scenario::ShuOsher => match variant {
                PresetVariant::Classical => InitialProfile::ShuOsher {
                    x0: -4.0,
                    frequency: 5.0,
                    gamma,
                },
                PresetVariant::PaperLiteral => InitialProfile::ShuOsher {
                    x0: 0.5,
                    frequency: 5.0 * std::f64::consts::PI,
                    gamma,
                },
            },
        }
    }

    /// Mesh with the scenario's domain and boundary treatment; Euler problems
    /// freeze the initial states just outside the domain as ghost states.
    pub fn mesh(self, n_elements: usize, variant: PresetVariant) -> Result<Mesh> {
        let (a, b) = self.domain();
        let boundary = if self.is_advection() {
            Boundary::Periodic
        } else {
            let profile = self.initial_profile(variant);
            Boundary::DirichletOutflow {
                left: profile.conserved(a),
                right: profile.conserved(b),
            }
        };
        Mesh::new(a, b, n_elements, boundary)
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario '{s}'"))
    }
}

/// Which initial data to use where the published setup is ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetVariant {
    /// Sod with `v_L = 0`; Shu–Osher with the jump at -4 and `sin(5x)`.
    #[default]
    Classical,
    /// Sod with `v_L = 1`; Shu–Osher with the jump at 0.5 and `sin(5πx)`.
    PaperLiteral,
}

/// Primitive Euler variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub rho: f64,
    pub v: f64,
    pub p: f64,
}

impl Primitive {
    pub fn to_conserved(self, gamma: f64) -> EulerState {
        EulerState::from_primitive(self.rho, self.v, self.p, gamma)
    }

    pub fn from_conserved(u: &[f64], gamma: f64) -> Self {
        let s = EulerState::from_slice(u);
        Self {
            rho: s.rho,
            v: s.velocity(),
            p: s.pressure(gamma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialProfile {
    SquareWave {
        low: f64,
        high: f64,
        start: f64,
        end: f64,
    },
    Sine {
        wavenumber: f64,
    },
    Riemann {
        x0: f64,
        left: Primitive,
        right: Primitive,
        gamma: f64,
    },
    ShuOsher {
        x0: f64,
        frequency: f64,
        gamma: f64,
    },
}

impl InitialProfile {
    /// Conserved variables at `x`.
    pub fn conserved(&self, x: f64) -> Vec<f64> {
        match *self {
            InitialProfile::SquareWave { low, high, start, end } => {
                vec![if x >= start && x < end { high } else { low }]
            }
            InitialProfile::Sine { wavenumber } => {
                vec![(2.0 * std::f64::consts::PI * wavenumber * x).sin()]
            }
            InitialProfile::Riemann { x0, left, right, gamma } => {
                let s = if x < x0 { left } else { right };
                s.to_conserved(gamma).to_array().to_vec()
            }
            InitialProfile::ShuOsher { x0, frequency, gamma } => {
                let s = if x < x0 {
                    Primitive {
                        rho: 3.857143,
                        v: 2.629369,
                        p: 10.33333,
                    }
                } else {
                    Primitive {
                        rho: 1.0 + 0.2 * (frequency * x).sin(),
                        v: 0.0,
                        p: 1.0,
                    }
                };
                s.to_conserved(gamma).to_array().to_vec()
            }
        }
    }

    /// Closed-form `∫_a^b ½ u₀²` for scalar profiles on a period `[a, b]`.
    pub fn l2_entropy(&self, a: f64, b: f64) -> Option<f64> {
        match *self {
            InitialProfile::SquareWave { low, high, start, end } => {
                let inside = (end.min(b) - start.max(a)).max(0.0);
                Some(0.5 * (high * high * inside + low * low * ((b - a) - inside)))
            }
            InitialProfile::Sine { .. } => Some(0.25 * (b - a)),
            _ => None,
        }
    }
}
