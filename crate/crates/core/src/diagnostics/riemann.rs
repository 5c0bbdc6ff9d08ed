//! Exact Riemann solver for the 1D Euler equations (ideal gas), following
//! the pressure-function construction of Toro.

use crate::equations::EulerState;
use crate::scenario::Primitive;
use crate::{DgError, Result};

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;

/// Riemann problem with the discontinuity at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannProblem {
    pub left: Primitive,
    pub right: Primitive,
    pub gamma: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    Shock {
        speed: f64,
    },
    /// Head and tail speeds of the fan.
    Rarefaction {
        head: f64,
        tail: f64,
    },
}

/// Star-region solution and wave pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    pub problem: RiemannProblem,
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
}

fn sound_speed(s: &Primitive, gamma: f64) -> f64 {
    (gamma * s.p / s.rho).sqrt()
}

/// Pressure function `f_K(p)` and its derivative.
fn pressure_function(p: f64, s: &Primitive, gamma: f64) -> (f64, f64) {
    let c = sound_speed(s, gamma);
    if p > s.p {
        let a = 2.0 / ((gamma + 1.0) * s.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (b + p)))
    } else {
        let r = p / s.p;
        let e = (gamma - 1.0) / (2.0 * gamma);
        (
            2.0 * c / (gamma - 1.0) * (r.powf(e) - 1.0),
            r.powf(-(gamma + 1.0) / (2.0 * gamma)) / (s.rho * c),
        )
    }
}

impl RiemannProblem {
    /// `f_L(p) + f_R(p) + (u_R - u_L)`; its root is the star pressure.
    pub fn pressure_residual(&self, p: f64) -> f64 {
        let (fl, _) = pressure_function(p, &self.left, self.gamma);
        let (fr, _) = pressure_function(p, &self.right, self.gamma);
        fl + fr + self.right.v - self.left.v
    }

    pub fn solve(&self) -> Result<RiemannSolution> {
        let g = self.gamma;
        let (l, r) = (&self.left, &self.right);
        let (cl, cr) = (sound_speed(l, g), sound_speed(r, g));
        let du = r.v - l.v;
        if 2.0 / (g - 1.0) * (cl + cr) <= du {
            return Err(DgError::Vacuum);
        }
        let ppv = 0.5 * (l.p + r.p) - 0.125 * du * (l.rho + r.rho) * (cl + cr);
        let mut p = ppv.max(1e-8 * (l.p + r.p));
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (fl, dl) = pressure_function(p, l, g);
            let (fr, dr) = pressure_function(p, r, g);
            let mut next = p - (fl + fr + du) / (dl + dr);
            if next <= 0.0 {
                next = 0.5 * p;
            }
            let change = 2.0 * (next - p).abs() / (next + p);
            p = next;
            if change < NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(DgError::NoConvergence {
                what: "Riemann star-pressure Newton iteration",
                iterations: NEWTON_MAX_ITER,
            });
        }
        let (fl, _) = pressure_function(p, l, g);
        let (fr, _) = pressure_function(p, r, g);
        let u_star = 0.5 * (l.v + r.v) + 0.5 * (fr - fl);
        let gm = (g - 1.0) / (g + 1.0);

        let (rho_star_left, left_wave) = if p > l.p {
            let ratio = p / l.p;
            let rho = l.rho * (ratio + gm) / (gm * ratio + 1.0);
            let speed = l.v - cl * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt();
            (rho, Wave::Shock { speed })
        } else {
            let rho = l.rho * (p / l.p).powf(1.0 / g);
            let c_star = cl * (p / l.p).powf((g - 1.0) / (2.0 * g));
            (
                rho,
                Wave::Rarefaction {
                    head: l.v - cl,
                    tail: u_star - c_star,
                },
            )
        };
        let (rho_star_right, right_wave) = if p > r.p {
            let ratio = p / r.p;
            let rho = r.rho * (ratio + gm) / (gm * ratio + 1.0);
            let speed = r.v + cr * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt();
            (rho, Wave::Shock { speed })
        } else {
            let rho = r.rho * (p / r.p).powf(1.0 / g);
            let c_star = cr * (p / r.p).powf((g - 1.0) / (2.0 * g));
            (
                rho,
                Wave::Rarefaction {
                    head: r.v + cr,
                    tail: u_star + c_star,
                },
            )
        };
        Ok(RiemannSolution {
            problem: *self,
            p_star: p,
            u_star,
            rho_star_left,
            rho_star_right,
            left_wave,
            right_wave,
        })
    }
}

impl RiemannSolution {
    /// Primitive state at similarity coordinate `ξ = (x - x0) / t`.
    pub fn sample_similarity(&self, xi: f64) -> Primitive {
        let pr = &self.problem;
        let g = pr.gamma;
        if xi <= self.u_star {
            let l = &pr.left;
            match self.left_wave {
                Wave::Shock { speed } => {
                    if xi <= speed {
                        *l
                    } else {
                        self.star(true)
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi <= head {
                        *l
                    } else if xi >= tail {
                        self.star(true)
                    } else {
                        let cl = sound_speed(l, g);
                        let c = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * (l.v - xi));
                        let v = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * l.v + xi);
                        let ratio = c / cl;
                        Primitive {
                            rho: l.rho * ratio.powf(2.0 / (g - 1.0)),
                            v,
                            p: l.p * ratio.powf(2.0 * g / (g - 1.0)),
                        }
                    }
                }
            }
        } else {
            let r = &pr.right;
            match self.right_wave {
                Wave::Shock { speed } => {
                    if xi >= speed {
                        *r
                    } else {
                        self.star(false)
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi >= head {
                        *r
                    } else if xi <= tail {
                        self.star(false)
                    } else {
                        let cr = sound_speed(r, g);
                        let c = 2.0 / (g + 1.0) * (cr - 0.5 * (g - 1.0) * (r.v - xi));
                        let v = 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * r.v + xi);
                        let ratio = c / cr;
                        Primitive {
                            rho: r.rho * ratio.powf(2.0 / (g - 1.0)),
                            v,
                            p: r.p * ratio.powf(2.0 * g / (g - 1.0)),
                        }
                    }
                }
            }
        }
    }

    fn star(&self, left: bool) -> Primitive {
        Primitive {
            rho: if left { self.rho_star_left } else { self.rho_star_right },
            v: self.u_star,
            p: self.p_star,
        }
    }

    /// Primitive state at `(x, t)`; the initial data for `t <= 0`.
    pub fn sample(&self, x: f64, t: f64) -> Primitive {
        let pr = &self.problem;
        if t <= 0.0 {
            return if x < pr.x0 { pr.left } else { pr.right };
        }
        self.sample_similarity((x - pr.x0) / t)
    }
}

/// Exact Riemann solution of the shock-tube data at `(x, t)`.
pub fn sod_exact(x: f64, t: f64, left: Primitive, right: Primitive, gamma: f64, x0: f64) -> Result<EulerState> {
    let sol = RiemannProblem { left, right, gamma, x0 }.solve()?;
    Ok(sol.sample(x, t).to_conserved(gamma))
}
