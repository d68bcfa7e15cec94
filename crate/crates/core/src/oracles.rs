//! Closed-form eigenpairs used as ground truth.

use serde::Serialize;

use crate::geom::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ExactEigenpair {
    /// `rⁿ cos nθ` or `rⁿ sin nθ` on the unit disk, `λ = n`.
    Disk { n: u32, parity: Parity },
    /// `xy` on `[-1, 1]²`, `λ = 1`.
    SquareXy,
    /// `sin(kπx/L) sinh(kπ(y + d)/L)` on the tank `(0, L) × (−d, 0)`.
    Sloshing { length: f64, depth: f64, k: u32 },
}

impl ExactEigenpair {
    pub fn lambda(&self) -> f64 {
        match *self {
            ExactEigenpair::Disk { n, .. } => n as f64,
            ExactEigenpair::SquareXy => 1.0,
            ExactEigenpair::Sloshing { length, depth, k } => sloshing_eigenvalue(length, depth, k),
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            ExactEigenpair::Disk { n, parity } => {
                let (r, th) = (p.norm(), p.angle());
                let rn = r.powi(n as i32);
                match parity {
                    Parity::Cos => rn * (n as f64 * th).cos(),
                    Parity::Sin => rn * (n as f64 * th).sin(),
                }
            }
            ExactEigenpair::SquareXy => p.x * p.y,
            ExactEigenpair::Sloshing { length, depth, k } => {
                let w = k as f64 * std::f64::consts::PI / length;
                (w * p.x).sin() * (w * (p.y + depth)).sinh()
            }
        }
    }

    pub fn description(&self) -> String {
        match *self {
            ExactEigenpair::Disk { n, parity: Parity::Cos } => format!("r^{n} cos({n} theta) on the unit disk"),
            ExactEigenpair::Disk { n, parity: Parity::Sin } => format!("r^{n} sin({n} theta) on the unit disk"),
            ExactEigenpair::SquareXy => "xy on [-1,1]^2".into(),
            ExactEigenpair::Sloshing { length, depth, k } => {
                format!("sin({k} pi x/{length}) sinh({k} pi (y+{depth})/{length})")
            }
        }
    }
}

pub fn disk_eigenpair(n: u32, parity: Parity) -> ExactEigenpair {
    ExactEigenpair::Disk { n, parity }
}

pub fn square_xy() -> ExactEigenpair {
    ExactEigenpair::SquareXy
}

/// `σ_k = (kπ/L) coth(kπd/L)`.
pub fn sloshing_eigenvalue(length: f64, depth: f64, k: u32) -> f64 {
    let w = k as f64 * std::f64::consts::PI / length;
    w / (w * depth).tanh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn low_disk_modes() {
        let p = Point::new(0.3, -0.7);
        assert!((disk_eigenpair(0, Parity::Cos).eval(p) - 1.0).abs() < 1e-15);
        assert!((disk_eigenpair(1, Parity::Cos).eval(p) - 0.3).abs() < 1e-15);
        assert!((disk_eigenpair(2, Parity::Cos).eval(p) - (0.09 - 0.49)).abs() < 1e-14);
    }

    #[test]
    fn coth_values() {
        assert!((sloshing_eigenvalue(PI, PI, 1) - 1.003_741_873_197_321).abs() < 1e-12);
        assert!((sloshing_eigenvalue(PI, PI, 2) - 2.0 / (2.0 * PI).tanh()).abs() < 1e-15);
        assert!(sloshing_eigenvalue(PI, PI, 2) > sloshing_eigenvalue(PI, PI, 1));
        assert!(sloshing_eigenvalue(PI, 2.0 * PI, 1) < sloshing_eigenvalue(PI, PI, 1));
    }
}
