use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

type C = Complex64;

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    /// Control is `targets[0]`, target is `targets[1]`.
    Cnot,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// `exp(-i theta/2 Z Z)`.
    Rzz(f64),
    /// Arbitrary unitary on `targets`, row-major, `targets[0]` most significant.
    Unitary(Vec<C>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Self { kind, targets }
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q])
    }

    pub fn s(q: usize) -> Self {
        Self::new(GateKind::S, vec![q])
    }

    pub fn sdg(q: usize) -> Self {
        Self::new(GateKind::Sdg, vec![q])
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q])
    }

    pub fn z(q: usize) -> Self {
        Self::new(GateKind::Z, vec![q])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target])
    }

    pub fn arity(&self) -> usize {
        match &self.kind {
            GateKind::Cnot | GateKind::Rzz(_) => 2,
            GateKind::Unitary(m) => (m.len() as f64).sqrt().log2().round() as usize,
            _ => 1,
        }
    }

    /// Row-major unitary matrix of the gate on its own targets.
    pub fn matrix(&self) -> Vec<C> {
        let h = FRAC_1_SQRT_2;
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        match &self.kind {
            GateKind::H => vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
            GateKind::S => vec![one, zero, zero, c(0.0, 1.0)],
            GateKind::Sdg => vec![one, zero, zero, c(0.0, -1.0)],
            GateKind::X => vec![zero, one, one, zero],
            GateKind::Y => vec![zero, c(0.0, -1.0), c(0.0, 1.0), zero],
            GateKind::Z => vec![one, zero, zero, -one],
            GateKind::Cnot => {
                let mut m = vec![zero; 16];
                m[0] = one;
                m[5] = one;
                m[11] = one;
                m[14] = one;
                m
            }
            GateKind::Rx(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
            }
            GateKind::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]
            }
            GateKind::Rz(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, -s), zero, zero, c(co, s)]
            }
            GateKind::Rzz(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                let minus = c(co, -s);
                let plus = c(co, s);
                let mut m = vec![zero; 16];
                m[0] = minus;
                m[5] = plus;
                m[10] = plus;
                m[15] = minus;
                m
            }
            GateKind::Unitary(m) => m.clone(),
        }
    }

    /// Largest entry of `U^dagger U - I`.
    pub fn unitarity_error(&self) -> f64 {
        let m = self.matrix();
        let d = 1usize << self.arity();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let v: C = (0..d).map(|k| m[k * d + i].conj() * m[k * d + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_gates_are_unitary() {
        let gates = [
            Gate::h(0),
            Gate::s(0),
            Gate::sdg(0),
            Gate::x(0),
            Gate::new(GateKind::Y, vec![0]),
            Gate::z(0),
            Gate::cnot(0, 1),
            Gate::new(GateKind::Rx(0.3), vec![0]),
            Gate::new(GateKind::Ry(-1.1), vec![0]),
            Gate::new(GateKind::Rz(2.2), vec![0]),
            Gate::new(GateKind::Rzz(0.7), vec![0, 1]),
        ];
        for g in &gates {
            assert!(g.unitarity_error() < 1e-12, "{g:?}");
        }
    }
}
