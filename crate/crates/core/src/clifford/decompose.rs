use super::CliffordElement;
use crate::quantum::{qubit_bit, Gate};

/// Row-reduces a tableau to the identity while recording gates.
struct Reducer {
    t: CliffordElement,
    gates: Vec<Gate>,
}

impl Reducer {
    fn push(&mut self, g: Gate) {
        self.t.apply_gate(&g).expect("reduction emits valid gates");
        self.gates.push(g);
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.push(Gate::cnot(a, b));
        self.push(Gate::cnot(b, a));
        self.push(Gate::cnot(a, b));
    }

    fn x_bit(&self, row: usize, q: usize) -> bool {
        (self.t.x[row] >> qubit_bit(q, self.t.n)) & 1 == 1
    }

    fn z_bit(&self, row: usize, q: usize) -> bool {
        (self.t.z[row] >> qubit_bit(q, self.t.n)) & 1 == 1
    }

    /// Makes the X image of `qubit` carry an X or Y on `qubit` itself.
    fn set_qubit_x_true(&mut self, qubit: usize) {
        let row = 2 * qubit;
        if self.x_bit(row, qubit) {
            return;
        }
        let n = self.t.n;
        if let Some(i) = (qubit..n).find(|&i| self.x_bit(row, i)) {
            self.swap(i, qubit);
            return;
        }
        if let Some(i) = (qubit..n).find(|&i| self.z_bit(row, i)) {
            self.push(Gate::h(i));
            if i != qubit {
                self.swap(i, qubit);
            }
        }
    }

    /// Clears the X image of `qubit` down to a bare X on `qubit`.
    fn set_row_x_zero(&mut self, qubit: usize) {
        let n = self.t.n;
        let row = 2 * qubit;
        for i in qubit + 1..n {
            if self.x_bit(row, i) {
                self.push(Gate::cnot(qubit, i));
            }
        }
        if (qubit..n).any(|i| self.z_bit(row, i)) {
            if !self.z_bit(row, qubit) {
                self.push(Gate::s(qubit));
            }
            for i in qubit + 1..n {
                if self.z_bit(row, i) {
                    self.push(Gate::cnot(i, qubit));
                }
            }
            self.push(Gate::s(qubit));
        }
    }

    /// Clears the Z image of `qubit` down to a bare Z on `qubit`.
    fn set_row_z_zero(&mut self, qubit: usize) {
        let n = self.t.n;
        let row = 2 * qubit + 1;
        for i in qubit + 1..n {
            if self.z_bit(row, i) {
                self.push(Gate::cnot(i, qubit));
            }
        }
        if (qubit..n).any(|i| self.x_bit(row, i)) {
            self.push(Gate::h(qubit));
            for i in qubit + 1..n {
                if self.x_bit(row, i) {
                    self.push(Gate::cnot(qubit, i));
                }
            }
            if self.z_bit(row, qubit) {
                self.push(Gate::s(qubit));
            }
            self.push(Gate::h(qubit));
        }
    }
}

/// A gate list over {H, S, CNOT} implementing `c` up to global phase, in application order.
///
/// The reduction runs on `c^dagger`: the recorded sequence `G_1, ..., G_m` satisfies
/// `G_m ... G_1 c^dagger = I`, so applying the gates in order realises `c` directly.
pub fn decompose(c: &CliffordElement) -> Vec<Gate> {
    let n = c.n;
    let mut r = Reducer {
        t: c.inverse(),
        gates: Vec::new(),
    };
    for q in 0..n {
        r.set_qubit_x_true(q);
        r.set_row_x_zero(q);
        r.set_row_z_zero(q);
    }
    for q in 0..n {
        if (r.t.signs >> (2 * q)) & 1 == 1 {
            // Z flips the sign of the X image.
            r.push(Gate::s(q));
            r.push(Gate::s(q));
        }
        if (r.t.signs >> (2 * q + 1)) & 1 == 1 {
            r.push(Gate::h(q));
            r.push(Gate::s(q));
            r.push(Gate::s(q));
            r.push(Gate::h(q));
        }
    }
    debug_assert_eq!(r.t, CliffordElement::identity(n));
    r.gates
}
