//! Incremental single-flip states shared by the local solvers.

use crate::qubo::Qubo;

pub(crate) trait FlipState {
    fn len(&self) -> usize;
    fn value(&self, i: usize) -> bool;
    /// Energy change if variable `i` were flipped.
    fn delta(&self, i: usize) -> f64;
    fn flip(&mut self, i: usize);
    fn energy(&self) -> f64;

    fn snapshot(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    fn restore(&mut self, x: &[bool]) {
        for (i, &v) in x.iter().enumerate() {
            if self.value(i) != v {
                self.flip(i);
            }
        }
    }
}

/// Adjacency form of a QUBO.
pub(crate) struct Couplings {
    linear: Vec<f64>,
    adj: Vec<Vec<(u32, f64)>>,
    offset: f64,
}

impl Couplings {
    pub fn new(q: &Qubo) -> Self {
        Self::restricted(q, q.size)
    }

    /// Only variables `0..n` and the couplers among them.
    fn restricted(q: &Qubo, n: usize) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (&(i, j), &b) in &q.quadratic {
            if (j as usize) < n {
                adj[i as usize].push((j, b));
                adj[j as usize].push((i, b));
            }
        }
        Self {
            linear: q.linear[..n].to_vec(),
            adj,
            offset: q.offset,
        }
    }
}

pub(crate) struct QuboState<'a> {
    c: &'a Couplings,
    x: Vec<bool>,
    field: Vec<f64>,
    energy: f64,
}

impl<'a> QuboState<'a> {
    pub fn new(c: &'a Couplings, x: Vec<bool>) -> Self {
        let mut field = c.linear.clone();
        let mut energy = c.offset;
        for (i, nb) in c.adj.iter().enumerate() {
            for &(j, b) in nb {
                if x[j as usize] {
                    field[i] += b;
                }
            }
        }
        for i in 0..x.len() {
            if x[i] {
                energy += 0.5 * (c.linear[i] + field[i]);
            }
        }
        Self { c, x, field, energy }
    }

    pub fn assignment(&self) -> &[bool] {
        &self.x
    }
}

impl FlipState for QuboState<'_> {
    fn len(&self) -> usize {
        self.x.len()
    }
    fn value(&self, i: usize) -> bool {
        self.x[i]
    }
    fn delta(&self, i: usize) -> f64 {
        if self.x[i] {
            -self.field[i]
        } else {
            self.field[i]
        }
    }
    fn flip(&mut self, i: usize) {
        self.energy += self.delta(i);
        self.x[i] = !self.x[i];
        let s = if self.x[i] { 1.0 } else { -1.0 };
        for &(j, b) in &self.c.adj[i] {
            self.field[j as usize] += s * b;
        }
    }
    fn energy(&self) -> f64 {
        self.energy
    }
}

/// A QUBO whose ancillas share no coupler, viewed as a function of the
/// logical variables alone with every ancilla at its conditional optimum.
pub(crate) struct Eliminated {
    logical: Couplings,
    anc_linear: Vec<f64>,
    to_anc: Vec<Vec<(u32, f64)>>,
}

impl Eliminated {
    /// `None` when some coupler joins two ancillas.
    pub fn new(q: &Qubo) -> Option<Self> {
        let l = q.logical_count;
        let mut to_anc = vec![Vec::new(); l];
        for (&(i, j), &b) in &q.quadratic {
            let (i, j) = (i as usize, j as usize);
            if i >= l {
                return None;
            }
            if j >= l {
                to_anc[i].push(((j - l) as u32, b));
            }
        }
        Some(Self {
            logical: Couplings::restricted(q, l),
            anc_linear: q.linear[l..].to_vec(),
            to_anc,
        })
    }
}

pub(crate) struct EliminatedState<'a> {
    e: &'a Eliminated,
    base: QuboState<'a>,
    afield: Vec<f64>,
    anc_energy: f64,
}

impl<'a> EliminatedState<'a> {
    pub fn new(e: &'a Eliminated, x: Vec<bool>) -> Self {
        let mut afield = e.anc_linear.clone();
        for (i, nb) in e.to_anc.iter().enumerate() {
            if x[i] {
                for &(a, b) in nb {
                    afield[a as usize] += b;
                }
            }
        }
        let anc_energy = afield.iter().map(|f| f.min(0.0)).sum();
        Self {
            e,
            base: QuboState::new(&e.logical, x),
            afield,
            anc_energy,
        }
    }

    /// Logical bits followed by the optimal ancilla bits.
    pub fn full_assignment(&self) -> Vec<bool> {
        let mut x = self.base.x.clone();
        x.extend(self.afield.iter().map(|&f| f < 0.0));
        x
    }
}

impl FlipState for EliminatedState<'_> {
    fn len(&self) -> usize {
        self.base.len()
    }
    fn value(&self, i: usize) -> bool {
        self.base.value(i)
    }
    fn delta(&self, i: usize) -> f64 {
        let s = if self.base.x[i] { -1.0 } else { 1.0 };
        let mut d = self.base.delta(i);
        for &(a, b) in &self.e.to_anc[i] {
            let f = self.afield[a as usize];
            d += (f + s * b).min(0.0) - f.min(0.0);
        }
        d
    }
    fn flip(&mut self, i: usize) {
        let s = if self.base.x[i] { -1.0 } else { 1.0 };
        self.base.flip(i);
        for &(a, b) in &self.e.to_anc[i] {
            let f = &mut self.afield[a as usize];
            let old = f.min(0.0);
            *f += s * b;
            self.anc_energy += f.min(0.0) - old;
        }
    }
    fn energy(&self) -> f64 {
        self.base.energy() + self.anc_energy
    }
}

/// View of a state where only `vars` may flip.
pub(crate) struct Restricted<'s, S> {
    pub inner: &'s mut S,
    pub vars: &'s [usize],
}

impl<S: FlipState> FlipState for Restricted<'_, S> {
    fn len(&self) -> usize {
        self.vars.len()
    }
    fn value(&self, i: usize) -> bool {
        self.inner.value(self.vars[i])
    }
    fn delta(&self, i: usize) -> f64 {
        self.inner.delta(self.vars[i])
    }
    fn flip(&mut self, i: usize) {
        self.inner.flip(self.vars[i])
    }
    fn energy(&self) -> f64 {
        self.inner.energy()
    }
}

/// Flips any improving variable until none is left.
pub(crate) fn greedy_descent<S: FlipState>(s: &mut S, tol: f64) -> usize {
    let mut flips = 0;
    loop {
        let mut improved = false;
        for i in 0..s.len() {
            if s.delta(i) < -tol {
                s.flip(i);
                flips += 1;
                improved = true;
            }
        }
        if !improved {
            return flips;
        }
    }
}

/// Visits all `2^len` states in Gray-code order starting from the current
/// one. `visit` receives the code of flipped positions relative to the start.
/// The state ends on the last visited configuration.
pub(crate) fn gray_scan<S: FlipState>(s: &mut S, mut visit: impl FnMut(&S, u64)) {
    let n = s.len();
    assert!(n < 64);
    visit(s, 0);
    for k in 1u64..(1u64 << n) {
        s.flip(k.trailing_zeros() as usize);
        visit(s, k ^ (k >> 1));
    }
}

/// Tolerance below which an energy change does not count as improvement.
pub(crate) fn improvement_tol(q: &Qubo) -> f64 {
    1e-10 * q.max_abs_coefficient().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Qubo {
        let mut q = Qubo::new(5);
        q.linear = vec![1.0, -2.0, 0.5, 0.0, 0.0];
        q.add(0, 1, -1.5);
        q.add(1, 2, 2.0);
        q.add(0, 3, -4.0);
        q.add(2, 4, 3.0);
        q.offset = 0.75;
        q.logical_count = 3;
        q
    }

    #[test]
    fn tracked_energy_matches_recompute() {
        let q = sample();
        let c = Couplings::new(&q);
        let mut s = QuboState::new(&c, vec![false; 5]);
        for i in [0, 3, 1, 4, 0, 2, 2, 1] {
            let want = {
                let mut x = s.assignment().to_vec();
                x[i] = !x[i];
                q.energy(&x)
            };
            assert!((s.energy() + s.delta(i) - want).abs() < 1e-12);
            s.flip(i);
            assert!((s.energy() - q.energy(s.assignment())).abs() < 1e-12);
        }
    }

    #[test]
    fn elimination_matches_min_over_ancillas() {
        let q = sample();
        let e = Eliminated::new(&q).unwrap();
        let mut s = EliminatedState::new(&e, vec![false; 3]);
        gray_scan(&mut s, |st, _| {
            let x = st.snapshot();
            let want = crate::reduction::min_over_ancillas(&q, &x).unwrap();
            assert!((st.energy() - want).abs() < 1e-12);
            assert!((q.energy(&st.full_assignment()) - want).abs() < 1e-12);
        });
    }

    #[test]
    fn gray_codes_cover_all_states() {
        let q = Qubo::new(4);
        let c = Couplings::new(&q);
        let mut s = QuboState::new(&c, vec![false; 4]);
        let mut seen = std::collections::BTreeSet::new();
        gray_scan(&mut s, |st, code| {
            let m = st.assignment().iter().enumerate().fold(0u64, |m, (i, &b)| m | (b as u64) << i);
            assert_eq!(m, code);
            seen.insert(code);
        });
        assert_eq!(seen.len(), 16);
    }
}
