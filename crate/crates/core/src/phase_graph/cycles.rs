//! Chordless (induced) cycle enumeration.

use alloc::vec;
use alloc::vec::Vec;

use super::{Cycle, PhaseGraph};

struct Search<'g> {
    g: &'g PhaseGraph,
    start: usize,
    max_len: usize,
    max_count: usize,
    path: Vec<usize>,
    on_path: Vec<bool>,
    found: Vec<Cycle>,
    truncated: bool,
}

impl Search<'_> {
    /// Whether `w` touches a path vertex other than the start and the tip.
    fn makes_chord(&self, w: usize) -> bool {
        let tip = *self.path.last().unwrap();
        self.g.neighbors(w).iter().any(|&u| u != tip && u != self.start && self.on_path[u])
    }

    fn extend(&mut self) {
        if self.truncated {
            return;
        }
        let tip = *self.path.last().unwrap();
        let len = self.path.len();
        for &w in self.g.neighbors(tip) {
            if w <= self.start || self.on_path[w] || self.makes_chord(w) {
                continue;
            }
            let closes = len >= 2 && self.g.has_edge(w, self.start);
            if closes {
                // each cycle is met once per direction; keep v_1 < v_last
                if self.path[1] < w {
                    if self.found.len() >= self.max_count {
                        self.truncated = true;
                        return;
                    }
                    let mut vertices = self.path.clone();
                    vertices.push(w);
                    let phase = self.g.cycle_phase(&vertices).unwrap();
                    self.found.push(Cycle { vertices, phase });
                }
                // any longer path through w would carry the chord (w, start)
                continue;
            }
            if len + 1 < self.max_len {
                self.path.push(w);
                self.on_path[w] = true;
                self.extend();
                self.on_path[w] = false;
                self.path.pop();
                if self.truncated {
                    return;
                }
            }
        }
    }
}

pub(super) fn chordless(g: &PhaseGraph, max_len: usize, max_count: usize) -> (Vec<Cycle>, bool) {
    let n = g.n_vertices();
    let mut search = Search {
        g,
        start: 0,
        max_len,
        max_count,
        path: Vec::new(),
        on_path: vec![false; n],
        found: Vec::new(),
        truncated: false,
    };
    if max_len >= 3 {
        for s in 0..n {
            search.start = s;
            search.path.clear();
            search.path.push(s);
            search.on_path[s] = true;
            search.extend();
            search.on_path[s] = false;
            if search.truncated {
                break;
            }
        }
    }
    let mut found = search.found;
    found.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    (found, search.truncated)
}

pub(super) fn is_chordless(g: &PhaseGraph, vertices: &[usize]) -> bool {
    let k = vertices.len();
    for a in 0..k {
        for b in (a + 2)..k {
            if a == 0 && b == k - 1 {
                continue;
            }
            if g.has_edge(vertices[a], vertices[b]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Amplitude, Hamiltonian, PauliTerm, Tolerances};
    use alloc::collections::BTreeSet;
    use proptest::prelude::*;

    fn c(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    #[test]
    fn square_from_two_masks() {
        let t = Tolerances::DEFAULT;
        let h =
            Hamiltonian::from_pauli(2, &[PauliTerm::new(c(-1.0), "IX"), PauliTerm::new(c(-1.0), "XI")], &t).unwrap();
        let g = PhaseGraph::build(&h, 1e-12);
        let (cycles, truncated) = g.chordless_cycles(12, 100_000);
        assert!(!truncated);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].vertices, vec![0, 1, 3, 2]);
    }

    #[test]
    fn k4_has_four_triangles() {
        let t = Tolerances::DEFAULT;
        let h = Hamiltonian::from_pauli(
            2,
            &[PauliTerm::new(c(-1.0), "IX"), PauliTerm::new(c(-1.0), "XI"), PauliTerm::new(c(-1.0), "XX")],
            &t,
        )
        .unwrap();
        let (cycles, _) = PhaseGraph::build(&h, 1e-12).chordless_cycles(12, 100_000);
        assert_eq!(cycles.len(), 4);
        assert!(cycles.iter().all(|c| c.vertices.len() == 3));
    }

    #[test]
    fn edgeless_and_caps() {
        let h = Hamiltonian::from_sparse(3, &[(0, 0, c(1.0))], &Tolerances::DEFAULT).unwrap();
        assert!(PhaseGraph::build(&h, 0.0).chordless_cycles(12, 10).0.is_empty());
        let t = Tolerances::DEFAULT;
        let k4 = Hamiltonian::from_pauli(
            2,
            &[PauliTerm::new(c(-1.0), "IX"), PauliTerm::new(c(-1.0), "XI"), PauliTerm::new(c(-1.0), "XX")],
            &t,
        )
        .unwrap();
        let (cycles, truncated) = PhaseGraph::build(&k4, 0.0).chordless_cycles(12, 2);
        assert_eq!(cycles.len(), 2);
        assert!(truncated);
    }

    /// Every simple cycle by brute force, keeping the induced ones in
    /// canonical orientation.
    fn brute_induced(g: &PhaseGraph) -> BTreeSet<Vec<usize>> {
        fn walk(g: &PhaseGraph, path: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
            let tip = *path.last().unwrap();
            for &w in g.neighbors(tip) {
                if w == path[0] && path.len() >= 3 {
                    let mut canon = path.clone();
                    if canon[1] > canon[canon.len() - 1] {
                        canon[1..].reverse();
                    }
                    if super::is_chordless(g, &canon) {
                        out.insert(canon);
                    }
                } else if w > path[0] && !path.contains(&w) {
                    path.push(w);
                    walk(g, path, out);
                    path.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        for s in 0..g.n_vertices() {
            walk(g, &mut vec![s], &mut out);
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_brute_force(n in 3usize..=10, keep in proptest::collection::vec(0.0f64..1.0, 45), p in 0.2f64..0.8) {
            let mut triples = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if keep[k] < p {
                        triples.push((i, j, c(-1.0)));
                    }
                    k += 1;
                }
            }
            let h = Hamiltonian::from_sparse(n, &triples, &Tolerances::DEFAULT).unwrap();
            let g = PhaseGraph::build(&h, 0.0);
            let (cycles, truncated) = g.chordless_cycles(n, usize::MAX);
            prop_assert!(!truncated);
            for cyc in &cycles {
                prop_assert!(g.is_chordless(&cyc.vertices));
            }
            let got: BTreeSet<Vec<usize>> = cycles.iter().map(|c| c.vertices.clone()).collect();
            prop_assert_eq!(got.len(), cycles.len());
            prop_assert_eq!(got, brute_induced(&g));
        }
    }
}
