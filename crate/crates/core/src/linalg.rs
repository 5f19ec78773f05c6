//! Small dense linear-algebra helpers: unitary eigen-decomposition, defect
//! measures and eigenvector tracking across parameter steps.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |U^dagger U - 1|`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let p = u.adjoint() * u;
    let n = p.nrows();
    max_abs(&(p - DMatrix::<Complex64>::identity(n, n)))
}

/// `max |H - H^dagger|`.
pub fn hermiticity_defect(h: &DMatrix<Complex64>) -> f64 {
    max_abs(&(h - h.adjoint()))
}

pub fn symmetry_defect(h: &DMatrix<f64>) -> f64 {
    (h - h.transpose()).iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Eigenvalues and orthonormal eigenvectors (columns) of a unitary matrix.
///
/// A unitary matrix is normal, so its complex Schur form is diagonal and the
/// Schur vectors are eigenvectors.
pub fn unitary_eigen(u: &DMatrix<Complex64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let schur = Schur::try_new(u.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::invalid("propagator", "Schur decomposition did not converge"))?;
    let (q, _t) = schur.unpack();
    let values = (0..q.ncols())
        .map(|k| {
            let v = q.column(k);
            (v.adjoint() * u * v)[(0, 0)]
        })
        .collect();
    Ok((values, q))
}

/// Result of matching new eigenvectors to previously tracked ones.
#[derive(Clone, Debug)]
pub struct Matching {
    /// `order[i]` is the column of the new basis assigned to tracked vector `i`.
    pub order: Vec<usize>,
    /// Smallest `|<old_i|new_order[i]>|^2` over the assignment.
    pub min_overlap: f64,
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Groups indices whose phases lie within `tol` of each other on the circle.
fn clusters(phases: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let n = phases.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if circular_distance(phases[i], phases[j]) < tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if seen[r] == usize::MAX {
            seen[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[seen[r]].push(i);
    }
    groups
}

/// Matches the columns of `new` (eigenvectors with eigenphases `phases`) to
/// the tracked columns of `prev`.
///
/// Inside a (near-)degenerate cluster the eigenvectors are arbitrary, so they
/// are first replaced by the orthonormalized projections of the tracked
/// vectors onto the cluster subspace. Matched columns are phase-aligned with
/// their predecessors.
pub fn match_columns(
    prev: &DMatrix<Complex64>,
    new: &mut DMatrix<Complex64>,
    phases: &[f64],
    cluster_tol: f64,
) -> Matching {
    let n = prev.ncols();
    for group in clusters(phases, cluster_tol) {
        if group.len() < 2 {
            continue;
        }
        let basis = DMatrix::from_fn(new.nrows(), group.len(), |r, c| new[(r, group[c])]);
        let coeffs = basis.adjoint() * prev;
        let mut weights: Vec<(usize, f64)> = (0..n)
            .map(|i| (i, coeffs.column(i).norm_squared()))
            .collect();
        weights.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut accepted: Vec<nalgebra::DVector<Complex64>> = Vec::new();
        let candidates = weights
            .iter()
            .map(|&(i, _)| &basis * coeffs.column(i))
            .chain((0..group.len()).map(|c| basis.column(c).into_owned()));
        for mut v in candidates {
            if accepted.len() == group.len() {
                break;
            }
            for a in &accepted {
                let proj = a.dotc(&v);
                v -= a * proj;
            }
            let norm = v.norm();
            if norm > 1e-6 {
                accepted.push(v / Complex64::new(norm, 0.0));
            }
        }
        for (c, v) in group.iter().zip(accepted) {
            new.set_column(*c, &v);
        }
    }

    let overlaps = prev.adjoint() * &*new;
    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(n * new.ncols());
    for i in 0..n {
        for j in 0..new.ncols() {
            pairs.push((i, j, overlaps[(i, j)].norm_sqr()));
        }
    }
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut order = vec![usize::MAX; n];
    let mut taken = vec![false; new.ncols()];
    let mut min_overlap = f64::INFINITY;
    for (i, j, w) in pairs {
        if order[i] == usize::MAX && !taken[j] {
            order[i] = j;
            taken[j] = true;
            min_overlap = min_overlap.min(w);
        }
    }
    for (i, &j) in order.iter().enumerate() {
        let o = overlaps[(i, j)];
        if o.norm() > 0.0 {
            let phase = o.conj() / o.norm();
            let col = new.column(j) * phase;
            new.set_column(j, &col);
        }
    }
    Matching { order, min_overlap }
}
