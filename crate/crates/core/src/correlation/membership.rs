//! Membership in an inflated symmetric convex hull, decided on the Lasso path.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::lasso::Homotopy;
use crate::simcore::{dot, Matrix, Vector};

/// Dictionaries larger than this skip the cached Gram matrix and run the
/// path against the atoms directly.
const GRAM_LIMIT: usize = 1024;

/// A set of atoms on the sphere of radius `sqrt(n)`, with their Gram matrix
/// cached for reuse across membership queries.
#[derive(Debug, Clone)]
pub struct Dictionary {
    n: usize,
    atoms: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
    dense: OnceLock<Matrix>,
}

impl Dictionary {
    pub fn new(n: usize) -> Self {
        Dictionary {
            n,
            atoms: Vec::new(),
            gram: Vec::new(),
            dense: OnceLock::new(),
        }
    }

    /// Builds a dictionary, rescaling every atom to norm `sqrt(n)`.
    pub fn from_atoms<A: AsRef<[f64]>>(atoms: &[A]) -> Result<Self> {
        let first = atoms.first().ok_or(Error::EmptyInput("dictionary"))?;
        let mut dict = Dictionary::new(first.as_ref().len());
        for a in atoms {
            dict.push(a.as_ref())?;
        }
        Ok(dict)
    }

    /// Appends `atom` rescaled to norm `sqrt(n)`.
    pub fn push(&mut self, atom: &[f64]) -> Result<()> {
        if atom.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "atom of length {} in dimension {}",
                atom.len(),
                self.n
            )));
        }
        let norm = dot(atom, atom).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter("dictionary atom must be nonzero".into()));
        }
        let scale = (self.n as f64).sqrt() / norm;
        let atom: Vec<f64> = atom.iter().map(|v| v * scale).collect();
        if self.atoms.len() < GRAM_LIMIT {
            let cross: Vec<f64> = self.atoms.iter().map(|a| dot(a, &atom)).collect();
            for (row, c) in self.gram.iter_mut().zip(&cross) {
                row.push(*c);
            }
            let mut row = cross;
            row.push(dot(&atom, &atom));
            self.gram.push(row);
        } else {
            self.gram.clear();
        }
        self.atoms.push(atom);
        self.dense = OnceLock::new();
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn into_vectors(self) -> Vec<Vector> {
        self.atoms.into_iter().map(Vector::from_vec_unchecked).collect()
    }

    /// True iff some `c` with `||c||_1 <= budget` has
    /// `||sum_i c_i a_i - target||_2 <= tol * sqrt(n)`.
    ///
    /// Along the Lasso path of `target` on the atoms, `||c||_1` grows and the
    /// residual shrinks as `lambda` decreases, so the smallest residual within
    /// the budget sits where the path first reaches `||c||_1 = budget`, or at
    /// the path's end if it never does.
    pub fn contains(&self, target: &[f64], budget: f64, tol: f64) -> bool {
        if target.len() != self.n || self.atoms.is_empty() || !(budget >= 0.0) {
            return false;
        }
        let radius = tol * (self.n as f64).sqrt();
        let t_sq = dot(target, target);
        let t_norm = t_sq.sqrt();
        if t_norm <= radius {
            return true;
        }
        let xty: Vec<f64> = self.atoms.iter().map(|a| dot(a, target)).collect();
        let c_max = xty.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Hölder: <t, sum c_i a_i + e> <= budget * max|<a_i, t>| + ||t|| * radius
        if budget * c_max + t_norm * radius < t_sq {
            return false;
        }
        // a single atom often suffices
        let best = (0..xty.len())
            .max_by(|&i, &j| xty[i].abs().total_cmp(&xty[j].abs()).then(j.cmp(&i)))
            .expect("nonempty");
        let c = xty[best] / self.n as f64;
        if c.abs() <= budget {
            let mut coef = vec![0.0; self.atoms.len()];
            coef[best] = c;
            if self.residual_norm(target, &coef) <= radius {
                return true;
            }
        }
        let homotopy = if self.gram.is_empty() {
            let dense = self
                .dense
                .get_or_init(|| Matrix::from_columns(&self.atoms).expect("atoms share a length"));
            Homotopy::new(dense, target)
        } else {
            Homotopy::from_gram(&self.gram, xty)
        };
        let Ok(mut path) = homotopy else {
            return false;
        };
        let mut prev = vec![0.0; self.atoms.len()];
        let mut prev_l1 = 0.0;
        loop {
            let step = match path.next_knot() {
                Ok(Some(step)) => step,
                _ => return false,
            };
            let beta = step.knot.beta;
            let l1: f64 = beta.iter().map(|b| b.abs()).sum();
            if l1 <= budget {
                if self.residual_norm(target, &beta) <= radius {
                    return true;
                }
                prev = beta;
                prev_l1 = l1;
                continue;
            }
            let theta = (budget - prev_l1) / (l1 - prev_l1);
            let at: Vec<f64> = prev
                .iter()
                .zip(&beta)
                .map(|(a, b)| a + theta * (b - a))
                .collect();
            return self.residual_norm(target, &at) <= radius;
        }
    }

    fn residual_norm(&self, target: &[f64], coef: &[f64]) -> f64 {
        let mut r = target.to_vec();
        for (a, &c) in self.atoms.iter().zip(coef) {
            if c != 0.0 {
                r.iter_mut().zip(a).for_each(|(ri, ai)| *ri -= c * ai);
            }
        }
        dot(&r, &r).sqrt()
    }
}

/// Whether `target` lies in `budget * sconv(dictionary)` up to a residual of
/// `tol * sqrt(n)`. Atoms are rescaled to norm `sqrt(n)` first; malformed
/// input yields `false`.
pub fn sconv_membership(dictionary: &[Vector], target: &Vector, budget: f64, tol: f64) -> bool {
    if !(budget > 0.0) {
        return false;
    }
    match Dictionary::from_atoms(dictionary) {
        Ok(dict) => dict.contains(target, budget, tol),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::{normal_vector, Seed};

    fn sphere(seed: u64, n: usize) -> Vector {
        let v = normal_vector(Seed(seed), n).unwrap();
        let s = (n as f64).sqrt() / v.norm();
        v.scaled(s)
    }

    #[test]
    fn atom_is_a_member() {
        let atoms: Vec<Vector> = (0..5).map(|k| sphere(k, 7)).collect();
        for a in &atoms {
            assert!(sconv_membership(&atoms, a, 1.0, 1e-6));
            assert!(sconv_membership(&atoms, &a.scaled(-1.0), 1.0, 1e-6));
        }
    }

    #[test]
    fn scaling_beyond_budget_is_excluded() {
        let atoms: Vec<Vector> = (0..5).map(|k| sphere(10 + k, 7)).collect();
        assert!(!sconv_membership(&atoms, &atoms[0].scaled(2.0), 1.5, 1e-6));
        assert!(sconv_membership(&atoms, &atoms[0].scaled(2.0), 2.0, 1e-6));
    }

    #[test]
    fn convex_combination_is_a_member() {
        let atoms: Vec<Vector> = (0..4).map(|k| sphere(20 + k, 9)).collect();
        let t = atoms[0].scaled(0.5).add(&atoms[1].scaled(0.5));
        assert!(sconv_membership(&atoms, &t, 1.0, 1e-6));
        let t = atoms[0].scaled(0.3).sub(&atoms[2].scaled(0.6));
        assert!(sconv_membership(&atoms, &t, 0.9 + 1e-9, 1e-6));
        assert!(!sconv_membership(&atoms, &t, 0.85, 1e-6));
    }

    #[test]
    fn vector_outside_the_span_is_rejected() {
        let n = 6;
        let atoms: Vec<Vector> = (0..3).map(|k| Vector::basis(n, k).scaled((n as f64).sqrt())).collect();
        let t = Vector::basis(n, 4);
        assert!(!sconv_membership(&atoms, &t, 100.0, 1e-6));
    }

    #[test]
    fn minimal_l1_representation_is_found_with_redundant_atoms() {
        // e1 is the average of (e1 + e2)/sqrt2 and (e1 - e2)/sqrt2 scaled by sqrt2,
        // which needs l1 = sqrt2 through those atoms but only 1 through e1 itself
        let n = 4;
        let r = (n as f64).sqrt();
        let mut atoms = vec![
            Vector::new(vec![1.0, 1.0, 0.0, 0.0]).unwrap(),
            Vector::new(vec![1.0, -1.0, 0.0, 0.0]).unwrap(),
        ];
        let t = Vector::basis(n, 0).scaled(r);
        assert!(!sconv_membership(&atoms, &t, 1.4, 1e-6));
        assert!(sconv_membership(&atoms, &t, 1.4143, 1e-6));
        atoms.push(Vector::basis(n, 0));
        assert!(sconv_membership(&atoms, &t, 1.0, 1e-6));
    }

    #[test]
    fn agrees_with_brute_force_in_two_dimensions() {
        // in R^2 with two atoms, membership has a closed form: coefficients are unique
        let a = [2f64.sqrt(), 0.0];
        let b = [1.0, 1.0];
        let dict = Dictionary::from_atoms(&[a, b]).unwrap();
        for k in 0..200 {
            let t = normal_vector(Seed(500 + k), 2).unwrap();
            // solve [a b] c = t
            let det = a[0] * b[1] - a[1] * b[0];
            let c0 = (t[0] * b[1] - t[1] * b[0]) / det;
            let c1 = (a[0] * t[1] - a[1] * t[0]) / det;
            let need = c0.abs() + c1.abs();
            assert!(dict.contains(&t, need * (1.0 + 1e-7), 1e-6));
            assert!(!dict.contains(&t, need * (1.0 - 1e-3), 1e-6));
        }
    }
}
