//! Planar projective transforms.

use serde::{Deserialize, Serialize};

/// Determinants at or below this magnitude are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// A 3×3 projective transform stored row-major, acting on `(x, y, 1)` column vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homography(pub [f64; 9]);

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum HomographyError {
    #[error("three of the four correspondence points are collinear")]
    Collinear,
    #[error("homography is singular (|det| = {0:e})")]
    Singular(f64),
}

impl Homography {
    pub const IDENTITY: Homography = Homography([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);

    pub fn scale(sx: f64, sy: f64) -> Self {
        Homography([sx, 0.0, 0.0, 0.0, sy, 0.0, 0.0, 0.0, 1.0])
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Homography([1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0])
    }

    /// Solves for the unique transform taking each `src[i]` to `dst[i]`, normalized so the
    /// bottom-right entry is 1.
    pub fn from_correspondences(
        src: &[(f64, f64); 4],
        dst: &[(f64, f64); 4],
    ) -> Result<Self, HomographyError> {
        if has_collinear_triple(src) || has_collinear_triple(dst) {
            return Err(HomographyError::Collinear);
        }
        // Unknowns h11..h32 with h33 = 1; two rows per correspondence.
        let mut a = [[0.0f64; 9]; 8];
        for (i, (&(x, y), &(u, v))) in src.iter().zip(dst).enumerate() {
            a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
            a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
        }
        let sol = solve_augmented(&mut a).ok_or(HomographyError::Singular(0.0))?;
        let h = Homography([sol[0], sol[1], sol[2], sol[3], sol[4], sol[5], sol[6], sol[7], 1.0]);
        let det = h.determinant();
        if det.abs() <= SINGULAR_DET {
            return Err(HomographyError::Singular(det));
        }
        Ok(h)
    }

    /// Maps a point; `None` when it lands on the line at infinity.
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let m = &self.0;
        let w = m[6] * x + m[7] * y + m[8];
        if w.abs() < 1e-300 {
            return None;
        }
        Some(((m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w))
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
            + m[2] * (m[3] * m[7] - m[4] * m[6])
    }

    pub fn inverse(&self) -> Result<Self, HomographyError> {
        let det = self.determinant();
        if det.abs() <= SINGULAR_DET {
            return Err(HomographyError::Singular(det));
        }
        let m = &self.0;
        let adj = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        Ok(Homography(adj.map(|v| v / det)).normalized())
    }

    /// `self ∘ rhs`: applies `rhs` first.
    pub fn then_after(&self, rhs: &Homography) -> Homography {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 3 + c] = (0..3).map(|k| a[r * 3 + k] * b[k * 3 + c]).sum();
            }
        }
        Homography(out)
    }

    /// Rescales so the bottom-right entry is 1 (left unchanged if that entry is ~0).
    pub fn normalized(&self) -> Homography {
        let s = self.0[8];
        if s.abs() < 1e-300 {
            return *self;
        }
        Homography(self.0.map(|v| v / s))
    }

    /// True when the projective row is `[0, 0, 1]` after normalization.
    pub fn is_affine(&self, tol: f64) -> bool {
        let n = self.normalized();
        n.0[6].abs() <= tol && n.0[7].abs() <= tol
    }
}

fn has_collinear_triple(p: &[(f64, f64); 4]) -> bool {
    let scale = p
        .iter()
        .flat_map(|&(x, y)| [x.abs(), y.abs()])
        .fold(1.0f64, f64::max);
    let tol = 1e-12 * scale * scale;
    for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        let (a, b, c) = (p[i], p[j], p[k]);
        let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
        if cross.abs() <= tol {
            return true;
        }
    }
    false
}

/// Gauss-Jordan with partial pivoting on an 8×9 augmented matrix.
fn solve_augmented(a: &mut [[f64; 9]; 8]) -> Option<[f64; 8]> {
    const N: usize = 8;
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for row in 0..N {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    for c in col..=N {
                        a[row][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let mut x = [0.0; N];
    for (i, xi) in x.iter_mut().enumerate() {
        *xi = a[i][N];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_known_projective_map() {
        let truth = Homography([1.2, 0.1, 3.0, -0.2, 0.9, 1.0, 0.001, 0.002, 1.0]);
        let src = [(0.0, 0.0), (10.0, 0.0), (10.0, 8.0), (0.0, 8.0)];
        let dst = src.map(|(x, y)| truth.apply(x, y).unwrap());
        let h = Homography::from_correspondences(&src, &dst).unwrap();
        for (a, b) in h.0.iter().zip(truth.0.iter()) {
            assert!((a - b).abs() < 1e-10, "{h:?}");
        }
    }

    #[test]
    fn collinear_rejected() {
        let src = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0)];
        let dst = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert_eq!(
            Homography::from_correspondences(&src, &dst),
            Err(HomographyError::Collinear)
        );
        assert_eq!(
            Homography::from_correspondences(&dst, &src),
            Err(HomographyError::Collinear)
        );
    }

    #[test]
    fn inverse_composes_to_identity() {
        let h = Homography([2.0, 0.3, -1.0, 0.1, 1.5, 4.0, 0.01, -0.02, 1.0]);
        let id = h.inverse().unwrap().then_after(&h).normalized();
        for (a, b) in id.0.iter().zip(Homography::IDENTITY.0.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_inverse_errors() {
        let h = Homography([1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0]);
        assert!(matches!(h.inverse(), Err(HomographyError::Singular(_))));
    }
}
