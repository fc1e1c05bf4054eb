//! Young diagrams, normal-form matrices and the Zelenko-Li normal check.
//!
//! Boxes are indexed row by row: rows sorted by non-increasing length,
//! boxes left to right inside a row. All indices here are zero based.

use serde::{Deserialize, Serialize};

use crate::error::{LqdError, Result};
use crate::linalg::{kalman_ranks, Mat};
use crate::tolerances;

/// Maximal group of rows sharing a length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    /// Number of rows `r`.
    pub size: usize,
    /// Common row length `ℓ`.
    pub length: usize,
    /// Index of the first row of the level.
    pub first_row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DiagramJson", into = "DiagramJson")]
pub struct YoungDiagram {
    rows: Vec<usize>,
    offsets: Vec<usize>,
    levels: Vec<Level>,
}

/// `{"rows": [2, 1]}`, or the bare row list `[2, 1]` on input.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DiagramJson {
    Object { rows: Vec<usize> },
    Bare(Vec<usize>),
}

impl TryFrom<DiagramJson> for YoungDiagram {
    type Error = LqdError;
    fn try_from(j: DiagramJson) -> Result<Self> {
        match j {
            DiagramJson::Object { rows } | DiagramJson::Bare(rows) => YoungDiagram::from_rows(&rows),
        }
    }
}

impl From<YoungDiagram> for DiagramJson {
    fn from(y: YoungDiagram) -> Self {
        DiagramJson::Object { rows: y.rows }
    }
}

impl YoungDiagram {
    pub fn from_rows(row_lengths: &[usize]) -> Result<Self> {
        if row_lengths.is_empty() {
            return Err(LqdError::InvalidInput("diagram needs at least one row".into()));
        }
        if row_lengths.contains(&0) {
            return Err(LqdError::InvalidInput("row lengths must be positive".into()));
        }
        let mut rows = row_lengths.to_vec();
        rows.sort_unstable_by(|a, b| b.cmp(a));
        let mut offsets = Vec::with_capacity(rows.len());
        let mut acc = 0;
        for &r in &rows {
            offsets.push(acc);
            acc += r;
        }
        let mut levels: Vec<Level> = Vec::new();
        for (a, &len) in rows.iter().enumerate() {
            match levels.last_mut() {
                Some(l) if l.length == len => l.size += 1,
                _ => levels.push(Level { size: 1, length: len, first_row: a }),
            }
        }
        Ok(YoungDiagram { rows, offsets, levels })
    }

    /// Diagram with `n - k` rows of length 2 and `2k - n` rows of length 1.
    pub fn two_column(n: usize, k: usize) -> Result<Self> {
        if k > n || 2 * k < n {
            return Err(LqdError::InvalidInput(format!("no two-column diagram with n={n}, k={k}")));
        }
        let mut rows = vec![2; n - k];
        rows.extend(std::iter::repeat(1).take(2 * k - n));
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Number of rows, i.e. the rank `k` of the distribution.
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// Total number of boxes.
    pub fn n(&self) -> usize {
        self.rows.iter().sum()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn num_columns(&self) -> usize {
        self.rows[0]
    }

    /// Heights `d_i` of the columns.
    pub fn column_heights(&self) -> Vec<usize> {
        (1..=self.num_columns())
            .map(|i| self.rows.iter().filter(|&&r| r >= i).count())
            .collect()
    }

    pub fn box_index(&self, row: usize, col: usize) -> usize {
        debug_assert!(col < self.rows[row]);
        self.offsets[row] + col
    }

    /// `(row, column)` of every box in index order.
    pub fn boxes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n());
        for (a, &len) in self.rows.iter().enumerate() {
            for i in 0..len {
                out.push((a, i));
            }
        }
        out
    }

    /// Column index (zero based) of every box in index order.
    pub fn box_columns(&self) -> Vec<usize> {
        self.boxes().into_iter().map(|(_, i)| i).collect()
    }

    /// Box indices of superbox `(level, column)`.
    pub fn superbox(&self, level: usize, col: usize) -> Vec<usize> {
        let l = self.levels[level];
        (l.first_row..l.first_row + l.size).map(|a| self.box_index(a, col)).collect()
    }

    pub fn geodesic_dimension(&self) -> usize {
        self.column_heights()
            .iter()
            .enumerate()
            .map(|(i, d)| (2 * i + 1) * d)
            .sum()
    }

    pub fn gamma1(&self) -> Mat {
        let n = self.n();
        let mut g = Mat::zeros(n, n);
        for (a, &len) in self.rows.iter().enumerate() {
            for i in 0..len.saturating_sub(1) {
                g[(self.box_index(a, i), self.box_index(a, i + 1))] = 1.0;
            }
        }
        g
    }

    pub fn gamma2(&self) -> Mat {
        let n = self.n();
        let mut g = Mat::zeros(n, n);
        for a in 0..self.k() {
            let j = self.box_index(a, 0);
            g[(j, j)] = 1.0;
        }
        g
    }

    /// Drift `A = Γ₁ᵀ` and control matrix `B = Γ₂` of the normal form.
    pub fn normal_form(&self) -> NormalFormMatrices {
        NormalFormMatrices { gamma1: self.gamma1(), gamma2: self.gamma2() }
    }

    /// Diagonal matrix with value `values[level][col]` on every box of the superbox.
    pub fn superbox_diagonal(&self, values: &[Vec<f64>]) -> Result<Mat> {
        if values.len() != self.levels.len() {
            return Err(LqdError::ShapeMismatch(format!(
                "expected {} levels of superbox values, got {}",
                self.levels.len(),
                values.len()
            )));
        }
        let n = self.n();
        let mut q = Mat::zeros(n, n);
        for (li, lvl) in self.levels.iter().enumerate() {
            if values[li].len() != lvl.length {
                return Err(LqdError::ShapeMismatch(format!(
                    "level {li} has length {}, got {} values",
                    lvl.length,
                    values[li].len()
                )));
            }
            for (i, &v) in values[li].iter().enumerate() {
                for j in self.superbox(li, i) {
                    q[(j, j)] = v;
                }
            }
        }
        Ok(q)
    }

    /// Single-row diagram of a level.
    pub fn level_diagram(&self, level: usize) -> YoungDiagram {
        YoungDiagram::from_rows(&[self.levels[level].length]).expect("positive length")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormMatrices {
    pub gamma1: Mat,
    pub gamma2: Mat,
}

pub fn kalman_rank(a: &Mat, b: &Mat) -> Result<usize> {
    if a.nrows() != a.ncols() || b.shape() != a.shape() {
        return Err(LqdError::ShapeMismatch(format!(
            "A is {:?}, B is {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if a.nrows() == 0 {
        return Ok(0);
    }
    Ok(*kalman_ranks(a, b, tolerances::RANK).last().unwrap())
}

/// Which clause of the normal-form definition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalCondition {
    #[serde(rename = "i")]
    Symmetry,
    #[serde(rename = "ii")]
    PartialSkew,
    #[serde(rename = "iii.a")]
    EqualLengthBand,
    #[serde(rename = "iii.b")]
    UnequalLengthPattern,
}

/// One-based box coordinates `(row, column)` as used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxCoord {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: NormalCondition,
    pub first: BoxCoord,
    pub second: BoxCoord,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalReport {
    pub normal: bool,
    pub tol: f64,
    pub violation: Option<Violation>,
}

/// Column pairs `(i, j)` (one based) generated by alternately raising `j`
/// and `i` from `(1,1)` to `(n_b,n_b)`, then raising `i` up to `n_a`.
pub fn stepping_sequence(n_a: usize, n_b: usize) -> Vec<(usize, usize)> {
    assert!(n_a >= n_b && n_b >= 1);
    let mut seq = vec![(1, 1)];
    let (mut i, mut j) = (1, 1);
    while j < n_b {
        j += 1;
        seq.push((i, j));
        i += 1;
        seq.push((i, j));
    }
    while i < n_a {
        i += 1;
        seq.push((i, j));
    }
    seq
}

/// Pairs `(i, j)` allowed to be nonzero in `R_{ai,bj}` when `n_a > n_b`.
pub fn allowed_pairs(n_a: usize, n_b: usize) -> Vec<(usize, usize)> {
    let seq = stepping_sequence(n_a, n_b);
    let keep = (2 * n_b).min(seq.len());
    seq[seq.len() - keep..].to_vec()
}

pub fn is_zelenko_li_normal(r: &Mat, y: &YoungDiagram, tol: f64) -> Result<NormalReport> {
    let n = y.n();
    if r.nrows() != n || r.ncols() != n {
        return Err(LqdError::ShapeMismatch(format!(
            "matrix is {}x{}, diagram has {n} boxes",
            r.nrows(),
            r.ncols()
        )));
    }
    let rows = y.rows();
    let k = y.k();
    let at = |a: usize, i: usize, b: usize, j: usize| r[(y.box_index(a, i), y.box_index(b, j))];
    let coord = |a: usize, i: usize| BoxCoord { row: a + 1, col: i + 1 };
    let report = |condition, a, i, b, j, value| {
        Ok(NormalReport {
            normal: false,
            tol,
            violation: Some(Violation { condition, first: coord(a, i), second: coord(b, j), value }),
        })
    };

    for a in 0..k {
        for i in 0..rows[a] {
            for b in 0..k {
                for j in 0..rows[b] {
                    let d = at(a, i, b, j) - at(b, j, a, i);
                    if d.abs() > tol {
                        return report(NormalCondition::Symmetry, a, i, b, j, d);
                    }
                }
            }
        }
    }

    for a in 0..k {
        for b in 0..k {
            if rows[a] != rows[b] {
                continue;
            }
            for i in 0..rows[a] - 1 {
                let s = at(a, i, b, i + 1) + at(b, i, a, i + 1);
                if s.abs() > tol {
                    return report(NormalCondition::PartialSkew, a, i, b, i + 1, at(a, i, b, i + 1));
                }
            }
        }
    }

    for a in 0..k {
        for b in 0..k {
            let (na, nb) = (rows[a], rows[b]);
            let allowed = if na > nb {
                Some(allowed_pairs(na, nb))
            } else if na < nb {
                Some(allowed_pairs(nb, na).into_iter().map(|(i, j)| (j, i)).collect())
            } else {
                None
            };
            for i in 0..na {
                for j in 0..nb {
                    let v = at(a, i, b, j);
                    if v.abs() <= tol {
                        continue;
                    }
                    match &allowed {
                        None if i.abs_diff(j) > 1 => {
                            return report(NormalCondition::EqualLengthBand, a, i, b, j, v)
                        }
                        Some(p) if !p.contains(&(i + 1, j + 1)) => {
                            return report(NormalCondition::UnequalLengthPattern, a, i, b, j, v)
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    Ok(NormalReport { normal: true, tol, violation: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, from_rows};

    #[test]
    fn levels_of_two_one() {
        let y = YoungDiagram::from_rows(&[1, 2]).unwrap();
        assert_eq!(y.rows(), &[2, 1]);
        assert_eq!(y.n(), 3);
        assert_eq!(
            y.levels(),
            &[Level { size: 1, length: 2, first_row: 0 }, Level { size: 1, length: 1, first_row: 1 }]
        );
        let col = YoungDiagram::from_rows(&[1, 1, 1]).unwrap();
        assert_eq!(col.levels(), &[Level { size: 3, length: 1, first_row: 0 }]);
        assert_eq!(YoungDiagram::from_rows(&[1]).unwrap().n(), 1);
    }

    #[test]
    fn invalid_diagrams() {
        assert!(YoungDiagram::from_rows(&[]).is_err());
        assert!(YoungDiagram::from_rows(&[2, 0]).is_err());
    }

    #[test]
    fn gammas() {
        let y = YoungDiagram::from_rows(&[2]).unwrap();
        assert_eq!(y.gamma1(), from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]));
        assert_eq!(y.gamma2(), diag(&[1.0, 0.0]));
        let col = YoungDiagram::from_rows(&[1, 1, 1]).unwrap();
        assert_eq!(col.gamma1(), Mat::zeros(3, 3));
        assert_eq!(col.gamma2(), Mat::identity(3, 3));
        let y3 = YoungDiagram::from_rows(&[3]).unwrap();
        assert_eq!(
            y3.gamma1(),
            from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]])
        );
        assert_eq!(y3.gamma2(), diag(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn kalman_examples() {
        assert_eq!(kalman_rank(&Mat::zeros(3, 3), &Mat::identity(3, 3)).unwrap(), 3);
        let y = YoungDiagram::from_rows(&[2]).unwrap();
        assert_eq!(kalman_rank(&y.gamma1().transpose(), &y.gamma2()).unwrap(), 2);
        assert_eq!(kalman_rank(&Mat::zeros(2, 2), &Mat::zeros(2, 2)).unwrap(), 0);
        assert!(kalman_rank(&Mat::zeros(2, 2), &Mat::zeros(3, 3)).is_err());
    }

    #[test]
    fn geodesic_dimensions() {
        assert_eq!(YoungDiagram::from_rows(&[2, 1]).unwrap().geodesic_dimension(), 5);
        assert_eq!(YoungDiagram::from_rows(&[1; 4]).unwrap().geodesic_dimension(), 4);
        for d in 1..5 {
            let y = YoungDiagram::two_column(4 * d + 3, 4 * d).unwrap();
            assert_eq!(y.geodesic_dimension(), 4 * d + 9);
        }
    }

    #[test]
    fn stepping_table() {
        assert_eq!(stepping_sequence(3, 1), vec![(1, 1), (2, 1), (3, 1)]);
        assert_eq!(stepping_sequence(3, 2), vec![(1, 1), (1, 2), (2, 2), (3, 2)]);
        assert_eq!(stepping_sequence(4, 3).len(), 6);
        assert_eq!(allowed_pairs(3, 1), vec![(2, 1), (3, 1)]);
        assert_eq!(allowed_pairs(3, 2), vec![(1, 1), (1, 2), (2, 2), (3, 2)]);
        assert_eq!(allowed_pairs(4, 2), vec![(1, 2), (2, 2), (3, 2), (4, 2)]);
    }

    #[test]
    fn normal_examples() {
        let y = YoungDiagram::from_rows(&[2, 2]).unwrap();
        assert!(is_zelenko_li_normal(&diag(&[1.0, -2.0, 3.0, 0.5]), &y, 1e-12).unwrap().normal);

        let mut r = Mat::zeros(4, 4);
        let (a1, a2, b1, b2) = (0, 1, 2, 3);
        r[(a1, b2)] = 1.0;
        r[(b2, a1)] = 1.0;
        r[(b1, a2)] = 1.0;
        r[(a2, b1)] = 1.0;
        let rep = is_zelenko_li_normal(&r, &y, 1e-12).unwrap();
        assert_eq!(rep.violation.unwrap().condition, NormalCondition::PartialSkew);

        r[(b1, a2)] = -1.0;
        r[(a2, b1)] = -1.0;
        assert!(is_zelenko_li_normal(&r, &y, 1e-12).unwrap().normal);

        let y31 = YoungDiagram::from_rows(&[3, 1]).unwrap();
        let mut r = Mat::zeros(4, 4);
        r[(0, 3)] = 1.0;
        r[(3, 0)] = 1.0;
        let v = is_zelenko_li_normal(&r, &y31, 1e-12).unwrap().violation.unwrap();
        assert_eq!(v.condition, NormalCondition::UnequalLengthPattern);
        assert_eq!((v.first, v.second), (BoxCoord { row: 1, col: 1 }, BoxCoord { row: 2, col: 1 }));

        let mut r = Mat::zeros(4, 4);
        r[(1, 3)] = 1.0;
        r[(3, 1)] = 1.0;
        assert!(is_zelenko_li_normal(&r, &y31, 1e-12).unwrap().normal);

        assert!(is_zelenko_li_normal(&Mat::zeros(3, 3), &y31, 1e-12).is_err());
    }

    #[test]
    fn asymmetric_is_condition_i() {
        let y = YoungDiagram::from_rows(&[1, 1]).unwrap();
        let r = from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let v = is_zelenko_li_normal(&r, &y, 1e-12).unwrap().violation.unwrap();
        assert_eq!(v.condition, NormalCondition::Symmetry);
    }

    #[test]
    fn diagonal_band_for_equal_rows() {
        let y = YoungDiagram::from_rows(&[3, 3]).unwrap();
        let mut r = Mat::zeros(6, 6);
        r[(0, 5)] = 1.0;
        r[(5, 0)] = 1.0;
        let v = is_zelenko_li_normal(&r, &y, 1e-12).unwrap().violation.unwrap();
        assert_eq!(v.condition, NormalCondition::EqualLengthBand);
    }
}
