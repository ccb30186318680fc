//! Sparse LU factorisation of a simplex basis with product-form updates.
//!
//! Columns are factorised left-looking with threshold partial pivoting. Row
//! choice among acceptable pivots prefers sparse rows. Basis changes are
//! appended as eta columns until the next refactorisation.

const NONE: usize = usize::MAX;
/// Pivot acceptance relative to the largest candidate in the column.
const THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct BasisFactor {
    m: usize,
    /// pivot order -> original row
    prow: Vec<usize>,
    /// pivot order -> basis position
    pcol: Vec<usize>,
    /// multipliers below the pivot, keyed by original row
    lcols: Vec<Vec<(usize, f64)>>,
    /// entries above the diagonal, keyed by pivot order
    ucols: Vec<Vec<(usize, f64)>>,
    udiag: Vec<f64>,
    etas: Vec<Eta>,
}

/// Basis positions whose column was numerically dependent, paired with the
/// row whose logical column took its place.
pub(crate) type Replacements = Vec<(usize, usize)>;

impl BasisFactor {
    /// Factorise the basis whose column at position `p` is `columns[p]`.
    pub(crate) fn factorize(m: usize, columns: &[&[(usize, f64)]]) -> (Self, Replacements) {
        debug_assert_eq!(columns.len(), m);
        let mut row_count = vec![0usize; m];
        for col in columns {
            for &(r, _) in col.iter() {
                row_count[r] += 1;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| (columns[p].len(), p));

        let mut f = BasisFactor {
            m,
            prow: Vec::with_capacity(m),
            pcol: Vec::with_capacity(m),
            lcols: Vec::with_capacity(m),
            ucols: Vec::with_capacity(m),
            udiag: Vec::with_capacity(m),
            etas: Vec::new(),
        };
        let mut row_pivot = vec![NONE; m];
        let mut z = vec![0.0; m];
        let mut mark = vec![false; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut singular = Vec::new();

        for &p in &order {
            touched.clear();
            for &(r, v) in columns[p].iter() {
                z[r] = v;
                if !mark[r] {
                    mark[r] = true;
                    touched.push(r);
                }
            }
            for k in 0..f.prow.len() {
                let t = z[f.prow[k]];
                if t == 0.0 {
                    continue;
                }
                for &(r, l) in &f.lcols[k] {
                    z[r] -= l * t;
                    if !mark[r] {
                        mark[r] = true;
                        touched.push(r);
                    }
                }
            }
            let mut max_abs = 0.0f64;
            for &r in &touched {
                if row_pivot[r] == NONE {
                    max_abs = max_abs.max(z[r].abs());
                }
            }
            if max_abs < SINGULAR_TOL {
                singular.push(p);
            } else {
                let mut best = NONE;
                for &r in &touched {
                    if row_pivot[r] != NONE || z[r].abs() < THRESHOLD * max_abs {
                        continue;
                    }
                    if best == NONE
                        || row_count[r] < row_count[best]
                        || (row_count[r] == row_count[best] && r < best)
                    {
                        best = r;
                    }
                }
                let k = f.prow.len();
                let piv = z[best];
                let mut ucol = Vec::new();
                let mut lcol = Vec::new();
                for &r in &touched {
                    let v = z[r];
                    if r == best || v.abs() <= DROP_TOL {
                        continue;
                    }
                    if row_pivot[r] != NONE {
                        ucol.push((row_pivot[r], v));
                    } else {
                        lcol.push((r, v / piv));
                    }
                }
                row_pivot[best] = k;
                f.prow.push(best);
                f.pcol.push(p);
                f.lcols.push(lcol);
                f.ucols.push(ucol);
                f.udiag.push(piv);
            }
            for &r in &touched {
                z[r] = 0.0;
                mark[r] = false;
            }
        }

        let mut replacements = Vec::new();
        if !singular.is_empty() {
            let free_rows: Vec<usize> = (0..m).filter(|&r| row_pivot[r] == NONE).collect();
            debug_assert_eq!(free_rows.len(), singular.len());
            for (&p, &r) in singular.iter().zip(&free_rows) {
                let k = f.prow.len();
                row_pivot[r] = k;
                f.prow.push(r);
                f.pcol.push(p);
                f.lcols.push(Vec::new());
                f.ucols.push(Vec::new());
                f.udiag.push(-1.0);
                replacements.push((p, r));
            }
        }
        (f, replacements)
    }

    pub(crate) fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Solve `B w = a` for `a` given densely over original rows. `a` is consumed
    /// as scratch; the result is indexed by basis position.
    pub(crate) fn ftran(&self, a: &mut [f64]) -> Vec<f64> {
        let m = self.m;
        for k in 0..m {
            let t = a[self.prow[k]];
            if t == 0.0 {
                continue;
            }
            for &(r, l) in &self.lcols[k] {
                a[r] -= l * t;
            }
        }
        let mut y: Vec<f64> = (0..m).map(|k| a[self.prow[k]]).collect();
        for k in (0..m).rev() {
            if y[k] == 0.0 {
                continue;
            }
            let v = y[k] / self.udiag[k];
            y[k] = v;
            for &(i, u) in &self.ucols[k] {
                y[i] -= u * v;
            }
        }
        let mut out = vec![0.0; m];
        for k in 0..m {
            out[self.pcol[k]] = y[k];
        }
        for eta in &self.etas {
            let xr = out[eta.pos] / eta.pivot;
            out[eta.pos] = xr;
            if xr != 0.0 {
                for &(i, w) in &eta.entries {
                    out[i] -= w * xr;
                }
            }
        }
        out
    }

    /// Solve `B^T u = c` for `c` indexed by basis position; result over rows.
    pub(crate) fn btran(&self, c: &mut [f64]) -> Vec<f64> {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for &(i, w) in &eta.entries {
                s -= w * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        let mut s: Vec<f64> = (0..m).map(|k| c[self.pcol[k]]).collect();
        for k in 0..m {
            let mut v = s[k];
            for &(i, u) in &self.ucols[k] {
                v -= u * s[i];
            }
            s[k] = v / self.udiag[k];
        }
        let mut out = vec![0.0; m];
        for k in (0..m).rev() {
            let mut v = s[k];
            for &(r, l) in &self.lcols[k] {
                v -= l * out[r];
            }
            out[self.prow[k]] = v;
        }
        out
    }

    /// Record that the column at basis position `pos` was replaced by one whose
    /// FTRAN image (under the current factor) is `w`.
    pub(crate) fn update(&mut self, pos: usize, w: &[f64]) {
        let pivot = w[pos];
        let entries = w
            .iter()
            .enumerate()
            .filter(|&(i, v)| i != pos && v.abs() > DROP_TOL)
            .map(|(i, &v)| (i, v))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot,
            entries,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(columns: &[Vec<(usize, f64)>], w: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (p, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                out[r] += v * w[p];
            }
        }
        out
    }

    fn sample() -> Vec<Vec<(usize, f64)>> {
        vec![
            vec![(0, 2.0), (2, 1.0)],
            vec![(1, -1.0)],
            vec![(0, 1.0), (1, 3.0), (2, 4.0)],
        ]
    }

    #[test]
    fn ftran_and_btran_invert_the_basis() {
        let cols = sample();
        let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
        let (f, rep) = BasisFactor::factorize(3, &refs);
        assert!(rep.is_empty());
        let a = [1.0, -2.0, 0.5];
        let w = f.ftran(&mut a.clone());
        let back = dense_mul(&cols, &w, 3);
        for i in 0..3 {
            assert!((back[i] - a[i]).abs() < 1e-12);
        }
        let c = [0.3, 1.0, -1.0];
        let u = f.btran(&mut c.clone());
        for (p, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().map(|&(r, v)| v * u[r]).sum();
            assert!((dot - c[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_tracks_column_replacement() {
        let mut cols = sample();
        let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
        let (mut f, _) = BasisFactor::factorize(3, &refs);
        let entering = vec![(1, 1.0), (2, 2.0)];
        let mut dense = vec![0.0, 1.0, 2.0];
        let w = f.ftran(&mut dense);
        f.update(0, &w);
        cols[0] = entering;
        let a = [0.7, 0.1, -3.0];
        let x = f.ftran(&mut a.clone());
        let back = dense_mul(&cols, &x, 3);
        for i in 0..3 {
            assert!((back[i] - a[i]).abs() < 1e-12);
        }
        let c = [1.0, 2.0, 3.0];
        let u = f.btran(&mut c.clone());
        for (p, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().map(|&(r, v)| v * u[r]).sum();
            assert!((dot - c[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_column_is_replaced_by_a_logical() {
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]];
        let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
        let (_, rep) = BasisFactor::factorize(2, &refs);
        assert_eq!(rep.len(), 1);
    }
}
