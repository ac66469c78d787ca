//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! Rows are indexed by constraint, columns by basis position. `ftran` maps a
//! row-indexed vector to a position-indexed one (`B⁻¹ b`); `btran` maps a
//! position-indexed vector to a row-indexed one (`B⁻ᵀ c`).

const NONE: usize = usize::MAX;
const THRESHOLD: f64 = 0.01;
const ABS_PIVOT: f64 = 1e-11;
const DROP: f64 = 1e-14;
const SEARCH_LIMIT: usize = 4;

/// Rows and positions left unpivoted when the basis is singular.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub rows: Vec<usize>,
    pub positions: Vec<usize>,
}

struct UPivot {
    row: usize,
    pos: usize,
    diag: f64,
    offs: Vec<(usize, f64)>,
}

struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

pub(crate) struct Factor {
    l_etas: Vec<(usize, Vec<(usize, f64)>)>,
    u: Vec<UPivot>,
    etas: Vec<Eta>,
    m: usize,
}

/// Doubly linked lists of items bucketed by count.
struct CountLists {
    head: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    count: Vec<usize>,
}

impl CountLists {
    fn new(items: usize, max_count: usize) -> Self {
        CountLists {
            head: vec![NONE; max_count + 2],
            next: vec![NONE; items],
            prev: vec![NONE; items],
            count: vec![NONE; items],
        }
    }

    fn insert(&mut self, k: usize, c: usize) {
        let c = c.min(self.head.len() - 1);
        self.count[k] = c;
        self.prev[k] = NONE;
        self.next[k] = self.head[c];
        if self.head[c] != NONE {
            self.prev[self.head[c]] = k;
        }
        self.head[c] = k;
    }

    fn remove(&mut self, k: usize) {
        let c = self.count[k];
        if c == NONE {
            return;
        }
        if self.prev[k] != NONE {
            self.next[self.prev[k]] = self.next[k];
        } else {
            self.head[c] = self.next[k];
        }
        if self.next[k] != NONE {
            self.prev[self.next[k]] = self.prev[k];
        }
        self.count[k] = NONE;
    }

    fn update(&mut self, k: usize, c: usize) {
        self.remove(k);
        self.insert(k, c);
    }

    fn iter(&self, c: usize) -> CountIter<'_> {
        CountIter { lists: self, cur: self.head.get(c).copied().unwrap_or(NONE) }
    }
}

struct CountIter<'a> {
    lists: &'a CountLists,
    cur: usize,
}

impl Iterator for CountIter<'_> {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.cur == NONE {
            return None;
        }
        let k = self.cur;
        self.cur = self.lists.next[k];
        Some(k)
    }
}

fn row_value(row: &[(usize, f64)], j: usize) -> f64 {
    row.iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
}

impl Factor {
    /// Factors the m×m matrix given column-wise as `(row, value)` lists.
    pub(crate) fn new(m: usize, cols: &[Vec<(usize, f64)>]) -> Result<Factor, Singular> {
        debug_assert_eq!(cols.len(), m);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut colpat: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (j, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                if v != 0.0 {
                    rows[i].push((j, v));
                    colpat[j].push(i);
                }
            }
        }
        let mut rl = CountLists::new(m, m);
        let mut cl = CountLists::new(m, m);
        for i in 0..m {
            rl.insert(i, rows[i].len());
            cl.insert(i, colpat[i].len());
        }
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        let mut l_etas = Vec::new();
        let mut u = Vec::with_capacity(m);
        let mut work = vec![0.0f64; m];
        let mut mark = vec![NONE; m];

        for _ in 0..m {
            let Some((p, q)) = Self::choose_pivot(&rows, &colpat, &rl, &cl, m) else {
                return Err(Singular {
                    rows: (0..m).filter(|&i| !row_done[i]).collect(),
                    positions: (0..m).filter(|&j| !col_done[j]).collect(),
                });
            };
            let prow = std::mem::take(&mut rows[p]);
            let diag = row_value(&prow, q);
            for &(j, _) in &prow {
                colpat[j].retain(|&i| i != p);
            }
            let others: Vec<usize> = std::mem::take(&mut colpat[q]);
            let mut eta = Vec::with_capacity(others.len());
            for &i in &others {
                let row = &mut rows[i];
                let a_iq = row_value(row, q);
                row.retain(|e| e.0 != q);
                let l = a_iq / diag;
                eta.push((i, l));
                for (k, &(j, v)) in row.iter().enumerate() {
                    work[j] = v;
                    mark[j] = k;
                }
                for &(j, up) in &prow {
                    if j == q {
                        continue;
                    }
                    if mark[j] != NONE {
                        work[j] -= l * up;
                    } else {
                        row.push((j, -l * up));
                        colpat[j].push(i);
                    }
                }
                let mut k = 0;
                while k < row.len() {
                    let j = row[k].0;
                    if mark[j] != NONE {
                        row[k].1 = work[j];
                        mark[j] = NONE;
                    }
                    if row[k].1.abs() < DROP {
                        row.swap_remove(k);
                        colpat[j].retain(|&r| r != i);
                    } else {
                        k += 1;
                    }
                }
                rl.update(i, row.len());
            }
            for &(j, _) in &prow {
                if j != q {
                    cl.update(j, colpat[j].len());
                }
            }
            rl.remove(p);
            cl.remove(q);
            row_done[p] = true;
            col_done[q] = true;
            if !eta.is_empty() {
                l_etas.push((p, eta));
            }
            let offs = prow.into_iter().filter(|e| e.0 != q).collect();
            u.push(UPivot { row: p, pos: q, diag, offs });
        }
        Ok(Factor { l_etas, u, etas: Vec::new(), m })
    }

    fn column_max(rows: &[Vec<(usize, f64)>], colpat: &[Vec<usize>], j: usize) -> f64 {
        colpat[j].iter().map(|&i| row_value(&rows[i], j).abs()).fold(0.0, f64::max)
    }

    fn choose_pivot(
        rows: &[Vec<(usize, f64)>],
        colpat: &[Vec<usize>],
        rl: &CountLists,
        cl: &CountLists,
        m: usize,
    ) -> Option<(usize, usize)> {
        if cl.iter(0).next().is_some() || rl.iter(0).next().is_some() {
            return None;
        }
        let mut best: Option<(usize, usize, usize, f64)> = None;
        let mut searched = 0;
        let better = |best: &Option<(usize, usize, usize, f64)>, cost: usize, mag: f64| match best {
            None => true,
            Some((_, _, bc, bm)) => cost < *bc || (cost == *bc && mag > *bm),
        };
        for cnt in 1..=m {
            for j in cl.iter(cnt) {
                let cmax = Self::column_max(rows, colpat, j);
                for &i in &colpat[j] {
                    let v = row_value(&rows[i], j).abs();
                    if v >= THRESHOLD * cmax && v > ABS_PIVOT {
                        let cost = (rows[i].len() - 1) * (cnt - 1);
                        if better(&best, cost, v) {
                            best = Some((i, j, cost, v));
                        }
                    }
                }
                searched += 1;
                if let Some((i, j, cost, _)) = best {
                    if cost == 0 || searched >= SEARCH_LIMIT {
                        return Some((i, j));
                    }
                }
            }
            for i in rl.iter(cnt) {
                for &(j, v) in &rows[i] {
                    let v = v.abs();
                    if v <= ABS_PIVOT {
                        continue;
                    }
                    let cmax = Self::column_max(rows, colpat, j);
                    if v >= THRESHOLD * cmax {
                        let cost = (cnt - 1) * (colpat[j].len() - 1);
                        if better(&best, cost, v) {
                            best = Some((i, j, cost, v));
                        }
                    }
                }
                searched += 1;
                if let Some((i, j, cost, _)) = best {
                    if cost == 0 || searched >= SEARCH_LIMIT {
                        return Some((i, j));
                    }
                }
            }
            if let Some((i, j, cost, _)) = best {
                if cost <= cnt * cnt {
                    return Some((i, j));
                }
            }
        }
        best.map(|(i, j, _, _)| (i, j))
    }

    pub(crate) fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// Records replacement of basis position `pos` by a column whose
    /// transformed form is `alpha = B⁻¹ a`.
    pub(crate) fn update(&mut self, pos: usize, alpha: &[f64]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a.abs() > DROP)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta { pos, pivot: alpha[pos], entries });
    }

    /// Solves `B x = b` in place: `b` is row-indexed on entry, position-indexed on exit.
    pub(crate) fn ftran(&self, b: &mut Vec<f64>) {
        for (p, eta) in &self.l_etas {
            let bp = b[*p];
            if bp != 0.0 {
                for &(i, l) in eta {
                    b[i] -= l * bp;
                }
            }
        }
        let mut x = vec![0.0; self.m];
        for piv in self.u.iter().rev() {
            let mut s = b[piv.row];
            for &(j, v) in &piv.offs {
                s -= v * x[j];
            }
            x[piv.pos] = s / piv.diag;
        }
        for eta in &self.etas {
            let xr = x[eta.pos] / eta.pivot;
            x[eta.pos] = xr;
            if xr != 0.0 {
                for &(i, a) in &eta.entries {
                    x[i] -= a * xr;
                }
            }
        }
        *b = x;
    }

    /// Solves `Bᵀ y = c` in place: `c` is position-indexed on entry, row-indexed on exit.
    pub(crate) fn btran(&self, c: &mut Vec<f64>) {
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for &(i, a) in &eta.entries {
                s -= a * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        let mut y = vec![0.0; self.m];
        for piv in &self.u {
            let w = c[piv.pos] / piv.diag;
            y[piv.row] = w;
            if w != 0.0 {
                for &(j, v) in &piv.offs {
                    c[j] -= v * w;
                }
            }
        }
        for (p, eta) in self.l_etas.iter().rev() {
            let mut s = y[*p];
            for &(i, l) in eta {
                s -= l * y[i];
            }
            y[*p] = s;
        }
        *c = y;
    }
}
