//! Matrices over the Laurent ring: determinants, minors and Fitting-ideal reduction.

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use super::cyclo::Cyclo;
use super::poly::LaurentPoly;
use crate::error::LaurentError;

/// Default size up to which determinants use cofactor (subset) expansion.
pub const DEFAULT_DET_CAP: usize = 10;

/// Largest number of interpolation nodes the determinant fallback may use.
const MAX_INTERPOLATION_NODES: usize = 1 << 20;

/// Dense matrix of Laurent polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    conductor: u32,
    data: Vec<LaurentPoly>,
}

impl LaurentMatrix {
    pub fn zeros(rows: usize, cols: usize, nvars: usize, conductor: u32) -> Self {
        LaurentMatrix {
            rows,
            cols,
            nvars,
            conductor,
            data: vec![LaurentPoly::zero(nvars, conductor); rows * cols],
        }
    }

    pub fn identity(n: usize, nvars: usize, conductor: u32) -> Self {
        let mut m = Self::zeros(n, n, nvars, conductor);
        for i in 0..n {
            m.set(i, i, LaurentPoly::one(nvars, conductor));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn get(&self, r: usize, c: usize) -> &LaurentPoly {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: LaurentPoly) {
        assert_eq!(p.nvars(), self.nvars);
        assert_eq!(p.conductor(), self.conductor);
        self.data[r * self.cols + c] = p;
    }

    /// Nonzero entries in row-major order.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, &LaurentPoly)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(move |(k, p)| (k / self.cols, k % self.cols, p))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len(), self.nvars, self.conductor);
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m.data[i * cols.len() + j] = self.get(r, c).clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut m = Self::zeros(self.rows, other.cols, self.nvars, self.conductor);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        m.data[idx] = m.data[idx].add(&a.mul(b));
                    }
                }
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(LaurentPoly::is_zero)
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<DMatrix<Complex64>, LaurentError> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for (r, c, p) in self.nonzero_entries() {
            out[(r, c)] = p.eval(point)?;
        }
        Ok(out)
    }

    pub fn eval_exact(&self, point: &[Cyclo]) -> Result<CycloMatrix, LaurentError> {
        let mut out = CycloMatrix::zeros(self.rows, self.cols, self.conductor);
        for (r, c, p) in self.nonzero_entries() {
            out.set(r, c, p.eval_exact(point)?);
        }
        Ok(out)
    }

    pub fn embed(&self, conductor: u32) -> Self {
        LaurentMatrix {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            conductor,
            data: self.data.iter().map(|p| p.embed(conductor)).collect(),
        }
    }
}

/// A Laurent matrix whose nonzero entries are single terms with root-of-unity
/// coefficients (up to sign).
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialMatrix(LaurentMatrix);

impl MonomialMatrix {
    pub fn new(m: LaurentMatrix) -> Result<Self, LaurentError> {
        for (r, c, p) in m.nonzero_entries() {
            let ok = p.is_unit()
                && p.terms().values().all(|coef| {
                    let z = coef.to_complex();
                    (z.norm() - 1.0).abs() < 1e-12
                        && coef.pow(2 * coef.conductor() as i64).is_some_and(|x| x.is_one())
                });
            if !ok {
                return Err(LaurentError::NotMonomial { row: r, col: c });
            }
        }
        Ok(MonomialMatrix(m))
    }

    pub fn matrix(&self) -> &LaurentMatrix {
        &self.0
    }

    pub fn into_inner(self) -> LaurentMatrix {
        self.0
    }
}

impl std::ops::Deref for MonomialMatrix {
    type Target = LaurentMatrix;

    fn deref(&self) -> &LaurentMatrix {
        &self.0
    }
}

/// Dense matrix over a cyclotomic field.
#[derive(Clone, Debug, PartialEq)]
pub struct CycloMatrix {
    rows: usize,
    cols: usize,
    conductor: u32,
    data: Vec<Cyclo>,
}

impl CycloMatrix {
    pub fn zeros(rows: usize, cols: usize, conductor: u32) -> Self {
        CycloMatrix {
            rows,
            cols,
            conductor,
            data: vec![Cyclo::zero(conductor); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Cyclo {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Cyclo) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Cyclo::is_zero)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut m = Self::zeros(self.rows, other.cols, self.conductor);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        m.data[idx] = m.data[idx].add(&a.mul(b));
                    }
                }
            }
        }
        m
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).to_complex())
    }

    /// Row-reduces in place and returns the rank together with the determinant
    /// factor accumulated from the pivots (meaningful for square input).
    fn eliminate(&mut self) -> (usize, Cyclo) {
        let mut det = Cyclo::one(self.conductor);
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            // Prefer the pivot with the fewest nonzero power-basis coefficients.
            let pivot = (rank..self.rows)
                .filter(|&r| !self.get(r, col).is_zero())
                .min_by_key(|&r| self.get(r, col).coeffs().iter().filter(|c| !c.is_zero()).count());
            let Some(p) = pivot else {
                det = Cyclo::zero(self.conductor);
                continue;
            };
            if p != rank {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, rank * self.cols + c);
                }
                det = det.neg();
            }
            let pv = self.get(rank, col).clone();
            det = det.mul(&pv);
            let inv = pv.inv().expect("nonzero pivot");
            for r in rank + 1..self.rows {
                let f = self.get(r, col);
                if f.is_zero() {
                    continue;
                }
                let f = f.mul(&inv);
                for c in col..self.cols {
                    let t = self.get(rank, c);
                    if t.is_zero() {
                        continue;
                    }
                    let v = self.get(r, c).sub(&f.mul(t));
                    self.set(r, c, v);
                }
            }
            rank += 1;
        }
        (rank, det)
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate().0
    }

    pub fn det(&self) -> Result<Cyclo, LaurentError> {
        if self.rows != self.cols {
            return Err(LaurentError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows == 0 {
            return Ok(Cyclo::one(self.conductor));
        }
        let (rank, det) = self.clone().eliminate();
        Ok(if rank < self.rows {
            Cyclo::zero(self.conductor)
        } else {
            det
        })
    }
}

/// Count of singular values above `tol` times the largest one.
pub fn numeric_rank(m: &DMatrix<Complex64>, tol: f64) -> Result<usize, LaurentError> {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(LaurentError::NonFiniteEntry { row: r, col: c });
            }
        }
    }
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * max).count())
}

#[derive(Clone, Copy, Debug)]
pub struct DetOptions {
    pub cap: usize,
    pub interpolate: bool,
}

impl Default for DetOptions {
    fn default() -> Self {
        DetOptions {
            cap: DEFAULT_DET_CAP,
            interpolate: true,
        }
    }
}

/// Exact determinant of a square Laurent matrix.
pub fn laurent_det(m: &LaurentMatrix, opts: DetOptions) -> Result<LaurentPoly, LaurentError> {
    if m.rows != m.cols {
        return Err(LaurentError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if m.rows <= opts.cap {
        return Ok(det_subset_dp(m));
    }
    if !opts.interpolate {
        return Err(LaurentError::CapExceeded {
            size: m.rows,
            cap: opts.cap,
        });
    }
    det_interpolate(m)
}

/// Permutation expansion organised as a dynamic program over used-column sets.
fn det_subset_dp(m: &LaurentMatrix) -> LaurentPoly {
    let n = m.rows;
    let zero = LaurentPoly::zero(m.nvars, m.conductor);
    if n == 0 {
        return LaurentPoly::one(m.nvars, m.conductor);
    }
    let mut layer: HashMap<u64, LaurentPoly> = HashMap::new();
    layer.insert(0, LaurentPoly::one(m.nvars, m.conductor));
    for i in 0..n {
        let mut next: HashMap<u64, LaurentPoly> = HashMap::new();
        for (mask, acc) in &layer {
            for c in 0..n {
                if mask & (1 << c) != 0 {
                    continue;
                }
                let a = m.get(i, c);
                if a.is_zero() {
                    continue;
                }
                let larger = (mask >> (c + 1)).count_ones();
                let mut t = acc.mul(a);
                if larger % 2 == 1 {
                    t = t.neg();
                }
                let slot = next.entry(mask | (1 << c)).or_insert_with(|| zero.clone());
                *slot = slot.add(&t);
            }
        }
        next.retain(|_, p| !p.is_zero());
        if next.is_empty() {
            return zero;
        }
        layer = next;
    }
    layer.into_values().next().unwrap_or(zero)
}

/// Evaluation at integer nodes followed by tensor Newton interpolation over the
/// exponent box implied by the entries.
fn det_interpolate(m: &LaurentMatrix) -> Result<LaurentPoly, LaurentError> {
    let n = m.rows;
    let nv = m.nvars;
    let mut lo = vec![0i64; nv];
    let mut hi = vec![0i64; nv];
    for r in 0..n {
        let mut rlo = vec![i64::MAX; nv];
        let mut rhi = vec![i64::MIN; nv];
        let mut any = false;
        for c in 0..n {
            if let Some(b) = m.get(r, c).exponent_bounds() {
                any = true;
                for v in 0..nv {
                    rlo[v] = rlo[v].min(b[v].0);
                    rhi[v] = rhi[v].max(b[v].1);
                }
            }
        }
        if !any {
            return Ok(LaurentPoly::zero(nv, m.conductor));
        }
        for v in 0..nv {
            lo[v] += rlo[v];
            hi[v] += rhi[v];
        }
    }
    let degs: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| (b - a) as usize).collect();
    let total = degs
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(d + 1))
        .filter(|&t| t <= MAX_INTERPOLATION_NODES)
        .ok_or(LaurentError::CapExceeded {
            size: n,
            cap: DEFAULT_DET_CAP,
        })?;
    let cond = m.conductor;
    // Values of det * gamma^(-lo) on the node grid {1..=d_v+1}.
    let mut values = Vec::with_capacity(total);
    let mut idx = vec![0usize; nv];
    for _ in 0..total {
        let point: Vec<Cyclo> = idx.iter().map(|&k| Cyclo::from_int(cond, k as i64 + 1)).collect();
        let d = m.eval_exact(&point)?.det()?;
        let mut shift = Cyclo::one(cond);
        for (p, &l) in point.iter().zip(&lo) {
            shift = shift.mul(&p.pow(-l).ok_or(LaurentError::ZeroCoordinate)?);
        }
        values.push(d.mul(&shift));
        for v in (0..nv).rev() {
            idx[v] += 1;
            if idx[v] <= degs[v] {
                break;
            }
            idx[v] = 0;
        }
    }
    // Convert along each axis from nodal values to monomial coefficients.
    let mut stride = 1;
    for v in (0..nv).rev() {
        let len = degs[v] + 1;
        let nodes: Vec<BigRational> = (1..=len as i64).map(|k| BigRational::from_integer(k.into())).collect();
        for start in 0..total {
            if (start / stride) % len != 0 {
                continue;
            }
            let line: Vec<Cyclo> = (0..len).map(|k| values[start + k * stride].clone()).collect();
            let coeffs = newton_to_monomial(&nodes, &line, cond);
            for (k, c) in coeffs.into_iter().enumerate() {
                values[start + k * stride] = c;
            }
        }
        stride *= len;
    }
    let mut out = LaurentPoly::zero(nv, cond);
    let mut idx = vec![0usize; nv];
    for val in values {
        if !val.is_zero() {
            let e: Vec<i64> = idx.iter().zip(&lo).map(|(&k, &l)| k as i64 + l).collect();
            out = out.add(&LaurentPoly::monomial(e, val));
        }
        for v in (0..nv).rev() {
            idx[v] += 1;
            if idx[v] <= degs[v] {
                break;
            }
            idx[v] = 0;
        }
    }
    Ok(out)
}

fn newton_to_monomial(nodes: &[BigRational], vals: &[Cyclo], cond: u32) -> Vec<Cyclo> {
    let n = nodes.len();
    let mut dd: Vec<Cyclo> = vals.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let denom = (&nodes[i] - &nodes[i - j]).recip();
            dd[i] = dd[i].sub(&dd[i - 1]).scale(&denom);
        }
    }
    // Horner expansion of the Newton form into monomial coefficients.
    let mut poly = vec![Cyclo::zero(cond); n];
    for i in (0..n).rev() {
        let mut shifted = vec![Cyclo::zero(cond); n];
        for k in 0..n {
            if poly[k].is_zero() {
                continue;
            }
            if k + 1 < n {
                shifted[k + 1] = shifted[k + 1].add(&poly[k]);
            }
            shifted[k] = shifted[k].sub(&poly[k].scale(&nodes[i]));
        }
        shifted[0] = shifted[0].add(&dd[i]);
        poly = shifted;
    }
    poly
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of `q x q` submatrices of a `rows x cols` matrix.
pub fn minor_count(rows: usize, cols: usize, q: usize) -> u128 {
    binomial(rows, q).saturating_mul(binomial(cols, q))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Rightmost position that can still advance.
        let Some(i) = (0..k).rev().find(|&i| cur[i] < i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// All normalized nonzero `q x q` minors, deduplicated and sorted.
pub fn laurent_minors(
    m: &LaurentMatrix,
    q: usize,
    budget: u128,
) -> Result<Vec<LaurentPoly>, LaurentError> {
    if q == 0 || q > m.rows.min(m.cols) {
        return Err(LaurentError::BadMinorSize {
            q,
            rows: m.rows,
            cols: m.cols,
        });
    }
    let required = minor_count(m.rows, m.cols, q);
    if required > budget {
        return Err(LaurentError::BudgetExceeded { required, budget });
    }
    let row_sets = combinations(m.rows, q);
    let col_sets = combinations(m.cols, q);
    let mut out = BTreeSet::new();
    for rs in &row_sets {
        for cs in &col_sets {
            let d = laurent_det(&m.submatrix(rs, cs), DetOptions::default())?;
            if !d.is_zero() {
                out.insert(d.normalized());
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Generators of the ideal of `k x k` minors, after peeling off unit pivots.
///
/// A unit entry lets the matrix be brought to `1 (+) A'` by invertible row and
/// column operations, and the `k`-minor ideal of that block sum is the
/// `(k-1)`-minor ideal of `A'`.
pub fn fitting_generators(
    m: &LaurentMatrix,
    k: usize,
    budget: u128,
) -> Result<Vec<LaurentPoly>, LaurentError> {
    let mut a = m.clone();
    let mut k = k;
    loop {
        if k == 0 {
            return Ok(vec![LaurentPoly::one(m.nvars, m.conductor)]);
        }
        a = drop_zero_lines(&a);
        if k > a.rows.min(a.cols) {
            return Ok(Vec::new());
        }
        let pivot = a
            .nonzero_entries()
            .find(|(_, _, p)| p.is_unit())
            .map(|(r, c, _)| (r, c));
        match pivot {
            Some((pr, pc)) => {
                a = schur_complement(&a, pr, pc);
                k -= 1;
            }
            None => return laurent_minors(&a, k, budget),
        }
    }
}

fn drop_zero_lines(a: &LaurentMatrix) -> LaurentMatrix {
    let rows: Vec<usize> = (0..a.rows)
        .filter(|&r| (0..a.cols).any(|c| !a.get(r, c).is_zero()))
        .collect();
    let cols: Vec<usize> = (0..a.cols)
        .filter(|&c| (0..a.rows).any(|r| !a.get(r, c).is_zero()))
        .collect();
    if rows.len() == a.rows && cols.len() == a.cols {
        return a.clone();
    }
    a.submatrix(&rows, &cols)
}

fn schur_complement(a: &LaurentMatrix, pr: usize, pc: usize) -> LaurentMatrix {
    let inv = a.get(pr, pc).unit_inverse().expect("unit pivot");
    let rows: Vec<usize> = (0..a.rows).filter(|&r| r != pr).collect();
    let cols: Vec<usize> = (0..a.cols).filter(|&c| c != pc).collect();
    let mut out = a.submatrix(&rows, &cols);
    for (i, &r) in rows.iter().enumerate() {
        let f = a.get(r, pc);
        if f.is_zero() {
            continue;
        }
        let f = f.mul(&inv);
        for (j, &c) in cols.iter().enumerate() {
            let t = a.get(pr, c);
            if !t.is_zero() {
                let v = out.get(i, j).sub(&f.mul(t));
                out.set(i, j, v);
            }
        }
    }
    out
}

/// Rank over the fraction field of the Laurent ring, by fraction-free elimination.
pub fn symbolic_rank(m: &LaurentMatrix) -> usize {
    let mut a = drop_zero_lines(m);
    let mut rank = 0;
    loop {
        if a.rows == 0 || a.cols == 0 {
            return rank;
        }
        let pivot = a
            .nonzero_entries()
            .min_by_key(|(_, _, p)| p.len())
            .map(|(r, c, _)| (r, c));
        let Some((pr, pc)) = pivot else {
            return rank;
        };
        a = fraction_free_step(&a, pr, pc);
        a = drop_zero_lines(&a);
        rank += 1;
    }
}

/// One step of fraction-free elimination: rows become `p * row - f * pivot_row`.
fn fraction_free_step(a: &LaurentMatrix, pr: usize, pc: usize) -> LaurentMatrix {
    let p = a.get(pr, pc).clone();
    let rows: Vec<usize> = (0..a.rows).filter(|&r| r != pr).collect();
    let cols: Vec<usize> = (0..a.cols).filter(|&c| c != pc).collect();
    let mut out = LaurentMatrix::zeros(rows.len(), cols.len(), a.nvars, a.conductor);
    for (i, &r) in rows.iter().enumerate() {
        let f = a.get(r, pc);
        for (j, &c) in cols.iter().enumerate() {
            let mut v = a.get(r, c).mul(&p);
            if !f.is_zero() {
                v = v.sub(&f.mul(a.get(pr, c)));
            }
            out.set(i, j, v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(nvars: usize, i: usize) -> LaurentPoly {
        LaurentPoly::var(nvars, 1, i)
    }

    fn c(k: i64) -> LaurentPoly {
        LaurentPoly::constant(1, Cyclo::from_int(1, k))
    }

    /// Coboundary of the three-arc circle with one twisted edge.
    fn circle3() -> LaurentMatrix {
        let mut m = LaurentMatrix::zeros(3, 3, 1, 1);
        // edges (0,1), (0,2), (1,2); columns are vertices 0, 1, 2
        m.set(0, 0, c(-1));
        m.set(0, 1, c(1));
        m.set(1, 0, c(-1));
        m.set(1, 2, g(1, 0));
        m.set(2, 1, c(-1));
        m.set(2, 2, c(1));
        m
    }

    #[test]
    fn circle_determinant_by_hand() {
        let d = laurent_det(&circle3(), DetOptions::default()).unwrap();
        let expect = g(1, 0).sub(&c(1));
        assert!(d == expect || d == expect.neg(), "det = {d}");
    }

    #[test]
    fn trivial_determinants() {
        let id = LaurentMatrix::identity(4, 1, 1);
        assert!(laurent_det(&id, DetOptions::default()).unwrap().is_one());
        let mut z = circle3();
        for col in 0..3 {
            z.set(1, col, LaurentPoly::zero(1, 1));
        }
        assert!(laurent_det(&z, DetOptions::default()).unwrap().is_zero());
        assert!(matches!(
            laurent_det(&LaurentMatrix::zeros(2, 3, 1, 1), DetOptions::default()),
            Err(LaurentError::NotSquare { .. })
        ));
    }

    #[test]
    fn interpolation_matches_cofactor() {
        // 3x3 with mixed exponents and two variables.
        let mut m = LaurentMatrix::zeros(3, 3, 2, 1);
        let mono = |e: Vec<i64>, k: i64| LaurentPoly::monomial(e, Cyclo::from_int(1, k));
        m.set(0, 0, mono(vec![1, 0], 1));
        m.set(0, 1, mono(vec![0, -1], -1));
        m.set(1, 1, mono(vec![2, 1], 3));
        m.set(1, 2, mono(vec![0, 0], 1));
        m.set(2, 0, mono(vec![-1, 2], 2));
        m.set(2, 2, mono(vec![1, 1], -1));
        let a = laurent_det(&m, DetOptions::default()).unwrap();
        let b = laurent_det(&m, DetOptions { cap: 0, interpolate: true }).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            laurent_det(&m, DetOptions { cap: 2, interpolate: false }),
            Err(LaurentError::CapExceeded { .. })
        ));
    }

    #[test]
    fn minors_examples() {
        let m = circle3();
        let full = laurent_minors(&m, 3, 100).unwrap();
        assert_eq!(full, vec![g(1, 0).sub(&c(1))]);
        let ones = laurent_minors(&m, 1, 100).unwrap();
        assert_eq!(ones, vec![LaurentPoly::one(1, 1)]);
        let mut d = LaurentMatrix::zeros(2, 2, 1, 1);
        d.set(0, 0, g(1, 0));
        d.set(1, 1, g(1, 0));
        assert_eq!(laurent_minors(&d, 2, 10).unwrap(), vec![LaurentPoly::one(1, 1)]);
        assert!(matches!(
            laurent_minors(&m, 2, 3),
            Err(LaurentError::BudgetExceeded { required: 9, budget: 3 })
        ));
    }

    #[test]
    fn fitting_reduction_agrees_with_minors() {
        let m = circle3();
        for k in 1..=3 {
            let direct = laurent_minors(&m, k, 1000).unwrap();
            let reduced = fitting_generators(&m, k, 1000).unwrap();
            assert_eq!(direct, reduced, "k = {k}");
        }
        assert!(fitting_generators(&m, 4, 1000).unwrap().is_empty());
    }

    #[test]
    fn numeric_rank_examples() {
        let m = circle3();
        let at = |x: f64| m.eval(&[Complex64::new(x, 0.0)]).unwrap();
        assert_eq!(numeric_rank(&at(2.0), 1e-9).unwrap(), 3);
        assert_eq!(numeric_rank(&at(1.0), 1e-9).unwrap(), 2);
        assert_eq!(numeric_rank(&DMatrix::zeros(3, 3), 1e-9).unwrap(), 0);
        let mut bad = DMatrix::<Complex64>::zeros(2, 2);
        bad[(1, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            numeric_rank(&bad, 1e-9),
            Err(LaurentError::NonFiniteEntry { row: 1, col: 0 })
        ));
    }

    #[test]
    fn symbolic_and_exact_ranks() {
        assert_eq!(symbolic_rank(&circle3()), 3);
        let one = [Cyclo::one(1)];
        assert_eq!(circle3().eval_exact(&one).unwrap().rank(), 2);
        let two = [Cyclo::from_int(1, 2)];
        let d = circle3().eval_exact(&two).unwrap().det().unwrap();
        assert!(d.is_one() || d.neg().is_one());
    }

    #[test]
    fn combination_enumeration() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(5, 1).len(), 5);
        assert_eq!(minor_count(36, 9, 9), 94_143_280);
    }
}
