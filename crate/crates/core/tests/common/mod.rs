//! Exact arithmetic over ℚ(i) for cross-checking the floating-point solver at n = 2.
#![allow(dead_code)]

use std::ops::{Add, Mul, Neg, Sub};

use derivlab::{Complex64, ComplexMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gq {
    pub re: BigRational,
    pub im: BigRational,
}

impl Gq {
    pub fn int(re: i64, im: i64) -> Self {
        Gq {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }

    pub fn zero() -> Self {
        Gq::int(0, 0)
    }

    pub fn one() -> Self {
        Gq::int(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gq {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        let d = self.norm_sqr();
        assert!(!d.is_zero(), "division by zero in ℚ(i)");
        Gq {
            re: &self.re / &d,
            im: -(&self.im / &d),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
}

impl Add for &Gq {
    type Output = Gq;
    fn add(self, o: &Gq) -> Gq {
        Gq {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl Sub for &Gq {
    type Output = Gq;
    fn sub(self, o: &Gq) -> Gq {
        Gq {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl Mul for &Gq {
    type Output = Gq;
    fn mul(self, o: &Gq) -> Gq {
        Gq {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &Gq {
    type Output = Gq;
    fn neg(self) -> Gq {
        Gq {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

/// Dense square matrix over ℚ(i), row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub n: usize,
    pub a: Vec<Gq>,
}

impl QMat {
    pub fn zeros(n: usize) -> Self {
        QMat {
            n,
            a: vec![Gq::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = Gq::one();
        }
        m
    }

    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = QMat::zeros(n);
        m.a[i * n + j] = Gq::one();
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Gq {
        &self.a[i * self.n + j]
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        let n = self.n;
        let mut out = QMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Gq::zero();
                for k in 0..n {
                    s = &s + &(self.get(i, k) * o.get(k, j));
                }
                out.a[i * n + j] = s;
            }
        }
        out
    }

    /// Outer product `u·vᵀ`.
    pub fn outer(u: &[Gq], v: &[Gq]) -> QMat {
        let n = u.len();
        QMat {
            n,
            a: (0..n * n).map(|k| &u[k / n] * &v[k % n]).collect(),
        }
    }

    pub fn neg(&self) -> QMat {
        QMat {
            n: self.n,
            a: self.a.iter().map(|z| -z).collect(),
        }
    }

    pub fn add(&self, o: &QMat) -> QMat {
        QMat {
            n: self.n,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
        }
    }

    /// 2x2 inverse; `None` if singular.
    pub fn inverse2(&self) -> Option<QMat> {
        assert_eq!(self.n, 2);
        let (a, b, c, d) = (
            self.get(0, 0),
            self.get(0, 1),
            self.get(1, 0),
            self.get(1, 1),
        );
        let det = &(a * d) - &(b * c);
        if det.is_zero() {
            return None;
        }
        let k = det.inv();
        Some(QMat {
            n: 2,
            a: vec![d * &k, &(-b) * &k, &(-c) * &k, a * &k],
        })
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).to_c64())
    }
}

pub struct QRng(ChaCha8Rng);

impl QRng {
    pub fn new(seed: u64) -> Self {
        QRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn gq(&mut self) -> Gq {
        Gq::int(self.0.random_range(-4..=4), self.0.random_range(-4..=4))
    }

    pub fn nonzero_gq(&mut self) -> Gq {
        loop {
            let z = self.gq();
            if !z.is_zero() {
                return z;
            }
        }
    }

    pub fn vector(&mut self, n: usize) -> Vec<Gq> {
        (0..n).map(|_| self.gq()).collect()
    }

    pub fn nonzero_vector(&mut self, n: usize) -> Vec<Gq> {
        loop {
            let v = self.vector(n);
            if v.iter().any(|z| !z.is_zero()) {
                return v;
            }
        }
    }

    pub fn matrix(&mut self, n: usize) -> QMat {
        QMat {
            n,
            a: (0..n * n).map(|_| self.gq()).collect(),
        }
    }

    pub fn invertible2(&mut self) -> (QMat, QMat) {
        loop {
            let s = self.matrix(2);
            if let Some(inv) = s.inverse2() {
                return (s, inv);
            }
        }
    }
}

fn dot(u: &[Gq], v: &[Gq]) -> Gq {
    u.iter()
        .zip(v)
        .fold(Gq::zero(), |acc, (a, b)| &acc + &(a * b))
}

/// `(p, q)` with `p ⟂ q` in the bilinear sense `pᵀq = 0`, for n = 2.
fn bilinear_orthogonal(p: &[Gq]) -> Vec<Gq> {
    vec![p[1].clone(), -&p[0]]
}

/// Exact factorizations `S·T = G` at n = 2, mixing every available shape:
/// invertible `S`, invertible `T`, both singular (rank-one `G`), and
/// zero-product rank-one pairs (`G = 0`).
pub fn exact_pairs(g: &QMat, count: usize, seed: u64) -> Vec<(QMat, QMat)> {
    assert_eq!(g.n, 2);
    let mut rng = QRng::new(seed);
    let is_zero = g.a.iter().all(Gq::is_zero);
    // rank-one factorization G = x·yᵀ, if any
    let rank_one = if is_zero || g.inverse2().is_some() {
        None
    } else {
        let (i, j) = (0..4)
            .map(|k| (k / 2, k % 2))
            .find(|&(i, j)| !g.get(i, j).is_zero())
            .unwrap();
        let pivot_inv = g.get(i, j).inv();
        let x: Vec<Gq> = (0..2).map(|r| g.get(r, j).clone()).collect();
        let y: Vec<Gq> = (0..2).map(|c| g.get(i, c) * &pivot_inv).collect();
        assert_eq!(QMat::outer(&x, &y), *g);
        Some((x, y))
    };
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let pair = if is_zero {
            let (u, v) = (rng.nonzero_vector(2), rng.nonzero_vector(2));
            let w = bilinear_orthogonal(&v);
            let z = rng.nonzero_vector(2);
            (QMat::outer(&u, &v), QMat::outer(&w, &z))
        } else {
            match (k % 3, &rank_one) {
                (1, _) => {
                    let (t, t_inv) = rng.invertible2();
                    (g.mul(&t_inv), t)
                }
                (2, Some((x, y))) => {
                    // S = x·aᵀ, T = b·yᵀ + c·dᵀ with aᵀb = 1, aᵀc = 0
                    let a = rng.nonzero_vector(2);
                    let a_bar: Vec<Gq> = a.iter().map(Gq::conj).collect();
                    let scale = Gq {
                        re: dot(&a, &a_bar).re.recip(),
                        im: BigRational::zero(),
                    };
                    let b: Vec<Gq> = a_bar.iter().map(|z| z * &scale).collect();
                    let c = bilinear_orthogonal(&a);
                    let d = rng.vector(2);
                    (
                        QMat::outer(x, &a),
                        QMat::outer(&b, y).add(&QMat::outer(&c, &d)),
                    )
                }
                _ => {
                    let (s, s_inv) = rng.invertible2();
                    (s, s_inv.mul(g))
                }
            }
        };
        assert_eq!(pair.0.mul(&pair.1), *g, "exact factorization");
        out.push(pair);
    }
    out
}

/// Coefficients of the n² linear equations `Φ(G) − Φ(S)T − SΦ(T) = 0` in the
/// unknown entries of `M`, written entry by entry from
/// `Φ(X)_{ab} = Σ_{cd} M[a + b·n, c + d·n]·X_{cd}`. Unknown `M[p, q]` sits at
/// index `p + q·n²`.
pub fn exact_rows(g: &QMat, s: &QMat, t: &QMat) -> Vec<Vec<Gq>> {
    let n = g.n;
    let nn = n * n;
    let mut rows = Vec::with_capacity(nn);
    for b in 0..n {
        for a in 0..n {
            let mut row = vec![Gq::zero(); nn * nn];
            for (c, d) in (0..n).flat_map(|d| (0..n).map(move |c| (c, d))) {
                let q = c + d * n;
                // Φ(G)_{ab}
                let idx = (a + b * n) + q * nn;
                row[idx] = &row[idx] + g.get(c, d);
                // (Φ(S)·T)_{ab} = Σ_k Φ(S)_{ak} T_{kb}
                for k in 0..n {
                    let idx = (a + k * n) + q * nn;
                    row[idx] = &row[idx] - &(s.get(c, d) * t.get(k, b));
                }
                // (S·Φ(T))_{ab} = Σ_k S_{ak} Φ(T)_{kb}
                for k in 0..n {
                    let idx = (k + b * n) + q * nn;
                    row[idx] = &row[idx] - &(s.get(a, k) * t.get(c, d));
                }
            }
            rows.push(row);
        }
    }
    rows
}

/// Incremental row echelon form over ℚ(i).
pub struct Echelon {
    cols: usize,
    rows: Vec<(usize, Vec<Gq>)>,
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Echelon {
            cols,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn insert(&mut self, mut row: Vec<Gq>) {
        for (pivot, basis) in &self.rows {
            if !row[*pivot].is_zero() {
                let f = row[*pivot].clone();
                for (x, y) in row.iter_mut().zip(basis) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        if let Some(pivot) = row.iter().position(|z| !z.is_zero()) {
            let inv = row[pivot].inv();
            for x in row.iter_mut() {
                *x = &*x * &inv;
            }
            for (_, basis) in self.rows.iter_mut() {
                if !basis[pivot].is_zero() {
                    let f = basis[pivot].clone();
                    for (x, y) in basis.iter_mut().zip(&row) {
                        *x = &*x - &(&f * y);
                    }
                }
            }
            self.rows.push((pivot, row));
        }
    }

    /// Exact nullspace basis: one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Gq>> {
        let pivots: Vec<usize> = self.rows.iter().map(|(p, _)| *p).collect();
        (0..self.cols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![Gq::zero(); self.cols];
                v[free] = Gq::one();
                for (p, row) in &self.rows {
                    v[*p] = -&row[free];
                }
                v
            })
            .collect()
    }

    pub fn annihilates(&self, v: &[Gq]) -> bool {
        self.rows.iter().all(|(_, row)| dot(row, v).is_zero())
    }
}

/// Exact solution space of the derivability constraints from `pairs`.
pub fn exact_system(g: &QMat, pairs: &[(QMat, QMat)]) -> Echelon {
    let nn = g.n * g.n;
    let mut ech = Echelon::new(nn * nn);
    for (s, t) in pairs {
        for row in exact_rows(g, s, t) {
            ech.insert(row);
        }
    }
    ech
}

/// `vec` of the superoperator `X ↦ X·T − T·X`, entry by entry.
pub fn exact_inner_derivation(t: &QMat) -> Vec<Gq> {
    let n = t.n;
    let nn = n * n;
    let mut v = vec![Gq::zero(); nn * nn];
    for (c, d) in (0..n).flat_map(|d| (0..n).map(move |c| (c, d))) {
        let x = QMat::unit(n, c, d);
        let out = x.mul(t).add(&t.mul(&x).neg());
        for (a, b) in (0..n).flat_map(|b| (0..n).map(move |a| (a, b))) {
            v[(a + b * n) + (c + d * n) * nn] = out.get(a, b).clone();
        }
    }
    v
}

/// The identity superoperator, vectorized.
pub fn exact_identity_superop(n: usize) -> Vec<Gq> {
    let nn = n * n;
    (0..nn * nn)
        .map(|k| {
            if k % nn == k / nn {
                Gq::one()
            } else {
                Gq::zero()
            }
        })
        .collect()
}

/// Floating-point copy of exact vectors as columns of an n⁴ x k matrix.
pub fn to_columns(vs: &[Vec<Gq>]) -> ComplexMatrix {
    let rows = vs.first().map_or(0, Vec::len);
    ComplexMatrix::from_fn(rows, vs.len(), |i, j| vs[j][i].to_c64())
}
