//! Reference implementations used only by tests. Nothing here calls into the
//! crate's numerical routines, so agreement is a genuine cross-check.
#![allow(dead_code, clippy::needless_range_loop)]

/// Plain Gaussian kernel `exp(−‖x − y‖²/h²)`.
pub fn kernel(x: &[f64], y: &[f64], h: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (h * h)).exp()
}

pub fn gram(rows: &[Vec<f64>], cols: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| cols.iter().map(|c| kernel(r, c, h)).collect())
        .collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// `(eigenvalues, eigenvectors-as-columns)` sorted by descending eigenvalue.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values = idx.iter().map(|&i| a[i][i]).collect();
    let vectors = idx
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// `K_IJᵀ · (V Λ⁻¹ Vᵀ) · K_IJ` over the top-`d` eigenpairs of `K_II`
/// (eigenvalues below `1e-12·λ₁` dropped).
pub fn nystrom_gram(
    landmarks: &[Vec<f64>],
    points: &[Vec<f64>],
    h: f64,
    d: usize,
) -> Vec<Vec<f64>> {
    let k_ii = gram(landmarks, landmarks, h);
    let k_ij = gram(landmarks, points, h);
    let (values, vectors) = jacobi_eigen(&k_ii);
    let m = landmarks.len();
    let n = points.len();
    let top = values[0];
    // projections v_rᵀ K(x_j) / sqrt(λ_r)
    let mut proj = vec![vec![0.0; n]; d];
    for r in 0..d {
        if values[r] <= 0.0 || values[r] < 1e-12 * top {
            continue;
        }
        for j in 0..n {
            let s: f64 = (0..m).map(|i| vectors[r][i] * k_ij[i][j]).sum();
            proj[r][j] = s / values[r].sqrt();
        }
    }
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| (0..d).map(|r| proj[r][a] * proj[r][b]).sum())
                .collect()
        })
        .collect()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv =
            (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

pub fn determinant(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut a = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col];
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Exact minimum of `½αᵀQα` over `{0 ≤ α ≤ c, Σα = 1}` by enumerating every
/// assignment of coefficients to lower bound / upper bound / free and solving
/// the stationarity system on the free set. Returns `(objective, α)`.
pub fn brute_force_ocsvm_dual(q: &[Vec<f64>], c: f64) -> (f64, Vec<f64>) {
    let n = q.len();
    let total = 3usize.pow(n as u32);
    let mut best = (f64::INFINITY, vec![]);
    let mut state = vec![0u8; n];
    for code in 0..total {
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha = vec![0.0; n];
        for i in 0..n {
            if state[i] == 1 {
                alpha[i] = c;
            }
        }
        let fixed_sum: f64 = alpha.iter().sum();
        if free.is_empty() {
            if (fixed_sum - 1.0).abs() > 1e-12 {
                continue;
            }
        } else {
            // [Q_FF  −1] [α_F]   [−Q_FB α_B]
            // [1ᵀ     0] [ρ  ] = [1 − Σα_B ]
            let f = free.len();
            let mut a = vec![vec![0.0; f + 1]; f + 1];
            let mut b = vec![0.0; f + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = q[i][j];
                }
                a[r][f] = -1.0;
                b[r] = -(0..n)
                    .filter(|&j| state[j] == 1)
                    .map(|j| q[i][j] * c)
                    .sum::<f64>();
                a[f][r] = 1.0;
            }
            b[f] = 1.0 - fixed_sum;
            let Some(sol) = solve(a, b) else { continue };
            if sol[..f].iter().any(|&v| v < -1e-12 || v > c + 1e-12) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        let obj = dual_objective(q, &alpha);
        if obj < best.0 {
            best = (obj, alpha);
        }
    }
    best
}

pub fn dual_objective(q: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += alpha[i] * q[i][j] * alpha[j];
        }
    }
    0.5 * s
}

/// Direct (non-log) mixture density `Σ π N(z; μ, Σ)` using an explicit
/// inverse and determinant.
pub fn mixture_density(
    weights: &[f64],
    means: &[Vec<f64>],
    covs: &[Vec<Vec<f64>>],
    z: &[f64],
) -> f64 {
    let d = z.len();
    let mut total = 0.0;
    for l in 0..weights.len() {
        let diff: Vec<f64> = z.iter().zip(&means[l]).map(|(a, b)| a - b).collect();
        let y = solve(covs[l].clone(), diff.clone()).expect("invertible covariance");
        let maha: f64 = diff.iter().zip(&y).map(|(a, b)| a * b).sum();
        let det = determinant(&covs[l]);
        let norm = ((2.0 * std::f64::consts::PI).powi(d as i32) * det).sqrt();
        total += weights[l] * (-0.5 * maha).exp() / norm;
    }
    total
}

/// `2·#{normal > novel} + #{ties}` by enumerating all pairs.
pub fn doubled_pair_wins(normal: &[f64], novel: &[f64]) -> u64 {
    let mut w = 0u64;
    for a in normal {
        for b in novel {
            if a > b {
                w += 2;
            } else if a == b {
                w += 1;
            }
        }
    }
    w
}

pub fn brute_auc(normal: &[f64], novel: &[f64]) -> f64 {
    doubled_pair_wins(normal, novel) as f64 / (2 * normal.len() * novel.len()) as f64
}

/// Small deterministic generator for oracle inputs (SplitMix64).
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn points(&mut self, n: usize, d: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..d).map(|_| self.normal()).collect())
            .collect()
    }
}
