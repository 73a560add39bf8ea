//! Exact integer/rational helpers.

use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Formats as `p/q`, always with an explicit denominator.
pub fn fmt_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().ok()?;
    let q: BigInt = q.trim().parse().ok()?;
    (!q.is_zero()).then(|| BigRational::new(p, q))
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Rank over the rationals by fraction-free row reduction. Rows are divided
/// by their content after every update, so entries stay small for the
/// sparse incidence-type matrices this is used on.
pub fn rank(m: &DMatrix<i64>) -> usize {
    let (nr, nc) = m.shape();
    let mut rows: Vec<Vec<BigInt>> = (0..nr)
        .map(|i| (0..nc).map(|j| BigInt::from(m[(i, j)])).collect())
        .filter(|r: &Vec<BigInt>| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut rank = 0;
    for col in 0..nc {
        if rank == rows.len() {
            break;
        }
        // pivot: smallest non-zero magnitude in this column
        let pivot = (rank..rows.len())
            .filter(|&r| !rows[r][col].is_zero())
            .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let prow = &head[rank];
        let pv = prow[col].clone();
        for row in tail.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let a = row[col].clone();
            let g = pv.gcd(&a);
            let (sp, sa) = (&pv / &g, &a / &g);
            for j in col..nc {
                if prow[j].is_zero() && row[j].is_zero() {
                    continue;
                }
                row[j] = &row[j] * &sp - &prow[j] * &sa;
            }
            let content = row[col + 1..]
                .iter()
                .filter(|x| !x.is_zero())
                .fold(BigInt::zero(), |acc, x| acc.gcd(x));
            if !content.is_zero() && !content.is_one() {
                for x in row[col + 1..].iter_mut() {
                    *x = &*x / &content;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn nullity(m: &DMatrix<i64>) -> usize {
    m.ncols() - rank(m)
}
