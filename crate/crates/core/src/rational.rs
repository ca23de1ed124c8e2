//! Exact rationals and the small amount of dense linear algebra the
//! geometry needs (rank, nullspace, square solves).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fallback for huge numerators/denominators
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses "3", "-1.25", "2/3", "1e-3" exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidNumber(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (pivot_row, other) = if i < r {
                    let (lo, hi) = m.split_at_mut(r);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = m.split_at_mut(i);
                    (&lo[r], &mut hi[0])
                };
                for (dst, src) in other.iter_mut().zip(pivot_row) {
                    if !src.is_zero() {
                        *dst -= &f * src;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// A nonzero vector v with `row · v = 0` for every row, if one exists.
pub fn null_vector(rows: &[Vec<Rational>], cols: usize) -> Option<Vec<Rational>> {
    if rows.is_empty() {
        let mut v = vec![Rational::zero(); cols];
        if cols > 0 {
            v[0] = Rational::one();
            return Some(v);
        }
        return None;
    }
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![Rational::zero(); cols];
    v[free] = Rational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[r][free].clone();
    }
    Some(v)
}

/// Solves the square system `m x = rhs`; `None` when singular.
pub fn solve_square(m: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut aug: Vec<Vec<Rational>> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !aug[i][c].is_zero())?;
        aug.swap(c, p);
        for i in c + 1..n {
            if aug[i][c].is_zero() {
                continue;
            }
            let f = &aug[i][c] / &aug[c][c];
            let (lo, hi) = aug.split_at_mut(i);
            for (dst, src) in hi[0][c..].iter_mut().zip(&lo[c][c..]) {
                if !src.is_zero() {
                    *dst -= &f * src;
                }
            }
        }
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = aug[i][n].clone();
        for j in i + 1..n {
            if !aug[i][j].is_zero() {
                acc -= &aug[i][j] * &x[j];
            }
        }
        x[i] = acc / &aug[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_accepted_forms() {
        assert_eq!(parse_rational("3").unwrap(), rat(3));
        assert_eq!(parse_rational("-2/6").unwrap(), ratio(-1, 3));
        assert_eq!(parse_rational("0.7071").unwrap(), ratio(7071, 10000));
        assert_eq!(parse_rational("-.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("1.5e2").unwrap(), rat(150));
        assert_eq!(parse_rational("25e-2").unwrap(), ratio(1, 4));
        for bad in ["", "abc", "1/0", "1.2.3", "--1", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn rank_and_nullspace() {
        let rows = vec![vec![rat(1), rat(1), rat(0)], vec![rat(2), rat(2), rat(0)]];
        assert_eq!(rank(&rows), 1);
        let v = null_vector(&rows, 3).unwrap();
        for r in &rows {
            assert!(dot(r, &v).is_zero());
        }
        assert!(v.iter().any(|x| !x.is_zero()));
    }

    #[test]
    fn square_solve_and_singular() {
        let m = vec![vec![rat(0), rat(1)], vec![rat(2), rat(1)]];
        let x = solve_square(&m, &[rat(3), rat(5)]).unwrap();
        assert_eq!(x, vec![rat(1), rat(3)]);
        let s = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert!(solve_square(&s, &[rat(1), rat(1)]).is_none());
    }
}
