//! The maps `f_λ` realizing the well-order `λ+1`, evaluated lazily.
//!
//! Base cases: `f_0 = id`, `f_1(x) = x²`. Successor `α+1`: `½ f_α(2x)` on `[0,½]`
//! and `x + (x-½)(x-1)` on `(½,1]`. Limit `λ = α + w^e`: block `[0,½]` hosts a
//! rescaled `f_α`, block `[a_n, a_{n+1}]` (`a_n = n/(n+1)`) hosts a rescaled
//! `f_{β_n}` with `β_n = (w^e)[n]`, and `f(1) = 1`.

use num::{One, Zero};

use crate::ordinal::{Kind, Ordinal};
use crate::rational::{floor_i64, half, int, rat, Rational};

/// `a_n = n/(n+1)`.
pub fn block_start(n: u64) -> Rational {
    rat(n as i64, n as i64 + 1)
}

/// The sub-map hosted by limit block `n >= 1`: `β_n = (w^e)[n]`.
pub fn limit_block_ordinal(tail_exponent: &Ordinal, n: u64) -> Ordinal {
    Ordinal::omega_pow(tail_exponent.clone())
        .fundamental(n)
        .expect("w^e with e >= 1 is indecomposable")
}

/// Index `n` of the limit block `[a_n, a_{n+1})` containing `x ∈ [0,1)`.
pub fn block_index(x: &Rational) -> u64 {
    floor_i64(&(x / (Rational::one() - x))) as u64
}

/// Exact `f_λ(x)` for `x ∈ [0,1]`.
pub fn eval(lambda: &Ordinal, x: &Rational) -> Rational {
    // result = scale * f_cur(local) + offset
    let mut cur = lambda.clone();
    let mut local = x.clone();
    let mut scale = Rational::one();
    let mut offset = Rational::zero();
    loop {
        if local.is_zero() {
            return offset;
        }
        if local.is_one() {
            return scale + offset;
        }
        match cur.classify() {
            Kind::Zero => return scale * local + offset,
            Kind::Successor(pred) if pred.is_zero() => return scale * &local * &local + offset,
            Kind::Successor(pred) => {
                if local <= half() {
                    local *= int(2);
                    scale *= half();
                    cur = pred;
                } else {
                    let y = &local + (&local - half()) * (&local - Rational::one());
                    return scale * y + offset;
                }
            }
            Kind::Limit => {
                let (head, tail_exp) = cur.tail_split().expect("limit");
                let n = block_index(&local);
                if n == 0 {
                    local *= int(2);
                    scale *= half();
                    cur = head;
                } else {
                    let k = int(((n + 1) * (n + 2)) as i64);
                    let a_n = block_start(n);
                    offset += &scale * &a_n;
                    scale /= &k;
                    local = (local - a_n) * k;
                    cur = limit_block_ordinal(&tail_exp, n);
                }
            }
        }
    }
}

/// Fixed points of `f_λ`, descending into recursion blocks no narrower than `min_width`.
///
/// Every returned point is an endpoint of some recursion block. Blocks narrower
/// than `min_width` contribute only their endpoints; for limit maps the tail of
/// blocks accumulating at 1 is cut at the first such block.
pub fn fixed_points(lambda: &Ordinal, min_width: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    collect(lambda, &Rational::zero(), &Rational::one(), min_width, &mut out);
    out.sort();
    out.dedup();
    out
}

fn collect(l: &Ordinal, offset: &Rational, scale: &Rational, min_width: &Rational, out: &mut Vec<Rational>) {
    out.push(offset.clone());
    out.push(offset + scale);
    if scale < min_width {
        return;
    }
    match l.classify() {
        Kind::Zero => {}
        Kind::Successor(pred) if pred.is_zero() => {}
        Kind::Successor(pred) => collect(&pred, offset, &(scale * half()), min_width, out),
        Kind::Limit => {
            let (head, tail_exp) = l.tail_split().expect("limit");
            collect(&head, offset, &(scale * half()), min_width, out);
            let mut n = 1u64;
            loop {
                let width = scale * rat(1, ((n + 1) * (n + 2)) as i64);
                let start = offset + scale * block_start(n);
                if &width < min_width {
                    out.push(start);
                    break;
                }
                collect(&limit_block_ordinal(&tail_exp, n), &start, &width, min_width, out);
                n += 1;
            }
        }
    }
}
