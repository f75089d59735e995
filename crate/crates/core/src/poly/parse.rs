//! Text grammar:
//!
//! ```text
//! poly   := sign? term (sign term)*
//! term   := factor ('*'? factor)*
//! factor := INT ('^' INT)? | 'x' INDEX ('^' INT)?
//! sign   := '+' | '-' | '−'
//! ```
//!
//! Variables are `x1 .. xn`. Whitespace is ignored.

use alloc::string::String;
use alloc::vec;

use num_bigint::BigInt;
use num_traits::One;

use super::{Monomial, MultiPoly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Plus,
    Minus,
    Star,
    Caret,
    Int(BigInt),
    Var(usize),
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        pos,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<alloc::vec::Vec<(usize, Tok)>> {
    let mut out = alloc::vec::Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '+' => {
                chars.next();
                out.push((pos, Tok::Plus));
            }
            '-' | '\u{2212}' => {
                chars.next();
                out.push((pos, Tok::Minus));
            }
            '*' => {
                chars.next();
                out.push((pos, Tok::Star));
            }
            '^' => {
                chars.next();
                out.push((pos, Tok::Caret));
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let v: BigInt = digits.parse().map_err(|_| err(pos, "bad integer"))?;
                out.push((pos, Tok::Int(v)));
            }
            'x' | 'X' => {
                chars.next();
                let mut digits = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if digits.is_empty() {
                    return Err(err(pos, "variable needs an index, as in x1"));
                }
                let i: usize = digits.parse().map_err(|_| err(pos, "bad variable index"))?;
                out.push((pos, Tok::Var(i)));
            }
            other => return Err(err(pos, alloc::format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

pub(super) fn parse(text: &str, nvars: usize) -> Result<MultiPoly> {
    let toks = lex(text)?;
    let end = text.len();
    let mut i = 0;
    let mut poly = MultiPoly::zero(nvars);
    if toks.is_empty() {
        return Err(err(0, "empty polynomial"));
    }
    let mut first = true;
    while i < toks.len() {
        let mut negative = false;
        match toks[i].1 {
            Tok::Plus | Tok::Minus => {
                negative = toks[i].1 == Tok::Minus;
                i += 1;
            }
            _ if !first => return Err(err(toks[i].0, "expected '+' or '-'")),
            _ => {}
        }
        first = false;
        let mut coeff = BigInt::one();
        let mut expo = vec![0u32; nvars];
        let mut factors = 0;
        loop {
            let (pos, tok) = match toks.get(i) {
                Some(t) => t.clone(),
                None => (end, Tok::Plus),
            };
            match tok {
                Tok::Int(v) => {
                    i += 1;
                    let e = exponent(&toks, &mut i, end)?;
                    coeff *= num_traits::pow(v, e as usize);
                }
                Tok::Var(k) => {
                    if k == 0 || k > nvars {
                        return Err(err(
                            pos,
                            alloc::format!("variable x{k} out of range 1..={nvars}"),
                        ));
                    }
                    i += 1;
                    let e = exponent(&toks, &mut i, end)?;
                    expo[k - 1] += e;
                }
                _ => {
                    if factors == 0 {
                        return Err(err(pos, "expected a number or a variable"));
                    }
                    break;
                }
            }
            factors += 1;
            if let Some((_, Tok::Star)) = toks.get(i) {
                i += 1;
                if !matches!(toks.get(i), Some((_, Tok::Int(_) | Tok::Var(_)))) {
                    let pos = toks.get(i).map_or(end, |t| t.0);
                    return Err(err(pos, "dangling '*'"));
                }
            }
        }
        if negative {
            coeff = -coeff;
        }
        poly.add_term(Monomial(expo), coeff);
    }
    Ok(poly)
}

fn exponent(toks: &[(usize, Tok)], i: &mut usize, end: usize) -> Result<u32> {
    if let Some((_, Tok::Caret)) = toks.get(*i) {
        *i += 1;
        match toks.get(*i) {
            Some((pos, Tok::Int(v))) => {
                *i += 1;
                u32::try_from(v.clone()).map_err(|_| err(*pos, "exponent too large"))
            }
            Some((pos, _)) => Err(err(*pos, "expected an exponent after '^'")),
            None => Err(err(end, "expected an exponent after '^'")),
        }
    } else {
        Ok(1)
    }
}
