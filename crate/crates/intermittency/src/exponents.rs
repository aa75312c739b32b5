//! Exact rational exponent algebra for the moment bounds.
//!
//! For a Green's function with small-ball indices `(a, b)` and a noise with
//! spatial exponent `lambda` and temporal exponent `gamma` the lower bound
//! reads `exp(c t^{1 + b(1-gamma)/D} p^{1 + b/D})` with `D = b(2a+1) - lambda`,
//! and the upper bound `exp(C t^{1 + (1-gamma)/(hbar+1)} p^{1 + 1/(hbar+1)})`.
//! The two coincide when `hbar = 2a - lambda/b`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"3"`, `"-1/2"`, `"0.75"` or `"1.5e-3"` exactly.
pub fn parse_rational(s: &str) -> Result<Q> {
    let bad = || Error::InvalidParameter(format!("not a rational number: {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}0").parse::<BigInt>().map_err(|_| bad())? / 10;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut v = Q::from_integer(digits);
    if scale >= 0 {
        v *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        v /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -v } else { v })
}

pub fn to_f64(x: &Q) -> f64 {
    let (n, d) = (x.numer(), x.denom());
    // scale down very large numerators and denominators before converting
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = (nb.max(db) - 1000).max(0) as usize;
    let nf: f64 = (n >> shift).to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = (d >> shift).to_string().parse().unwrap_or(f64::NAN);
    nf / df
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// `hbar = 2a - lambda / b`.
pub fn hbar(a: &Q, b: &Q, lambda: &Q) -> Result<Q> {
    if b.is_zero() {
        return Err(Error::ConstraintViolated("b must be positive".into()));
    }
    Ok(qi(2) * a - lambda / b)
}

fn check_lower(a: &Q, b: &Q, lambda: &Q) -> Result<Q> {
    if !(a > &qi(-1)) {
        return Err(Error::ConstraintViolated(format!("a = {} must exceed -1", fmt_q(a))));
    }
    if !b.is_positive() {
        return Err(Error::ConstraintViolated(format!("b = {} must be positive", fmt_q(b))));
    }
    let dd = b * (qi(2) * a + qi(1)) - lambda;
    if !dd.is_positive() {
        return Err(Error::ConstraintViolated(format!(
            "b(2a+1) - lambda = {} must be positive",
            fmt_q(&dd)
        )));
    }
    Ok(dd)
}

/// `(1 + b(1-gamma)/D, 1 + b/D)` with `D = b(2a+1) - lambda`.
pub fn lower_exponents(a: &Q, b: &Q, lambda: &Q, gamma: &Q) -> Result<(Q, Q)> {
    let dd = check_lower(a, b, lambda)?;
    let one = qi(1);
    Ok((&one + b * (&one - gamma) / &dd, &one + b / &dd))
}

/// `(1 + (1-gamma)/(hbar+1), 1 + 1/(hbar+1))`.
pub fn upper_exponents(hbar: &Q, gamma: &Q) -> Result<(Q, Q)> {
    let one = qi(1);
    let h1 = hbar + &one;
    if !h1.is_positive() {
        return Err(Error::ConstraintViolated(format!("hbar = {} must exceed -1", fmt_q(hbar))));
    }
    Ok((&one + (&one - gamma) / &h1, &one + &one / &h1))
}

/// True when the upper exponents at `hbar = 2a - lambda/b` equal the lower ones.
pub fn matching_check(a: &Q, b: &Q, lambda: &Q, gamma: &Q) -> bool {
    let Ok(lower) = lower_exponents(a, b, lambda, gamma) else {
        return false;
    };
    let Ok(h) = hbar(a, b, lambda) else {
        return false;
    };
    match upper_exponents(&h, gamma) {
        Ok(upper) => upper == lower,
        Err(_) => false,
    }
}

/// The four equations of the exponent table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    She,
    AlphaShe,
    Swe,
    Sfd,
}

impl Equation {
    pub const ALL: [Equation; 4] = [Equation::She, Equation::AlphaShe, Equation::Swe, Equation::Sfd];

    pub fn name(&self) -> &'static str {
        match self {
            Equation::She => "SHE",
            Equation::AlphaShe => "alpha-SHE",
            Equation::Swe => "SWE",
            Equation::Sfd => "SFD",
        }
    }

    /// Small-ball indices `(a, b)`.
    pub fn ab(&self, alpha: &Q, beta: &Q) -> (Q, Q) {
        match self {
            Equation::She => (qi(0), qi(2)),
            Equation::AlphaShe => (qi(0), alpha.clone()),
            Equation::Swe => (qi(1), qi(1)),
            Equation::Sfd => (beta - qi(1), alpha / beta),
        }
    }
}

/// Parameters shared by all rows of the table.
#[derive(Debug, Clone)]
pub struct TableParams {
    pub lambda: Q,
    pub hurst: Q,
    pub alpha: Q,
    pub beta: Q,
}

impl TableParams {
    pub fn gamma(&self) -> Q {
        qi(2) - qi(2) * &self.hurst
    }
}

#[derive(Debug, Clone)]
pub struct ExponentRow {
    pub equation: Equation,
    pub a: Q,
    pub b: Q,
    pub hbar: Q,
    pub lambda: Q,
    pub gamma: Q,
    pub hurst: Q,
    pub t_exp_lower: Q,
    pub p_exp_lower: Q,
    pub t_exp_upper: Q,
    pub p_exp_upper: Q,
}

impl ExponentRow {
    pub fn matches(&self) -> bool {
        self.t_exp_lower == self.t_exp_upper && self.p_exp_lower == self.p_exp_upper
    }

    pub fn to_json(&self) -> serde_json::Value {
        let e = |x: &Q| serde_json::json!({"exact": fmt_q(x), "decimal": to_f64(x)});
        serde_json::json!({
            "equation": self.equation.name(),
            "a": e(&self.a),
            "b": e(&self.b),
            "hbar": e(&self.hbar),
            "lambda": e(&self.lambda),
            "gamma": e(&self.gamma),
            "hurst": e(&self.hurst),
            "t_exp_lower": e(&self.t_exp_lower),
            "p_exp_lower": e(&self.p_exp_lower),
            "t_exp_upper": e(&self.t_exp_upper),
            "p_exp_upper": e(&self.p_exp_upper),
            "matches": self.matches(),
        })
    }
}

/// One row of the exponent table, from the general lower and upper formulas.
pub fn table_row(eq: Equation, params: &TableParams) -> Result<ExponentRow> {
    let (a, b) = eq.ab(&params.alpha, &params.beta);
    let gamma = params.gamma();
    if !(gamma.is_positive() && gamma <= qi(1)) {
        return Err(Error::ConstraintViolated(format!(
            "H = {} gives gamma = {} outside (0, 1]",
            fmt_q(&params.hurst),
            fmt_q(&gamma)
        )));
    }
    let h = hbar(&a, &b, &params.lambda)?;
    let (tl, pl) = lower_exponents(&a, &b, &params.lambda, &gamma)?;
    let (tu, pu) = upper_exponents(&h, &gamma)?;
    Ok(ExponentRow {
        equation: eq,
        a,
        b,
        hbar: h,
        lambda: params.lambda.clone(),
        gamma,
        hurst: params.hurst.clone(),
        t_exp_lower: tl,
        p_exp_lower: pl,
        t_exp_upper: tu,
        p_exp_upper: pu,
    })
}

pub fn table(params: &TableParams) -> Result<Vec<ExponentRow>> {
    Equation::ALL.iter().map(|&e| table_row(e, params)).collect()
}

/// The closed forms of the table written in terms of `gamma` ("moment" column).
pub fn moment_column(eq: Equation, p: &TableParams) -> (Q, Q) {
    let (l, g, al, be) = (&p.lambda, &p.gamma(), &p.alpha, &p.beta);
    let one = qi(1);
    match eq {
        Equation::She => (
            &one + qi(2) * (&one - g) / (qi(2) - l),
            (qi(4) - l) / (qi(2) - l),
        ),
        Equation::AlphaShe => (
            &one + al * (&one - g) / (al - l),
            (qi(2) * al - l) / (al - l),
        ),
        Equation::Swe => (&one + (&one - g) / (qi(3) - l), (qi(4) - l) / (qi(3) - l)),
        Equation::Sfd => {
            let den = qi(2) * al * be - al - be * l;
            (&one + al * (&one - g) / &den, be * (qi(2) * al - l) / &den)
        }
    }
}

/// The closed forms of the table written in terms of `H` with `gamma = 2 - 2H`.
pub fn hurst_column(eq: Equation, p: &TableParams) -> (Q, Q) {
    let (l, h, al, be) = (&p.lambda, &p.hurst, &p.alpha, &p.beta);
    match eq {
        Equation::She => ((qi(4) * h - l) / (qi(2) - l), (qi(4) - l) / (qi(2) - l)),
        Equation::AlphaShe => (
            (qi(2) * h * al - l) / (al - l),
            (qi(2) * al - l) / (al - l),
        ),
        Equation::Swe => (
            (qi(2) * h + qi(2) - l) / (qi(3) - l),
            (qi(4) - l) / (qi(3) - l),
        ),
        Equation::Sfd => {
            let den = qi(2) * al * be - al - be * l;
            (
                (al * (qi(2) * be + qi(2) * h - qi(2)) - be * l) / &den,
                be * (qi(2) * al - l) / &den,
            )
        }
    }
}

/// Closed-form `hbar` of each row.
pub fn hbar_column(eq: Equation, p: &TableParams) -> Q {
    let (l, al, be) = (&p.lambda, &p.alpha, &p.beta);
    match eq {
        Equation::She => -l / qi(2),
        Equation::AlphaShe => -l / al,
        Equation::Swe => qi(2) - l,
        Equation::Sfd => qi(2) * (be - qi(1)) - l * be / al,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse() {
        assert_eq!(parse_rational("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_rational("0.75").unwrap(), q(3, 4));
        assert_eq!(parse_rational("-1.5e-3").unwrap(), q(-3, 2000));
        assert_eq!(parse_rational("3").unwrap(), qi(3));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn classical_white_heat() {
        let (t, p) = lower_exponents(&qi(0), &qi(2), &qi(0), &qi(1)).unwrap();
        assert_eq!((t, p), (qi(1), qi(2)));
    }

    #[test]
    fn upper_examples() {
        assert_eq!(upper_exponents(&q(-1, 2), &qi(1)).unwrap(), (qi(1), qi(3)));
        assert_eq!(upper_exponents(&qi(0), &qi(0)).unwrap(), (qi(2), qi(2)));
        assert!(upper_exponents(&qi(-1), &qi(0)).is_err());
    }

    #[test]
    fn perturbed_hbar_does_not_match() {
        let (a, b, l, g) = (qi(1), qi(1), q(1, 2), q(1, 2));
        let h = hbar(&a, &b, &l).unwrap() + q(1, 10);
        assert_ne!(upper_exponents(&h, &g).unwrap(), lower_exponents(&a, &b, &l, &g).unwrap());
        assert!(matching_check(&a, &b, &l, &g));
    }

    #[test]
    fn to_f64_roundtrip() {
        assert_eq!(to_f64(&q(3, 4)), 0.75);
        assert!((to_f64(&q(-2, 3)) + 2.0 / 3.0).abs() < 1e-16);
    }
}
